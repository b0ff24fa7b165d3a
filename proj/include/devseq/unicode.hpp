#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace devseq {

namespace uni {

// Segmentation follows the Unicode extended grapheme cluster rules
// (UAX #29, GB1-GB999) including the GB9c Indic conjunct rule, so a
// consonant + virama + consonant sequence forms a single cluster.
// The property snapshot below is what the conformance tests pin.
inline constexpr const char* kRuleSet = "UAX#29 extended grapheme clusters (incl. GB9c)";
inline constexpr const char* kPropertySource = "python-regex 2026.7.10";

// Grapheme_Cluster_Break classes, packed into the low nibble of a table value.
enum class Gcb : std::uint8_t {
  Other = 0,
  CR = 1,
  LF = 2,
  Control = 3,
  Extend = 4,
  Zwj = 5,
  RegionalIndicator = 6,
  Prepend = 7,
  SpacingMark = 8,
  HangulL = 9,
  HangulV = 10,
  HangulT = 11,
  HangulLV = 12,
  HangulLVT = 13,
};

inline constexpr std::uint8_t kGcbMask = 0x0F;
inline constexpr std::uint8_t kIncbExtendFlag = 0x10;
inline constexpr std::uint8_t kExtPictFlag = 0x20;
inline constexpr std::uint8_t kIncbLinkerFlag = 0x40;
inline constexpr std::uint8_t kIncbConsonantFlag = 0x80;

struct GbRange {
  char32_t lo;
  char32_t hi;
  std::uint8_t value;
};

extern const GbRange kGbRanges[];
extern const std::size_t kGbRangeCount;

// Packed Gcb class + flags for a scalar value; 0 (= Other, no flags) when unlisted.
std::uint8_t gb_value(char32_t cp);

inline Gcb gcb_class(std::uint8_t v) { return static_cast<Gcb>(v & kGcbMask); }

// One decoded scalar value plus the byte range it came from. Invalid bytes
// decode as U+FFFD one byte at a time; offset/length always slice the original
// string, so reassembling the slices reproduces the input exactly.
struct DecodedChar {
  char32_t cp;
  std::size_t offset;
  std::size_t length;
};

std::vector<DecodedChar> decode_utf8(std::string_view text);
void append_utf8(std::string& out, char32_t cp);

}  // namespace uni

struct GraphemeCluster {
  std::vector<char32_t> codepoints;
  std::string text;
};

enum class SegmentationMode { Character, Grapheme };

// One string per Unicode scalar value (invalid bytes pass through one byte at
// a time). Concatenating the result reproduces the input.
std::vector<std::string> segment_characters(std::string_view text);

// Extended grapheme cluster segmentation. Concatenating the cluster texts
// reproduces the input; every cluster is non-empty.
std::vector<GraphemeCluster> segment_graphemes(std::string_view text);

// Cluster texts only, in either mode.
std::vector<std::string> segment(std::string_view text, SegmentationMode mode);

}  // namespace devseq
