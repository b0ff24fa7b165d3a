#include "devseq/unicode.hpp"

#include <algorithm>

namespace devseq {
namespace uni {

std::uint8_t gb_value(char32_t cp) {
  std::size_t lo = 0;
  std::size_t hi = kGbRangeCount;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    const GbRange& r = kGbRanges[mid];
    if (cp < r.lo) {
      hi = mid;
    } else if (cp > r.hi) {
      lo = mid + 1;
    } else {
      return r.value;
    }
  }
  return 0;
}

std::vector<DecodedChar> decode_utf8(std::string_view text) {
  std::vector<DecodedChar> out;
  out.reserve(text.size());
  std::size_t i = 0;
  const auto* bytes = reinterpret_cast<const unsigned char*>(text.data());
  while (i < text.size()) {
    unsigned char b0 = bytes[i];
    char32_t cp = 0;
    std::size_t len = 0;
    char32_t min_cp = 0;
    if (b0 < 0x80) {
      out.push_back({b0, i, 1});
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
      min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
      min_cp = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
      min_cp = 0x10000;
    } else {
      out.push_back({0xFFFD, i, 1});
      ++i;
      continue;
    }
    bool ok = i + len <= text.size();
    if (ok) {
      for (std::size_t k = 1; k < len; ++k) {
        unsigned char bk = bytes[i + k];
        if ((bk & 0xC0) != 0x80) {
          ok = false;
          break;
        }
        cp = (cp << 6) | (bk & 0x3F);
      }
    }
    if (ok && (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))) {
      ok = false;  // overlong, out of range, or surrogate
    }
    if (!ok) {
      out.push_back({0xFFFD, i, 1});
      ++i;
      continue;
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

namespace {

// Running left-context state; enough to decide GB9c, GB11 and GB12/13
// without re-scanning.
struct BreakState {
  int ri_run = 0;               // consecutive Regional_Indicator ending at prev
  bool pict_extend = false;     // left context matches \p{ExtPict} Extend*
  bool pict_zwj = false;        // left context matches \p{ExtPict} Extend* ZWJ
  bool incb_open = false;       // an InCB consonant's mark sequence is still open
  bool incb_linker = false;     // that sequence contains a linker

  void consume(std::uint8_t v) {
    const Gcb g = gcb_class(v);

    ri_run = (g == Gcb::RegionalIndicator) ? ri_run + 1 : 0;

    if (v & kExtPictFlag) {
      pict_extend = true;
      pict_zwj = false;
    } else if (pict_extend && g == Gcb::Extend) {
      pict_zwj = false;
    } else if (pict_extend && g == Gcb::Zwj) {
      pict_extend = false;
      pict_zwj = true;
    } else {
      pict_extend = false;
      pict_zwj = false;
    }

    if (v & kIncbConsonantFlag) {
      incb_open = true;
      incb_linker = false;
    } else if (incb_open && (v & kIncbLinkerFlag)) {
      incb_linker = true;
    } else if (incb_open && (v & kIncbExtendFlag)) {
      // consonant sequence stays open
    } else {
      incb_open = false;
      incb_linker = false;
    }
  }
};

bool is_break(std::uint8_t prev, std::uint8_t cur, const BreakState& st) {
  const Gcb p = gcb_class(prev);
  const Gcb c = gcb_class(cur);

  if (p == Gcb::CR && c == Gcb::LF) return false;                      // GB3
  if (p == Gcb::Control || p == Gcb::CR || p == Gcb::LF) return true;  // GB4
  if (c == Gcb::Control || c == Gcb::CR || c == Gcb::LF) return true;  // GB5

  if (p == Gcb::HangulL && (c == Gcb::HangulL || c == Gcb::HangulV ||
                            c == Gcb::HangulLV || c == Gcb::HangulLVT)) {
    return false;  // GB6
  }
  if ((p == Gcb::HangulLV || p == Gcb::HangulV) &&
      (c == Gcb::HangulV || c == Gcb::HangulT)) {
    return false;  // GB7
  }
  if ((p == Gcb::HangulLVT || p == Gcb::HangulT) && c == Gcb::HangulT) {
    return false;  // GB8
  }

  if (c == Gcb::Extend || c == Gcb::Zwj) return false;  // GB9
  if (c == Gcb::SpacingMark) return false;              // GB9a
  if (p == Gcb::Prepend) return false;                  // GB9b

  if ((cur & kIncbConsonantFlag) && st.incb_open && st.incb_linker) {
    return false;  // GB9c
  }

  if (p == Gcb::Zwj && (cur & kExtPictFlag) && st.pict_zwj) {
    return false;  // GB11
  }

  if (p == Gcb::RegionalIndicator && c == Gcb::RegionalIndicator &&
      st.ri_run % 2 == 1) {
    return false;  // GB12/GB13
  }

  return true;  // GB999
}

}  // namespace
}  // namespace uni

std::vector<std::string> segment_characters(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& dc : uni::decode_utf8(text)) {
    out.emplace_back(text.substr(dc.offset, dc.length));
  }
  return out;
}

std::vector<GraphemeCluster> segment_graphemes(std::string_view text) {
  std::vector<GraphemeCluster> out;
  const auto chars = uni::decode_utf8(text);
  if (chars.empty()) return out;

  uni::BreakState st;
  std::uint8_t prev_v = uni::gb_value(chars[0].cp);
  st.consume(prev_v);

  GraphemeCluster cluster;
  cluster.codepoints.push_back(chars[0].cp);
  std::size_t cluster_start = chars[0].offset;
  std::size_t cluster_end = chars[0].offset + chars[0].length;

  for (std::size_t i = 1; i < chars.size(); ++i) {
    const std::uint8_t v = uni::gb_value(chars[i].cp);
    if (uni::is_break(prev_v, v, st)) {
      cluster.text = std::string(text.substr(cluster_start, cluster_end - cluster_start));
      out.push_back(std::move(cluster));
      cluster = GraphemeCluster{};
      cluster_start = chars[i].offset;
    }
    cluster.codepoints.push_back(chars[i].cp);
    cluster_end = chars[i].offset + chars[i].length;
    st.consume(v);
    prev_v = v;
  }
  cluster.text = std::string(text.substr(cluster_start, cluster_end - cluster_start));
  out.push_back(std::move(cluster));
  return out;
}

std::vector<std::string> segment(std::string_view text, SegmentationMode mode) {
  if (mode == SegmentationMode::Character) return segment_characters(text);
  std::vector<std::string> out;
  for (auto& g : segment_graphemes(text)) out.push_back(std::move(g.text));
  return out;
}

}  // namespace devseq
