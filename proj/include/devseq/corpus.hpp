#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace devseq {

// IO admits {O, I-T}; IOB additionally admits B-T.
enum class TagScheme { IO, IOB };

std::string to_string(TagScheme scheme);
TagScheme tag_scheme_from_string(const std::string& name);

struct Token {
  std::string surface;
  std::string pos;
  std::string entity;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::vector<Token> tokens;

  bool operator==(const Sentence&) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  TagScheme scheme = TagScheme::IO;
  std::vector<std::string> entity_types;  // sorted, without "O"
  std::vector<std::string> pos_vocab;     // first-occurrence order

  bool operator==(const Corpus&) const = default;

  std::size_t total_tokens() const;
};

// Splits an entity tag into (prefix, type); "O" has empty type. Throws on a
// tag the scheme does not admit.
struct TagParts {
  char prefix;  // 'O', 'I' or 'B'
  std::string type;
};
TagParts parse_entity_tag(const std::string& tag, TagScheme scheme);

// Optional column remap for files whose layout differs from SURFACE POS ENTITY.
struct ColumnMap {
  int count = 3;
  int surface = 0;
  int pos = 1;
  int entity = 2;
};

// Canonical corpus construction: derives entity_types (sorted) and pos_vocab
// (first occurrence) from the sentences, validating tags under the scheme.
Corpus make_corpus(std::vector<Sentence> sentences, TagScheme scheme);

// Each non-blank line is SURFACE POS ENTITY separated by runs of spaces/tabs;
// a blank line ends a sentence. Reports line numbers on malformed input.
Corpus parse_conll(std::istream& in, TagScheme scheme,
                   const std::optional<ColumnMap>& columns = std::nullopt);
Corpus parse_conll(const std::string& text, TagScheme scheme,
                   const std::optional<ColumnMap>& columns = std::nullopt);
Corpus load_conll_file(const std::string& path, TagScheme scheme,
                       const std::optional<ColumnMap>& columns = std::nullopt);

// Inverse of parse_conll: single spaces, one blank line after each sentence.
std::string write_conll(const Corpus& corpus);
void save_conll_file(const Corpus& corpus, const std::string& path);

// Sentence-level split. Dev/test sizes are floor(ratio * n); the remainder
// goes to train. Parts keep the parent's scheme, entity_types and pos_vocab,
// and preserve original sentence order within each part.
struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};
CorpusSplit split_corpus(const Corpus& corpus, double train_ratio,
                         double dev_ratio, double test_ratio,
                         std::uint64_t seed);

// Word vocabulary with UNK and PAD pinned at indices 0 and 1. Words are
// ordered by (frequency desc, first occurrence asc). The reserved surface
// forms are assumed absent from real corpora; a corpus token spelled exactly
// "<unk>" or "<pad>" resolves to the reserved index.
class Vocabulary {
 public:
  static constexpr int kUnkIndex = 0;
  static constexpr int kPadIndex = 1;
  static constexpr const char* kUnkSymbol = "<unk>";
  static constexpr const char* kPadSymbol = "<pad>";

  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words_in_order);

  int lookup(const std::string& word) const;  // kUnkIndex when absent
  const std::string& word(int index) const;
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

  void add(const std::string& word);  // appends if absent

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

Vocabulary build_vocab(const Corpus& corpus, std::size_t min_count = 1);

// One-hot over a closed POS vocabulary; unknown symbols are an error.
std::vector<double> pos_one_hot(const std::string& pos,
                                const std::vector<std::string>& pos_vocab);

struct CorpusStats {
  std::size_t total_sentences = 0;
  std::size_t total_tokens = 0;
  std::size_t outside_tokens = 0;
  std::map<std::string, std::size_t> tokens_per_type;
  std::map<std::string, std::size_t> spans_per_type;
};
CorpusStats corpus_stats(const Corpus& corpus);
std::string format_stats(const CorpusStats& stats);

}  // namespace devseq
