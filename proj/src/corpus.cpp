#include "devseq/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "devseq/eval.hpp"
#include "devseq/rng.hpp"

namespace devseq {

std::string to_string(TagScheme scheme) {
  return scheme == TagScheme::IO ? "io" : "iob";
}

TagScheme tag_scheme_from_string(const std::string& name) {
  if (name == "io" || name == "IO") return TagScheme::IO;
  if (name == "iob" || name == "IOB") return TagScheme::IOB;
  throw std::runtime_error("unknown tag scheme '" + name + "' (expected io or iob)");
}

std::size_t Corpus::total_tokens() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.tokens.size();
  return n;
}

TagParts parse_entity_tag(const std::string& tag, TagScheme scheme) {
  if (tag == "O") return {'O', ""};
  if (tag.size() >= 3 && tag[1] == '-' && (tag[0] == 'I' || tag[0] == 'B')) {
    if (tag[0] == 'B' && scheme == TagScheme::IO) {
      throw std::runtime_error("tag '" + tag + "' not admitted by IO scheme");
    }
    return {tag[0], tag.substr(2)};
  }
  throw std::runtime_error("invalid entity tag '" + tag + "' under " +
                           to_string(scheme) + " scheme");
}

Corpus make_corpus(std::vector<Sentence> sentences, TagScheme scheme) {
  Corpus corpus;
  corpus.scheme = scheme;
  std::set<std::string> types;
  std::set<std::string> pos_seen;
  for (const auto& sent : sentences) {
    if (sent.tokens.empty()) {
      throw std::runtime_error("corpus contains an empty sentence");
    }
    for (const auto& tok : sent.tokens) {
      if (tok.surface.empty()) {
        throw std::runtime_error("corpus contains an empty token surface");
      }
      TagParts parts = parse_entity_tag(tok.entity, scheme);
      if (parts.prefix != 'O') types.insert(parts.type);
      if (pos_seen.insert(tok.pos).second) corpus.pos_vocab.push_back(tok.pos);
    }
  }
  corpus.entity_types.assign(types.begin(), types.end());
  corpus.sentences = std::move(sentences);
  return corpus;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Corpus parse_conll(std::istream& in, TagScheme scheme,
                   const std::optional<ColumnMap>& columns) {
  const ColumnMap cm = columns.value_or(ColumnMap{});
  std::vector<Sentence> sentences;
  Sentence current;
  std::string line;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (!current.tokens.empty()) {
      sentences.push_back(std::move(current));
      current = Sentence{};
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) {
      flush();
      continue;
    }
    std::vector<std::string> fields = split_fields(line);
    if (static_cast<int>(fields.size()) != cm.count) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(cm.count) + " columns, got " +
                               std::to_string(fields.size()));
    }
    Token tok{fields[cm.surface], fields[cm.pos], fields[cm.entity]};
    try {
      parse_entity_tag(tok.entity, scheme);
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": " + e.what());
    }
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return make_corpus(std::move(sentences), scheme);
}

Corpus parse_conll(const std::string& text, TagScheme scheme,
                   const std::optional<ColumnMap>& columns) {
  std::istringstream in(text);
  return parse_conll(in, scheme, columns);
}

Corpus load_conll_file(const std::string& path, TagScheme scheme,
                       const std::optional<ColumnMap>& columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  try {
    return parse_conll(in, scheme, columns);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string write_conll(const Corpus& corpus) {
  std::string out;
  for (const auto& sent : corpus.sentences) {
    for (const auto& tok : sent.tokens) {
      out += tok.surface;
      out += ' ';
      out += tok.pos;
      out += ' ';
      out += tok.entity;
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

void save_conll_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  out << write_conll(corpus);
}

CorpusSplit split_corpus(const Corpus& corpus, double train_ratio,
                         double dev_ratio, double test_ratio,
                         std::uint64_t seed) {
  if (train_ratio <= 0 || dev_ratio <= 0 || test_ratio <= 0) {
    throw std::runtime_error("split ratios must be positive");
  }
  if (std::abs(train_ratio + dev_ratio + test_ratio - 1.0) > 1e-9) {
    throw std::runtime_error("split ratios must sum to 1");
  }
  const std::size_t n = corpus.sentences.size();
  if (n < 3) {
    throw std::runtime_error("corpus has fewer than 3 sentences; cannot split");
  }
  const auto n_dev = static_cast<std::size_t>(std::floor(dev_ratio * static_cast<double>(n) + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(test_ratio * static_cast<double>(n) + 1e-9));
  const std::size_t n_train = n - n_dev - n_test;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RngStream rng(seed);
  rng.shuffle(order);

  auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                 order.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(idx.begin(), idx.end());
    Corpus part;
    part.scheme = corpus.scheme;
    part.entity_types = corpus.entity_types;
    part.pos_vocab = corpus.pos_vocab;
    part.sentences.reserve(count);
    for (std::size_t i : idx) part.sentences.push_back(corpus.sentences[i]);
    return part;
  };

  CorpusSplit split;
  split.train = take(0, n_train);
  split.dev = take(n_train, n_dev);
  split.test = take(n_train + n_dev, n_test);
  return split;
}

Vocabulary::Vocabulary() {
  words_ = {kUnkSymbol, kPadSymbol};
  index_[kUnkSymbol] = kUnkIndex;
  index_[kPadSymbol] = kPadIndex;
}

Vocabulary::Vocabulary(const std::vector<std::string>& words_in_order) : Vocabulary() {
  for (const auto& w : words_in_order) add(w);
}

int Vocabulary::lookup(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnkIndex : it->second;
}

const std::string& Vocabulary::word(int index) const {
  return words_.at(static_cast<std::size_t>(index));
}

void Vocabulary::add(const std::string& word) {
  if (index_.count(word)) return;
  index_[word] = static_cast<int>(words_.size());
  words_.push_back(word);
}

Vocabulary build_vocab(const Corpus& corpus, std::size_t min_count) {
  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> freq;
  std::vector<const std::string*> order;
  std::size_t pos = 0;
  for (const auto& sent : corpus.sentences) {
    for (const auto& tok : sent.tokens) {
      auto [it, inserted] = freq.try_emplace(tok.surface);
      if (inserted) {
        it->second.first_seen = pos;
        order.push_back(&it->first);
      }
      ++it->second.count;
      ++pos;
    }
  }
  std::sort(order.begin(), order.end(), [&](const std::string* a, const std::string* b) {
    const Entry& ea = freq.at(*a);
    const Entry& eb = freq.at(*b);
    if (ea.count != eb.count) return ea.count > eb.count;
    return ea.first_seen < eb.first_seen;
  });
  Vocabulary vocab;
  for (const std::string* w : order) {
    if (freq.at(*w).count >= min_count) vocab.add(*w);
  }
  return vocab;
}

std::vector<double> pos_one_hot(const std::string& pos,
                                const std::vector<std::string>& pos_vocab) {
  auto it = std::find(pos_vocab.begin(), pos_vocab.end(), pos);
  if (it == pos_vocab.end()) {
    throw std::runtime_error("POS symbol '" + pos + "' not in closed POS vocabulary");
  }
  std::vector<double> v(pos_vocab.size(), 0.0);
  v[static_cast<std::size_t>(it - pos_vocab.begin())] = 1.0;
  return v;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.total_sentences = corpus.sentences.size();
  for (const auto& sent : corpus.sentences) {
    stats.total_tokens += sent.tokens.size();
    std::vector<std::string> tags;
    tags.reserve(sent.tokens.size());
    for (const auto& tok : sent.tokens) {
      tags.push_back(tok.entity);
      TagParts parts = parse_entity_tag(tok.entity, corpus.scheme);
      if (parts.prefix == 'O') {
        ++stats.outside_tokens;
      } else {
        ++stats.tokens_per_type[parts.type];
      }
    }
    for (const auto& span : extract_entities(tags, corpus.scheme)) {
      ++stats.spans_per_type[span.type];
    }
  }
  return stats;
}

std::string format_stats(const CorpusStats& stats) {
  std::ostringstream out;
  out << "sentences      " << stats.total_sentences << "\n";
  out << "tokens         " << stats.total_tokens << "\n";
  out << "outside (O)    " << stats.outside_tokens << "\n";
  out << "type           tokens  spans\n";
  for (const auto& [type, count] : stats.tokens_per_type) {
    auto it = stats.spans_per_type.find(type);
    const std::size_t spans = it == stats.spans_per_type.end() ? 0 : it->second;
    out << type;
    for (std::size_t i = type.size(); i < 15; ++i) out << ' ';
    out << count << "  " << spans << "\n";
  }
  return out.str();
}

}  // namespace devseq
