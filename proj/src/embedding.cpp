#include "devseq/embedding.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "devseq/rng.hpp"

namespace devseq {

EmbeddingTable::EmbeddingTable(int dim, OovPolicy policy, std::uint64_t seed,
                               bool trainable)
    : dim_(dim), policy_(policy), seed_(seed), trainable_(trainable) {
  if (dim <= 0) throw std::runtime_error("embedding dimension must be positive");
}

EmbeddingTable::EmbeddingTable(const EmbeddingTable& other)
    : dim_(other.dim_),
      policy_(other.policy_),
      seed_(other.seed_),
      trainable_(other.trainable_),
      duplicates_(other.duplicates_),
      vectors_(other.vectors_) {
  std::lock_guard<std::mutex> lock(other.oov_mutex_);
  oov_cache_ = other.oov_cache_;
}

EmbeddingTable::EmbeddingTable(EmbeddingTable&& other) noexcept
    : dim_(other.dim_),
      policy_(other.policy_),
      seed_(other.seed_),
      trainable_(other.trainable_),
      duplicates_(other.duplicates_),
      vectors_(std::move(other.vectors_)),
      oov_cache_(std::move(other.oov_cache_)) {}

EmbeddingTable& EmbeddingTable::operator=(EmbeddingTable other) {
  dim_ = other.dim_;
  policy_ = other.policy_;
  seed_ = other.seed_;
  trainable_ = other.trainable_;
  duplicates_ = other.duplicates_;
  vectors_ = std::move(other.vectors_);
  oov_cache_ = std::move(other.oov_cache_);
  return *this;
}

void EmbeddingTable::insert(const std::string& word, std::vector<double> vec) {
  if (static_cast<int>(vec.size()) != dim_) {
    throw std::runtime_error("vector for '" + word + "' has length " +
                             std::to_string(vec.size()) + ", expected " +
                             std::to_string(dim_));
  }
  auto [it, inserted] = vectors_.try_emplace(word, std::move(vec));
  (void)it;
  if (!inserted) ++duplicates_;
}

std::vector<double> EmbeddingTable::lookup(const std::string& word) const {
  auto it = vectors_.find(word);
  if (it != vectors_.end()) return it->second;
  if (policy_ == OovPolicy::Zero) {
    return std::vector<double>(static_cast<std::size_t>(dim_), 0.0);
  }
  std::lock_guard<std::mutex> lock(oov_mutex_);
  auto cached = oov_cache_.find(word);
  if (cached != oov_cache_.end()) return cached->second;
  RngStream rng(mix_seed(seed_, fnv1a64(word)));
  std::vector<double> vec(static_cast<std::size_t>(dim_));
  for (double& x : vec) x = rng.uniform(kOovRandomLow, kOovRandomHigh);
  oov_cache_.emplace(word, vec);
  return vec;
}

std::vector<std::string> EmbeddingTable::sorted_words() const {
  std::vector<std::string> words;
  words.reserve(vectors_.size());
  for (const auto& [w, v] : vectors_) words.push_back(w);
  std::sort(words.begin(), words.end());
  return words;
}

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  return end == begin + s.size() && !s.empty();
}

bool parse_header(const std::string& line, long& count, long& dim) {
  std::istringstream in(line);
  std::string a, b, extra;
  if (!(in >> a >> b) || (in >> extra)) return false;
  char* end = nullptr;
  count = std::strtol(a.c_str(), &end, 10);
  if (*end != '\0') return false;
  dim = std::strtol(b.c_str(), &end, 10);
  return *end == '\0' && count >= 0 && dim > 0;
}

}  // namespace

EmbeddingTable load_embeddings(std::istream& in, int expected_dim,
                               OovPolicy policy, std::uint64_t seed,
                               bool trainable) {
  std::string line;
  std::size_t line_no = 0;
  int dim = expected_dim > 0 ? expected_dim : 0;
  EmbeddingTable* table = nullptr;
  // Deferred construction: the dimension may come from the header line.
  std::optional<EmbeddingTable> storage;

  auto ensure_table = [&](int d) {
    if (!storage) {
      storage.emplace(d, policy, seed, trainable);
      table = &*storage;
    }
  };

  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first_content_line) {
      first_content_line = false;
      long count = 0;
      long hdim = 0;
      if (parse_header(line, count, hdim)) {
        if (dim > 0 && hdim != dim) {
          throw std::runtime_error("header dimension " + std::to_string(hdim) +
                                   " conflicts with expected " + std::to_string(dim));
        }
        dim = static_cast<int>(hdim);
        continue;
      }
    }
    std::istringstream fields(line);
    std::string word;
    fields >> word;
    std::vector<double> vec;
    std::string tok;
    while (fields >> tok) {
      double v = 0;
      if (!parse_double(tok, v)) {
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": unparseable value '" + tok + "'");
      }
      vec.push_back(v);
    }
    if (word.empty() || vec.empty()) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": malformed vector line");
    }
    if (dim == 0) dim = static_cast<int>(vec.size());
    if (static_cast<int>(vec.size()) != dim) {
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected " +
                               std::to_string(dim) + " components, got " +
                               std::to_string(vec.size()));
    }
    ensure_table(dim);
    table->insert(word, std::move(vec));
  }
  if (!storage || storage->size() == 0) {
    throw std::runtime_error("embedding stream contains no data lines");
  }
  return std::move(*storage);
}

EmbeddingTable load_embeddings_file(const std::string& path, int expected_dim,
                                    OovPolicy policy, std::uint64_t seed,
                                    bool trainable) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  try {
    return load_embeddings(in, expected_dim, policy, seed, trainable);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

EmbeddingTable random_table(const std::vector<std::string>& vocab, int dim,
                            double low, double high, std::uint64_t seed) {
  if (vocab.empty()) throw std::runtime_error("random_table: empty vocabulary");
  if (!(low < high)) throw std::runtime_error("random_table: require low < high");
  EmbeddingTable table(dim, OovPolicy::RandomPerWord, seed, true);
  RngStream rng(seed);
  for (const auto& word : vocab) {
    std::vector<double> vec(static_cast<std::size_t>(dim));
    for (double& x : vec) x = rng.uniform(low, high);
    table.insert(word, std::move(vec));
  }
  return table;
}

}  // namespace devseq
