#pragma once

#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace devseq {

enum class OovPolicy { RandomPerWord, Zero };

// Word -> dense vector map loaded from the common text interchange format.
// OOV lookups under RandomPerWord are seeded by (table seed, word) and
// memoized, so the vector a word gets does not depend on query order.
class EmbeddingTable {
 public:
  EmbeddingTable(int dim, OovPolicy policy, std::uint64_t seed, bool trainable);

  // The mutex only guards the OOV cache; copies and moves start with a
  // fresh one.
  EmbeddingTable(const EmbeddingTable& other);
  EmbeddingTable(EmbeddingTable&& other) noexcept;
  EmbeddingTable& operator=(EmbeddingTable other);

  int dim() const { return dim_; }
  bool trainable() const { return trainable_; }
  void set_trainable(bool v) { trainable_ = v; }
  OovPolicy oov_policy() const { return policy_; }
  std::size_t size() const { return vectors_.size(); }
  std::size_t duplicate_count() const { return duplicates_; }

  bool contains(const std::string& word) const { return vectors_.count(word) != 0; }

  // Stored vector, or the policy's OOV vector. Always length dim().
  std::vector<double> lookup(const std::string& word) const;

  // First occurrence wins; later duplicates are counted, not stored.
  void insert(const std::string& word, std::vector<double> vec);

  // Stored words in lexicographic order (deterministic iteration).
  std::vector<std::string> sorted_words() const;

 private:
  int dim_;
  OovPolicy policy_;
  std::uint64_t seed_;
  bool trainable_;
  std::size_t duplicates_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
  mutable std::mutex oov_mutex_;  // serializes first-insert of memoized OOV rows
  mutable std::unordered_map<std::string, std::vector<double>> oov_cache_;
};

inline constexpr double kOovRandomLow = -0.25;
inline constexpr double kOovRandomHigh = 0.25;

// Text format: optional "count dim" header line, then "word v1 ... vd" lines.
// expected_dim <= 0 means infer from the header or first data line.
EmbeddingTable load_embeddings(std::istream& in, int expected_dim = 0,
                               OovPolicy policy = OovPolicy::RandomPerWord,
                               std::uint64_t seed = 0, bool trainable = true);
EmbeddingTable load_embeddings_file(const std::string& path, int expected_dim = 0,
                                    OovPolicy policy = OovPolicy::RandomPerWord,
                                    std::uint64_t seed = 0, bool trainable = true);

// Fresh table with every component i.i.d. uniform [low, high).
EmbeddingTable random_table(const std::vector<std::string>& vocab, int dim,
                            double low, double high, std::uint64_t seed);

}  // namespace devseq
