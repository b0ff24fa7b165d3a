#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "devseq/embedding.hpp"

namespace devseq {

struct Projection2D {
  std::array<std::vector<double>, 2> components;  // orthonormal, sign-canonical
  std::vector<double> mean;
  std::vector<std::pair<double, double>> coords;  // per input vector
  std::array<double, 2> variances{};              // along components, descending
  std::array<double, 2> explained_variance{};     // fractions of total variance
};

// Exact top-2 principal components of the sample covariance, computed by
// deterministic power iteration with deflation. Component signs are
// canonicalized (first entry of magnitude > 1e-12 is positive). Throws when
// the data has no variance.
Projection2D pca_project(const std::vector<std::vector<double>>& vectors);

std::string projection_csv(const Projection2D& proj,
                           const std::vector<std::string>& words);

struct Neighbor {
  std::string word;
  double similarity;
};

struct NeighborResult {
  std::vector<Neighbor> neighbors;
  bool truncated = false;  // fewer than k candidates were available
};

// Top-k stored words by cosine similarity to the query word's vector,
// excluding the query word itself; ties break lexicographically.
NeighborResult nearest_neighbors(const EmbeddingTable& table,
                                 const std::string& word, int k);

}  // namespace devseq
