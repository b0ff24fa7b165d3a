#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <sstream>

#include "devseq/analysis.hpp"
#include "devseq/rng.hpp"
#include "oracles.hpp"

using namespace devseq;
using devseq::testing::jacobi_eigen;

namespace {

std::vector<std::vector<double>> random_matrix(std::size_t n, std::size_t d,
                                             std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<std::vector<double>> data(n, std::vector<double>(d));
  for (auto& row : data) {
    for (auto& x : row) x = rng.uniform(-2.0, 2.0);
  }
  return data;
}

std::vector<double> sample_covariance(const std::vector<std::vector<double>>& data) {
  const std::size_t n = data.size();
  const std::size_t d = data[0].size();
  std::vector<double> mean(d, 0.0);
  for (const auto& row : data) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += row[i];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  std::vector<double> cov(d * d, 0.0);
  for (const auto& row : data) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        cov[i * d + j] += (row[i] - mean[i]) * (row[j] - mean[j]);
      }
    }
  }
  for (auto& c : cov) c /= static_cast<double>(n - 1);
  return cov;
}

}  // namespace

TEST_CASE("collinear data projects onto a line") {
  const std::vector<std::vector<double>> data{{1, 1}, {2, 2}, {3, 3}};
  Projection2D p = pca_project(data);
  for (const auto& [x, y] : p.coords) {
    (void)x;
    CHECK(std::abs(y) < 1e-8);
  }
  CHECK(p.variances[1] == doctest::Approx(0.0).epsilon(1e-12));
  // Component 1 is the diagonal direction, sign-canonicalized.
  CHECK(p.components[0][0] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(p.components[0][1] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(p.explained_variance[0] == doctest::Approx(1.0));
}

TEST_CASE("axis-aligned data recovers the axes") {
  // var_x > var_y, no covariance.
  const std::vector<std::vector<double>> data{{-3, 1}, {3, -1}, {-3, -1}, {3, 1}};
  Projection2D p = pca_project(data);
  CHECK(std::abs(p.components[0][0]) == doctest::Approx(1.0));
  CHECK(std::abs(p.components[0][1]) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::abs(p.components[1][1]) == doctest::Approx(1.0));
  CHECK(p.variances[0] > p.variances[1]);
}

TEST_CASE("projection matches the Jacobi oracle on random data") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const auto data = random_matrix(10, 5, seed);
    Projection2D p = pca_project(data);
    const auto eig = jacobi_eigen(sample_covariance(data), 5);
    CHECK(p.variances[0] == doctest::Approx(eig.values[0]).epsilon(1e-6));
    CHECK(p.variances[1] == doctest::Approx(eig.values[1]).epsilon(1e-6));
    // Components agree with the oracle's eigenvectors up to sign.
    for (int comp = 0; comp < 2; ++comp) {
      double dot = 0;
      for (std::size_t i = 0; i < 5; ++i) {
        dot += p.components[static_cast<std::size_t>(comp)][i] * eig.vectors[static_cast<std::size_t>(comp)][i];
      }
      CHECK(std::abs(dot) == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("components are orthonormal and projection contracts distances") {
  const auto data = random_matrix(12, 6, 99);
  Projection2D p = pca_project(data);
  double n0 = 0;
  double n1 = 0;
  double dot = 0;
  for (std::size_t i = 0; i < 6; ++i) {
    n0 += p.components[0][i] * p.components[0][i];
    n1 += p.components[1][i] * p.components[1][i];
    dot += p.components[0][i] * p.components[1][i];
  }
  CHECK(std::abs(std::sqrt(n0) - 1.0) < 1e-8);
  CHECK(std::abs(std::sqrt(n1) - 1.0) < 1e-8);
  CHECK(std::abs(dot) < 1e-8);

  for (std::size_t a = 0; a < data.size(); ++a) {
    for (std::size_t b = a + 1; b < data.size(); ++b) {
      double orig = 0;
      for (std::size_t i = 0; i < 6; ++i) {
        orig += (data[a][i] - data[b][i]) * (data[a][i] - data[b][i]);
      }
      const double dx = p.coords[a].first - p.coords[b].first;
      const double dy = p.coords[a].second - p.coords[b].second;
      CHECK(std::sqrt(dx * dx + dy * dy) <= std::sqrt(orig) + 1e-8);
    }
  }
}

TEST_CASE("degenerate and invalid inputs") {
  CHECK_THROWS(pca_project({{1, 2}}));                  // one vector
  CHECK_THROWS(pca_project({{1, 2}, {1, 2}, {1, 2}}));  // no variance
  CHECK_THROWS(pca_project({{1, 2}, {1}}));             // ragged
}

TEST_CASE("projection_csv layout") {
  const std::vector<std::vector<double>> data{{0, 0}, {1, 0}, {2, 0}};
  Projection2D p = pca_project(data);
  const std::string csv = projection_csv(p, {"a", "b", "c"});
  CHECK(csv.substr(0, 9) == "word,x,y\n");
  CHECK(csv.find("a,") != std::string::npos);
  CHECK_THROWS(projection_csv(p, {"a"}));
}

TEST_CASE("nearest neighbors exact and ranked") {
  EmbeddingTable t(3, OovPolicy::Zero, 0, false);
  t.insert("q", {1, 0, 0});
  t.insert("same", {2, 0, 0});     // cosine 1 with q
  t.insert("ortho", {0, 1, 0});    // cosine 0
  t.insert("neg", {-1, 0, 0});     // cosine -1
  t.insert("close", {1, 0.1, 0});  // just under 1

  auto result = nearest_neighbors(t, "q", 3);
  REQUIRE(result.neighbors.size() == 3);
  CHECK(result.neighbors[0].word == "same");
  CHECK(result.neighbors[0].similarity == doctest::Approx(1.0));
  CHECK(result.neighbors[1].word == "close");
  CHECK(result.neighbors[2].word == "ortho");
  CHECK(result.neighbors[2].similarity == doctest::Approx(0.0));
  CHECK(!result.truncated);

  auto all = nearest_neighbors(t, "q", 10);
  CHECK(all.neighbors.size() == 4);
  CHECK(all.truncated);
  CHECK(all.neighbors[3].word == "neg");
}

TEST_CASE("nearest neighbors match brute force on a toy table") {
  EmbeddingTable t(4, OovPolicy::Zero, 0, false);
  RngStream rng(17);
  const std::vector<std::string> words{"v", "w", "x", "y", "z"};
  for (const auto& w : words) {
    std::vector<double> vec(4);
    for (auto& x : vec) x = rng.uniform(-1, 1);
    t.insert(w, vec);
  }
  const auto result = nearest_neighbors(t, "v", 4);

  // Exhaustive pairwise cosine.
  const auto qv = t.lookup("v");
  std::vector<std::pair<double, std::string>> ranked;
  for (const auto& w : words) {
    if (w == "v") continue;
    const auto vec = t.lookup(w);
    double dot = 0;
    double na = 0;
    double nb = 0;
    for (std::size_t i = 0; i < 4; ++i) {
      dot += qv[i] * vec[i];
      na += qv[i] * qv[i];
      nb += vec[i] * vec[i];
    }
    ranked.emplace_back(dot / std::sqrt(na * nb), w);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  REQUIRE(result.neighbors.size() == ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    CHECK(result.neighbors[i].word == ranked[i].second);
    CHECK(result.neighbors[i].similarity == doctest::Approx(ranked[i].first));
  }
}

TEST_CASE("tie-break is lexicographic") {
  EmbeddingTable t(2, OovPolicy::Zero, 0, false);
  t.insert("q", {1, 0});
  t.insert("bb", {3, 0});
  t.insert("aa", {2, 0});  // both cosine 1
  auto result = nearest_neighbors(t, "q", 2);
  CHECK(result.neighbors[0].word == "aa");
  CHECK(result.neighbors[1].word == "bb");
}
