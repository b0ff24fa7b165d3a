#include "devseq/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "devseq/rng.hpp"

namespace devseq {

namespace {

// Dominant eigenpair of a symmetric matrix by power iteration. The start
// vector comes from a fixed stream, so results are reproducible.
std::pair<double, std::vector<double>> dominant_eigenpair(
    const std::vector<double>& m, std::size_t d) {
  RngStream rng(0x9e3779b97f4a7c15ULL);
  std::vector<double> v(d);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;

  double lambda = 0;
  std::vector<double> next(d);
  for (int iter = 0; iter < 10000; ++iter) {
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < d; ++j) acc += m[i * d + j] * v[j];
      next[i] = acc;
    }
    double next_norm = 0;
    for (double x : next) next_norm += x * x;
    next_norm = std::sqrt(next_norm);
    if (next_norm < 1e-300) {
      // Matrix annihilates the start vector; eigenvalue is zero.
      return {0.0, v};
    }
    for (std::size_t i = 0; i < d; ++i) next[i] /= next_norm;
    double new_lambda = 0;  // Rayleigh quotient with the normalized vector
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0;
      for (std::size_t j = 0; j < d; ++j) acc += m[i * d + j] * next[j];
      new_lambda += next[i] * acc;
    }
    double delta = 0;
    for (std::size_t i = 0; i < d; ++i) delta = std::max(delta, std::abs(next[i] - v[i]));
    // Sign flips each step for negative eigenvalues; compare against -v too.
    double delta_neg = 0;
    for (std::size_t i = 0; i < d; ++i) delta_neg = std::max(delta_neg, std::abs(next[i] + v[i]));
    v = next;
    const bool converged = std::min(delta, delta_neg) < 1e-13 &&
                           std::abs(new_lambda - lambda) < 1e-13 * std::max(1.0, std::abs(new_lambda));
    lambda = new_lambda;
    if (converged) break;
  }
  return {lambda, v};
}

void canonicalize_sign(std::vector<double>& v) {
  for (double x : v) {
    if (std::abs(x) > 1e-12) {
      if (x < 0) {
        for (double& y : v) y = -y;
      }
      return;
    }
  }
}

// Any unit vector orthogonal to v (used when the deflated matrix vanishes).
std::vector<double> orthogonal_unit(const std::vector<double>& v) {
  const std::size_t d = v.size();
  std::vector<double> u(d, 0.0);
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < d; ++i) {
    if (std::abs(v[i]) < std::abs(v[smallest])) smallest = i;
  }
  u[smallest] = 1.0;
  double dot = 0;
  for (std::size_t i = 0; i < d; ++i) dot += u[i] * v[i];
  double norm = 0;
  for (std::size_t i = 0; i < d; ++i) {
    u[i] -= dot * v[i];
    norm += u[i] * u[i];
  }
  norm = std::sqrt(norm);
  for (double& x : u) x /= norm;
  return u;
}

}  // namespace

Projection2D pca_project(const std::vector<std::vector<double>>& vectors) {
  if (vectors.size() < 2) {
    throw std::runtime_error("pca_project: need at least 2 vectors");
  }
  const std::size_t d = vectors[0].size();
  if (d < 2) throw std::runtime_error("pca_project: need dimension >= 2");
  for (const auto& v : vectors) {
    if (v.size() != d) throw std::runtime_error("pca_project: inconsistent dimensions");
  }
  const std::size_t n = vectors.size();

  Projection2D proj;
  proj.mean.assign(d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < d; ++i) proj.mean[i] += v[i];
  }
  for (double& m : proj.mean) m /= static_cast<double>(n);

  // Sample covariance (divisor n-1).
  std::vector<double> cov(d * d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < d; ++i) {
      const double ci = v[i] - proj.mean[i];
      for (std::size_t j = i; j < d; ++j) {
        cov[i * d + j] += ci * (v[j] - proj.mean[j]);
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov[i * d + j] /= static_cast<double>(n - 1);
      cov[j * d + i] = cov[i * d + j];
    }
  }

  double trace = 0;
  for (std::size_t i = 0; i < d; ++i) trace += cov[i * d + i];
  if (trace < 1e-15) {
    throw std::runtime_error("pca_project: degenerate data (all vectors identical)");
  }

  std::vector<double> deflated = cov;
  for (int comp = 0; comp < 2; ++comp) {
    auto [lambda, vec] = dominant_eigenpair(deflated, d);
    if (lambda < 0 || lambda < 1e-14 * trace) {
      // Rank-deficient remainder: variance is exactly exhausted.
      lambda = std::max(lambda, 0.0);
      if (comp == 1) vec = orthogonal_unit(proj.components[0]);
      if (lambda < 1e-14 * trace) lambda = 0.0;
    }
    canonicalize_sign(vec);
    proj.components[static_cast<std::size_t>(comp)] = vec;
    proj.variances[static_cast<std::size_t>(comp)] = lambda;
    proj.explained_variance[static_cast<std::size_t>(comp)] = lambda / trace;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        deflated[i * d + j] -= lambda * vec[i] * vec[j];
      }
    }
  }

  proj.coords.reserve(n);
  for (const auto& v : vectors) {
    double x = 0;
    double y = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const double c = v[i] - proj.mean[i];
      x += c * proj.components[0][i];
      y += c * proj.components[1][i];
    }
    proj.coords.emplace_back(x, y);
  }
  return proj;
}

std::string projection_csv(const Projection2D& proj,
                           const std::vector<std::string>& words) {
  if (words.size() != proj.coords.size()) {
    throw std::runtime_error("projection_csv: word/coordinate count mismatch");
  }
  std::ostringstream out;
  out << "word,x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g", proj.coords[i].first,
                  proj.coords[i].second);
    out << words[i] << ',' << buf << '\n';
  }
  return out.str();
}

NeighborResult nearest_neighbors(const EmbeddingTable& table,
                                 const std::string& word, int k) {
  if (k < 1) throw std::runtime_error("nearest_neighbors: k must be >= 1");
  const std::vector<double> query = table.lookup(word);
  double qnorm = 0;
  for (double x : query) qnorm += x * x;
  qnorm = std::sqrt(qnorm);

  NeighborResult result;
  for (const std::string& candidate : table.sorted_words()) {
    if (candidate == word) continue;
    const std::vector<double> vec = table.lookup(candidate);
    double dot = 0;
    double norm = 0;
    for (std::size_t i = 0; i < vec.size(); ++i) {
      dot += vec[i] * query[i];
      norm += vec[i] * vec[i];
    }
    norm = std::sqrt(norm);
    const double sim = (qnorm < 1e-12 || norm < 1e-12) ? 0.0 : dot / (qnorm * norm);
    result.neighbors.push_back({candidate, sim});
  }
  std::stable_sort(result.neighbors.begin(), result.neighbors.end(),
                   [](const Neighbor& a, const Neighbor& b) {
                     if (a.similarity != b.similarity) return a.similarity > b.similarity;
                     return a.word < b.word;
                   });
  if (static_cast<int>(result.neighbors.size()) > k) {
    result.neighbors.resize(static_cast<std::size_t>(k));
  } else if (static_cast<int>(result.neighbors.size()) < k) {
    result.truncated = true;
  }
  return result;
}

}  // namespace devseq
