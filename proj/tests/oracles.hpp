#pragma once

// Independent reference computations used only by tests. These deliberately
// avoid the library's implementation paths: the eigensolver is a classic
// cyclic Jacobi sweep, and the CRF scorers enumerate every tag path.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace devseq::testing {

// Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix
// by cyclic Jacobi rotations.
struct EigenResult {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // vectors[k] is the k-th eigenvector
};

inline EigenResult jacobi_eigen(std::vector<double> a, std::size_t d) {
  std::vector<double> v(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
    }
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a[p * d + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[p * d + p];
        const double aqq = a[q * d + q];
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k * d + p];
          const double akq = a[k * d + q];
          a[k * d + p] = c * akp - s * akq;
          a[k * d + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[p * d + k];
          const double aqk = a[q * d + k];
          a[p * d + k] = c * apk - s * aqk;
          a[q * d + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = v[k * d + p];
          const double vkq = v[k * d + q];
          v[k * d + p] = c * vkp - s * vkq;
          v[k * d + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(d);
  for (std::size_t i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x * d + x] > a[y * d + y];
  });
  EigenResult result;
  for (std::size_t k : order) {
    result.values.push_back(a[k * d + k]);
    std::vector<double> col(d);
    for (std::size_t i = 0; i < d; ++i) col[i] = v[i * d + k];
    result.vectors.push_back(std::move(col));
  }
  return result;
}

// Exhaustive log partition function over all K^n tag paths, with start/stop
// transitions; transitions is a flat (K+2)x(K+2) matrix.
inline double brute_force_log_z(const std::vector<std::vector<double>>& emissions,
                                const std::vector<double>& transitions, int k) {
  const int states = k + 2;
  const int start = k;
  const int stop = k + 1;
  const std::size_t n = emissions.size();
  auto tr = [&](int i, int j) { return transitions[static_cast<std::size_t>(i * states + j)]; };

  std::vector<int> path(n, 0);
  std::vector<double> scores;
  while (true) {
    double s = tr(start, path[0]);
    for (std::size_t t = 0; t < n; ++t) {
      s += emissions[t][static_cast<std::size_t>(path[t])];
      if (t + 1 < n) s += tr(path[t], path[t + 1]);
    }
    s += tr(path[n - 1], stop);
    scores.push_back(s);
    std::size_t pos = 0;
    while (pos < n && ++path[pos] == k) {
      path[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  const double mx = *std::max_element(scores.begin(), scores.end());
  double total = 0;
  for (double s : scores) total += std::exp(s - mx);
  return mx + std::log(total);
}

// Highest-scoring path by enumeration. Among equal-scoring paths the one
// with the smallest reversed tuple wins; that mirrors the Viterbi decoder,
// which picks the lowest final state and then the lowest backpointer while
// reconstructing from the end.
inline std::vector<int> brute_force_best_path(
    const std::vector<std::vector<double>>& emissions,
    const std::vector<double>& transitions, int k) {
  const int states = k + 2;
  const int start = k;
  const int stop = k + 1;
  const std::size_t n = emissions.size();
  auto tr = [&](int i, int j) { return transitions[static_cast<std::size_t>(i * states + j)]; };

  auto reversed_less = [](const std::vector<int>& a, const std::vector<int>& b) {
    return std::lexicographical_compare(a.rbegin(), a.rend(), b.rbegin(), b.rend());
  };

  std::vector<int> path(n, 0);
  std::vector<int> best_path;
  double best = 0;
  while (true) {
    double s = tr(start, path[0]);
    for (std::size_t t = 0; t < n; ++t) {
      s += emissions[t][static_cast<std::size_t>(path[t])];
      if (t + 1 < n) s += tr(path[t], path[t + 1]);
    }
    s += tr(path[n - 1], stop);
    if (best_path.empty() || s > best || (s == best && reversed_less(path, best_path))) {
      best = s;
      best_path = path;
    }
    std::size_t pos = 0;
    while (pos < n && ++path[pos] == k) {
      path[pos] = 0;
      ++pos;
    }
    if (pos == n) break;
  }
  return best_path;
}

}  // namespace devseq::testing
