#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sglpath/groups.hpp"
#include "sglpath/linalg.hpp"

namespace sgl::testing {

inline DenseMatrix random_dense(Index n, Index p, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  DenseMatrix x(n, p);
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) x(i, j) = z(rng);
  }
  return x;
}

/// Each entry is non-zero with probability `density`.
inline SparseColumnMatrix random_sparse(Index n, Index p, double density, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u;
  std::vector<Triplet> t;
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) {
      if (u(rng) < density) t.push_back({i, j, z(rng)});
    }
  }
  return SparseColumnMatrix::from_triplets(n, p, t);
}

inline std::vector<double> random_vector(Index n, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = z(rng);
  return v;
}

inline std::vector<double> dense_matvec(const DenseMatrix& x, const std::vector<double>& b) {
  std::vector<double> out(static_cast<std::size_t>(x.rows()), 0.0);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) out[i] += x(i, j) * b[j];
  }
  return out;
}

/// Gaussian design with alternating all-ones / all-zeros groups and noise set by the SNR.
struct Simulation {
  DenseMatrix x;
  std::vector<double> y;
  std::vector<double> beta;
  GroupStructure groups;
};

inline Simulation simulate_alternating(Index n, Index p, Index n_groups, double snr, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Simulation s;
  s.x = random_dense(n, p, rng);
  s.groups = GroupStructure::equal_size(p, p / n_groups);
  s.beta.assign(static_cast<std::size_t>(p), 0.0);
  for (Index g = 0; g < s.groups.n_groups(); g += 2) {
    const auto cols = s.groups.range(g);
    for (Index j = cols.begin; j < cols.end; ++j) s.beta[j] = 1.0;
  }
  // Var(x' beta) = ||beta||^2 = p / 2.
  const double sigma = std::sqrt(0.5 * static_cast<double>(p) / snr);
  s.y = dense_matvec(s.x, s.beta);
  std::normal_distribution<double> z(0.0, sigma);
  for (auto& v : s.y) v += z(rng);
  return s;
}

// n = 100, p = 200, groups of five, signal in the first four groups, unit noise.
inline Simulation simulate_demo(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Simulation s;
  s.x = random_dense(100, 200, rng);
  s.groups = GroupStructure::equal_size(200, 5);
  s.beta.assign(200, 0.0);
  const double head[20] = {5, 5, 5, 5, 5, 5, -5, 2, 0, 0, -5, -5, -5, -5, -5, 2, -3, 8, 0, 0};
  std::copy(head, head + 20, s.beta.begin());
  s.y = dense_matvec(s.x, s.beta);
  std::normal_distribution<double> z;
  for (auto& v : s.y) v += z(rng);
  return s;
}

inline std::vector<double> binary_labels(const std::vector<double>& eta, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u;
  std::vector<double> y(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) y[i] = u(rng) < 1.0 / (1.0 + std::exp(-eta[i])) ? 1.0 : 0.0;
  return y;
}

}  // namespace sgl::testing
