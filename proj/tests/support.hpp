#pragma once

// Independent reference implementations used as test oracles. None of these
// call into the library code they check.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "maskgrad/rng.hpp"
#include "maskgrad/tensor.hpp"

namespace maskgrad::testing {

// Euclidean projection onto the simplex by enumerating every non-empty
// support S: p_S = v_S - (sum(v_S) - 1)/|S|, zero elsewhere. Among the
// candidates with p >= 0 the closest to v is the projection.
inline std::vector<double> brute_force_projection(std::span<const double> v) {
  const std::size_t n = v.size();
  std::vector<double> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t bits = 1; bits < (std::size_t{1} << n); ++bits) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (bits >> i & 1) {
        total += v[i];
        ++count;
      }
    }
    const double tau = (total - 1.0) / static_cast<double>(count);
    std::vector<double> p(n, 0.0);
    bool feasible = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (bits >> i & 1) {
        p[i] = v[i] - tau;
        if (p[i] < 0.0) feasible = false;
      }
    }
    if (!feasible) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) dist += (p[i] - v[i]) * (p[i] - v[i]);
    if (dist < best_dist) {
      best_dist = dist;
      best = p;
    }
  }
  return best;
}

inline std::vector<double> naive_matvec(const Tensor& m, std::span<const double> s) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * s[j];
  return out;
}

inline Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  std::vector<double> v(rows * cols);
  for (double& x : v) x = normal(rng, 0.0, scale);
  return Tensor::matrix(rows, cols, std::move(v));
}

inline std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -1.0,
                                         double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace maskgrad::testing
