#include "maskgrad/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "maskgrad/errors.hpp"

namespace maskgrad {

namespace {

void require_finite(std::span<const double> v, const char* what) {
  if (v.empty()) throw ShapeError(std::string(what) + ": empty input");
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite input");
  }
}

void require_same_size(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw ShapeError(std::string(what) + ": size mismatch");
}

}  // namespace

std::vector<double> softmax_row(std::span<const double> v) {
  require_finite(v, "softmax_row");
  const double top = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - top);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

double sparsemax_threshold(std::span<const double> v) {
  require_finite(v, "sparsemax_row");
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  // Largest k with 1 + k * z_(k) > sum_{j <= k} z_(j).
  double prefix = 0.0;
  double support_sum = sorted[0];
  std::size_t support = 1;
  for (std::size_t k = 1; k <= sorted.size(); ++k) {
    prefix += sorted[k - 1];
    if (1.0 + static_cast<double>(k) * sorted[k - 1] > prefix) {
      support = k;
      support_sum = prefix;
    }
  }
  return (support_sum - 1.0) / static_cast<double>(support);
}

std::vector<double> sparsemax_row(std::span<const double> v) {
  const double tau = sparsemax_threshold(v);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

std::vector<double> softmax_backward(std::span<const double> p, std::span<const double> upstream) {
  require_same_size(p, upstream, "softmax_backward");
  double dot = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) dot += p[i] * upstream[i];
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] * (upstream[i] - dot);
  return out;
}

std::vector<double> sparsemax_backward_from_output(std::span<const double> p,
                                                   std::span<const double> upstream) {
  require_same_size(p, upstream, "sparsemax_backward");
  double sum = 0.0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      sum += upstream[i];
      ++support;
    }
  }
  std::vector<double> out(p.size(), 0.0);
  if (support == 0) return out;
  const double mean = sum / static_cast<double>(support);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) out[i] = upstream[i] - mean;
  }
  return out;
}

std::vector<double> sparsemax_backward(std::span<const double> v, std::span<const double> upstream) {
  const auto p = sparsemax_row(v);
  return sparsemax_backward_from_output(p, upstream);
}

}  // namespace maskgrad
