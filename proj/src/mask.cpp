#include "maskgrad/mask.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "maskgrad/errors.hpp"
#include "maskgrad/format.hpp"

namespace maskgrad {

std::string to_string(MaskVariant v) {
  switch (v) {
    case MaskVariant::kDirectMatrix: return "matrix";
    case MaskVariant::kOnesEncoder: return "ones";
    case MaskVariant::kIdentity: return "identity";
  }
  return "?";
}

std::string to_string(Normalizer n) {
  return n == Normalizer::kSoftmax ? "softmax" : "sparsemax";
}

MaskVariant parse_mask_variant(const std::string& s) {
  if (s == "matrix") return MaskVariant::kDirectMatrix;
  if (s == "ones") return MaskVariant::kOnesEncoder;
  if (s == "identity") return MaskVariant::kIdentity;
  throw ConfigError("unknown mask variant '" + s + "' (expected matrix, ones or identity)");
}

Normalizer parse_normalizer(const std::string& s) {
  if (s == "softmax") return Normalizer::kSoftmax;
  if (s == "sparsemax") return Normalizer::kSparsemax;
  throw ConfigError("unknown normalizer '" + s + "' (expected softmax or sparsemax)");
}

void MaskParams::validate() const {
  if (n == 0) throw ConfigError("mask: state dimension must be >= 1");
  auto expect = [&](std::size_t idx, const Tensor::Shape& shape) {
    if (theta[idx].shape() != shape) {
      throw ConfigError("mask: parameter " + std::to_string(idx) + " has shape " +
                        shape_string(theta[idx].shape()) + ", expected " + shape_string(shape));
    }
  };
  switch (variant) {
    case MaskVariant::kIdentity:
      if (!theta.empty()) throw ConfigError("mask: identity variant takes no parameters");
      return;
    case MaskVariant::kDirectMatrix:
      if (theta.size() != 1) throw ConfigError("mask: matrix variant takes one parameter");
      expect(0, {n, n});
      return;
    case MaskVariant::kOnesEncoder:
      if (encoder_k == 0 || encoder_hidden == 0) {
        throw ConfigError("mask: encoder input size and width must be >= 1");
      }
      if (theta.size() != 4) throw ConfigError("mask: ones encoder takes four parameters");
      expect(0, {encoder_hidden, encoder_k});
      expect(1, {encoder_hidden});
      expect(2, {n * n, encoder_hidden});
      expect(3, {n * n});
      return;
  }
}

MaskParams init_mask_params(MaskVariant variant, Normalizer normalizer, std::size_t n, Rng& rng,
                            const MaskInit& init) {
  MaskParams p;
  p.variant = variant;
  p.normalizer = normalizer;
  p.n = n;
  p.encoder_k = init.encoder_k;
  p.encoder_hidden = init.encoder_hidden;
  auto gaussian = [&](Tensor::Shape shape, double stddev) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (double& x : t.values()) x = normal(rng, 0.0, stddev);
    return t;
  };
  switch (variant) {
    case MaskVariant::kIdentity:
      break;
    case MaskVariant::kDirectMatrix:
      p.theta.push_back(gaussian({n, n}, init.stddev));
      break;
    case MaskVariant::kOnesEncoder: {
      const std::size_t h = init.encoder_hidden, k = init.encoder_k;
      p.theta.push_back(gaussian({h, k}, 1.0 / std::sqrt(static_cast<double>(k))));
      p.theta.push_back(Tensor::zeros({h}));
      // Output pre-activations have roughly the same spread as the direct variant.
      p.theta.push_back(gaussian({n * n, h}, init.stddev / std::sqrt(static_cast<double>(h))));
      p.theta.push_back(Tensor::zeros({n * n}));
      break;
    }
  }
  p.validate();
  return p;
}

Var mask_forward(Graph& g, const MaskParams& params, std::span<const Var> theta) {
  if (theta.size() != params.theta.size()) {
    throw ConfigError("mask_forward: expected " + std::to_string(params.theta.size()) +
                      " parameter nodes");
  }
  const std::size_t n = params.n;
  Var raw;
  switch (params.variant) {
    case MaskVariant::kIdentity:
      return g.constant(Tensor::identity(n));
    case MaskVariant::kDirectMatrix:
      raw = theta[0];
      break;
    case MaskVariant::kOnesEncoder: {
      Var ones = g.constant(Tensor::filled({1, params.encoder_k}, 1.0));
      Var hidden = tanh(add_row(matmul_nt(ones, theta[0]), theta[1]));
      Var out = add_row(matmul_nt(hidden, theta[2]), theta[3]);
      raw = reshape(out, {n, n});
      break;
    }
  }
  return params.normalizer == Normalizer::kSoftmax ? softmax_rows(raw) : sparsemax_rows(raw);
}

Mask build_mask(const MaskParams& params) {
  params.validate();
  Graph g;
  std::vector<Var> theta;
  theta.reserve(params.theta.size());
  for (const Tensor& t : params.theta) theta.push_back(g.constant(t));
  return Mask{mask_forward(g, params, theta).value()};
}

Mask identity_mask(std::size_t n) {
  if (n == 0) throw ConfigError("identity_mask: n must be >= 1");
  return Mask{Tensor::identity(n)};
}

Tensor transform(const Mask& mask, const Tensor& s) { return matvec(mask.matrix, s); }

std::vector<double> transform(const Mask& mask, std::span<const double> s) {
  return transform(mask, Tensor::vector({s.begin(), s.end()})).storage();
}

Var transform_batch(Var mask, Var states) { return matmul_nt(states, mask); }

namespace {

std::vector<double> column_sums(const Mask& mask) {
  const Tensor& m = mask.matrix;
  std::vector<double> sums(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) sums[j] += m(i, j);
  return sums;
}

}  // namespace

RelevanceVector column_relevance(const Mask& mask) {
  auto sums = column_sums(mask);
  const double top = sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
  if (top <= 0.0) return {std::vector<double>(sums.size(), 0.0)};
  for (double& c : sums) c = std::clamp(c / top, 0.0, 1.0);
  return {std::move(sums)};
}

RelevanceVector column_relevance_minmax(const Mask& mask) {
  auto sums = column_sums(mask);
  if (sums.empty()) return {};
  const auto [lo, hi] = std::minmax_element(sums.begin(), sums.end());
  const double low = *lo, span = *hi - *lo;
  if (span <= 0.0) return {std::vector<double>(sums.size(), *hi > 0.0 ? 1.0 : 0.0)};
  for (double& c : sums) c = (c - low) / span;
  return {std::move(sums)};
}

double separation_score(const RelevanceVector& r, std::span<const std::size_t> relevant) {
  std::vector<bool> is_relevant(r.values.size(), false);
  for (std::size_t i : relevant) {
    if (i >= r.values.size()) throw ShapeError("separation_score: relevant index out of range");
    is_relevant[i] = true;
  }
  double rel = 0.0, irr = 0.0;
  std::size_t nrel = 0, nirr = 0;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (is_relevant[i]) {
      rel += r.values[i];
      ++nrel;
    } else {
      irr += r.values[i];
      ++nirr;
    }
  }
  return (nrel ? rel / static_cast<double>(nrel) : 0.0) -
         (nirr ? irr / static_cast<double>(nirr) : 0.0);
}

void write_mask_matrix(std::ostream& out, const Mask& mask) {
  const Tensor& m = mask.matrix;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_relevance_csv(std::ostream& out, const Mask& mask,
                         std::span<const std::size_t> relevant) {
  const auto rel = column_relevance(mask);
  const auto minmax = column_relevance_minmax(mask);
  const auto sums = column_sums(mask);
  std::vector<bool> flag(sums.size(), false);
  for (std::size_t i : relevant) {
    if (i < flag.size()) flag[i] = true;
  }
  out << "index,relevance,relevance_minmax,column_sum,relevant\n";
  for (std::size_t j = 0; j < sums.size(); ++j) {
    out << j << ',' << format_double(rel.values[j]) << ',' << format_double(minmax.values[j])
        << ',' << format_double(sums[j]) << ',' << (flag[j] ? 1 : 0) << '\n';
  }
}

}  // namespace maskgrad
