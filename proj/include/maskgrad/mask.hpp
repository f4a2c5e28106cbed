#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "maskgrad/graph.hpp"
#include "maskgrad/rng.hpp"
#include "maskgrad/tensor.hpp"

namespace maskgrad {

enum class MaskVariant {
  kDirectMatrix,  // theta is the raw n x n pre-activation
  kOnesEncoder,   // small MLP fed a constant all-ones k-vector
  kIdentity,      // frozen M = I, no parameters (plain BC)
};

enum class Normalizer { kSoftmax, kSparsemax };

std::string to_string(MaskVariant v);
std::string to_string(Normalizer n);
MaskVariant parse_mask_variant(const std::string& s);
Normalizer parse_normalizer(const std::string& s);

// Learnable mask parameters. Layout of `theta`:
//   kDirectMatrix: {theta (n x n)}
//   kOnesEncoder:  {W1 (hidden x k), b1 (hidden), W2 (n*n x hidden), b2 (n*n)}
//   kIdentity:     {}
struct MaskParams {
  MaskVariant variant = MaskVariant::kDirectMatrix;
  Normalizer normalizer = Normalizer::kSparsemax;
  std::size_t n = 0;
  std::size_t encoder_k = 8;
  std::size_t encoder_hidden = 64;
  std::vector<Tensor> theta;

  bool frozen() const { return variant == MaskVariant::kIdentity; }
  // Throws ConfigError if shapes disagree with the variant.
  void validate() const;
};

struct MaskInit {
  double stddev = 0.5;
  std::size_t encoder_k = 8;
  std::size_t encoder_hidden = 64;
};

MaskParams init_mask_params(MaskVariant variant, Normalizer normalizer, std::size_t n, Rng& rng,
                            const MaskInit& init = {});

// The realized n x n mask. Every row lies on the probability simplex.
struct Mask {
  Tensor matrix;

  std::size_t n() const { return matrix.rows(); }
};

struct RelevanceVector {
  std::vector<double> values;
};

// Records the mask computation on `g`. `theta` holds one Var per tensor in
// params.theta, in order. Returns the n x n mask node.
Var mask_forward(Graph& g, const MaskParams& params, std::span<const Var> theta);

Mask build_mask(const MaskParams& params);
Mask identity_mask(std::size_t n);

// z = M s. The state is data; no gradient flows into it.
Tensor transform(const Mask& mask, const Tensor& s);
std::vector<double> transform(const Mask& mask, std::span<const double> s);
// Batched: rows of `states` are states; returns rows of z.
Var transform_batch(Var mask, Var states);

// Column sums divided by their maximum; all zeros if every column sum is 0.
RelevanceVector column_relevance(const Mask& mask);
// Min-max rescaled column sums; kept alongside the max-normalized read-out.
RelevanceVector column_relevance_minmax(const Mask& mask);

// Mean relevance over `relevant` minus mean over the complement.
double separation_score(const RelevanceVector& r, std::span<const std::size_t> relevant);

// One row per line, space-separated, round-trip precision.
void write_mask_matrix(std::ostream& out, const Mask& mask);
// Header: index,relevance,relevance_minmax,column_sum,relevant
void write_relevance_csv(std::ostream& out, const Mask& mask,
                         std::span<const std::size_t> relevant);

}  // namespace maskgrad
