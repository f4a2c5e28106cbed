#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "maskgrad/graph.hpp"
#include "maskgrad/mask.hpp"
#include "maskgrad/rng.hpp"
#include "maskgrad/tensor.hpp"
#include "maskgrad/world.hpp"

namespace maskgrad {

enum class Activation { kTanh, kLinear };

std::string to_string(Activation a);
Activation parse_activation(const std::string& s);

// Fully connected policy head. sizes = {input n, hidden..., output m}.
// tensors = {W0, b0, W1, b1, ...} with W_l shaped (sizes[l+1] x sizes[l]).
// The activation applies to hidden layers; the output layer is linear.
struct PolicyParams {
  std::vector<std::size_t> sizes;
  Activation activation = Activation::kTanh;
  std::vector<Tensor> tensors;

  std::size_t input_dim() const { return sizes.front(); }
  std::size_t output_dim() const { return sizes.back(); }
  std::size_t layer_count() const { return sizes.size() - 1; }
  const Tensor& weight(std::size_t l) const { return tensors[2 * l]; }
  const Tensor& bias(std::size_t l) const { return tensors[2 * l + 1]; }

  void validate() const;
};

// Glorot-uniform weights, zero biases.
PolicyParams init_policy(std::vector<std::size_t> sizes, Rng& rng,
                         Activation activation = Activation::kTanh);

// Records the MLP on `g`. `z` is a batch (rows) or a single vector.
Var policy_forward(Graph& g, const PolicyParams& psi, std::span<const Var> params, Var z);
// Plain evaluation, same arithmetic as the graph path.
Tensor policy_forward(const PolicyParams& psi, const Tensor& z);
std::vector<double> policy_forward(const PolicyParams& psi, std::span<const double> z);

// 1/2 ||predicted - expert||^2
double bc_loss(std::span<const double> predicted, std::span<const double> expert);

// d pi(M s) / d s, one backward pass per action dimension. m x n.
Tensor pipeline_jacobian(const PolicyParams& psi, const Mask& mask, std::span<const double> s);

// Central-difference Jacobian of the scripted expert at s. m x n.
Tensor expert_jacobian(const EnvSpec& env, std::span<const double> s, double h = 1e-6);

}  // namespace maskgrad
