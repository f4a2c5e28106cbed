#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maskgrad/graph.hpp"
#include "maskgrad/mask.hpp"
#include "maskgrad/policy.hpp"
#include "maskgrad/tensor.hpp"
#include "maskgrad/world.hpp"

namespace maskgrad {

enum class Method { kTransMask, kBC, kVAE };

std::string to_string(Method m);
Method parse_method(const std::string& s);

// Gaussian encoder s -> (mean, log-variance) for the bottleneck baseline.
// tensors = {W1 (h x n), b1, W_mean (d x h), b_mean, W_logvar (d x h), b_logvar}
struct VaeEncoder {
  std::size_t state_dim = 0;
  std::size_t hidden = 0;
  std::size_t latent_dim = 0;
  std::vector<Tensor> tensors;

  void validate() const;
};

VaeEncoder init_vae_encoder(std::size_t state_dim, std::size_t hidden, std::size_t latent_dim,
                            Rng& rng);

struct EncoderNodes {
  Var mean;
  Var logvar;
};
EncoderNodes encoder_forward(Graph& g, const VaeEncoder& enc, std::span<const Var> params,
                             Var states);

// Mask (or encoder) plus policy head. Plain BC uses the identity mask.
struct Model {
  Method method = Method::kTransMask;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  MaskParams mask;
  std::optional<VaeEncoder> encoder;
  PolicyParams policy;

  // Tensors updated by the optimizer, in a fixed order: mask, encoder, policy.
  std::vector<Tensor*> trainable();
  std::vector<const Tensor*> trainable() const;
  void validate() const;
};

// Immutable evaluation snapshot of a Model; the mask is realized once.
class Controller {
 public:
  explicit Controller(const Model& model);

  Action act(std::span<const double> s) const;
  // Rows of `states` mapped to the latent the policy sees (Ms, or the
  // encoder mean for the bottleneck baseline).
  Tensor latent(const Tensor& states) const;
  Tensor actions(const Tensor& states) const;

  const Mask& mask() const { return mask_; }
  const Model& model() const { return model_; }

 private:
  Model model_;
  Mask mask_;
};

}  // namespace maskgrad
