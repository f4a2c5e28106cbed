#include "maskgrad/model.hpp"

#include <cmath>

#include "maskgrad/errors.hpp"

namespace maskgrad {

std::string to_string(Method m) {
  switch (m) {
    case Method::kTransMask: return "transmask";
    case Method::kBC: return "bc";
    case Method::kVAE: return "vae";
  }
  return "?";
}

Method parse_method(const std::string& s) {
  if (s == "transmask") return Method::kTransMask;
  if (s == "bc") return Method::kBC;
  if (s == "vae") return Method::kVAE;
  throw ConfigError("unknown method '" + s + "' (expected transmask, bc or vae)");
}

void VaeEncoder::validate() const {
  if (latent_dim == 0 || hidden == 0 || state_dim == 0) {
    throw ConfigError("vae encoder: sizes must be >= 1");
  }
  const std::vector<Tensor::Shape> shapes{{hidden, state_dim}, {hidden},   {latent_dim, hidden},
                                          {latent_dim},        {latent_dim, hidden}, {latent_dim}};
  if (tensors.size() != shapes.size()) throw ConfigError("vae encoder: expected six tensors");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (tensors[i].shape() != shapes[i]) {
      throw ConfigError("vae encoder: tensor " + std::to_string(i) + " has shape " +
                        shape_string(tensors[i].shape()));
    }
  }
}

VaeEncoder init_vae_encoder(std::size_t state_dim, std::size_t hidden, std::size_t latent_dim,
                            Rng& rng) {
  VaeEncoder enc{state_dim, hidden, latent_dim, {}};
  auto glorot = [&](std::size_t out, std::size_t in) {
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Tensor w = Tensor::zeros({out, in});
    for (double& x : w.values()) x = uniform(rng, -limit, limit);
    return w;
  };
  enc.tensors.push_back(glorot(hidden, state_dim));
  enc.tensors.push_back(Tensor::zeros({hidden}));
  enc.tensors.push_back(glorot(latent_dim, hidden));
  enc.tensors.push_back(Tensor::zeros({latent_dim}));
  enc.tensors.push_back(glorot(latent_dim, hidden));
  enc.tensors.push_back(Tensor::zeros({latent_dim}));
  enc.validate();
  return enc;
}

EncoderNodes encoder_forward(Graph& g, const VaeEncoder& enc, std::span<const Var> params,
                             Var states) {
  (void)g;
  if (params.size() != enc.tensors.size()) throw ConfigError("encoder_forward: node count mismatch");
  Var h = tanh(add_row(matmul_nt(states, params[0]), params[1]));
  return {add_row(matmul_nt(h, params[2]), params[3]), add_row(matmul_nt(h, params[4]), params[5])};
}

std::vector<Tensor*> Model::trainable() {
  std::vector<Tensor*> out;
  if (method == Method::kTransMask) {
    for (Tensor& t : mask.theta) out.push_back(&t);
  }
  if (encoder) {
    for (Tensor& t : encoder->tensors) out.push_back(&t);
  }
  for (Tensor& t : policy.tensors) out.push_back(&t);
  return out;
}

std::vector<const Tensor*> Model::trainable() const {
  std::vector<Tensor*> mutable_view = const_cast<Model*>(this)->trainable();
  return {mutable_view.begin(), mutable_view.end()};
}

void Model::validate() const {
  policy.validate();
  if (policy.output_dim() != action_dim) throw ConfigError("model: policy output width mismatch");
  if (method == Method::kVAE) {
    if (!encoder) throw ConfigError("model: bottleneck baseline needs an encoder");
    encoder->validate();
    if (encoder->state_dim != state_dim || encoder->latent_dim != policy.input_dim()) {
      throw ConfigError("model: encoder sizes do not match state and policy");
    }
    return;
  }
  mask.validate();
  if (mask.n != state_dim || policy.input_dim() != state_dim) {
    throw ConfigError("model: mask and policy must take the full state dimension");
  }
  if (method == Method::kBC && !mask.frozen()) {
    throw ConfigError("model: plain BC uses the frozen identity mask");
  }
}

Controller::Controller(const Model& model) : model_(model) {
  model_.validate();
  mask_ = model_.method == Method::kVAE ? identity_mask(model_.state_dim) : build_mask(model_.mask);
}

Tensor Controller::latent(const Tensor& states) const {
  Graph g;
  Var s = g.constant(states);
  if (model_.method == Method::kVAE) {
    std::vector<Var> params;
    for (const Tensor& t : model_.encoder->tensors) params.push_back(g.constant(t));
    return encoder_forward(g, *model_.encoder, params, s).mean.value();
  }
  return transform_batch(g.constant(mask_.matrix), s).value();
}

Tensor Controller::actions(const Tensor& states) const {
  return policy_forward(model_.policy, latent(states));
}

Action Controller::act(std::span<const double> s) const {
  if (s.size() != model_.state_dim) {
    throw ShapeError("controller: state has " + std::to_string(s.size()) + " entries, expected " +
                     std::to_string(model_.state_dim));
  }
  Tensor batch = Tensor::matrix(1, s.size(), {s.begin(), s.end()});
  return actions(batch).storage();
}

}  // namespace maskgrad
