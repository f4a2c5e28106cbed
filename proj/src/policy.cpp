#include "maskgrad/policy.hpp"

#include <cmath>

#include "maskgrad/errors.hpp"

namespace maskgrad {

std::string to_string(Activation a) { return a == Activation::kTanh ? "tanh" : "linear"; }

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::kTanh;
  if (s == "linear") return Activation::kLinear;
  throw ConfigError("unknown activation '" + s + "'");
}

void PolicyParams::validate() const {
  if (sizes.size() < 2) throw ConfigError("policy: need at least input and output sizes");
  for (std::size_t s : sizes) {
    if (s == 0) throw ConfigError("policy: layer sizes must be >= 1");
  }
  if (tensors.size() != 2 * layer_count()) {
    throw ConfigError("policy: expected " + std::to_string(2 * layer_count()) + " tensors, got " +
                      std::to_string(tensors.size()));
  }
  for (std::size_t l = 0; l < layer_count(); ++l) {
    if (weight(l).shape() != Tensor::Shape{sizes[l + 1], sizes[l]} ||
        bias(l).shape() != Tensor::Shape{sizes[l + 1]}) {
      throw ConfigError("policy: layer " + std::to_string(l) + " has wrong shape");
    }
  }
}

PolicyParams init_policy(std::vector<std::size_t> sizes, Rng& rng, Activation activation) {
  PolicyParams p;
  p.sizes = std::move(sizes);
  p.activation = activation;
  if (p.sizes.size() < 2) throw ConfigError("policy: need at least input and output sizes");
  for (std::size_t l = 0; l + 1 < p.sizes.size(); ++l) {
    const std::size_t in = p.sizes[l], out = p.sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    Tensor w = Tensor::zeros({out, in});
    for (double& x : w.values()) x = uniform(rng, -limit, limit);
    p.tensors.push_back(std::move(w));
    p.tensors.push_back(Tensor::zeros({out}));
  }
  p.validate();
  return p;
}

Var policy_forward(Graph& /*g*/, const PolicyParams& psi, std::span<const Var> params, Var z) {
  if (params.size() != psi.tensors.size()) {
    throw ConfigError("policy_forward: parameter node count mismatch");
  }
  const bool single = z.value().rank() == 1;
  if (z.value().cols() != psi.input_dim()) {
    throw ShapeError("policy_forward: input width " + std::to_string(z.value().cols()) +
                     ", policy expects " + std::to_string(psi.input_dim()));
  }
  Var h = single ? reshape(z, {1, psi.input_dim()}) : z;
  for (std::size_t l = 0; l < psi.layer_count(); ++l) {
    h = add_row(matmul_nt(h, params[2 * l]), params[2 * l + 1]);
    if (l + 1 < psi.layer_count() && psi.activation == Activation::kTanh) h = tanh(h);
  }
  return single ? reshape(h, {psi.output_dim()}) : h;
}

Tensor policy_forward(const PolicyParams& psi, const Tensor& z) {
  Graph g;
  std::vector<Var> params;
  params.reserve(psi.tensors.size());
  for (const Tensor& t : psi.tensors) params.push_back(g.constant(t));
  return policy_forward(g, psi, params, g.constant(z)).value();
}

std::vector<double> policy_forward(const PolicyParams& psi, std::span<const double> z) {
  return policy_forward(psi, Tensor::vector({z.begin(), z.end()})).storage();
}

double bc_loss(std::span<const double> predicted, std::span<const double> expert) {
  if (predicted.size() != expert.size()) {
    throw ShapeError("bc_loss: predicted has " + std::to_string(predicted.size()) +
                     " entries, expert has " + std::to_string(expert.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - expert[i];
    total += d * d;
  }
  return 0.5 * total;
}

Tensor pipeline_jacobian(const PolicyParams& psi, const Mask& mask, std::span<const double> s) {
  const std::size_t n = s.size(), m = psi.output_dim();
  if (mask.n() != n) throw ShapeError("pipeline_jacobian: mask and state sizes differ");
  Tensor jac = Tensor::zeros({m, n});
  Graph g;
  std::vector<Var> params;
  for (const Tensor& t : psi.tensors) params.push_back(g.constant(t));
  // The state is a differentiable input here; the mask is held fixed.
  Var state = g.parameter(Tensor::vector({s.begin(), s.end()}));
  Var z = matvec(g.constant(mask.matrix), state);
  Var out = policy_forward(g, psi, params, z);
  for (std::size_t i = 0; i < m; ++i) {
    Tensor selector = Tensor::zeros({m});
    selector[i] = 1.0;
    Var picked = sum(mul(out, g.constant(std::move(selector))));
    g.reset_gradients();
    g.backward(picked);
    const Tensor& gs = g.grad(state);
    for (std::size_t j = 0; j < n; ++j) jac(i, j) = gs[j];
  }
  return jac;
}

Tensor expert_jacobian(const EnvSpec& env, std::span<const double> s, double h) {
  const std::size_t n = s.size(), m = env.action_dim();
  Tensor jac = Tensor::zeros({m, n});
  std::vector<double> point(s.begin(), s.end());
  for (std::size_t j = 0; j < n; ++j) {
    const double saved = point[j];
    point[j] = saved + h;
    const Action plus = expert_action(env, point);
    point[j] = saved - h;
    const Action minus = expert_action(env, point);
    point[j] = saved;
    for (std::size_t i = 0; i < m; ++i) jac(i, j) = (plus[i] - minus[i]) / (2.0 * h);
  }
  return jac;
}

}  // namespace maskgrad
