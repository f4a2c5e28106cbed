#include "maskgrad/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "maskgrad/errors.hpp"
#include "maskgrad/format.hpp"

namespace maskgrad {

void TrainConfig::validate() const {
  if (batch == 0) throw ConfigError("train: batch size must be >= 1");
  if (!(adam.lr > 0.0)) throw ConfigError("train: learning rate must be positive");
  if (!(kl_weight >= 0.0)) throw ConfigError("train: KL weight must be >= 0");
  if (!(mask_init.stddev >= 0.0)) throw ConfigError("train: mask init stddev must be >= 0");
  if (method == Method::kVAE && (latent_dim == 0 || encoder_hidden == 0)) {
    throw ConfigError("train: latent dim and encoder width must be >= 1");
  }
  for (std::size_t h : hidden) {
    if (h == 0) throw ConfigError("train: hidden widths must be >= 1");
  }
}

std::string config_digest(const TrainConfig& c) {
  std::ostringstream s;
  s << to_string(c.method) << '|' << c.epochs << '|' << c.batch << '|' << format_double(c.adam.lr)
    << '|' << format_double(c.adam.beta1) << '|' << format_double(c.adam.beta2) << '|'
    << format_double(c.adam.eps) << '|' << to_string(c.normalizer) << '|' << to_string(c.variant)
    << '|' << format_double(c.mask_init.stddev) << '|' << c.mask_init.encoder_k << '|'
    << c.mask_init.encoder_hidden << '|';
  for (std::size_t h : c.hidden) s << h << ',';
  s << '|' << c.seed << '|' << c.latent_dim << '|' << c.encoder_hidden << '|'
    << format_double(c.kl_weight);
  // FNV-1a, 64 bit.
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s.str()) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

PairTable flatten(const Dataset& data) {
  const std::size_t n = data.env.state_dim(), m = data.env.action_dim();
  const std::size_t pairs = data.pair_count();
  std::vector<double> states, actions;
  states.reserve(pairs * n);
  actions.reserve(pairs * m);
  PairTable table;
  for (std::size_t t = 0; t < data.trajectories.size(); ++t) {
    const Trajectory& traj = data.trajectories[t];
    for (std::size_t k = 0; k < traj.actions.size(); ++k) {
      if (traj.states[k].size() != n || traj.actions[k].size() != m) {
        throw ShapeError("dataset pair does not match the environment layout");
      }
      states.insert(states.end(), traj.states[k].begin(), traj.states[k].end());
      actions.insert(actions.end(), traj.actions[k].begin(), traj.actions[k].end());
      table.trajectory.push_back(t);
    }
  }
  table.states = Tensor({pairs, n}, std::move(states));
  table.actions = Tensor({pairs, m}, std::move(actions));
  return table;
}

Batch gather(const PairTable& table, std::span<const std::size_t> rows) {
  const std::size_t n = table.states.cols(), m = table.actions.cols();
  std::vector<double> s, a;
  s.reserve(rows.size() * n);
  a.reserve(rows.size() * m);
  for (std::size_t r : rows) {
    const auto sv = table.states.values().subspan(r * n, n);
    const auto av = table.actions.values().subspan(r * m, m);
    s.insert(s.end(), sv.begin(), sv.end());
    a.insert(a.end(), av.begin(), av.end());
  }
  return {Tensor({rows.size(), n}, std::move(s)), Tensor({rows.size(), m}, std::move(a))};
}

Model init_model(const TrainConfig& config, std::size_t state_dim, std::size_t action_dim) {
  config.validate();
  Model model;
  model.method = config.method;
  model.state_dim = state_dim;
  model.action_dim = action_dim;
  Rng mask_rng(derive_seed(config.seed, 0));
  Rng policy_rng(derive_seed(config.seed, 1));
  std::size_t policy_input = state_dim;
  switch (config.method) {
    case Method::kTransMask:
      model.mask = init_mask_params(config.variant, config.normalizer, state_dim, mask_rng,
                                    config.mask_init);
      break;
    case Method::kBC:
      model.mask = init_mask_params(MaskVariant::kIdentity, config.normalizer, state_dim, mask_rng);
      break;
    case Method::kVAE:
      if (config.latent_dim >= state_dim) {
        throw ConfigError("train: latent dim must be smaller than the state dimension");
      }
      model.mask = init_mask_params(MaskVariant::kIdentity, config.normalizer, state_dim, mask_rng);
      model.encoder = init_vae_encoder(state_dim, config.encoder_hidden, config.latent_dim, mask_rng);
      policy_input = config.latent_dim;
      break;
  }
  std::vector<std::size_t> sizes{policy_input};
  sizes.insert(sizes.end(), config.hidden.begin(), config.hidden.end());
  sizes.push_back(action_dim);
  model.policy = init_policy(sizes, policy_rng);
  model.validate();
  return model;
}

double gaussian_kl(std::span<const double> mean, std::span<const double> logvar) {
  if (mean.size() != logvar.size()) throw ShapeError("gaussian_kl: size mismatch");
  double kl = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    kl += 0.5 * (std::exp(logvar[i]) + mean[i] * mean[i] - 1.0 - logvar[i]);
  }
  return kl;
}

LossGradient loss_gradient(const Model& model, const Batch& batch, double kl_weight,
                           const Tensor& noise) {
  const std::size_t rows = batch.states.rows();
  if (rows == 0 || batch.states.rank() != 2) throw ConfigError("train_step: empty batch");
  if (batch.states.cols() != model.state_dim || batch.actions.cols() != model.action_dim ||
      batch.actions.rows() != rows) {
    throw ShapeError("train_step: batch does not match model dimensions");
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);

  Graph g;
  const std::vector<const Tensor*> trainable = model.trainable();
  std::vector<Var> nodes;
  nodes.reserve(trainable.size());
  for (const Tensor* t : trainable) nodes.push_back(g.parameter(*t));
  std::size_t cursor = 0;
  auto take = [&](std::size_t count) {
    std::span<const Var> out(nodes.data() + cursor, count);
    cursor += count;
    return out;
  };

  Var states = g.constant(batch.states);
  Var targets = g.constant(batch.actions);
  Var latent;
  std::optional<Var> kl_term;
  if (model.method == Method::kVAE) {
    const VaeEncoder& enc = *model.encoder;
    if (noise.rows() != rows || noise.cols() != enc.latent_dim || noise.rank() != 2) {
      throw ShapeError("loss_gradient: noise must be " + std::to_string(rows) + " x " +
                       std::to_string(enc.latent_dim));
    }
    EncoderNodes e = encoder_forward(g, enc, take(enc.tensors.size()), states);
    Var stddev = exp(scale(e.logvar, 0.5));
    latent = add(e.mean, mul(stddev, g.constant(noise)));
    // Batch mean of 1/2 sum(exp(lv) + mu^2 - 1 - lv).
    Var per_entry = sub(add(exp(e.logvar), mul(e.mean, e.mean)), add_scalar(e.logvar, 1.0));
    kl_term = scale(sum(per_entry), 0.5 * inv_rows);
  } else {
    std::vector<Var> theta_nodes;
    if (model.method == Method::kTransMask) {
      std::span<const Var> theta = take(model.mask.theta.size());
      theta_nodes.assign(theta.begin(), theta.end());
    }
    Var mask = mask_forward(g, model.mask, theta_nodes);
    latent = transform_batch(mask, states);
  }
  Var predicted = policy_forward(g, model.policy, take(model.policy.tensors.size()), latent);
  Var imitation = scale(sum_squares(sub(predicted, targets)), 0.5 * inv_rows);
  Var loss = imitation;
  if (kl_term) loss = add(imitation, scale(*kl_term, kl_weight));

  LossGradient out;
  out.loss = loss.value().item();
  out.imitation = imitation.value().item();
  out.kl = kl_term ? kl_term->value().item() : 0.0;
  if (!std::isfinite(out.loss)) {
    throw NumericError("non-finite training loss (imitation " + format_double(out.imitation) +
                       ")");
  }
  g.backward(loss);
  out.grads.reserve(nodes.size());
  for (const Var& v : nodes) out.grads.push_back(g.grad(v));
  return out;
}

StepResult train_step(Model& model, Adam& optimizer, const Batch& batch, const TrainConfig& config,
                      Rng& noise_rng) {
  Tensor noise;
  if (model.method == Method::kVAE) {
    noise = Tensor::zeros({batch.states.rows(), model.encoder->latent_dim});
    for (double& x : noise.values()) x = normal(noise_rng, 0.0, 1.0);
  }
  LossGradient lg;
  try {
    lg = loss_gradient(model, batch, config.kl_weight, noise);
  } catch (const NumericError& e) {
    throw NumericError(std::string(e.what()) + "; learning rate " + format_double(config.adam.lr) +
                       " is likely too high");
  }
  std::vector<const Tensor*> grads;
  grads.reserve(lg.grads.size());
  for (const Tensor& t : lg.grads) grads.push_back(&t);
  optimizer.step(model.trainable(), grads);
  return {lg.imitation, lg.kl};
}

namespace {

void check_rows_on_simplex(const Mask& mask) {
  const Tensor& m = mask.matrix;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (m(i, j) < 0.0) throw NumericError("mask entry negative after update");
      total += m(i, j);
    }
    if (std::abs(total - 1.0) > 1e-9) throw NumericError("mask row left the simplex after update");
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, const Dataset& data,
                  std::span<const std::size_t> report_relevant) {
  config.validate();
  const std::size_t n = data.env.state_dim(), m = data.env.action_dim();
  const PairTable table = flatten(data);
  TrainResult result{init_model(config, n, m), {}};
  Model& model = result.model;
  Adam optimizer(config.adam);
  Rng shuffle_rng(derive_seed(config.seed, 2));
  Rng noise_rng(derive_seed(config.seed, 3));
  const std::size_t pairs = table.states.rows();
  if (pairs == 0 && config.epochs > 0) throw ConfigError("train: dataset has no (s, a) pairs");
  std::vector<std::size_t> order(pairs);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0, kl_sum = 0.0;
    for (std::size_t begin = 0; begin < pairs; begin += config.batch) {
      const std::size_t end = std::min(pairs, begin + config.batch);
      const Batch batch = gather(table, std::span(order).subspan(begin, end - begin));
      const StepResult step = train_step(model, optimizer, batch, config, noise_rng);
      loss_sum += step.loss * static_cast<double>(end - begin);
      kl_sum += step.kl * static_cast<double>(end - begin);
      if (model.method == Method::kTransMask) check_rows_on_simplex(build_mask(model.mask));
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.loss = pairs ? loss_sum / static_cast<double>(pairs) : 0.0;
    entry.kl = pairs ? kl_sum / static_cast<double>(pairs) : 0.0;
    if (model.method != Method::kVAE) {
      const RelevanceVector r = column_relevance(build_mask(model.mask));
      if (!report_relevant.empty()) entry.separation = separation_score(r, report_relevant);
      entry.relevance = r.values;
    }
    entry.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.log.epochs.push_back(std::move(entry));
  }
  return result;
}

void write_train_log_csv(std::ostream& out, const TrainLog& log) {
  out << "epoch,loss,separation\n";
  for (const EpochLog& e : log.epochs) {
    out << e.epoch << ',' << format_double(e.loss) << ',';
    if (e.separation) out << format_double(*e.separation);
    out << '\n';
  }
}

void write_timing_csv(std::ostream& out, const TrainLog& log) {
  out << "epoch,wall_ms\n";
  for (const EpochLog& e : log.epochs) out << e.epoch << ',' << format_fixed(e.wall_ms, 3) << '\n';
}

}  // namespace maskgrad
