#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maskgrad/adam.hpp"
#include "maskgrad/mask.hpp"
#include "maskgrad/model.hpp"
#include "maskgrad/world.hpp"

namespace maskgrad {

struct TrainConfig {
  Method method = Method::kTransMask;
  std::size_t epochs = 200;
  std::size_t batch = 16;
  AdamConfig adam{3e-3};
  Normalizer normalizer = Normalizer::kSparsemax;
  MaskVariant variant = MaskVariant::kDirectMatrix;
  MaskInit mask_init{0.01};
  std::vector<std::size_t> hidden{128, 128};
  std::uint64_t seed = 0;
  // Bottleneck baseline only.
  std::size_t latent_dim = 4;
  std::size_t encoder_hidden = 128;
  double kl_weight = 1e-3;

  void validate() const;
};

// Stable digest of every field, recorded in checkpoints.
std::string config_digest(const TrainConfig& config);

// Flattened (s, a) pairs of a dataset.
struct PairTable {
  Tensor states;   // P x n
  Tensor actions;  // P x m
  std::vector<std::size_t> trajectory;  // trajectory id per row
};

PairTable flatten(const Dataset& data);

struct Batch {
  Tensor states;
  Tensor actions;
};

Batch gather(const PairTable& table, std::span<const std::size_t> rows);

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;  // mean 1/2 ||a_hat - a||^2 per pair
  double kl = 0.0;    // bottleneck baseline only
  std::vector<double> relevance;
  std::optional<double> separation;
  double wall_ms = 0.0;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
};

struct StepResult {
  double loss = 0.0;  // batch-mean imitation loss
  double kl = 0.0;
};

Model init_model(const TrainConfig& config, std::size_t state_dim, std::size_t action_dim);

struct LossGradient {
  double loss = 0.0;       // full objective
  double imitation = 0.0;  // batch-mean 1/2 ||a_hat - a||^2
  double kl = 0.0;         // batch-mean KL, bottleneck baseline only
  std::vector<Tensor> grads;  // one per Model::trainable() tensor, same order
};

// Objective and its gradient from one backward pass. `noise` holds the
// reparameterization draws (rows x latent) for the bottleneck baseline and is
// ignored otherwise. Throws NumericError on a non-finite loss.
LossGradient loss_gradient(const Model& model, const Batch& batch, double kl_weight,
                           const Tensor& noise = {});

// One joint Adam update of every trainable tensor from a single backward
// pass. For TransMASK and BC the objective is only the imitation loss.
// Throws NumericError on a non-finite loss.
StepResult train_step(Model& model, Adam& optimizer, const Batch& batch, const TrainConfig& config,
                      Rng& noise_rng);

struct TrainResult {
  Model model;
  TrainLog log;
};

// Shuffled mini-batch epochs, deterministic under config.seed.
// `report_relevant` feeds only the separation column of the log.
TrainResult train(const TrainConfig& config, const Dataset& data,
                  std::span<const std::size_t> report_relevant = {});

// Columns: epoch,loss,separation
void write_train_log_csv(std::ostream& out, const TrainLog& log);
// Columns: epoch,wall_ms
void write_timing_csv(std::ostream& out, const TrainLog& log);

// Closed-form KL(N(mean, exp(logvar)) || N(0, I)) summed over entries.
double gaussian_kl(std::span<const double> mean, std::span<const double> logvar);

}  // namespace maskgrad
