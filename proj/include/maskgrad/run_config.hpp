#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "maskgrad/trainer.hpp"
#include "maskgrad/world.hpp"

namespace maskgrad {

// Everything a CLI run needs. Loaded from TOML, then overridden by flags.
//
//   seed = 7
//   out = "runs/reach"
//   label = "transmask"
//   [env]   task, distractors, nuisance, horizon, max_speed, success_radius,
//           demos, regime, dataset
//   [train] method, norm, mask_variant, epochs, batch, lr, hidden,
//           latent_dim, encoder_hidden, kl_weight, mask_init_std
//   [eval]  regimes, episodes, eval_seeds, checkpoint
//   [sweep] kl_weights
struct RunConfig {
  EnvSpec env;
  std::size_t demos = 100;
  std::string demo_regime = "id";
  TrainConfig train;
  std::vector<std::string> regimes{"id", "ood"};
  std::size_t episodes = 100;
  std::size_t eval_seeds = 3;
  std::vector<double> kl_weights{0.0, 1e-4, 1e-3, 1e-2, 1e-1};
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "runs/default";
  std::filesystem::path dataset;     // empty: <out>/dataset.jsonl
  std::string checkpoint;            // empty: <out>/checkpoint.json; "expert" for the expert
  std::string label;                 // empty: method name

  std::filesystem::path dataset_path() const;
  std::string checkpoint_ref() const;
  std::string display_label() const;
  void validate() const;
};

// Throws ConfigError on syntax errors, unknown keys and bad values.
RunConfig parse_run_config(const std::string& toml_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Explicit seed if present, else MASKGRAD_SEED (passed in as `env_value`,
// may be null), else ConfigError.
std::uint64_t resolve_seed(const RunConfig& config, const char* env_value);

// Comma-separated list, empty items rejected.
std::vector<std::string> split_list(const std::string& text);

}  // namespace maskgrad
