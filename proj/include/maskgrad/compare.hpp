#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "maskgrad/probe.hpp"
#include "maskgrad/trainer.hpp"
#include "maskgrad/world.hpp"

namespace maskgrad {

// Success statistics of one policy in one regime across evaluation seeds.
// std is the population standard deviation over seeds.
struct RegimeStat {
  std::string regime;
  std::vector<double> per_seed;
  std::size_t episodes = 0;  // total rollouts
  std::size_t successes = 0;
  std::size_t nonfinite = 0;
  double mean = 0.0;
  double std = 0.0;
};

RegimeStat summarize(const std::string& regime, const std::vector<EvalResult>& runs);

// Evaluates `policy` in each regime, once per base seed. Episode seeds come
// from compare_eval_seed(base, regime), so a checkpoint trained by compare()
// under seed s scores the same here with base seed s.
std::vector<RegimeStat> evaluate_regimes(const EnvSpec& env, const PolicyFn& policy,
                                         const std::vector<std::string>& regimes,
                                         std::size_t episodes,
                                         const std::vector<std::uint64_t>& base_seeds);

struct MethodEntry {
  std::string label;
  TrainConfig config;
  bool expert = false;  // scripted expert row, no training
};

struct CompareOptions {
  std::size_t demos = 100;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t episodes = 100;
  std::vector<std::string> regimes{"id", "ood"};
  bool probes = true;  // skipped when fewer than five demonstrations leave no held-out split
};

struct SeedArtifacts {
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  std::vector<double> relevance;  // empty for the bottleneck baseline and expert
  std::optional<ProbeReport> probe;
};

struct MethodReport {
  std::string label;
  std::string method;
  std::vector<RegimeStat> regimes;
  std::vector<SeedArtifacts> seeds;
};

struct EvalReport {
  EnvSpec env;
  CompareOptions options;
  std::vector<MethodReport> methods;

  const MethodReport& method(const std::string& label) const;
  const RegimeStat& cell(const std::string& label, const std::string& regime) const;
};

// For each seed: one demonstration set shared by all methods, one training
// run per method, then evaluation with seeds shared across methods.
EvalReport compare(const std::vector<MethodEntry>& methods, const EnvSpec& env,
                   const CompareOptions& options);

// Evaluation seeds used by compare() for training seed `seed`.
std::uint64_t compare_eval_seed(std::uint64_t seed, const std::string& regime);

// Rows = methods; columns <regime>_mean,<regime>_std for each regime.
void write_table_csv(std::ostream& out, const EvalReport& report);
// method,regime,seed_index,episodes,successes,rate
void write_cells_csv(std::ostream& out, const EvalReport& report);
// method,seed,index,relevance,relevant
void write_relevance_heatmap_csv(std::ostream& out, const EvalReport& report);
// method,seed,action_r2,relevant_r2,irrelevant_r2,degenerate
void write_probe_csv(std::ostream& out, const EvalReport& report);
std::string report_to_json(const EvalReport& report);

// regime,mean,std,episodes,successes,nonfinite,seeds
void write_regime_csv(std::ostream& out, const std::vector<RegimeStat>& stats);
std::string regimes_to_json(const std::vector<RegimeStat>& stats);

}  // namespace maskgrad
