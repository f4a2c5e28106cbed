#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "maskgrad/rng.hpp"

namespace maskgrad {

enum class Task { kReach, kPush };

std::string to_string(Task t);
Task parse_task(const std::string& s);

using Vec2 = std::array<double, 2>;

// Planar point-mass task with a disentangled state. Layout:
//   [agent (2), goal (2), object (2, Push only), distractors (2 each),
//    nuisance scalars (1 each)]
// Agent, goal and object form the relevant set; the rest is irrelevant.
struct EnvSpec {
  Task task = Task::kReach;
  std::size_t distractors = 4;
  std::size_t nuisance = 4;
  double max_speed = 0.05;  // metres per step
  double dt = 1.0;
  std::size_t horizon = 100;
  double success_radius = 0.05;
  double gain = 1.0;

  // Centres of the relevant-feature sampling discs.
  Vec2 agent_center{-0.2, -0.2};
  Vec2 goal_center{0.2, 0.2};
  Vec2 object_center{0.0, 0.0};

  // Push contact model.
  double contact_offset = 0.03;
  double contact_radius = 0.045;
  double align_tolerance = 0.01;

  static EnvSpec reach();
  static EnvSpec push();

  std::size_t state_dim() const;
  std::size_t action_dim() const { return 2; }

  std::size_t agent_index() const { return 0; }
  std::size_t goal_index() const { return 2; }
  std::size_t object_index() const { return 4; }  // Push only
  std::size_t distractor_index(std::size_t i) const;
  std::size_t nuisance_index(std::size_t i) const;

  // Ground-truth relevance layout. Evaluation and reporting only.
  std::vector<std::size_t> relevant_indices() const;
  std::vector<std::size_t> irrelevant_indices() const;

  void validate() const;

  bool operator==(const EnvSpec&) const = default;
};

struct SamplingRegime {
  std::string name;
  double relevant_radius = 0.1;
  double nuisance_offset = 0.0;
  double nuisance_half_width = 1.0;
};

// "id", "ood", "ood-relevant", "ood-irrelevant".
SamplingRegime regime_by_name(const std::string& name);
std::vector<std::string> regime_names();

using State = std::vector<double>;
using Action = std::vector<double>;
using PolicyFn = std::function<Action(std::span<const double>)>;

State reset(const EnvSpec& env, const SamplingRegime& regime, Rng& rng);
State step(const EnvSpec& env, std::span<const double> s, std::span<const double> a);
// Reads only relevant coordinates.
Action expert_action(const EnvSpec& env, std::span<const double> s);
// Task target (agent for Reach, object for Push) within the success radius of the goal.
bool is_success(const EnvSpec& env, std::span<const double> s);

struct Trajectory {
  std::vector<State> states;    // states[t] is the input of actions[t]
  std::vector<Action> actions;
  bool success = false;
  bool nonfinite_action = false;
  std::uint64_t seed = 0;
};

struct Dataset {
  EnvSpec env;
  std::string regime = "id";
  std::uint64_t seed = 0;
  std::size_t discarded = 0;
  std::vector<Trajectory> trajectories;
  // Relevance layout as recorded in the file header. Only read by
  // evaluation and reporting code.
  std::vector<std::size_t> declared_relevant;

  std::size_t pair_count() const;
};

// `count` successful expert episodes. Throws ExpertFailure if more than
// 10% of attempted episodes fail.
Dataset generate_demonstrations(const EnvSpec& env, const SamplingRegime& regime,
                                std::size_t count, std::uint64_t seed);

Trajectory rollout(const EnvSpec& env, const SamplingRegime& regime, const PolicyFn& policy,
                   std::uint64_t seed);

struct EvalResult {
  std::size_t episodes = 0;
  std::size_t successes = 0;
  std::size_t nonfinite = 0;
  double rate() const {
    return episodes ? static_cast<double>(successes) / static_cast<double>(episodes) : 0.0;
  }
};

// Episode i uses seed derive_seed(seed, i).
EvalResult evaluate(const EnvSpec& env, const SamplingRegime& regime, const PolicyFn& policy,
                    std::size_t episodes, std::uint64_t seed);

}  // namespace maskgrad
