#include <gtest/gtest.h>

#include <cmath>

#include "maskgrad/errors.hpp"
#include "maskgrad/policy.hpp"
#include "maskgrad/world.hpp"
#include "support.hpp"

namespace maskgrad {
namespace {

double dist(std::span<const double> s, std::size_t i, Vec2 c) {
  return std::hypot(s[i] - c[0], s[i + 1] - c[1]);
}

TEST(EnvSpec, DefaultLayouts) {
  const EnvSpec reach = EnvSpec::reach();
  EXPECT_EQ(reach.state_dim(), 16u);
  EXPECT_EQ(reach.relevant_indices(), (std::vector<std::size_t>{0, 1, 2, 3}));
  EXPECT_EQ(reach.irrelevant_indices().size(), 12u);
  EXPECT_EQ(reach.distractor_index(0), 4u);
  EXPECT_EQ(reach.nuisance_index(0), 12u);
  const EnvSpec push = EnvSpec::push();
  EXPECT_EQ(push.state_dim(), 18u);
  EXPECT_EQ(push.relevant_indices(), (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(EnvSpec, RelevantAndIrrelevantPartitionIndices) {
  for (std::size_t d = 0; d < 5; ++d) {
    for (std::size_t b = 0; b < 5; ++b) {
      for (Task task : {Task::kReach, Task::kPush}) {
        EnvSpec env;
        env.task = task;
        env.distractors = d;
        env.nuisance = b;
        std::vector<int> seen(env.state_dim(), 0);
        for (std::size_t i : env.relevant_indices()) ++seen.at(i);
        for (std::size_t i : env.irrelevant_indices()) ++seen.at(i);
        for (int c : seen) EXPECT_EQ(c, 1);
      }
    }
  }
}

TEST(Regimes, NamesAndParameters) {
  EXPECT_EQ(regime_by_name("id").relevant_radius, 0.1);
  EXPECT_EQ(regime_by_name("ood").relevant_radius, 0.2);
  EXPECT_EQ(regime_by_name("ood").nuisance_offset, 2.0);
  EXPECT_EQ(regime_by_name("ood-relevant").nuisance_offset, 0.0);
  EXPECT_EQ(regime_by_name("ood-irrelevant").relevant_radius, 0.1);
  EXPECT_THROW(regime_by_name("OOD"), ConfigError);
  EXPECT_THROW(parse_task("rotate"), ConfigError);
}

TEST(Reset, DeterministicUnderSeed) {
  const EnvSpec env = EnvSpec::push();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng a(seed), b(seed);
    EXPECT_EQ(reset(env, regime_by_name("ood"), a), reset(env, regime_by_name("ood"), b));
  }
}

TEST(Reset, RelevantFeaturesWithinRegimeRadius) {
  const EnvSpec env = EnvSpec::push();
  Rng rng(1);
  for (const char* name : {"id", "ood", "ood-relevant", "ood-irrelevant"}) {
    const SamplingRegime regime = regime_by_name(name);
    for (int trial = 0; trial < 500; ++trial) {
      const State s = reset(env, regime, rng);
      EXPECT_LE(dist(s, env.agent_index(), env.agent_center), regime.relevant_radius);
      EXPECT_LE(dist(s, env.goal_index(), env.goal_center), regime.relevant_radius);
      EXPECT_LE(dist(s, env.object_index(), env.object_center), regime.relevant_radius);
    }
  }
}

TEST(Reset, NuisanceDistributions) {
  const EnvSpec env = EnvSpec::reach();
  Rng rng(2);
  double id_sum = 0.0, ood_sum = 0.0;
  std::size_t count = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const State id = reset(env, regime_by_name("id"), rng);
    const State ood = reset(env, regime_by_name("ood"), rng);
    for (std::size_t j : env.irrelevant_indices()) {
      EXPECT_GE(id[j], -1.0);
      EXPECT_LE(id[j], 1.0);
      EXPECT_GE(ood[j], 1.0);
      EXPECT_LE(ood[j], 3.0);
      id_sum += id[j];
      ood_sum += ood[j];
      ++count;
    }
  }
  EXPECT_NEAR(ood_sum / static_cast<double>(count), 2.0, 0.05);
  EXPECT_NEAR(id_sum / static_cast<double>(count), 0.0, 0.05);
}

TEST(Step, Examples) {
  EnvSpec env = EnvSpec::reach();
  env.max_speed = 0.5;
  State s(env.state_dim(), 0.0);
  for (std::size_t j : env.irrelevant_indices()) s[j] = 0.37 * static_cast<double>(j);
  const State still = step(env, s, std::vector<double>{0, 0});
  EXPECT_EQ(still, s);
  const State moved = step(env, s, std::vector<double>{1, 0});
  EXPECT_EQ(moved[0], 0.5);
  EXPECT_EQ(moved[1], 0.0);
  for (std::size_t j : env.irrelevant_indices()) EXPECT_EQ(moved[j], s[j]);
  EXPECT_THROW(step(env, std::vector<double>{0, 0}, std::vector<double>{0, 0}), ShapeError);
}

TEST(Step, IrrelevantDimsNeverChange) {
  Rng rng(3);
  for (const EnvSpec& env : {EnvSpec::reach(), EnvSpec::push()}) {
    for (int trial = 0; trial < 200; ++trial) {
      const State s = reset(env, regime_by_name("ood"), rng);
      const State next = step(env, s, testing::random_vector(rng, 2, -1, 1));
      for (std::size_t j : env.irrelevant_indices()) EXPECT_EQ(next[j], s[j]);
      EXPECT_LE(std::hypot(next[0] - s[0], next[1] - s[1]), env.max_speed * env.dt + 1e-15);
    }
  }
}

TEST(Step, PushMovesObjectOnlyInContact) {
  EnvSpec env = EnvSpec::push();
  State s(env.state_dim(), 0.0);
  // agent (0,0), goal (1,0), object (0.03,0): agent directly behind object.
  s[2] = 1.0;
  s[4] = 0.03;
  const State pushed = step(env, s, std::vector<double>{0.05, 0});
  EXPECT_NEAR(pushed[4], 0.08, 1e-15);
  const State backing_off = step(env, s, std::vector<double>{-0.05, 0});
  EXPECT_EQ(backing_off[4], 0.03);
  s[4] = 0.5;  // far away
  EXPECT_EQ(step(env, s, std::vector<double>{0.05, 0})[4], 0.5);
}

TEST(Expert, Examples) {
  EnvSpec env = EnvSpec::reach();
  env.max_speed = 0.5;
  State s(env.state_dim(), 0.0);
  s[2] = 1.0;
  EXPECT_EQ(expert_action(env, s), (Action{0.5, 0.0}));
  s[0] = 1.0;
  EXPECT_EQ(expert_action(env, s), (Action{0.0, 0.0}));
}

TEST(Expert, InvariantToIrrelevantPerturbations) {
  Rng rng(4);
  for (const EnvSpec& env : {EnvSpec::reach(), EnvSpec::push()}) {
    for (int trial = 0; trial < 100; ++trial) {
      const State s = reset(env, regime_by_name("id"), rng);
      State perturbed = s;
      for (std::size_t j : env.irrelevant_indices()) perturbed[j] += normal(rng, 0.0, 10.0);
      EXPECT_EQ(expert_action(env, s), expert_action(env, perturbed));
    }
  }
}

TEST(Expert, RegimeIndependentFunctions) {
  // step and expert_action take no regime; the same state gives the same
  // result regardless of which regime produced it.
  Rng a(5), b(5);
  const EnvSpec env = EnvSpec::push();
  const State s_id = reset(env, regime_by_name("id"), a);
  State s_ood = reset(env, regime_by_name("ood-irrelevant"), b);
  for (std::size_t i : env.relevant_indices()) EXPECT_EQ(s_id[i], s_ood[i]);
  EXPECT_EQ(expert_action(env, s_id), expert_action(env, s_ood));
}

TEST(Demonstrations, DeterministicAndSuccessful) {
  for (const EnvSpec& env : {EnvSpec::reach(), EnvSpec::push()}) {
    const Dataset a = generate_demonstrations(env, regime_by_name("id"), 30, 7);
    const Dataset b = generate_demonstrations(env, regime_by_name("id"), 30, 7);
    ASSERT_EQ(a.trajectories.size(), 30u);
    EXPECT_EQ(a.pair_count(), b.pair_count());
    for (std::size_t t = 0; t < 30; ++t) {
      EXPECT_TRUE(a.trajectories[t].success);
      EXPECT_EQ(a.trajectories[t].states, b.trajectories[t].states);
      EXPECT_EQ(a.trajectories[t].actions, b.trajectories[t].actions);
      EXPECT_LE(a.trajectories[t].actions.size(), env.horizon);
    }
  }
}

TEST(Demonstrations, StatesFollowDynamics) {
  const EnvSpec env = EnvSpec::push();
  const Dataset data = generate_demonstrations(env, regime_by_name("ood"), 20, 3);
  for (const Trajectory& traj : data.trajectories) {
    for (std::size_t t = 0; t + 1 < traj.states.size(); ++t) {
      EXPECT_EQ(step(env, traj.states[t], traj.actions[t]), traj.states[t + 1]);
      EXPECT_EQ(traj.actions[t], expert_action(env, traj.states[t]));
    }
    const State last = step(env, traj.states.back(), traj.actions.back());
    EXPECT_TRUE(is_success(env, last));
  }
}

TEST(Demonstrations, ZeroCountIsEmpty) {
  const Dataset data = generate_demonstrations(EnvSpec::reach(), regime_by_name("id"), 0, 1);
  EXPECT_TRUE(data.trajectories.empty());
  EXPECT_EQ(data.pair_count(), 0u);
}

TEST(Demonstrations, ExpertFailureIsReported) {
  EnvSpec env = EnvSpec::reach();
  env.horizon = 2;  // too short to reach the goal
  EXPECT_THROW(generate_demonstrations(env, regime_by_name("id"), 10, 0), ExpertFailure);
}

TEST(Rollout, ExpertSucceedsAndZeroPolicyFails) {
  const EnvSpec env = EnvSpec::reach();
  const PolicyFn expert = [&](std::span<const double> s) { return expert_action(env, s); };
  const PolicyFn zero = [](std::span<const double>) { return Action{0.0, 0.0}; };
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    EXPECT_TRUE(rollout(env, regime_by_name("ood"), expert, seed).success);
    const Trajectory t = rollout(env, regime_by_name("id"), zero, seed);
    EXPECT_FALSE(t.success);
    EXPECT_EQ(t.actions.size(), env.horizon);
  }
}

TEST(Rollout, NonFiniteActionFailsAndIsFlagged) {
  const EnvSpec env = EnvSpec::reach();
  const PolicyFn bad = [](std::span<const double>) { return Action{std::nan(""), 0.0}; };
  const Trajectory t = rollout(env, regime_by_name("id"), bad, 0);
  EXPECT_FALSE(t.success);
  EXPECT_TRUE(t.nonfinite_action);
  const EvalResult r = evaluate(env, regime_by_name("id"), bad, 5, 0);
  EXPECT_EQ(r.nonfinite, 5u);
  EXPECT_EQ(r.rate(), 0.0);
}

TEST(Evaluate, ExpertAndZeroPolicy) {
  for (const EnvSpec& env : {EnvSpec::reach(), EnvSpec::push()}) {
    const PolicyFn expert = [&](std::span<const double> s) { return expert_action(env, s); };
    const PolicyFn zero = [](std::span<const double>) { return Action{0.0, 0.0}; };
    for (const std::string& regime : regime_names()) {
      EXPECT_EQ(evaluate(env, regime_by_name(regime), expert, 100, 9).rate(), 1.0) << regime;
      // Push OOD discs for object and goal overlap, so only the narrow
      // regimes guarantee a start outside the success radius.
      if (env.task == Task::kPush && regime_by_name(regime).relevant_radius > 0.1) continue;
      EXPECT_EQ(evaluate(env, regime_by_name(regime), zero, 100, 9).rate(), 0.0) << regime;
    }
  }
  EXPECT_THROW(evaluate(EnvSpec::reach(), regime_by_name("id"),
                        [](std::span<const double>) { return Action{0.0, 0.0}; }, 0, 0),
               ConfigError);
}

TEST(Evaluate, UntrainedPolicyRarelySucceeds) {
  const EnvSpec env = EnvSpec::reach();
  Rng rng(13);
  const PolicyParams p = init_policy({env.state_dim(), 128, 128, 2}, rng);
  const PolicyFn policy = [&](std::span<const double> s) { return policy_forward(p, s); };
  EXPECT_LT(evaluate(env, regime_by_name("id"), policy, 100, 1).rate(), 0.05);
}

TEST(Evaluate, DeterministicUnderSeed) {
  const EnvSpec env = EnvSpec::reach();
  Rng rng(14);
  const PolicyParams p = init_policy({env.state_dim(), 8, 2}, rng);
  const PolicyFn policy = [&](std::span<const double> s) {
    auto a = policy_forward(p, s);
    for (double& x : a) x *= 10.0;
    return a;
  };
  const EvalResult a = evaluate(env, regime_by_name("ood"), policy, 50, 3);
  const EvalResult b = evaluate(env, regime_by_name("ood"), policy, 50, 3);
  EXPECT_EQ(a.successes, b.successes);
}

}  // namespace
}  // namespace maskgrad
