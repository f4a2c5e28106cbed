#include "maskgrad/world.hpp"

#include <cmath>
#include <numbers>

#include "maskgrad/errors.hpp"

namespace maskgrad {

std::string to_string(Task t) { return t == Task::kReach ? "reach" : "push"; }

Task parse_task(const std::string& s) {
  if (s == "reach") return Task::kReach;
  if (s == "push") return Task::kPush;
  throw ConfigError("unknown task '" + s + "' (expected reach or push)");
}

EnvSpec EnvSpec::reach() { return EnvSpec{}; }

EnvSpec EnvSpec::push() {
  EnvSpec env;
  env.task = Task::kPush;
  return env;
}

std::size_t EnvSpec::state_dim() const {
  return (task == Task::kPush ? 6 : 4) + 2 * distractors + nuisance;
}

std::size_t EnvSpec::distractor_index(std::size_t i) const {
  return (task == Task::kPush ? 6 : 4) + 2 * i;
}

std::size_t EnvSpec::nuisance_index(std::size_t i) const {
  return (task == Task::kPush ? 6 : 4) + 2 * distractors + i;
}

std::vector<std::size_t> EnvSpec::relevant_indices() const {
  const std::size_t count = task == Task::kPush ? 6 : 4;
  std::vector<std::size_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = i;
  return out;
}

std::vector<std::size_t> EnvSpec::irrelevant_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = relevant_indices().size(); i < state_dim(); ++i) out.push_back(i);
  return out;
}

void EnvSpec::validate() const {
  if (!(max_speed > 0.0) || !(dt > 0.0) || !(success_radius > 0.0) || !(gain > 0.0)) {
    throw ConfigError("env: max_speed, dt, success_radius and gain must be positive");
  }
  if (horizon == 0) throw ConfigError("env: horizon must be >= 1");
}

SamplingRegime regime_by_name(const std::string& name) {
  if (name == "id") return {"id", 0.1, 0.0, 1.0};
  if (name == "ood") return {"ood", 0.2, 2.0, 1.0};
  if (name == "ood-relevant") return {"ood-relevant", 0.2, 0.0, 1.0};
  if (name == "ood-irrelevant") return {"ood-irrelevant", 0.1, 2.0, 1.0};
  throw ConfigError("unknown regime '" + name +
                    "' (expected id, ood, ood-relevant or ood-irrelevant)");
}

std::vector<std::string> regime_names() { return {"id", "ood", "ood-relevant", "ood-irrelevant"}; }

namespace {

Vec2 read2(std::span<const double> s, std::size_t i) { return {s[i], s[i + 1]}; }

void write2(std::span<double> s, std::size_t i, Vec2 v) {
  s[i] = v[0];
  s[i + 1] = v[1];
}

Vec2 sub(Vec2 a, Vec2 b) { return {a[0] - b[0], a[1] - b[1]}; }
double dot(Vec2 a, Vec2 b) { return a[0] * b[0] + a[1] * b[1]; }
double norm(Vec2 a) { return std::hypot(a[0], a[1]); }

// Rescales v so its length does not exceed `limit`.
Vec2 clip(Vec2 v, double limit) {
  const double len = norm(v);
  if (len <= limit) return v;
  return {v[0] * limit / len, v[1] * limit / len};
}

Vec2 sample_disc(Rng& rng, Vec2 center, double radius) {
  const double r = radius * std::sqrt(uniform(rng, 0.0, 1.0));
  const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  return {center[0] + r * std::cos(phi), center[1] + r * std::sin(phi)};
}

void require_state(const EnvSpec& env, std::span<const double> s) {
  if (s.size() != env.state_dim()) {
    throw ShapeError("state has " + std::to_string(s.size()) + " entries, env expects " +
                     std::to_string(env.state_dim()));
  }
}

bool in_contact(const EnvSpec& env, Vec2 agent, Vec2 object, Vec2 goal) {
  const Vec2 toward_object = sub(object, agent);
  if (norm(toward_object) >= env.contact_radius) return false;
  return dot(toward_object, sub(goal, object)) > 0.0;
}

}  // namespace

State reset(const EnvSpec& env, const SamplingRegime& regime, Rng& rng) {
  State s(env.state_dim(), 0.0);
  write2(s, env.agent_index(), sample_disc(rng, env.agent_center, regime.relevant_radius));
  write2(s, env.goal_index(), sample_disc(rng, env.goal_center, regime.relevant_radius));
  if (env.task == Task::kPush) {
    write2(s, env.object_index(), sample_disc(rng, env.object_center, regime.relevant_radius));
  }
  for (std::size_t i = env.relevant_indices().size(); i < s.size(); ++i) {
    s[i] = regime.nuisance_offset +
           uniform(rng, -regime.nuisance_half_width, regime.nuisance_half_width);
  }
  return s;
}

State step(const EnvSpec& env, std::span<const double> s, std::span<const double> a) {
  require_state(env, s);
  if (a.size() != env.action_dim()) throw ShapeError("action must have 2 entries");
  State next(s.begin(), s.end());
  const Vec2 agent = read2(s, env.agent_index());
  const Vec2 velocity = clip({a[0], a[1]}, env.max_speed);
  const Vec2 disp{velocity[0] * env.dt, velocity[1] * env.dt};
  write2(next, env.agent_index(), {agent[0] + disp[0], agent[1] + disp[1]});
  if (env.task == Task::kPush) {
    const Vec2 object = read2(s, env.object_index());
    const Vec2 goal = read2(s, env.goal_index());
    // Quasi-static push: the object follows the agent while the agent is
    // behind it (goal side ahead) and moving into it.
    if (in_contact(env, agent, object, goal) && dot(disp, sub(object, agent)) > 0.0) {
      write2(next, env.object_index(), {object[0] + disp[0], object[1] + disp[1]});
    }
  }
  return next;
}

Action expert_action(const EnvSpec& env, std::span<const double> s) {
  require_state(env, s);
  const Vec2 agent = read2(s, env.agent_index());
  const Vec2 goal = read2(s, env.goal_index());
  Vec2 command;
  if (env.task == Task::kReach) {
    const Vec2 err = sub(goal, agent);
    command = clip({env.gain * err[0], env.gain * err[1]}, env.max_speed);
  } else {
    const Vec2 object = read2(s, env.object_index());
    const Vec2 to_goal = sub(goal, object);
    const double dist = norm(to_goal);
    if (dist == 0.0) return {0.0, 0.0};
    const Vec2 u{to_goal[0] / dist, to_goal[1] / dist};
    const Vec2 waypoint{object[0] - env.contact_offset * u[0], object[1] - env.contact_offset * u[1]};
    const Vec2 to_waypoint = sub(waypoint, agent);
    if (norm(to_waypoint) <= env.align_tolerance) {
      command = clip({env.gain * to_goal[0], env.gain * to_goal[1]}, env.max_speed);
    } else {
      command = clip({env.gain * to_waypoint[0], env.gain * to_waypoint[1]}, env.max_speed);
    }
  }
  return {command[0], command[1]};
}

bool is_success(const EnvSpec& env, std::span<const double> s) {
  require_state(env, s);
  const std::size_t target = env.task == Task::kReach ? env.agent_index() : env.object_index();
  return norm(sub(read2(s, target), read2(s, env.goal_index()))) <= env.success_radius;
}

std::size_t Dataset::pair_count() const {
  std::size_t n = 0;
  for (const auto& t : trajectories) n += t.actions.size();
  return n;
}

namespace {

Trajectory run_episode(const EnvSpec& env, const SamplingRegime& regime, const PolicyFn& policy,
                       std::uint64_t seed) {
  Rng rng(seed);
  Trajectory traj;
  traj.seed = seed;
  State s = reset(env, regime, rng);
  for (std::size_t t = 0; t < env.horizon; ++t) {
    if (is_success(env, s)) {
      traj.success = true;
      return traj;
    }
    Action a = policy(s);
    bool finite = a.size() == env.action_dim();
    for (double x : a) finite = finite && std::isfinite(x);
    if (!finite) {
      traj.nonfinite_action = true;
      traj.success = false;
      return traj;
    }
    State next = step(env, s, a);
    traj.states.push_back(std::move(s));
    traj.actions.push_back(std::move(a));
    s = std::move(next);
  }
  traj.success = is_success(env, s);
  return traj;
}

}  // namespace

Dataset generate_demonstrations(const EnvSpec& env, const SamplingRegime& regime,
                                std::size_t count, std::uint64_t seed) {
  env.validate();
  Dataset data;
  data.env = env;
  data.regime = regime.name;
  data.seed = seed;
  data.declared_relevant = env.relevant_indices();
  const PolicyFn expert = [&env](std::span<const double> s) { return expert_action(env, s); };
  const std::size_t max_attempts = count + count / 10 + 1;
  std::size_t attempt = 0;
  while (data.trajectories.size() < count) {
    if (attempt >= max_attempts) {
      throw ExpertFailure("expert failed " + std::to_string(data.discarded) + " of " +
                          std::to_string(attempt) +
                          " episodes; task and horizon are mismatched");
    }
    Trajectory traj = run_episode(env, regime, expert, derive_seed(seed, attempt++));
    if (traj.success) {
      data.trajectories.push_back(std::move(traj));
    } else {
      ++data.discarded;
    }
  }
  if (attempt > 0 && 10 * data.discarded > attempt) {
    throw ExpertFailure("expert failure rate above 10% (" + std::to_string(data.discarded) +
                        " of " + std::to_string(attempt) + ")");
  }
  return data;
}

Trajectory rollout(const EnvSpec& env, const SamplingRegime& regime, const PolicyFn& policy,
                   std::uint64_t seed) {
  return run_episode(env, regime, policy, seed);
}

EvalResult evaluate(const EnvSpec& env, const SamplingRegime& regime, const PolicyFn& policy,
                    std::size_t episodes, std::uint64_t seed) {
  if (episodes == 0) throw ConfigError("evaluate: episodes must be >= 1");
  EvalResult result;
  result.episodes = episodes;
  for (std::size_t i = 0; i < episodes; ++i) {
    const Trajectory t = run_episode(env, regime, policy, derive_seed(seed, i));
    if (t.success) ++result.successes;
    if (t.nonfinite_action) ++result.nonfinite;
  }
  return result;
}

}  // namespace maskgrad
