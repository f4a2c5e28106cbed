#include "maskgrad/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "maskgrad/errors.hpp"

namespace maskgrad {

using nlohmann::json;

namespace {

json vec2_json(const Vec2& v) { return json::array({v[0], v[1]}); }

Vec2 vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

json env_json(const EnvSpec& env) {
  return json{{"task", to_string(env.task)},
              {"distractors", env.distractors},
              {"nuisance", env.nuisance},
              {"max_speed", env.max_speed},
              {"dt", env.dt},
              {"horizon", env.horizon},
              {"success_radius", env.success_radius},
              {"gain", env.gain},
              {"agent_center", vec2_json(env.agent_center)},
              {"goal_center", vec2_json(env.goal_center)},
              {"object_center", vec2_json(env.object_center)},
              {"contact_offset", env.contact_offset},
              {"contact_radius", env.contact_radius},
              {"align_tolerance", env.align_tolerance},
              {"state_dim", env.state_dim()},
              {"action_dim", env.action_dim()},
              {"relevant", env.relevant_indices()}};
}

EnvSpec env_from(const json& j) {
  EnvSpec env;
  env.task = parse_task(j.at("task").get<std::string>());
  env.distractors = j.at("distractors").get<std::size_t>();
  env.nuisance = j.at("nuisance").get<std::size_t>();
  env.max_speed = j.at("max_speed").get<double>();
  env.dt = j.at("dt").get<double>();
  env.horizon = j.at("horizon").get<std::size_t>();
  env.success_radius = j.at("success_radius").get<double>();
  env.gain = j.at("gain").get<double>();
  env.agent_center = vec2_from(j.at("agent_center"));
  env.goal_center = vec2_from(j.at("goal_center"));
  env.object_center = vec2_from(j.at("object_center"));
  env.contact_offset = j.at("contact_offset").get<double>();
  env.contact_radius = j.at("contact_radius").get<double>();
  env.align_tolerance = j.at("align_tolerance").get<double>();
  if (j.contains("state_dim") && j.at("state_dim").get<std::size_t>() != env.state_dim()) {
    throw ConfigError("env header state_dim disagrees with its layout");
  }
  env.validate();
  return env;
}

json tensor_json(const Tensor& t) { return json{{"shape", t.shape()}, {"values", t.storage()}}; }

Tensor tensor_from(const json& j) {
  return Tensor(j.at("shape").get<Tensor::Shape>(), j.at("values").get<std::vector<double>>());
}

json tensors_json(const std::vector<Tensor>& ts) {
  json out = json::array();
  for (const Tensor& t : ts) out.push_back(tensor_json(t));
  return out;
}

std::vector<Tensor> tensors_from(const json& j) {
  std::vector<Tensor> out;
  for (const json& t : j) out.push_back(tensor_from(t));
  return out;
}

json config_json(const TrainConfig& c) {
  return json{{"method", to_string(c.method)},
              {"epochs", c.epochs},
              {"batch", c.batch},
              {"lr", c.adam.lr},
              {"beta1", c.adam.beta1},
              {"beta2", c.adam.beta2},
              {"adam_eps", c.adam.eps},
              {"norm", to_string(c.normalizer)},
              {"mask_variant", to_string(c.variant)},
              {"mask_init_std", c.mask_init.stddev},
              {"encoder_k", c.mask_init.encoder_k},
              {"encoder_hidden", c.mask_init.encoder_hidden},
              {"hidden", c.hidden},
              {"seed", c.seed},
              {"latent_dim", c.latent_dim},
              {"vae_hidden", c.encoder_hidden},
              {"kl_weight", c.kl_weight}};
}

TrainConfig config_from(const json& j) {
  TrainConfig c;
  c.method = parse_method(j.at("method").get<std::string>());
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch = j.at("batch").get<std::size_t>();
  c.adam.lr = j.at("lr").get<double>();
  c.adam.beta1 = j.at("beta1").get<double>();
  c.adam.beta2 = j.at("beta2").get<double>();
  c.adam.eps = j.at("adam_eps").get<double>();
  c.normalizer = parse_normalizer(j.at("norm").get<std::string>());
  c.variant = parse_mask_variant(j.at("mask_variant").get<std::string>());
  c.mask_init.stddev = j.at("mask_init_std").get<double>();
  c.mask_init.encoder_k = j.at("encoder_k").get<std::size_t>();
  c.mask_init.encoder_hidden = j.at("encoder_hidden").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.encoder_hidden = j.at("vae_hidden").get<std::size_t>();
  c.kl_weight = j.at("kl_weight").get<double>();
  return c;
}

}  // namespace

std::string env_to_json(const EnvSpec& env) { return env_json(env).dump(); }

void write_dataset(std::ostream& out, const Dataset& data) {
  json header{{"record", "header"},
              {"format", "maskgrad-dataset"},
              {"version", 1},
              {"env", env_json(data.env)},
              {"regime", data.regime},
              {"seed", data.seed},
              {"trajectories", data.trajectories.size()},
              {"pairs", data.pair_count()},
              {"discarded", data.discarded}};
  if (!data.declared_relevant.empty()) header["env"]["relevant"] = data.declared_relevant;
  out << header.dump() << '\n';
  for (std::size_t t = 0; t < data.trajectories.size(); ++t) {
    const Trajectory& traj = data.trajectories[t];
    for (std::size_t k = 0; k < traj.actions.size(); ++k) {
      json rec{{"record", "pair"},      {"traj", t},          {"step", k},
               {"regime", data.regime}, {"seed", traj.seed},  {"success", traj.success},
               {"s", traj.states[k]},   {"a", traj.actions[k]}};
      out << rec.dump() << '\n';
    }
  }
}

Dataset read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("dataset: empty file");
  Dataset data;
  std::size_t expected_trajectories = 0;
  try {
    const json header = json::parse(line);
    if (header.value("format", "") != "maskgrad-dataset") {
      throw ConfigError("dataset: missing maskgrad-dataset header");
    }
    data.env = env_from(header.at("env"));
    data.declared_relevant = header.at("env").value("relevant", std::vector<std::size_t>{});
    data.regime = header.at("regime").get<std::string>();
    data.seed = header.at("seed").get<std::uint64_t>();
    data.discarded = header.at("discarded").get<std::size_t>();
    expected_trajectories = header.at("trajectories").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dataset header: ") + e.what());
  }
  data.trajectories.resize(expected_trajectories);
  const std::size_t n = data.env.state_dim(), m = data.env.action_dim();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      const std::size_t t = rec.at("traj").get<std::size_t>();
      const std::size_t k = rec.at("step").get<std::size_t>();
      if (t >= data.trajectories.size()) throw ConfigError("trajectory id out of range");
      Trajectory& traj = data.trajectories[t];
      if (k != traj.actions.size()) throw ConfigError("steps out of order");
      auto s = rec.at("s").get<std::vector<double>>();
      auto a = rec.at("a").get<std::vector<double>>();
      if (s.size() != n || a.size() != m) {
        throw ConfigError("pair does not match the header layout (state " +
                          std::to_string(s.size()) + ", expected " + std::to_string(n) + ")");
      }
      traj.seed = rec.at("seed").get<std::uint64_t>();
      traj.success = rec.at("success").get<bool>();
      traj.states.push_back(std::move(s));
      traj.actions.push_back(std::move(a));
    } catch (const json::exception& e) {
      throw ConfigError("dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return data;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ostringstream out;
  write_dataset(out, data);
  write_text_file(path, out.str());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  return read_dataset(in);
}

Checkpoint make_checkpoint(const Model& model, const TrainConfig& config) {
  return Checkpoint{model, config, config_digest(config), config.seed};
}

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const Model& m = ckpt.model;
  json mask{{"variant", to_string(m.mask.variant)},
            {"norm", to_string(m.mask.normalizer)},
            {"n", m.mask.n},
            {"encoder_k", m.mask.encoder_k},
            {"encoder_hidden", m.mask.encoder_hidden},
            {"frozen", m.mask.frozen()},
            {"theta", tensors_json(m.mask.theta)}};
  json policy{{"sizes", m.policy.sizes},
              {"activation", to_string(m.policy.activation)},
              {"tensors", tensors_json(m.policy.tensors)}};
  json doc{{"format", "maskgrad-checkpoint"},
           {"version", 1},
           {"method", to_string(m.method)},
           {"state_dim", m.state_dim},
           {"action_dim", m.action_dim},
           {"mask", mask},
           {"policy", policy},
           {"config", config_json(ckpt.config)},
           {"config_digest", ckpt.config_digest},
           {"seed", ckpt.seed}};
  if (m.encoder) {
    doc["encoder"] = json{{"state_dim", m.encoder->state_dim},
                          {"hidden", m.encoder->hidden},
                          {"latent_dim", m.encoder->latent_dim},
                          {"tensors", tensors_json(m.encoder->tensors)}};
  }
  return doc.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("format", "") != "maskgrad-checkpoint") {
      throw ConfigError("not a maskgrad checkpoint");
    }
    Checkpoint ckpt;
    Model& m = ckpt.model;
    m.method = parse_method(doc.at("method").get<std::string>());
    m.state_dim = doc.at("state_dim").get<std::size_t>();
    m.action_dim = doc.at("action_dim").get<std::size_t>();
    const json& mask = doc.at("mask");
    m.mask.variant = parse_mask_variant(mask.at("variant").get<std::string>());
    m.mask.normalizer = parse_normalizer(mask.at("norm").get<std::string>());
    m.mask.n = mask.at("n").get<std::size_t>();
    m.mask.encoder_k = mask.at("encoder_k").get<std::size_t>();
    m.mask.encoder_hidden = mask.at("encoder_hidden").get<std::size_t>();
    m.mask.theta = tensors_from(mask.at("theta"));
    const json& policy = doc.at("policy");
    m.policy.sizes = policy.at("sizes").get<std::vector<std::size_t>>();
    m.policy.activation = parse_activation(policy.at("activation").get<std::string>());
    m.policy.tensors = tensors_from(policy.at("tensors"));
    if (doc.contains("encoder")) {
      const json& enc = doc.at("encoder");
      m.encoder = VaeEncoder{enc.at("state_dim").get<std::size_t>(),
                             enc.at("hidden").get<std::size_t>(),
                             enc.at("latent_dim").get<std::size_t>(), tensors_from(enc.at("tensors"))};
    }
    m.validate();
    ckpt.config = config_from(doc.at("config"));
    ckpt.config_digest = doc.at("config_digest").get<std::string>();
    ckpt.seed = doc.at("seed").get<std::uint64_t>();
    return ckpt;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text_file(path, checkpoint_to_json(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace maskgrad
