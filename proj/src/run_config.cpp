#include "maskgrad/run_config.hpp"

#include <charconv>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "maskgrad/errors.hpp"
#include "maskgrad/io.hpp"

namespace maskgrad {

namespace {

void check_keys(const toml::table& table, const std::string& where,
                const std::set<std::string>& allowed) {
  for (const auto& [key, node] : table) {
    if (!allowed.count(std::string(key.str()))) {
      throw ConfigError("unknown key '" + std::string(key.str()) + "' in " + where);
    }
  }
}

template <typename T>
std::optional<T> get(const toml::table& table, const std::string& key, const std::string& where) {
  const toml::node* node = table.get(key);
  if (!node) return std::nullopt;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node->value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (auto v = node->value<std::string>()) return *v;
  } else {
    if (auto v = node->value<std::int64_t>()) {
      if (*v < 0) throw ConfigError(where + "." + key + " must be non-negative");
      return static_cast<T>(*v);
    }
  }
  throw ConfigError(where + "." + key + " has the wrong type");
}

template <typename T>
void assign(const toml::table& table, const std::string& key, const std::string& where, T& out) {
  if (auto v = get<T>(table, key, where)) out = *v;
}

template <typename T>
std::vector<T> get_array(const toml::table& table, const std::string& key,
                         const std::string& where) {
  const toml::array* arr = table.get_as<toml::array>(key);
  if (!arr) throw ConfigError(where + "." + key + " must be an array");
  std::vector<T> out;
  for (const toml::node& node : *arr) {
    if constexpr (std::is_same_v<T, std::string>) {
      auto v = node.value<std::string>();
      if (!v) throw ConfigError(where + "." + key + " must hold strings");
      out.push_back(*v);
    } else if constexpr (std::is_same_v<T, double>) {
      auto v = node.value<double>();
      if (!v) throw ConfigError(where + "." + key + " must hold numbers");
      out.push_back(*v);
    } else {
      auto v = node.value<std::int64_t>();
      if (!v || *v < 0) throw ConfigError(where + "." + key + " must hold non-negative integers");
      out.push_back(static_cast<T>(*v));
    }
  }
  return out;
}

const toml::table* section(const toml::table& root, const std::string& name) {
  const toml::node* node = root.get(name);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError("'" + name + "' must be a table");
  return node->as_table();
}

}  // namespace

std::filesystem::path RunConfig::dataset_path() const {
  return dataset.empty() ? out / "dataset.jsonl" : dataset;
}

std::string RunConfig::checkpoint_ref() const {
  return checkpoint.empty() ? (out / "checkpoint.json").string() : checkpoint;
}

std::string RunConfig::display_label() const {
  return label.empty() ? to_string(train.method) : label;
}

void RunConfig::validate() const {
  env.validate();
  train.validate();
  regime_by_name(demo_regime);
  if (regimes.empty()) throw ConfigError("at least one evaluation regime is required");
  for (const std::string& r : regimes) regime_by_name(r);
  if (episodes == 0) throw ConfigError("episodes must be positive");
  if (eval_seeds == 0) throw ConfigError("eval_seeds must be positive");
  if (out.empty()) throw ConfigError("out must not be empty");
}

RunConfig parse_run_config(const std::string& toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error at line " << e.source().begin.line << ": " << e.description();
    throw ConfigError(msg.str());
  }
  check_keys(root, "config", {"seed", "out", "label", "env", "train", "eval", "sweep"});

  RunConfig c;
  if (auto v = get<std::uint64_t>(root, "seed", "config")) c.seed = *v;
  if (auto v = get<std::string>(root, "out", "config")) c.out = *v;
  assign(root, "label", "config", c.label);

  if (const toml::table* env = section(root, "env")) {
    check_keys(*env, "[env]",
               {"task", "distractors", "nuisance", "horizon", "max_speed", "success_radius",
                "demos", "regime", "dataset"});
    if (auto v = get<std::string>(*env, "task", "env")) {
      c.env = parse_task(*v) == Task::kPush ? EnvSpec::push() : EnvSpec::reach();
    }
    assign(*env, "distractors", "env", c.env.distractors);
    assign(*env, "nuisance", "env", c.env.nuisance);
    assign(*env, "horizon", "env", c.env.horizon);
    assign(*env, "max_speed", "env", c.env.max_speed);
    assign(*env, "success_radius", "env", c.env.success_radius);
    assign(*env, "demos", "env", c.demos);
    assign(*env, "regime", "env", c.demo_regime);
    if (auto v = get<std::string>(*env, "dataset", "env")) c.dataset = *v;
  }

  if (const toml::table* tr = section(root, "train")) {
    check_keys(*tr, "[train]",
               {"method", "norm", "mask_variant", "epochs", "batch", "lr", "hidden", "latent_dim",
                "encoder_hidden", "kl_weight", "mask_init_std"});
    TrainConfig& t = c.train;
    if (auto v = get<std::string>(*tr, "method", "train")) t.method = parse_method(*v);
    if (auto v = get<std::string>(*tr, "norm", "train")) t.normalizer = parse_normalizer(*v);
    if (auto v = get<std::string>(*tr, "mask_variant", "train")) {
      t.variant = parse_mask_variant(*v);
    }
    assign(*tr, "epochs", "train", t.epochs);
    assign(*tr, "batch", "train", t.batch);
    assign(*tr, "lr", "train", t.adam.lr);
    if (tr->contains("hidden")) t.hidden = get_array<std::size_t>(*tr, "hidden", "train");
    assign(*tr, "latent_dim", "train", t.latent_dim);
    assign(*tr, "encoder_hidden", "train", t.encoder_hidden);
    assign(*tr, "kl_weight", "train", t.kl_weight);
    assign(*tr, "mask_init_std", "train", t.mask_init.stddev);
  }

  if (const toml::table* ev = section(root, "eval")) {
    check_keys(*ev, "[eval]", {"regimes", "episodes", "eval_seeds", "checkpoint"});
    if (ev->contains("regimes")) c.regimes = get_array<std::string>(*ev, "regimes", "eval");
    assign(*ev, "episodes", "eval", c.episodes);
    assign(*ev, "eval_seeds", "eval", c.eval_seeds);
    assign(*ev, "checkpoint", "eval", c.checkpoint);
  }

  if (const toml::table* sw = section(root, "sweep")) {
    check_keys(*sw, "[sweep]", {"kl_weights"});
    if (sw->contains("kl_weights")) c.kl_weights = get_array<double>(*sw, "kl_weights", "sweep");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("config file not found: " + path.string());
  }
  return parse_run_config(read_text_file(path));
}

std::uint64_t resolve_seed(const RunConfig& config, const char* env_value) {
  if (config.seed) return *config.seed;
  if (env_value && *env_value) {
    const std::string text(env_value);
    std::uint64_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || end != text.data() + text.size()) {
      throw ConfigError("MASKGRAD_SEED is not an unsigned integer: '" + text + "'");
    }
    return value;
  }
  throw ConfigError("no seed given: pass --seed, set seed in the config, or set MASKGRAD_SEED");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw ConfigError("empty item in list '" + text + "'");
    out.push_back(item);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

}  // namespace maskgrad
