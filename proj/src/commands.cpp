#include "maskgrad/commands.hpp"

#include <ostream>
#include <sstream>

#include "maskgrad/errors.hpp"
#include "maskgrad/format.hpp"
#include "maskgrad/io.hpp"

namespace maskgrad {

namespace {

std::uint64_t seed_of(const RunConfig& config) { return resolve_seed(config, nullptr); }

std::vector<std::uint64_t> base_seeds(const RunConfig& config) {
  std::vector<std::uint64_t> seeds;
  for (std::size_t k = 0; k < config.eval_seeds; ++k) seeds.push_back(seed_of(config) + k);
  return seeds;
}

template <typename Writer>
void write_with(const std::filesystem::path& path, Writer&& writer) {
  std::ostringstream out;
  writer(out);
  write_text_file(path, out.str());
}

void write_mask_outputs(const RunConfig& config, const Controller& controller) {
  const std::vector<std::size_t> relevant = config.env.relevant_indices();
  write_with(config.out / "mask.txt",
             [&](std::ostream& o) { write_mask_matrix(o, controller.mask()); });
  write_with(config.out / "relevance.csv",
             [&](std::ostream& o) { write_relevance_csv(o, controller.mask(), relevant); });
}

void print_table(std::ostream& log, const std::vector<RegimeStat>& stats) {
  for (const RegimeStat& r : stats) {
    log << "  " << r.regime << ": " << format_fixed(r.mean, 3) << " +/- " << format_fixed(r.std, 3)
        << " (" << r.successes << "/" << r.episodes << ")\n";
  }
}

void write_report(const std::filesystem::path& dir, const std::string& stem,
                  const EvalReport& report) {
  write_with(dir / (stem + ".csv"), [&](std::ostream& o) { write_table_csv(o, report); });
  write_with(dir / (stem + "_cells.csv"), [&](std::ostream& o) { write_cells_csv(o, report); });
  write_with(dir / (stem + "_probes.csv"), [&](std::ostream& o) { write_probe_csv(o, report); });
  write_text_file(dir / (stem + ".json"), report_to_json(report));
}

CompareOptions options_of(const RunConfig& config) {
  CompareOptions options;
  options.demos = config.demos;
  options.seeds = base_seeds(config);
  options.episodes = config.episodes;
  options.regimes = config.regimes;
  return options;
}

}  // namespace

void cmd_gen(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Dataset data = generate_demonstrations(config.env, regime_by_name(config.demo_regime),
                                               config.demos, seed_of(config));
  save_dataset(config.dataset_path(), data);
  log << "wrote " << data.trajectories.size() << " trajectories (" << data.pair_count()
      << " pairs, " << data.discarded << " discarded) to " << config.dataset_path().string()
      << "\n";
}

void cmd_train(const RunConfig& config, std::ostream& log) {
  config.validate();
  const Dataset data = load_dataset(config.dataset_path());
  if (!(data.env == config.env)) {
    throw ConfigError("dataset " + config.dataset_path().string() +
                      " was generated for a different environment than the run config");
  }
  TrainConfig train_config = config.train;
  train_config.seed = seed_of(config);
  // The declared layout feeds only the separation column of the log.
  std::vector<std::size_t> report_relevant = data.declared_relevant;
  for (std::size_t i : report_relevant) {
    if (i >= data.env.state_dim()) {
      log << "warning: dataset header lists relevant index " << i
          << " outside the state; separation not reported\n";
      report_relevant.clear();
      break;
    }
  }
  const TrainResult result = train(train_config, data, report_relevant);

  save_checkpoint(config.out / "checkpoint.json", make_checkpoint(result.model, train_config));
  write_with(config.out / "train_log.csv",
             [&](std::ostream& o) { write_train_log_csv(o, result.log); });
  write_with(config.out / "timing.csv", [&](std::ostream& o) { write_timing_csv(o, result.log); });
  if (train_config.method != Method::kVAE) write_mask_outputs(config, Controller(result.model));
  log << "trained " << to_string(train_config.method) << " for " << train_config.epochs
      << " epochs on " << data.pair_count() << " pairs";
  if (!result.log.epochs.empty()) {
    const EpochLog& last = result.log.epochs.back();
    log << ", final loss " << format_double(last.loss);
    if (last.separation) log << ", separation " << format_fixed(*last.separation, 4);
  }
  log << "\n";
}

std::vector<RegimeStat> cmd_eval(const RunConfig& config, std::ostream& log) {
  config.validate();
  const std::string ref = config.checkpoint_ref();
  PolicyFn policy;
  std::optional<Controller> controller;
  if (ref == "expert") {
    const EnvSpec env = config.env;
    policy = [env](std::span<const double> s) { return expert_action(env, s); };
  } else {
    if (!std::filesystem::is_regular_file(ref)) {
      throw std::runtime_error("checkpoint not found: " + ref);
    }
    controller.emplace(load_checkpoint(ref).model);
    if (controller->model().state_dim != config.env.state_dim()) {
      throw ConfigError("checkpoint expects state dimension " +
                        std::to_string(controller->model().state_dim) + " but the environment has " +
                        std::to_string(config.env.state_dim()));
    }
    const Controller* ctl = &*controller;
    policy = [ctl](std::span<const double> s) { return ctl->act(s); };
  }
  const std::vector<RegimeStat> stats =
      evaluate_regimes(config.env, policy, config.regimes, config.episodes, base_seeds(config));
  write_with(config.out / "eval.csv", [&](std::ostream& o) { write_regime_csv(o, stats); });
  write_text_file(config.out / "eval.json", regimes_to_json(stats));
  log << "evaluated " << ref << " over " << config.eval_seeds << " seed(s) x " << config.episodes
      << " episodes\n";
  print_table(log, stats);
  return stats;
}

std::vector<RunConfig> methods_from_names(const RunConfig& base,
                                          const std::vector<std::string>& names) {
  std::vector<RunConfig> out;
  for (const std::string& name : names) {
    RunConfig c = base;
    c.label = name;
    if (name != "expert") c.train.method = parse_method(name);
    out.push_back(std::move(c));
  }
  return out;
}

EvalReport cmd_compare(const RunConfig& base, const std::vector<RunConfig>& methods,
                       std::ostream& log) {
  base.validate();
  if (methods.empty()) throw ConfigError("compare: no methods given");
  std::vector<MethodEntry> entries;
  for (const RunConfig& m : methods) {
    if (!(m.env == base.env)) {
      throw ConfigError("compare: method '" + m.display_label() +
                        "' uses a different environment; all rows must share one environment");
    }
    m.train.validate();
    MethodEntry entry;
    entry.label = m.display_label();
    entry.config = m.train;
    entry.expert = entry.label == "expert";
    for (const MethodEntry& e : entries) {
      if (e.label == entry.label) throw ConfigError("compare: duplicate label '" + entry.label + "'");
    }
    entries.push_back(std::move(entry));
  }
  const EvalReport report = compare(entries, base.env, options_of(base));
  write_report(base.out, "compare", report);
  write_with(base.out / "relevance_heatmap.csv",
             [&](std::ostream& o) { write_relevance_heatmap_csv(o, report); });
  log << "compared " << entries.size() << " method(s) over " << report.options.seeds.size()
      << " seed(s)\n";
  for (const MethodReport& m : report.methods) {
    log << m.label << "\n";
    print_table(log, m.regimes);
  }
  return report;
}

EvalReport cmd_sweep(const RunConfig& config, std::ostream& log) {
  config.validate();
  if (config.kl_weights.empty()) throw ConfigError("sweep: no kl_weights");
  std::vector<MethodEntry> entries;
  for (double w : config.kl_weights) {
    if (!(w >= 0.0)) throw ConfigError("sweep: kl weights must be non-negative");
    MethodEntry entry;
    entry.label = "vae_kl=" + format_double(w);
    entry.config = config.train;
    entry.config.method = Method::kVAE;
    entry.config.kl_weight = w;
    entries.push_back(std::move(entry));
  }
  const EvalReport report = compare(entries, config.env, options_of(config));
  write_report(config.out, "sweep", report);
  for (const MethodReport& m : report.methods) {
    log << m.label << "\n";
    print_table(log, m.regimes);
  }
  return report;
}

void cmd_export_mask(const RunConfig& config, std::ostream& log) {
  const std::string ref = config.checkpoint_ref();
  if (!std::filesystem::is_regular_file(ref)) {
    throw std::runtime_error("checkpoint not found: " + ref);
  }
  const Controller controller(load_checkpoint(ref).model);
  if (controller.mask().n() != config.env.state_dim()) {
    throw ConfigError("checkpoint mask size does not match the environment");
  }
  write_mask_outputs(config, controller);
  log << "wrote " << (config.out / "mask.txt").string() << " and "
      << (config.out / "relevance.csv").string() << "\n";
}

}  // namespace maskgrad
