#include "maskgrad/compare.hpp"

#include <cmath>
#include <ostream>

#include <json.hpp>

#include "maskgrad/errors.hpp"
#include "maskgrad/format.hpp"
#include "maskgrad/io.hpp"

namespace maskgrad {

using nlohmann::json;

RegimeStat summarize(const std::string& regime, const std::vector<EvalResult>& runs) {
  RegimeStat stat;
  stat.regime = regime;
  for (const EvalResult& r : runs) {
    stat.per_seed.push_back(r.rate());
    stat.episodes += r.episodes;
    stat.successes += r.successes;
    stat.nonfinite += r.nonfinite;
  }
  if (stat.per_seed.empty()) return stat;
  const double count = static_cast<double>(stat.per_seed.size());
  for (double v : stat.per_seed) stat.mean += v;
  stat.mean /= count;
  double var = 0.0;
  for (double v : stat.per_seed) var += (v - stat.mean) * (v - stat.mean);
  stat.std = std::sqrt(var / count);
  return stat;
}

std::vector<RegimeStat> evaluate_regimes(const EnvSpec& env, const PolicyFn& policy,
                                         const std::vector<std::string>& regimes,
                                         std::size_t episodes,
                                         const std::vector<std::uint64_t>& base_seeds) {
  std::vector<RegimeStat> out;
  for (const std::string& name : regimes) {
    const SamplingRegime regime = regime_by_name(name);
    std::vector<EvalResult> runs;
    for (std::uint64_t base : base_seeds) {
      runs.push_back(evaluate(env, regime, policy, episodes, compare_eval_seed(base, name)));
    }
    out.push_back(summarize(name, runs));
  }
  return out;
}

const MethodReport& EvalReport::method(const std::string& label) const {
  for (const MethodReport& m : methods) {
    if (m.label == label) return m;
  }
  throw ConfigError("no method labelled '" + label + "' in report");
}

const RegimeStat& EvalReport::cell(const std::string& label, const std::string& regime) const {
  for (const RegimeStat& r : method(label).regimes) {
    if (r.regime == regime) return r;
  }
  throw ConfigError("no regime '" + regime + "' for method '" + label + "'");
}

std::uint64_t compare_eval_seed(std::uint64_t seed, const std::string& regime) {
  std::uint64_t tag = 0;
  for (unsigned char c : regime) tag = tag * 131 + c;
  return derive_seed(derive_seed(seed, 500), tag);
}

EvalReport compare(const std::vector<MethodEntry>& methods, const EnvSpec& env,
                   const CompareOptions& options) {
  if (methods.empty()) throw ConfigError("compare: need at least one method");
  if (options.seeds.empty()) throw ConfigError("compare: need at least one seed");
  for (const std::string& r : options.regimes) regime_by_name(r);

  EvalReport report;
  report.env = env;
  report.options = options;
  for (const MethodEntry& m : methods) {
    report.methods.push_back({m.label, m.expert ? "expert" : to_string(m.config.method), {}, {}});
  }
  const std::vector<std::size_t> relevant = env.relevant_indices();
  // results[method][regime] accumulates one EvalResult per seed.
  std::vector<std::vector<std::vector<EvalResult>>> results(
      methods.size(), std::vector<std::vector<EvalResult>>(options.regimes.size()));

  for (std::uint64_t seed : options.seeds) {
    const Dataset data =
        generate_demonstrations(env, regime_by_name("id"), options.demos, derive_seed(seed, 100));
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const MethodEntry& entry = methods[mi];
      SeedArtifacts artifacts;
      artifacts.seed = seed;
      PolicyFn policy;
      std::optional<Controller> controller;
      if (entry.expert) {
        policy = [&env](std::span<const double> s) { return expert_action(env, s); };
      } else {
        TrainConfig config = entry.config;
        config.seed = seed;
        TrainResult trained = train(config, data);
        controller.emplace(trained.model);
        if (!trained.log.epochs.empty()) artifacts.final_loss = trained.log.epochs.back().loss;
        if (config.method != Method::kVAE) {
          artifacts.relevance = column_relevance(controller->mask()).values;
        }
        if (options.probes && data.trajectories.size() >= 5) artifacts.probe = probe_latent(*controller, data, relevant);
        const Controller* ctl = &*controller;
        policy = [ctl](std::span<const double> s) { return ctl->act(s); };
      }
      for (std::size_t ri = 0; ri < options.regimes.size(); ++ri) {
        const std::string& name = options.regimes[ri];
        results[mi][ri].push_back(evaluate(env, regime_by_name(name), policy, options.episodes,
                                           compare_eval_seed(seed, name)));
      }
      report.methods[mi].seeds.push_back(std::move(artifacts));
    }
  }
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t ri = 0; ri < options.regimes.size(); ++ri) {
      report.methods[mi].regimes.push_back(summarize(options.regimes[ri], results[mi][ri]));
    }
  }
  return report;
}

void write_table_csv(std::ostream& out, const EvalReport& report) {
  out << "method";
  for (const std::string& r : report.options.regimes) out << ',' << r << "_mean," << r << "_std";
  out << '\n';
  for (const MethodReport& m : report.methods) {
    out << m.label;
    for (const RegimeStat& r : m.regimes) {
      out << ',' << format_fixed(r.mean, 4) << ',' << format_fixed(r.std, 4);
    }
    out << '\n';
  }
}

void write_cells_csv(std::ostream& out, const EvalReport& report) {
  out << "method,regime,seed_index,episodes,successes,rate\n";
  for (const MethodReport& m : report.methods) {
    for (const RegimeStat& r : m.regimes) {
      const std::size_t per_seed = r.per_seed.empty() ? 0 : r.episodes / r.per_seed.size();
      for (std::size_t k = 0; k < r.per_seed.size(); ++k) {
        const auto successes = static_cast<std::size_t>(std::llround(r.per_seed[k] * per_seed));
        out << m.label << ',' << r.regime << ',' << k << ',' << per_seed << ',' << successes << ','
            << format_fixed(r.per_seed[k], 4) << '\n';
      }
    }
  }
}

void write_relevance_heatmap_csv(std::ostream& out, const EvalReport& report) {
  std::vector<bool> flag(report.env.state_dim(), false);
  for (std::size_t i : report.env.relevant_indices()) flag[i] = true;
  out << "method,seed,index,relevance,relevant\n";
  for (const MethodReport& m : report.methods) {
    for (const SeedArtifacts& s : m.seeds) {
      for (std::size_t j = 0; j < s.relevance.size(); ++j) {
        out << m.label << ',' << s.seed << ',' << j << ',' << format_double(s.relevance[j]) << ','
            << (flag[j] ? 1 : 0) << '\n';
      }
    }
  }
}

void write_probe_csv(std::ostream& out, const EvalReport& report) {
  out << "method,seed,action_r2,relevant_r2,irrelevant_r2,degenerate\n";
  for (const MethodReport& m : report.methods) {
    for (const SeedArtifacts& s : m.seeds) {
      if (!s.probe) continue;
      out << m.label << ',' << s.seed << ',' << format_fixed(s.probe->action_r2, 6) << ','
          << format_fixed(s.probe->relevant_r2, 6) << ',' << format_fixed(s.probe->irrelevant_r2, 6)
          << ',' << (s.probe->degenerate ? 1 : 0) << '\n';
    }
  }
}

namespace {

json regime_json(const RegimeStat& r) {
  return json{{"regime", r.regime},       {"mean", r.mean},          {"std", r.std},
              {"per_seed", r.per_seed},   {"episodes", r.episodes},  {"successes", r.successes},
              {"nonfinite", r.nonfinite}};
}

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json methods = json::array();
  for (const MethodReport& m : report.methods) {
    json regimes = json::array();
    for (const RegimeStat& r : m.regimes) regimes.push_back(regime_json(r));
    json seeds = json::array();
    for (const SeedArtifacts& s : m.seeds) {
      json entry{{"seed", s.seed}, {"final_loss", s.final_loss}, {"relevance", s.relevance}};
      if (s.probe) {
        entry["probe"] = json{{"action_r2", s.probe->action_r2},
                              {"relevant_r2", s.probe->relevant_r2},
                              {"irrelevant_r2", s.probe->irrelevant_r2},
                              {"degenerate", s.probe->degenerate}};
      }
      seeds.push_back(std::move(entry));
    }
    methods.push_back(json{{"label", m.label}, {"method", m.method}, {"regimes", regimes},
                           {"seeds", seeds}});
  }
  json doc{{"env", json::parse(env_to_json(report.env))},
           {"demos", report.options.demos},
           {"episodes", report.options.episodes},
           {"seeds", report.options.seeds},
           {"regimes", report.options.regimes},
           {"methods", methods}};
  return doc.dump(1) + "\n";
}

void write_regime_csv(std::ostream& out, const std::vector<RegimeStat>& stats) {
  out << "regime,mean,std,episodes,successes,nonfinite,seeds\n";
  for (const RegimeStat& r : stats) {
    out << r.regime << ',' << format_fixed(r.mean, 4) << ',' << format_fixed(r.std, 4) << ','
        << r.episodes << ',' << r.successes << ',' << r.nonfinite << ',' << r.per_seed.size()
        << '\n';
  }
}

std::string regimes_to_json(const std::vector<RegimeStat>& stats) {
  json out = json::array();
  for (const RegimeStat& r : stats) out.push_back(regime_json(r));
  return json{{"regimes", out}}.dump(1) + "\n";
}

}  // namespace maskgrad
