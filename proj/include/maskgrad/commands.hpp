#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "maskgrad/compare.hpp"
#include "maskgrad/run_config.hpp"

namespace maskgrad {

// CLI subcommands. Each expects config.seed to be set and writes its
// artifacts under config.out. Progress goes to `log`.

// <out>/dataset.jsonl (or config.dataset).
void cmd_gen(const RunConfig& config, std::ostream& log);

// checkpoint.json, train_log.csv, timing.csv, and for mask methods
// mask.txt and relevance.csv.
void cmd_train(const RunConfig& config, std::ostream& log);

// eval.csv, eval.json. config.checkpoint may be "expert".
std::vector<RegimeStat> cmd_eval(const RunConfig& config, std::ostream& log);

// compare.csv, compare_cells.csv, relevance_heatmap.csv, probes.csv,
// compare.json. Every method config must describe the same environment as
// `base`; rows come from `methods` in order. Labels "expert" add the
// scripted expert row.
EvalReport cmd_compare(const RunConfig& base, const std::vector<RunConfig>& methods,
                       std::ostream& log);

// Bottleneck-baseline sweep over config.kl_weights: sweep.csv,
// sweep_probes.csv, sweep.json.
EvalReport cmd_sweep(const RunConfig& config, std::ostream& log);

// mask.txt and relevance.csv from an existing checkpoint.
void cmd_export_mask(const RunConfig& config, std::ostream& log);

// Method rows for a comma list such as "transmask,bc,vae,expert", each
// taking every other hyperparameter from `base`.
std::vector<RunConfig> methods_from_names(const RunConfig& base,
                                          const std::vector<std::string>& names);

}  // namespace maskgrad
