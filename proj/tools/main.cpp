// maskgrad command-line entry point.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maskgrad/commands.hpp"
#include "maskgrad/errors.hpp"
#include "maskgrad/run_config.hpp"

namespace {

using namespace maskgrad;

struct Overrides {
  std::string config;
  std::optional<std::string> task;
  std::optional<std::size_t> demos;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::string> norm;
  std::optional<std::string> mask_variant;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> batch;
  std::optional<double> lr;
  std::optional<std::size_t> latent_dim;
  std::optional<double> kl_weight;
  std::optional<std::string> regime;
  std::optional<std::size_t> episodes;
  std::optional<std::size_t> eval_seeds;
  std::optional<std::string> out;
  std::optional<std::string> dataset;
  std::optional<std::string> checkpoint;
  std::optional<std::string> label;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "TOML run configuration");
  app->add_option("--task", o.task, "reach or push");
  app->add_option("--demos", o.demos, "number of demonstrations");
  app->add_option("--seed", o.seed, "base seed (falls back to MASKGRAD_SEED)");
  app->add_option("--method", o.method, "transmask, bc or vae");
  app->add_option("--norm", o.norm, "sparsemax or softmax");
  app->add_option("--mask-variant", o.mask_variant, "matrix or ones");
  app->add_option("--epochs", o.epochs, "training epochs");
  app->add_option("--batch", o.batch, "mini-batch size");
  app->add_option("--lr", o.lr, "Adam learning rate");
  app->add_option("--latent-dim", o.latent_dim, "bottleneck latent size");
  app->add_option("--kl-weight", o.kl_weight, "bottleneck KL weight");
  app->add_option("--regime", o.regime,
                  "comma list of id, ood, ood-relevant, ood-irrelevant (for gen: one regime)");
  app->add_option("--episodes", o.episodes, "evaluation episodes per seed");
  app->add_option("--eval-seeds", o.eval_seeds, "number of evaluation seeds");
  app->add_option("--out", o.out, "output directory");
  app->add_option("--dataset", o.dataset, "dataset path (default <out>/dataset.jsonl)");
  app->add_option("--checkpoint", o.checkpoint,
                  "checkpoint path (default <out>/checkpoint.json) or 'expert'");
  app->add_option("--label", o.label, "row label in reports");
}

void apply_env(RunConfig& c, const Overrides& o) {
  if (o.task) c.env.task = parse_task(*o.task);
  if (o.demos) c.demos = *o.demos;
  if (o.seed) c.seed = *o.seed;
  if (o.episodes) c.episodes = *o.episodes;
  if (o.eval_seeds) c.eval_seeds = *o.eval_seeds;
  if (o.out) c.out = *o.out;
  if (o.dataset) c.dataset = *o.dataset;
  if (o.checkpoint) c.checkpoint = *o.checkpoint;
}

void apply_train(RunConfig& c, const Overrides& o) {
  if (o.method) c.train.method = parse_method(*o.method);
  if (o.norm) c.train.normalizer = parse_normalizer(*o.norm);
  if (o.mask_variant) c.train.variant = parse_mask_variant(*o.mask_variant);
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.batch) c.train.batch = *o.batch;
  if (o.lr) c.train.adam.lr = *o.lr;
  if (o.latent_dim) c.train.latent_dim = *o.latent_dim;
  if (o.kl_weight) c.train.kl_weight = *o.kl_weight;
  if (o.label) c.label = *o.label;
}

RunConfig build(const Overrides& o, bool single_regime) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  apply_env(c, o);
  apply_train(c, o);
  if (o.regime) {
    if (single_regime) {
      c.demo_regime = *o.regime;
    } else {
      c.regimes = split_list(*o.regime);
    }
  }
  c.seed = resolve_seed(c, std::getenv("MASKGRAD_SEED"));
  c.validate();
  return c;
}

int run(int argc, char** argv) {
  CLI::App app{"Imitation learning with a differentiable state mask"};
  app.require_subcommand(1);

  Overrides o;
  CLI::App* gen = app.add_subcommand("gen", "generate expert demonstrations");
  CLI::App* train = app.add_subcommand("train", "train a policy on a dataset");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint or the expert");
  CLI::App* cmp = app.add_subcommand("compare", "train and evaluate several methods");
  CLI::App* sweep = app.add_subcommand("sweep", "KL-weight sweep of the bottleneck baseline");
  CLI::App* mask = app.add_subcommand("export-mask", "write mask and relevance of a checkpoint");
  for (CLI::App* sub : {gen, train, eval, cmp, sweep, mask}) add_common(sub, o);

  std::string method_list = "transmask,bc,vae,expert";
  std::vector<std::string> method_configs;
  cmp->add_option("--methods", method_list, "comma list of methods; 'expert' adds the expert row");
  cmp->add_option("--method-config", method_configs,
                  "per-row TOML config (repeatable); replaces --methods");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      cmd_gen(build(o, true), std::cout);
    } else if (train->parsed()) {
      cmd_train(build(o, false), std::cout);
    } else if (eval->parsed()) {
      cmd_eval(build(o, false), std::cout);
    } else if (cmp->parsed()) {
      const RunConfig base = build(o, false);
      std::vector<RunConfig> rows;
      if (method_configs.empty()) {
        rows = methods_from_names(base, split_list(method_list));
      } else {
        for (const std::string& path : method_configs) {
          rows.push_back(load_run_config(path));
        }
      }
      cmd_compare(base, rows, std::cout);
    } else if (sweep->parsed()) {
      cmd_sweep(build(o, false), std::cout);
    } else if (mask->parsed()) {
      cmd_export_mask(build(o, false), std::cout);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
