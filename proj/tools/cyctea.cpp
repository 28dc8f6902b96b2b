#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace cyctea;
  CLI::App app{"cyctea: cycle-teaching entity alignment over knowledge-graph pairs"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string level = "info";
  app.add_option("--config", config, "run configuration (JSON)");
  auto* seed_opt = app.add_option("--seed", seed, "override the run seed");
  auto* out_opt = app.add_option("--out", out, "override the output directory");
  app.add_option("--log-level", level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  auto* run = app.add_subcommand("run", "train aligners and write reports, metrics and checkpoints");

  auto* synth = app.add_subcommand("synth", "generate a synthetic KG pair with splits");
  cli::SynthOptions so;
  synth->add_option("--n-entities", so.spec.n_entities);
  synth->add_option("--n-relations", so.spec.n_relations);
  synth->add_option("--avg-degree", so.spec.avg_degree);
  synth->add_option("--overlap", so.spec.overlap_ratio);
  synth->add_option("--noise", so.spec.structure_noise);
  synth->add_option("--train-ratio", so.train_ratio);
  synth->add_option("--valid-ratio", so.valid_ratio);

  auto* eval = app.add_subcommand("eval", "score saved checkpoints on the configured dataset");
  cli::EvalOptions eo;
  eval->add_option("--checkpoint", eo.checkpoints, "checkpoint file (repeatable)")->required();
  eval->add_flag("--all-targets", eo.all_targets, "rank against every target entity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kUsage;
  }

  auto logger = spdlog::stderr_color_mt("cyctea");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");

  auto need_config = [&]() {
    if (config.empty()) spdlog::error("--config is required for this command");
    return !config.empty();
  };

  if (*run) {
    if (!need_config()) return cli::kUsage;
    cli::RunOptions ro{config, std::nullopt, std::nullopt};
    if (*seed_opt) ro.seed = seed;
    if (*out_opt) ro.out = out;
    return cli::cmd_run(ro);
  }
  if (*synth) {
    if (*seed_opt) so.spec.rng_seed = seed;
    if (*out_opt) so.out = out;
    return cli::cmd_synth(so);
  }
  if (!need_config()) return cli::kUsage;
  eo.config = config;
  if (*seed_opt) eo.seed = seed;
  if (*out_opt) eo.out = out;
  return cli::cmd_eval(eo);
}
