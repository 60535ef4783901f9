#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "safespeed/commands.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::int64_t seed = -1;
  int threads = 0;
};

void add_common(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--config", opts.config_path, "Run configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", opts.out_dir, "Override the configured output directory");
  cmd->add_option("--seed", opts.seed, "Override the configured seed");
  cmd->add_option("--threads", opts.threads, "Override the configured thread count");
}

safespeed::RunConfig load(const CliOptions& opts) {
  safespeed::RunConfig config = safespeed::RunConfig::from_json_file(opts.config_path);
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (opts.seed >= 0) {
    config.seed = static_cast<std::uint64_t>(opts.seed);
    config.synth.seed = static_cast<std::uint64_t>(opts.seed);
  }
  if (opts.threads > 0) config.threads = opts.threads;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid safe-speed recommendation pipeline"};
  app.require_subcommand(1);

  CliOptions opts;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic scenario");
  CLI::App* prepare = app.add_subcommand("prepare", "Parse, match and window the input data");
  CLI::App* train = app.add_subcommand("train", "Fit the quantile forest");
  CLI::App* recommend = app.add_subcommand("recommend", "Produce capped speed intervals");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score the model and baselines");
  for (CLI::App* cmd : {synth, prepare, train, recommend, evaluate}) add_common(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const safespeed::RunConfig config = load(opts);
    if (synth->parsed()) safespeed::cmd_synth(config);
    if (prepare->parsed()) safespeed::cmd_prepare(config);
    if (train->parsed()) safespeed::cmd_train(config);
    if (recommend->parsed()) safespeed::cmd_recommend(config);
    if (evaluate->parsed()) safespeed::cmd_evaluate(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
