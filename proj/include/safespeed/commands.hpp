#pragma once

#include "safespeed/run_config.hpp"

namespace safespeed {

// Pipeline stages behind the CLI. Each throws on failure; the CLI converts
// exceptions to a single stderr error line and a nonzero exit.

// Writes a synthetic scenario (probe data, weather, network, ground truth)
// into out_dir. Requires the config's synth section.
void cmd_synth(const RunConfig& config);

// Parses probe and weather data, matches points to the buffered network,
// aggregates vehicle windows and writes windows.csv / samples.csv plus a
// prepare_summary.json with every drop counter.
void cmd_prepare(const RunConfig& config);

// Fits the quantile forest on the training ranges and saves the model.
void cmd_train(const RunConfig& config);

// Predicts quantiles for test windows, applies the physics and legal caps
// and writes recommend.csv.
void cmd_recommend(const RunConfig& config);

// Scores the model (when present) and the baselines on the test windows and
// writes eval_report.csv / eval_summary.txt.
void cmd_evaluate(const RunConfig& config);

}  // namespace safespeed
