#pragma once

#include "hdt/risk.hpp"
#include "hdt/tensor.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hdt {

/// Parameters of one CLI invocation. Every command writes into `out`, which is
/// created when missing.
struct RunConfig {
  std::string data;
  std::string truth;
  std::string facets;
  std::string model;
  std::string levels;
  std::string out = ".";
  std::optional<std::vector<int>> dims;
  std::optional<double> M;
  double epsilon = 1e-6;
  std::optional<double> threshold;
  std::vector<double> cv_grid;
  std::optional<double> lambda;
  std::optional<int> rank;
  std::uint64_t seed = 0;
  int trials = 1;
  /// Absent: noise-free for synth, Gamma(1, 1) for benchmark.
  std::optional<NoiseModel> noise;
  std::optional<double> floor;
  std::optional<Index> n;
  std::vector<Index> n_grid;
};

/// Observation CSV -> model.json, metrics.json. Structure from --threshold or
/// cross-validation over --cv-grid; --rank fits an ALS model instead.
void cmd_complete(const RunConfig& cfg);
/// Tensor JSON + --facets -> exact model.json, metrics.json.
void cmd_decompose(const RunConfig& cfg);
/// Fixed-structure fit (all singletons by default) -> model.json, metrics.json.
/// --data may be an observation CSV or a tensor JSON (observed exhaustively).
void cmd_approximate(const RunConfig& cfg);
/// Median prediction error per method and n -> report.csv, plot.csv,
/// trials.csv, metrics.json.
void cmd_benchmark(const RunConfig& cfg);
/// Samples --n observations (every entry once when --n is absent) ->
/// observations.csv (observations_<t>.csv per trial when trials > 1) and
/// truth.json.
void cmd_synth(const RunConfig& cfg);
/// Model + index CSV -> predictions.csv.
void cmd_predict(const RunConfig& cfg);

}  // namespace hdt
