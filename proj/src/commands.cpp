#include "hdt/commands.hpp"

#include "hdt/baselines.hpp"
#include "hdt/completion.hpp"
#include "hdt/decomposition.hpp"
#include "hdt/error.hpp"
#include "hdt/io.hpp"
#include "hdt/synth.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>

namespace hdt {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out);
  return (fs::path(cfg.out) / name).string();
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
  write_text(out_path(cfg, name), j.dump(1) + "\n");
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

bool is_json_path(const std::string& path) { return fs::path(path).extension() == ".json"; }


SolveOptions solve_options(const RunConfig& cfg) {
  SolveOptions o;
  o.epsilon = cfg.epsilon;
  o.M = cfg.M;
  o.seed = cfg.seed;
  return o;
}

DenseTensor truth_tensor(const RunConfig& cfg) {
  return cfg.truth.empty() ? to_dense(benchmark_tensor()) : read_tensor_json(cfg.truth).to_dense();
}

PartitionComplex complex_arg(const RunConfig& cfg, int order) {
  if (cfg.facets.empty()) return PartitionComplex::singletons(order);
  const auto first = cfg.facets.find_first_not_of(" \t");
  const std::string text = (first != std::string::npos && cfg.facets[first] == '[') ? cfg.facets : read_text(cfg.facets);
  return parse_complex(text, order);
}

ObservationSet floored(const ObservationSet& obs, std::optional<double> floor) {
  if (!floor) return obs;
  Eigen::VectorXd y = obs.values().cwiseMax(*floor);
  return ObservationSet(obs.shape(), obs.coords(), std::move(y), obs.allows_zero());
}

DenseTensor floored(DenseTensor t, std::optional<double> floor) {
  if (floor) t.entries = t.entries.cwiseMax(*floor);
  return t;
}

ObservationSet load_observations(const RunConfig& cfg) {
  require(!cfg.data.empty(), "--data is required");
  if (cfg.levels.empty()) return read_observations_csv(cfg.data, cfg.dims);
  const LevelMap levels = read_level_map(cfg.levels);
  return read_observations_csv(cfg.data, cfg.dims, &levels);
}

json report_json(const SolveReport& rep) {
  json j;
  j["objective"] = rep.objective;
  j["kkt_residual"] = rep.kkt_residual;
  j["feasibility_residual"] = rep.feasibility_residual;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["underdetermined"] = rep.underdetermined;
  j["unobserved_coordinates"] = rep.unobserved;
  return j;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const std::vector<int>& als_rank_grid() {
  static const std::vector<int> grid{1, 2, 3, 4};
  return grid;
}

}  // namespace

void cmd_complete(const RunConfig& cfg) {
  require(!(cfg.threshold && !cfg.cv_grid.empty()), "--threshold and --cv-grid are mutually exclusive");
  require(!(cfg.rank && cfg.lambda), "--rank and --lambda are mutually exclusive");
  const ObservationSet obs = floored(load_observations(cfg), cfg.floor);
  std::optional<DenseTensor> truth;
  if (!cfg.truth.empty()) {
    truth = read_tensor_json(cfg.truth).to_dense();
    require(truth->shape == obs.shape(), "truth shape does not match the data dims");
  }

  json metrics;
  metrics["n"] = obs.size();
  Model model;
  if (cfg.rank) {
    AlsOptions ao;
    ao.rank = *cfg.rank;
    ao.seed = cfg.seed;
    AlsFit fit = als_fit(obs, ao);
    metrics["method"] = "als";
    metrics["rank"] = *cfg.rank;
    metrics["training_loss"] = fit.training_loss.back();
    model = std::move(fit.model);
  } else {
    SolveOptions o = solve_options(cfg);
    o.M = o.M.value_or(default_bound_M(obs));
    PartitionComplex partition;
    if (cfg.threshold) {
      partition = estimate_partition(obs, ThresholdPolicy::at(*cfg.threshold), o);
      metrics["threshold"] = *cfg.threshold;
    } else {
      const std::vector<double> grid = cfg.cv_grid.empty() ? default_threshold_grid() : cfg.cv_grid;
      const CvResult cv = cross_validate(obs, grid, o);
      partition = cv.partition;
      metrics["threshold"] = cv.threshold;
      json rows = json::array();
      for (const auto& e : cv.entries) {
        json r;
        r["threshold"] = e.threshold;
        r["partition"] = e.partition.to_string();
        r["validation_risk"] = e.fit_ok ? json(e.validation_risk) : json(nullptr);
        rows.push_back(r);
      }
      metrics["cv"] = rows;
    }
    o.lambda = cfg.lambda;
    const CompletionResult fit = fit_partition(obs, partition, o);
    metrics["method"] = cfg.lambda ? "sparse-partition-log-linear" : "partition-log-linear";
    metrics["partition"] = partition.to_string();
    if (cfg.lambda) metrics["lambda"] = *cfg.lambda;
    metrics["solve"] = report_json(fit.report);
    model = fit.params;
  }
  if (truth) metrics["prediction_error"] = prediction_error(*truth, floored(model_to_dense(model), cfg.floor));
  write_model_json(out_path(cfg, "model.json"), model, cfg.floor);
  write_json(cfg, "metrics.json", metrics);
}

void cmd_decompose(const RunConfig& cfg) {
  require(!cfg.data.empty(), "--data (tensor JSON) is required");
  require(!cfg.facets.empty(), "--facets is required");
  const DenseTensor tensor = read_tensor_json(cfg.data).to_dense();
  const PartitionComplex complex = complex_arg(cfg, tensor.shape.order());
  double M = 2.0;
  if (cfg.M) {
    M = *cfg.M;
  } else if (tensor.entries.minCoeff() > 0.0) {
    M = std::max({2.0, tensor.entries.maxCoeff(), 1.0 / tensor.entries.minCoeff()});
  }
  const FactorSet params = construct_exact_decomposition(tensor, complex, M);
  const DenseTensor rebuilt = to_dense(params);
  double worst = 0.0;
  for (Index i = 0; i < tensor.entries.size(); ++i)
    worst = std::max(worst, std::abs(rebuilt.entries[i] - tensor.entries[i]) / std::abs(tensor.entries[i]));

  json metrics;
  metrics["partition"] = complex.to_string();
  metrics["effective_dimension"] = effective_dimension(complex, tensor.shape);
  metrics["max_relative_error"] = worst;
  metrics["M"] = M;
  write_model_json(out_path(cfg, "model.json"), params);
  write_json(cfg, "metrics.json", metrics);
}

void cmd_approximate(const RunConfig& cfg) {
  require(!cfg.data.empty(), "--data is required");
  const ObservationSet obs =
      floored(is_json_path(cfg.data) ? exhaustive_observations(read_tensor_json(cfg.data).to_dense()) : load_observations(cfg),
              cfg.floor);
  const PartitionComplex complex = complex_arg(cfg, obs.shape().order());
  SolveOptions o = solve_options(cfg);
  o.lambda = cfg.lambda;
  const CompletionResult fit = fit_partition(obs, complex, o);

  json metrics;
  metrics["n"] = obs.size();
  metrics["partition"] = complex.to_string();
  metrics["effective_dimension"] = effective_dimension(complex, obs.shape());
  if (cfg.lambda) metrics["lambda"] = *cfg.lambda;
  metrics["solve"] = report_json(fit.report);
  if (!cfg.truth.empty()) {
    const DenseTensor truth = read_tensor_json(cfg.truth).to_dense();
    require(truth.shape == obs.shape(), "truth shape does not match the data dims");
    metrics["prediction_error"] = prediction_error(truth, floored(to_dense(fit.params), cfg.floor));
  }
  write_model_json(out_path(cfg, "model.json"), fit.params, cfg.floor);
  write_json(cfg, "metrics.json", metrics);
}

void cmd_synth(const RunConfig& cfg) {
  require(cfg.trials >= 1, "--trials must be at least 1");
  const DenseTensor truth = truth_tensor(cfg);
  const NoiseModel noise = cfg.noise.value_or(NoiseModel::none());
  for (int t = 0; t < cfg.trials; ++t) {
    Rng rng(trial_seed(cfg.seed, t));
    ObservationSet obs;
    if (cfg.n) {
      obs = sample_observations(truth, *cfg.n, noise, rng);
    } else {
      // Every entry once, in row-major order, each with its own noise draw.
      obs = exhaustive_observations(truth, truth.entries.minCoeff() <= 0.0);
      Eigen::VectorXd y = obs.values();
      if (noise.family == NoiseModel::Family::gamma)
        for (Index i = 0; i < y.size(); ++i) y[i] *= rng.gamma(noise.shape_k, noise.scale);
      obs = ObservationSet(obs.shape(), obs.coords(), std::move(y), obs.allows_zero());
    }
    const std::string name = cfg.trials == 1 ? "observations.csv" : "observations_" + std::to_string(t + 1) + ".csv";
    write_observations_csv(out_path(cfg, name), obs);
  }
  write_tensor_json(out_path(cfg, "truth.json"), truth);
}

void cmd_benchmark(const RunConfig& cfg) {
  require(cfg.trials >= 1, "--trials must be at least 1");
  const DenseTensor truth = truth_tensor(cfg);
  const std::vector<Index> ns = cfg.n_grid.empty() ? std::vector<Index>{100, 1000, 5000} : cfg.n_grid;
  const NoiseModel noise = cfg.noise.value_or(NoiseModel::gamma(1.0, 1.0));
  const std::vector<double> grid = cfg.cv_grid.empty() ? default_threshold_grid() : cfg.cv_grid;
  const std::vector<double> fractions = default_lambda_fractions();
  const std::vector<std::string> methods{"partition-log-linear", "sparse-partition-log-linear", "als"};

  // errors[method][n index][trial]
  std::vector<std::vector<std::vector<double>>> errors(methods.size(), std::vector<std::vector<double>>(ns.size()));
  std::string trials_csv = "method,n,trial,prediction_error\n";
  for (std::size_t a = 0; a < ns.size(); ++a) {
    for (int t = 0; t < cfg.trials; ++t) {
      const std::uint64_t seed = trial_seed(cfg.seed, t);
      Rng rng(seed);
      const ObservationSet obs = floored(sample_observations(truth, ns[a], noise, rng), cfg.floor);
      SolveOptions o = solve_options(cfg);
      o.M = o.M.value_or(default_bound_M(obs));

      std::vector<DenseTensor> fits;
      if (cfg.threshold) {
        const PartitionComplex part = estimate_partition(obs, ThresholdPolicy::at(*cfg.threshold), o);
        fits.push_back(to_dense(fit_partition(obs, part, o).params));
        const CvResult sparse = cross_validate(obs, std::vector<double>{*cfg.threshold}, o, fractions);
        fits.push_back(to_dense(sparse.params));
      } else {
        fits.push_back(to_dense(cross_validate(obs, grid, o).params));
        fits.push_back(to_dense(cross_validate(obs, grid, o, fractions).params));
      }
      AlsOptions ao;
      ao.seed = seed;
      if (cfg.rank) {
        ao.rank = *cfg.rank;
        fits.push_back(cp_to_dense(als_fit(obs, ao).model));
      } else {
        fits.push_back(cp_to_dense(als_select_rank(obs, als_rank_grid(), ao).fit.model));
      }
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const double e = prediction_error(truth, floored(fits[mi], cfg.floor));
        errors[mi][a].push_back(e);
        trials_csv += methods[mi] + "," + std::to_string(ns[a]) + "," + std::to_string(t + 1) + "," + format_double(e) + "\n";
      }
    }
  }

  std::string report = "method";
  for (Index n : ns) report += ",n=" + std::to_string(n);
  report += "\n";
  std::string plot = "method,n,median_prediction_error\n";
  json medians;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    report += methods[mi];
    json row = json::array();
    for (std::size_t a = 0; a < ns.size(); ++a) {
      const double med = median(errors[mi][a]);
      report += "," + format_double(med);
      plot += methods[mi] + "," + std::to_string(ns[a]) + "," + format_double(med) + "\n";
      row.push_back(med);
    }
    report += "\n";
    medians[methods[mi]] = row;
  }
  json metrics;
  metrics["trials"] = cfg.trials;
  metrics["seed"] = cfg.seed;
  metrics["n"] = ns;
  metrics["noise"] = noise.family == NoiseModel::Family::gamma ? json{{"k", noise.shape_k}, {"theta", noise.scale}} : json("none");
  metrics["noise_quantile_0.999"] = noise_quantile(noise);
  metrics["median_prediction_error"] = medians;
  write_text(out_path(cfg, "report.csv"), report);
  write_text(out_path(cfg, "plot.csv"), plot);
  write_text(out_path(cfg, "trials.csv"), trials_csv);
  write_json(cfg, "metrics.json", metrics);
}

void cmd_predict(const RunConfig& cfg) {
  require(!cfg.model.empty(), "--model is required");
  require(!cfg.data.empty(), "--data (query CSV) is required");
  const ModelFile mf = read_model_json(cfg.model);
  const TensorShape& shape = model_shape(mf.model);
  std::optional<LevelMap> levels;
  if (!cfg.levels.empty()) levels = read_level_map(cfg.levels);
  const IndexTable q = read_index_csv(cfg.data, false, levels ? &*levels : nullptr);
  require(q.order == shape.order(), "query has " + std::to_string(q.order) + " index columns, model order is " +
                                        std::to_string(shape.order()));
  const std::optional<double> floor = cfg.floor ? cfg.floor : mf.floor;
  const auto p = static_cast<std::size_t>(q.order);
  const std::size_t rows = p ? q.coords.size() / p : 0;
  std::string out;
  for (std::size_t j = 1; j <= p; ++j) out += "x" + std::to_string(j) + ",";
  out += "prediction\n";
  for (std::size_t i = 0; i < rows; ++i) {
    const std::span<const int> x(q.coords.data() + i * p, p);
    if (!shape.contains(x)) throw DimensionError("query row " + std::to_string(i + 1) + " is outside the model's dims");
    double v = model_eval(mf.model, x);
    if (floor) v = std::max(v, *floor);
    for (int c : x) out += std::to_string(c) + ",";
    out += format_double(v) + "\n";
  }
  write_text(out_path(cfg, "predictions.csv"), out);
}

}  // namespace hdt
