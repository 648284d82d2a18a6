// hdt: command-line front end for hierarchical decomposition fitting.
//
// Every subcommand reads its flags (or a --config file with the same keys)
// into a RunConfig and writes its outputs under --out. Failures print one JSON
// line {"error": kind, "message": text} to stderr and exit with status 1
// (2 for usage errors).

#include "hdt/commands.hpp"
#include "hdt/error.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <functional>
#include <iostream>

namespace {

enum Flag : unsigned {
  kData = 1u << 0,
  kTruth = 1u << 1,
  kFacets = 1u << 2,
  kFit = 1u << 3,  // --M, --epsilon
  kStructure = 1u << 4,  // --threshold, --cv-grid
  kLambda = 1u << 5,
  kRank = 1u << 6,
  kSampling = 1u << 7,  // --seed, --trials, --noise
  kFloor = 1u << 8,
  kModel = 1u << 9,
  kLevels = 1u << 10,
  kDims = 1u << 11,
  kN = 1u << 12,
  kNGrid = 1u << 13,
};

hdt::NoiseModel parse_noise(const std::string& text) {
  if (text == "none") return hdt::NoiseModel::none();
  const auto comma = text.find(',');
  double k = 0.0;
  double theta = 0.0;
  bool ok = comma != std::string::npos;
  if (ok) {
    auto r1 = std::from_chars(text.data(), text.data() + comma, k);
    auto r2 = std::from_chars(text.data() + comma + 1, text.data() + text.size(), theta);
    ok = r1.ec == std::errc() && r1.ptr == text.data() + comma && r2.ec == std::errc() &&
         r2.ptr == text.data() + text.size();
  }
  if (!ok) throw hdt::ConfigError("--noise expects 'k,theta' or 'none', got '" + text + "'");
  return hdt::NoiseModel::gamma(k, theta);
}

struct Bindings {
  hdt::RunConfig cfg;
  std::vector<int> dims;
  std::vector<hdt::Index> n_grid;
  std::string noise;
  double M = 0, threshold = 0, lambda = 0, floor = 0;
  int rank = 0;
  hdt::Index n = 0;
  CLI::Option *o_dims = nullptr, *o_M = nullptr, *o_threshold = nullptr, *o_lambda = nullptr, *o_floor = nullptr,
              *o_rank = nullptr, *o_noise = nullptr, *o_n = nullptr;

  // Copies optional values that were actually given into cfg.
  hdt::RunConfig resolve() {
    hdt::RunConfig c = cfg;
    auto given = [](CLI::Option* o) { return o && o->count() > 0; };
    if (given(o_dims)) c.dims = dims;
    if (given(o_M)) c.M = M;
    if (given(o_threshold)) c.threshold = threshold;
    if (given(o_lambda)) c.lambda = lambda;
    if (given(o_floor)) c.floor = floor;
    if (given(o_rank)) c.rank = rank;
    if (given(o_noise)) c.noise = parse_noise(noise);
    if (given(o_n)) c.n = n;
    c.n_grid = n_grid;
    return c;
  }
};

void add_flags(CLI::App* sub, Bindings& b, unsigned flags) {
  sub->set_config("--config", "", "TOML/INI file with the same keys as the flags");
  sub->add_option("--out", b.cfg.out, "Output directory")->capture_default_str();
  if (flags & kData) sub->add_option("--data", b.cfg.data, "Input data file");
  if (flags & kDims) b.o_dims = sub->add_option("--dims", b.dims, "Mode sizes, e.g. 3,3,3")->delimiter(',');
  if (flags & kTruth) sub->add_option("--truth", b.cfg.truth, "Ground-truth tensor JSON");
  if (flags & kFacets) sub->add_option("--facets", b.cfg.facets, "Facets as JSON text or a file path");
  if (flags & kFit) {
    b.o_M = sub->add_option("--M", b.M, "Bound on the tensor entries");
    sub->add_option("--epsilon", b.cfg.epsilon, "Solver accuracy")->capture_default_str();
  }
  if (flags & kStructure) {
    b.o_threshold = sub->add_option("--threshold", b.threshold, "Fixed risk-gap threshold t (alpha = 2t)");
    auto* grid = sub->add_option("--cv-grid", b.cfg.cv_grid, "Thresholds to cross-validate")->delimiter(',');
    b.o_threshold->excludes(grid);
  }
  if (flags & kLambda) b.o_lambda = sub->add_option("--lambda", b.lambda, "l1 budget on the log factors");
  if (flags & kRank) {
    b.o_rank = sub->add_option("--rank", b.rank, "CP rank (ALS baseline)");
    if (b.o_lambda) b.o_rank->excludes(b.o_lambda);
  }
  if (flags & kSampling) {
    sub->add_option("--seed", b.cfg.seed, "Random seed")->capture_default_str();
    sub->add_option("--trials", b.cfg.trials, "Number of trials")->capture_default_str();
    b.o_noise = sub->add_option("--noise", b.noise, "Gamma noise 'k,theta' (k*theta = 1) or 'none'");
  } else if (flags & kRank) {
    sub->add_option("--seed", b.cfg.seed, "Random seed")->capture_default_str();
  }
  if (flags & kFloor) b.o_floor = sub->add_option("--floor", b.floor, "Clamp measurements and predictions from below");
  if (flags & kModel) sub->add_option("--model", b.cfg.model, "Model JSON");
  if (flags & kLevels) sub->add_option("--levels", b.cfg.levels, "Level-map JSON for categorical columns");
  if (flags & kN) b.o_n = sub->add_option("--n", b.n, "Observations per trial");
  if (flags & kNGrid) sub->add_option("--n-grid", b.n_grid, "Sample sizes, e.g. 100,1000,5000")->delimiter(',');
}

int fail(const std::string& kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical decomposition fitting and tensor completion", "hdt"};
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    unsigned flags;
    std::function<void(const hdt::RunConfig&)> run;
  };
  const std::vector<Command> commands{
      {"complete", "Estimate the structure and fit a model to observations",
       kData | kDims | kTruth | kFit | kStructure | kLambda | kRank | kFloor | kLevels, hdt::cmd_complete},
      {"decompose", "Exact decomposition of a tensor for given facets", kData | kFacets | kFit, hdt::cmd_decompose},
      {"approximate", "Fit a fixed structure (rank one by default)",
       kData | kDims | kTruth | kFacets | kFit | kLambda | kFloor | kLevels, hdt::cmd_approximate},
      {"benchmark", "Median prediction error per method and sample size",
       kTruth | kFit | kStructure | kRank | kSampling | kFloor | kNGrid, hdt::cmd_benchmark},
      {"synth", "Sample noisy observations of a tensor", kTruth | kSampling | kN, hdt::cmd_synth},
      {"predict", "Evaluate a model at query indices", kData | kModel | kFloor | kLevels, hdt::cmd_predict},
  };

  std::vector<Bindings> bindings(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].name, commands[i].help);
    add_flags(sub, bindings[i], commands[i].flags);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      commands[i].run(bindings[i].resolve());
    } catch (const hdt::Error& e) {
      return fail(e.kind(), e.what(), 1);
    } catch (const std::exception& e) {
      return fail("internal", e.what(), 1);
    }
  }
  return 0;
}
