// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "oracles.hpp"

#include "hdt/baselines.hpp"
#include "hdt/commands.hpp"
#include "hdt/completion.hpp"
#include "hdt/decomposition.hpp"
#include "hdt/io.hpp"
#include "hdt/solver.hpp"
#include "hdt/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

namespace {

using namespace hdt;
namespace fs = std::filesystem;

// Tolerances and budgets, fixed here and nowhere else.
constexpr double kExactRelError = 1e-12;
constexpr double kExactRuntime = 10.0;
constexpr double kOracleObjectiveGap = 1e-3;
constexpr double kGradientRelError = 1e-6;
constexpr double kOracleRuntime = 60.0;
constexpr double kRecoveryError = 1e-6;
constexpr double kGapFactor = 3.0;  // cross-facet gaps below kGapFactor * epsilon
constexpr double kWithinGapMin = 0.01;
constexpr double kWithinGapRatio = 10.0;
constexpr int kPartitionHitsMin = 18;
constexpr double kTrendMaxAt5000 = 0.15;
constexpr double kTrendRuntime = 1800.0;
constexpr double kSparseObjectiveSlack = 2.0;  // times epsilon
constexpr double kRandomizedError = 1e-3;
constexpr double kRandomizedCoverage = 0.60;
constexpr double kAlsMonotoneSlack = 1e-10;
constexpr double kAlsRecovery = 1e-8;

constexpr double kEpsilon = 1e-6;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

SolveOptions base_options() {
  SolveOptions o;
  o.epsilon = kEpsilon;
  return o;
}

DenseTensor benchmark_dense() { return to_dense(benchmark_tensor()); }

// The default bound only looks at the largest observation; recovery results
// assume a bound M with psi inside [1/M, M], so supply one for known truths.
SolveOptions bounded_options(const DenseTensor& truth) {
  SolveOptions o = base_options();
  o.M = 1.5 * std::max({4.0 / 3.0, truth.entries.maxCoeff(), 1.0 / truth.entries.minCoeff()});
  return o;
}

// 1 ------------------------------------------------------------------------
Outcome exact_construction() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> P(1, 5), R(1, 4);
  std::uniform_real_distribution<double> V(0.5, 2.0);
  double worst = 0.0;
  int bound_failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int p = P(gen);
    std::vector<int> dims(static_cast<std::size_t>(p));
    for (int& r : dims) r = R(gen);
    // random partition: assign each position a group label, facets ordered by smallest member
    std::vector<int> label(static_cast<std::size_t>(p));
    std::uniform_int_distribution<int> G(0, p - 1);
    for (int& l : label) l = G(gen);
    std::vector<std::vector<int>> facets;
    std::vector<int> seen(static_cast<std::size_t>(p), -1);
    for (int j = 0; j < p; ++j) {
      const auto l = static_cast<std::size_t>(label[static_cast<std::size_t>(j)]);
      if (seen[l] < 0) {
        seen[l] = static_cast<int>(facets.size());
        facets.emplace_back();
      }
      facets[static_cast<std::size_t>(seen[l])].push_back(j + 1);
    }
    // tensor as a product of random per-facet arrays (row-major within a facet)
    std::vector<std::vector<double>> arrays;
    for (const auto& f : facets) {
      std::size_t size = 1;
      for (int j : f) size *= static_cast<std::size_t>(dims[static_cast<std::size_t>(j - 1)]);
      arrays.emplace_back();
      for (std::size_t a = 0; a < size; ++a) arrays.back().push_back(V(gen));
    }
    DenseTensor psi{TensorShape(dims)};
    for_each_index(psi.shape, [&](std::span<const int> x) {
      double v = 1.0;
      for (std::size_t k = 0; k < facets.size(); ++k) {
        std::size_t off = 0;
        for (int j : facets[k]) off = off * static_cast<std::size_t>(dims[static_cast<std::size_t>(j - 1)]) +
                                      static_cast<std::size_t>(x[static_cast<std::size_t>(j - 1)] - 1);
        v *= arrays[k][off];
      }
      psi(x) = v;
    });
    const double M = std::max({2.0, psi.entries.maxCoeff(), 1.0 / psi.entries.minCoeff()});
    const FactorSet fs = construct_exact_decomposition(psi, PartitionComplex::partition(facets, p), M);
    const DenseTensor back = to_dense(fs);
    for (Index i = 0; i < psi.entries.size(); ++i)
      worst = std::max(worst, std::abs(back.entries[i] - psi.entries[i]) / psi.entries[i]);
    for (const auto& f : fs.factors)
      if (f.minCoeff() < 1.0 / (M * M) || f.maxCoeff() > M * M) ++bound_failures;
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst < kExactRelError && bound_failures == 0 && secs < kExactRuntime;
  o.detail = "max rel error " + num(worst) + ", factors out of bounds " + std::to_string(bound_failures) + ", " +
             num(secs) + " s";
  return o;
}

// 2 ------------------------------------------------------------------------
Outcome solver_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> V(0.5, 2.0);
  double worst_obj = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> dims = trial < 10 ? std::vector<int>{2, 2} : std::vector<int>{2, 2, 2};
    DenseTensor psi{TensorShape(dims)};
    for (Index i = 0; i < psi.entries.size(); ++i) psi.entries[i] = V(gen);
    const ObservationSet obs = exhaustive_observations(psi);
    SolveOptions o = base_options();
    const SolveReport rep = solve_convex(obs, PartitionComplex::singletons(static_cast<int>(dims.size())), o);
    const double ref = oracle::grid_pattern_minimum(obs, default_bound_M(obs));
    worst_obj = std::max(worst_obj, std::abs(rep.objective - ref));
  }
  double worst_grad = 0.0;
  std::uniform_real_distribution<double> U(-0.7, 0.7);
  for (int point = 0; point < 100; ++point) {
    const std::vector<int> dims = point % 2 ? std::vector<int>{2, 2} : std::vector<int>{2, 2, 2};
    DenseTensor psi{TensorShape(dims)};
    for (Index i = 0; i < psi.entries.size(); ++i) psi.entries[i] = V(gen);
    const ObservationSet obs = exhaustive_observations(psi);
    LogFactorSet lp;
    lp.shape = psi.shape;
    lp.complex = PartitionComplex::singletons(static_cast<int>(dims.size()));
    lp.factors = zero_facet_arrays(lp.shape, lp.complex);
    for (auto& f : lp.factors)
      for (Index a = 0; a < f.size(); ++a) f[a] = U(gen);
    const FacetLayout layout(lp.shape, lp.complex);
    const Eigen::VectorXd g = flatten(risk_gradient(lp, obs));
    const Eigen::VectorXd fd = oracle::fd_gradient(
        [&](const Eigen::VectorXd& u) {
          LogFactorSet q = lp;
          q.factors = unflatten(u, layout);
          return empirical_risk(q, obs);
        },
        flatten(lp.factors));
    worst_grad = std::max(worst_grad, (g - fd).norm() / std::max(g.norm(), 1e-12));
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = worst_obj <= kOracleObjectiveGap && worst_grad < kGradientRelError && secs < kOracleRuntime;
  o.detail = "max |objective - oracle| " + num(worst_obj) + ", max gradient rel error " + num(worst_grad) + ", " +
             num(secs) + " s";
  return o;
}

// 3 ------------------------------------------------------------------------
Outcome rank_one_recovery() {
  std::mt19937_64 gen(303);
  std::uniform_int_distribution<int> P(2, 4), R(2, 4);
  double worst = 0.0;
  int not_converged = 0;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> dims(static_cast<std::size_t>(P(gen)));
    for (int& r : dims) r = R(gen);
    const DenseTensor psi = oracle::random_rank_one(dims, gen);
    const SolveReport rep =
        solve_convex(exhaustive_observations(psi), PartitionComplex::singletons(static_cast<int>(dims.size())),
                     bounded_options(psi));
    if (!rep.converged) ++not_converged;
    worst = std::max(worst, prediction_error(psi, exp_reparam(rep.logparams)));
  }
  Outcome o;
  o.pass = worst < kRecoveryError && not_converged == 0;
  o.detail = "max prediction_error " + num(worst) + " over 10 tensors, unconverged " + std::to_string(not_converged);
  return o;
}

// 4 ------------------------------------------------------------------------
Outcome majorization() {
  std::mt19937_64 gen(404);
  const double mu = 1.5;
  const double M = 2.0;
  const double K = mu * M;
  const MajorizationConstants c = majorization_constants(mu, M);
  int violations = 0;
  double slack = 1e300;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<int> dims{3, 3, 2};
    std::uniform_real_distribution<double> Y(1.0 / K, K);
    std::uniform_real_distribution<double> T(std::pow(K, -1.0 / 3.0), std::pow(K, 1.0 / 3.0));
    FactorSet fs;
    fs.shape = TensorShape(dims);
    fs.complex = PartitionComplex::singletons(3);
    fs.factors = zero_facet_arrays(fs.shape, fs.complex);
    fs.M = M;
    for (auto& f : fs.factors)
      for (Index a = 0; a < f.size(); ++a) f[a] = T(gen);
    std::uniform_int_distribution<int> X3(1, 3), X2(1, 2);
    std::vector<int> coords;
    Eigen::VectorXd y(40);
    for (Index i = 0; i < y.size(); ++i) {
      coords.insert(coords.end(), {X3(gen), X3(gen), X2(gen)});
      y[i] = Y(gen);
    }
    const ObservationSet obs(fs.shape, coords, y);
    const double Lhat = squared_loss(fs, obs);
    const double Rhat = empirical_risk_theta(fs, obs);
    const double lo = c.a_lower * Lhat + c.b_lower;
    const double hi = c.a_upper * Lhat + c.b_upper;
    if (!(lo <= Rhat && Rhat <= hi)) ++violations;
    slack = std::min({slack, Rhat - lo, hi - Rhat});
  }
  Outcome o;
  o.pass = violations == 0;
  o.detail = "violations " + std::to_string(violations) + " of 20, smallest slack " + num(slack);
  return o;
}

// 5 ------------------------------------------------------------------------
Outcome risk_gap_structure() {
  const SolveOptions opts = base_options();
  const double limit = kGapFactor * kEpsilon;
  std::mt19937_64 gen(505);

  // (a) outer products: rank one, and products over the partition {{1,2},{3,4}}
  double worst_cross = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const DenseTensor psi = oracle::random_rank_one({3, 2, 3}, gen);
    const ObservationSet obs = exhaustive_observations(psi);
    for (auto [j, q] : {std::pair{1, 2}, {1, 3}, {2, 3}})
      worst_cross = std::max(worst_cross, std::abs(risk_gap(obs, j, q, bounded_options(psi)).gap));
  }
  for (int trial = 0; trial < 2; ++trial) {
    std::uniform_real_distribution<double> V(0.5, 2.0);
    FactorSet fs;
    fs.shape = TensorShape({3, 2, 2, 3});
    fs.complex = PartitionComplex::partition({{1, 2}, {3, 4}}, 4);
    fs.factors = zero_facet_arrays(fs.shape, fs.complex);
    for (auto& f : fs.factors)
      for (Index a = 0; a < f.size(); ++a) f[a] = V(gen);
    const DenseTensor psi = to_dense(fs);
    const ObservationSet obs = exhaustive_observations(psi);
    for (auto [j, q] : {std::pair{1, 3}, {1, 4}, {2, 3}, {2, 4}})
      worst_cross = std::max(worst_cross, std::abs(risk_gap(obs, j, q, bounded_options(psi)).gap));
  }

  // (b) benchmark tensor
  const ObservationSet bench = exhaustive_observations(benchmark_dense());
  const double g12 = risk_gap(bench, 1, 2, opts).gap;
  const double g12_oracle = oracle::independence_gap(bench, 1, 2);
  double bench_cross = 0.0;
  for (int j = 1; j <= 5; ++j)
    for (int q = j + 1; q <= 5; ++q)
      if (!(j == 1 && q == 2)) bench_cross = std::max(bench_cross, std::abs(risk_gap(bench, j, q, opts).gap));

  // (c) parity counterexample
  const ObservationSet parity = exhaustive_observations(counterexample_tensor(), true);
  double parity_worst = 0.0;
  for (auto [j, q] : {std::pair{1, 2}, {1, 3}, {2, 3}})
    parity_worst = std::max(parity_worst, std::abs(risk_gap(parity, j, q, opts).gap));

  Outcome o;
  const bool a = worst_cross < limit;
  const bool b = g12 > kWithinGapMin && g12 >= kWithinGapRatio * bench_cross && std::abs(g12 - g12_oracle) < 1e-5;
  const bool c = parity_worst < limit;
  o.pass = a && b && c;
  o.detail = "(a) max cross gap " + num(worst_cross) + "; (b) G12 " + num(g12) + " (closed form " + num(g12_oracle) +
             "), max cross " + num(bench_cross) + "; (c) max parity gap " + num(parity_worst);
  return o;
}

// 6 ------------------------------------------------------------------------
Outcome partition_recovery() {
  const DenseTensor truth = benchmark_dense();
  const PartitionComplex want = PartitionComplex::partition({{1, 2}, {3}, {4}, {5}}, 5);
  int hits = 0;
  for (int t = 0; t < 20; ++t) {
    Rng rng(trial_seed(1, t));
    const ObservationSet obs = sample_observations(truth, 5000, NoiseModel::gamma(1.0, 1.0), rng);
    if (estimate_partition(obs, ThresholdPolicy::at(0.01), base_options()) == want) ++hits;
  }
  Outcome o;
  o.pass = hits >= kPartitionHitsMin;
  o.detail = std::to_string(hits) + "/20 trials recovered " + want.to_string();
  return o;
}

// 7 ------------------------------------------------------------------------
Outcome table_trend() {
  const auto t0 = std::chrono::steady_clock::now();
  const DenseTensor truth = benchmark_dense();
  const std::vector<Index> ns{100, 500, 1000, 5000};
  const std::vector<double> grid = default_threshold_grid();
  const std::vector<int> ranks{1, 2, 3, 4};
  std::vector<double> lin_med, als_med;
  for (Index n : ns) {
    std::vector<double> lin, als;
    for (int t = 0; t < 20; ++t) {
      const std::uint64_t seed = trial_seed(7, t);
      Rng rng(seed);
      const ObservationSet obs = sample_observations(truth, n, NoiseModel::gamma(1.0, 1.0), rng);
      lin.push_back(prediction_error(truth, cross_validate(obs, grid, base_options()).params));
      AlsOptions ao;
      ao.seed = seed;
      als.push_back(prediction_error(truth, cp_to_dense(als_select_rank(obs, ranks, ao).fit.model)));
    }
    lin_med.push_back(median(lin));
    als_med.push_back(median(als));
  }
  const double secs = seconds_since(t0);
  // index 0: n=100, 1: 500, 2: 1000, 3: 5000
  const bool decreasing = lin_med[0] > lin_med[2] && lin_med[2] > lin_med[3];
  const bool small = lin_med[3] <= kTrendMaxAt5000;
  const bool beats = lin_med[1] < als_med[1] && lin_med[2] < als_med[2] && lin_med[3] < als_med[3];
  Outcome o;
  o.pass = decreasing && small && beats && secs < kTrendRuntime;
  o.detail = "medians log-linear/ALS";
  for (std::size_t a = 0; a < ns.size(); ++a)
    o.detail += " n=" + std::to_string(ns[a]) + ": " + num(lin_med[a]) + "/" + num(als_med[a]);
  o.detail += ", " + num(secs) + " s";
  return o;
}

// 8 ------------------------------------------------------------------------
Outcome sparse_variant() {
  const DenseTensor truth = benchmark_dense();
  const PartitionComplex part = PartitionComplex::partition({{1, 2}, {3}, {4}, {5}}, 5);
  Rng rng(31);
  const ObservationSet obs = sample_observations(truth, 500, NoiseModel::gamma(1.0, 1.0), rng);

  SolveOptions o0 = base_options();
  o0.lambda = 0.0;
  const SolveReport zero = solve_sparse(obs, part, o0);
  bool all_one = true;
  for (const auto& f : exp_reparam(zero.logparams).factors) all_one = all_one && (f.array() == 1.0).all();

  const SolveReport free = solve_convex(obs, part, base_options());
  const double l1 = flatten(free.logparams.factors).lpNorm<1>();
  double worst_obj = 0.0;
  for (double scale : {1.0, 1.5}) {
    SolveOptions o = base_options();
    o.lambda = scale * l1;
    worst_obj = std::max(worst_obj, std::abs(solve_sparse(obs, part, o).objective - free.objective));
  }

  const std::vector<double> grid = default_threshold_grid();
  const std::vector<double> fractions = default_lambda_fractions();
  std::vector<double> sparse_err, plain_err;
  for (int t = 0; t < 20; ++t) {
    Rng r(trial_seed(11, t));
    const ObservationSet small = sample_observations(truth, 10, NoiseModel::gamma(0.2, 5.0), r);
    plain_err.push_back(prediction_error(truth, cross_validate(small, grid, base_options()).params));
    sparse_err.push_back(prediction_error(truth, cross_validate(small, grid, base_options(), fractions).params));
  }
  const double ms = median(sparse_err);
  const double mp = median(plain_err);
  Outcome o;
  o.pass = all_one && worst_obj <= kSparseObjectiveSlack * kEpsilon && ms < mp;
  o.detail = std::string("lambda=0 gives theta==1: ") + (all_one ? "yes" : "no") +
             "; |objective(lambda>=||U||_1) - unconstrained| " + num(worst_obj) + "; n=10 medians sparse " + num(ms) +
             " vs non-sparse " + num(mp);
  return o;
}

// 9 ------------------------------------------------------------------------
Outcome randomized() {
  std::mt19937_64 gen(909);
  const DenseTensor psi = oracle::random_rank_one({10, 10, 10}, gen);
  std::set<Index> touched;
  const EntrySampler sampler = [&](std::span<const int> x) {
    touched.insert(psi.shape.linear_index(x));
    return psi(x);
  };
  const RandomizedResult res =
      randomized_decompose(psi.shape, sampler, PartitionComplex::singletons(3), 0.05, bounded_options(psi), 99);
  const double err = prediction_error(psi, res.params);
  const double coverage = static_cast<double>(touched.size()) / static_cast<double>(psi.shape.total_entries());
  Outcome o;
  o.pass = err < kRandomizedError && coverage <= kRandomizedCoverage;
  o.detail = "prediction_error " + num(err) + " from " + std::to_string(res.samples) + " draws covering " +
             num(100.0 * coverage) + "% of entries";
  return o;
}

// 10 -----------------------------------------------------------------------
Outcome als_baseline() {
  const DenseTensor truth = benchmark_dense();
  double worst_rise = -1e300;
  for (int rank = 1; rank <= 4; ++rank)
    for (std::uint64_t seed : {1u, 2u}) {
      Rng rng(seed + 100);
      const ObservationSet obs = sample_observations(truth, 300, NoiseModel::gamma(1.0, 1.0), rng);
      AlsOptions ao;
      ao.rank = rank;
      ao.seed = seed;
      const AlsFit fit = als_fit(obs, ao);
      for (std::size_t i = 1; i < fit.training_loss.size(); ++i)
        worst_rise = std::max(worst_rise, fit.training_loss[i] - fit.training_loss[i - 1]);
    }
  std::mt19937_64 gen(1010);
  double worst_err = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const DenseTensor psi = oracle::random_rank_one({4, 3, 5}, gen);
    AlsOptions ao;
    ao.seed = static_cast<std::uint64_t>(trial);
    worst_err = std::max(worst_err, prediction_error(psi, cp_to_dense(als_fit(exhaustive_observations(psi), ao).model)));
  }
  Outcome o;
  o.pass = worst_rise <= kAlsMonotoneSlack && worst_err < kAlsRecovery;
  o.detail = "largest loss increase per sweep " + num(worst_rise) + ", rank-1 recovery error " + num(worst_err);
  return o;
}

// 11 -----------------------------------------------------------------------
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Runs every command twice (into run1/run2) and compares every output byte.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("hdt_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const fs::path inputs = root / "inputs";
  RunConfig s;
  s.out = inputs.string();
  s.n = 400;
  s.noise = NoiseModel::gamma(1.0, 1.0);
  s.seed = 5;
  cmd_synth(s);
  write_text((inputs / "queries.csv").string(), "x1,x2,x3,x4,x5\n1,1,3,1,1\n2,3,1,2,2\n");

  std::vector<std::pair<std::string, std::function<void(const fs::path&)>>> runs;
  runs.emplace_back("synth", [&](const fs::path& out) {
    RunConfig c = s;
    c.out = out.string();
    c.trials = 2;
    cmd_synth(c);
  });
  runs.emplace_back("complete", [&](const fs::path& out) {
    RunConfig c;
    c.data = (inputs / "observations.csv").string();
    c.truth = (inputs / "truth.json").string();
    c.out = out.string();
    cmd_complete(c);
  });
  runs.emplace_back("complete-als", [&](const fs::path& out) {
    RunConfig c;
    c.data = (inputs / "observations.csv").string();
    c.rank = 2;
    c.seed = 3;
    c.out = out.string();
    cmd_complete(c);
  });
  runs.emplace_back("decompose", [&](const fs::path& out) {
    RunConfig c;
    c.data = (inputs / "truth.json").string();
    c.facets = "[[1,2],[3],[4],[5]]";
    c.out = out.string();
    cmd_decompose(c);
  });
  runs.emplace_back("approximate", [&](const fs::path& out) {
    RunConfig c;
    c.data = (inputs / "observations.csv").string();
    c.lambda = 2.0;
    c.out = out.string();
    cmd_approximate(c);
  });
  runs.emplace_back("benchmark", [&](const fs::path& out) {
    RunConfig c;
    c.n_grid = {60, 120};
    c.trials = 2;
    c.seed = 9;
    c.out = out.string();
    cmd_benchmark(c);
  });
  runs.emplace_back("predict", [&](const fs::path& out) {
    RunConfig c;
    c.model = (root / "complete" / "run1" / "model.json").string();
    c.data = (inputs / "queries.csv").string();
    c.out = out.string();
    cmd_predict(c);
  });

  Outcome o;
  std::vector<std::string> differing;
  std::size_t files = 0;
  for (const auto& [name, run] : runs) {
    const fs::path a = root / name / "run1";
    const fs::path b = root / name / "run2";
    run(a);
    run(b);
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      const fs::path other = b / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
        differing.push_back(name + "/" + entry.path().filename().string());
    }
  }
  fs::remove_all(root);
  o.pass = differing.empty() && files > 0;
  o.detail = std::to_string(files) + " files from 7 runs compared";
  for (const auto& d : differing) o.detail += ", differs: " + d;
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"exact construction", exact_construction},
      {"solver vs brute-force oracle and gradient", solver_oracle},
      {"rank-1 recovery", rank_one_recovery},
      {"majorization constants", majorization},
      {"risk-gap structure", risk_gap_structure},
      {"partition recovery", partition_recovery},
      {"benchmark trend", table_trend},
      {"sparse variant", sparse_variant},
      {"randomized decomposition", randomized},
      {"ALS baseline", als_baseline},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
