#include "hdt/completion.hpp"

#include "hdt/decomposition.hpp"
#include "hdt/error.hpp"
#include "hdt/synth.hpp"

#include <cmath>
#include <limits>
#include <tuple>

namespace hdt {

namespace {

SolveOptions without_lambda(SolveOptions opts) {
  opts.lambda.reset();
  return opts;
}

// Pins M to the full data's bound so that every sub-fit shares one feasible set.
SolveOptions with_resolved_M(SolveOptions opts, const ObservationSet& obs) {
  if (!opts.M) opts.M = default_bound_M(obs);
  return opts;
}

}  // namespace

RiskGapEstimate risk_gap(const ObservationSet& obs, int j, int q, const SolveOptions& opts) {
  if (j == q) throw ConfigError("risk gap needs two different positions");
  obs.shape().dim(j);
  obs.shape().dim(q);
  const SolveOptions o = with_resolved_M(without_lambda(opts), obs);
  const int pair[2] = {j, q};
  const ObservationSet projected = obs.project(pair);

  const SolveReport coupled = solve_convex(projected, PartitionComplex::full(2), o);
  const SolveReport decoupled = solve_convex(projected, PartitionComplex::singletons(2), o);

  RiskGapEstimate est;
  est.j = j;
  est.q = q;
  est.coupled_risk = coupled.objective;
  est.decoupled_risk = decoupled.objective;
  est.gap = decoupled.objective - coupled.objective;
  est.degenerate = obs.distinct_levels(j) < 2 || obs.distinct_levels(q) < 2;
  est.converged = coupled.converged && decoupled.converged;
  return est;
}

ThresholdPolicy ThresholdPolicy::fixed(double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  return {Kind::fixed_alpha_over_2, alpha, 0.0};
}

ThresholdPolicy ThresholdPolicy::decaying(double c4) {
  if (!(c4 > 0.0)) throw ConfigError("c4 must be positive");
  return {Kind::decaying, 0.0, c4};
}

double ThresholdPolicy::threshold(Index n) const {
  if (kind == Kind::fixed_alpha_over_2) return alpha / 2.0;
  const double logn = std::log(static_cast<double>(n));
  return logn > 0.0 ? c4 / std::sqrt(logn) : std::numeric_limits<double>::infinity();
}

GapTable::GapTable(const ObservationSet& obs, SolveOptions opts)
    : obs_(obs), opts_(with_resolved_M(without_lambda(std::move(opts)), obs)) {}

const RiskGapEstimate& GapTable::get(int j, int q) {
  const auto key = std::minmax(j, q);
  auto it = table_.find(key);
  if (it == table_.end()) it = table_.emplace(key, risk_gap(obs_, j, q, opts_)).first;
  return it->second;
}

PartitionComplex estimate_partition(int order, double threshold, GapTable& gaps) {
  std::vector<std::vector<int>> facets{{1}};
  for (int j = 2; j <= order; ++j) {
    bool placed = false;
    for (auto& facet : facets) {
      if (gaps.get(j, facet.front()).gap > threshold) {
        facet.push_back(j);
        placed = true;
        break;
      }
    }
    if (!placed) facets.push_back({j});
  }
  return PartitionComplex::partition(std::move(facets), order);
}

PartitionComplex estimate_partition(const ObservationSet& obs, const ThresholdPolicy& policy, const SolveOptions& opts) {
  GapTable gaps(obs, opts);
  return estimate_partition(obs.shape().order(), policy.threshold(obs.size()), gaps);
}

CompletionResult fit_partition(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts) {
  CompletionResult out;
  out.partition = complex;
  out.report = opts.lambda ? solve_sparse(obs, complex, opts) : solve_convex(obs, complex, opts);
  out.params = exp_reparam(out.report.logparams);
  return out;
}

namespace {

double l1_norm(const LogFactorSet& lp) {
  double s = 0.0;
  for (const auto& u : lp.factors) s += u.cwiseAbs().sum();
  return s;
}

// Fit under an l1 budget that is a fraction of the unconstrained fit's norm.
SolveReport fit_fraction(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts,
                         const SolveReport& unconstrained, double fraction, double* lambda_out = nullptr) {
  SolveOptions o = opts;
  o.lambda = fraction * l1_norm(unconstrained.logparams);
  if (lambda_out) *lambda_out = *o.lambda;
  return solve_sparse(obs, complex, o);
}

}  // namespace

CvResult cross_validate(const ObservationSet& obs, std::span<const double> grid, const SolveOptions& opts,
                        std::span<const double> lambda_fractions) {
  const Index n = obs.size();
  if (n < 4) throw ConfigError("cross-validation needs at least 4 observations, got " + std::to_string(n));
  if (grid.empty()) throw ConfigError("cross-validation grid is empty");
  for (double f : lambda_fractions)
    if (!(f >= 0.0)) throw ConfigError("l1 fractions must be >= 0");

  const SolveOptions o = with_resolved_M(without_lambda(opts), obs);
  GapTable gaps(obs, o);
  const Index half = n / 2;
  const ObservationSet validation = obs.slice(0, half);
  const ObservationSet training = obs.slice(half, n);

  struct Scored {
    double risk;
    bool ok;
  };
  std::map<std::pair<std::string, double>, Scored> memo;  // (partition, fraction or -1)
  auto score = [&](const PartitionComplex& part, std::optional<double> fraction) -> Scored {
    const auto key = std::make_pair(part.to_string(), fraction.value_or(-1.0));
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    Scored s{std::numeric_limits<double>::infinity(), false};
    try {
      SolveReport rep = solve_convex(training, part, o);
      if (fraction) rep = fit_fraction(training, part, o, rep, *fraction);
      s = {empirical_risk(rep.logparams, validation), true};
    } catch (const Error&) {
    }
    memo.emplace(key, s);
    return s;
  };

  CvResult out;
  for (double t : grid) {
    const PartitionComplex part = estimate_partition(obs.shape().order(), t, gaps);
    if (lambda_fractions.empty()) {
      const Scored s = score(part, std::nullopt);
      out.entries.push_back({t, std::nullopt, part, s.risk, s.ok});
    } else {
      for (double f : lambda_fractions) {
        const Scored s = score(part, f);
        out.entries.push_back({t, f, part, s.risk, s.ok});
      }
    }
  }

  const CvEntry* best = nullptr;
  for (const auto& e : out.entries) {
    if (!e.fit_ok) continue;
    const auto key = [](const CvEntry& c) {
      return std::make_tuple(c.validation_risk, c.threshold, c.lambda_fraction.value_or(-1.0));
    };
    if (!best || key(e) < key(*best)) best = &e;
  }
  if (!best) throw ConfigError("every cross-validation fit failed");

  out.threshold = best->threshold;
  out.lambda_fraction = best->lambda_fraction;
  out.partition = best->partition;
  out.report = solve_convex(obs, out.partition, o);
  if (best->lambda_fraction) {
    double lambda = 0.0;
    out.report = fit_fraction(obs, out.partition, o, out.report, *best->lambda_fraction, &lambda);
    out.lambda = lambda;
  }
  out.params = exp_reparam(out.report.logparams);
  return out;
}

CompletionResult complete_tensor(const ObservationSet& obs, const CompletionConfig& config) {
  if (!config.cv_grid.empty()) {
    CvResult cv = cross_validate(obs, config.cv_grid, config.solve, config.lambda_fractions);
    return {cv.partition, cv.params, cv.report};
  }
  if (!config.threshold) throw ConfigError("completion needs a threshold policy or a cross-validation grid");
  const PartitionComplex part = estimate_partition(obs, *config.threshold, config.solve);
  return fit_partition(obs, part, with_resolved_M(config.solve, obs));
}

RandomizedResult randomized_decompose(const TensorShape& shape, const EntrySampler& sampler,
                                      const PartitionComplex& complex, double delta, const SolveOptions& opts,
                                      std::uint64_t seed) {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  const Index rho = effective_dimension(complex, shape);
  const auto n = static_cast<Index>(std::ceil(static_cast<double>(rho) / delta));
  Rng rng(seed);
  const int p = shape.order();
  std::vector<int> coords(static_cast<std::size_t>(n * p));
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    std::span<int> x(coords.data() + i * p, static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) x[static_cast<std::size_t>(j)] = rng.uniform_int(1, shape.dims()[static_cast<std::size_t>(j)]);
    y[i] = sampler(std::span<const int>(x));
  }
  const ObservationSet obs(shape, std::move(coords), std::move(y));
  CompletionResult fit = fit_partition(obs, complex, opts);
  return {std::move(fit.params), std::move(fit.report), n};
}

std::vector<double> default_threshold_grid() { return {0.001, 0.005, 0.01, 0.05, 0.1, 0.5}; }
std::vector<double> default_lambda_fractions() { return {0.0, 0.1, 0.2, 0.4, 0.7, 1.0}; }

}  // namespace hdt
