#pragma once

#include "hdt/solver.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace hdt {

/// Empirical risk gap of positions (j, q): best decoupled fit minus best
/// coupled fit of the data projected onto (x_j, x_q).
struct RiskGapEstimate {
  int j = 0;
  int q = 0;
  double gap = 0.0;
  double coupled_risk = 0.0;
  double decoupled_risk = 0.0;
  /// Fewer than two distinct observed levels at j or q.
  bool degenerate = false;
  bool converged = false;
};

/// Both subproblems run through solve_convex with the same M (opts.M, or the
/// default bound of the full data). opts.lambda is ignored.
RiskGapEstimate risk_gap(const ObservationSet& obs, int j, int q, const SolveOptions& opts);

struct ThresholdPolicy {
  enum class Kind { fixed_alpha_over_2, decaying };
  Kind kind = Kind::fixed_alpha_over_2;
  double alpha = 0.02;
  double c4 = 0.0;

  /// t_n = alpha / 2
  static ThresholdPolicy fixed(double alpha);
  /// t_n = c4 / sqrt(log n)
  static ThresholdPolicy decaying(double c4);
  /// Fixed policy whose threshold is exactly t.
  static ThresholdPolicy at(double t) { return fixed(2.0 * t); }

  double threshold(Index n) const;
};

/// Memoised risk gaps of one data set, keyed by the unordered pair.
class GapTable {
 public:
  GapTable(const ObservationSet& obs, SolveOptions opts);
  const RiskGapEstimate& get(int j, int q);
  std::size_t computed() const { return table_.size(); }

 private:
  const ObservationSet& obs_;
  SolveOptions opts_;
  std::map<std::pair<int, int>, RiskGapEstimate> table_;
};

/// Greedy facet scan: position j joins the first facet whose smallest member q
/// has a gap above t with j, else opens a new facet.
PartitionComplex estimate_partition(const ObservationSet& obs, const ThresholdPolicy& policy, const SolveOptions& opts);
PartitionComplex estimate_partition(int order, double threshold, GapTable& gaps);

struct CompletionConfig {
  std::optional<ThresholdPolicy> threshold;
  /// Non-empty selects cross-validation over these thresholds.
  std::vector<double> cv_grid;
  /// With cross-validation and a non-empty list, the l1 budget is chosen too,
  /// as these fractions of the unconstrained fit's ||U||_1.
  std::vector<double> lambda_fractions;
  SolveOptions solve;
  double delta = 0.1;
};

struct CompletionResult {
  PartitionComplex partition;
  FactorSet params;
  SolveReport report;
};

/// One row of the cross-validation table.
struct CvEntry {
  double threshold = 0.0;
  std::optional<double> lambda_fraction;
  PartitionComplex partition;
  /// I-divergence risk on the first floor(n/2) observations of a fit to the rest.
  double validation_risk = 0.0;
  bool fit_ok = false;
};

struct CvResult {
  double threshold = 0.0;
  std::optional<double> lambda_fraction;
  std::optional<double> lambda;
  PartitionComplex partition;
  FactorSet params;
  SolveReport report;
  std::vector<CvEntry> entries;
};

/// Partitions come from the full data; fits use observations floor(n/2)..n-1
/// and are scored on the first floor(n/2). Ties go to the smallest threshold,
/// then the smallest l1 fraction. The winner is refit on the full data.
/// Throws ConfigError when n < 4 or the grid is empty.
CvResult cross_validate(const ObservationSet& obs, std::span<const double> grid, const SolveOptions& opts,
                        std::span<const double> lambda_fractions = {});

/// Threshold policy or cross-validation per config, then the full solve
/// (sparse when config.solve.lambda is set).
CompletionResult complete_tensor(const ObservationSet& obs, const CompletionConfig& config);

/// Fit of `complex` by the solver, exp-mapped. Sparse when opts.lambda is set.
CompletionResult fit_partition(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts);

using EntrySampler = std::function<double(std::span<const int>)>;

struct RandomizedResult {
  FactorSet params;
  SolveReport report;
  Index samples = 0;
};

/// Draws n = ceil(rho / delta) uniform indices, queries `sampler` at each and
/// fits `complex` to the answers.
RandomizedResult randomized_decompose(const TensorShape& shape, const EntrySampler& sampler,
                                      const PartitionComplex& complex, double delta, const SolveOptions& opts,
                                      std::uint64_t seed);

/// {0.001, 0.005, 0.01, 0.05, 0.1, 0.5}
std::vector<double> default_threshold_grid();
/// {0, 0.1, 0.2, 0.4, 0.7, 1}
std::vector<double> default_lambda_fractions();

}  // namespace hdt
