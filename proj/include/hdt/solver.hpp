#pragma once

#include "hdt/barrier.hpp"
#include "hdt/risk.hpp"
#include "hdt/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hdt {

struct SolveOptions {
  double epsilon = 1e-6;
  /// Budget of Newton steps summed over the whole central path.
  int max_iterations = 500;
  double barrier_mu_growth = 10.0;
  /// Bound on the tensor; default_bound_M(obs) when absent.
  std::optional<double> M;
  /// l1 budget on U, used by solve_sparse only.
  std::optional<double> lambda;
  /// Unused by the barrier path (its start point is always strictly
  /// feasible); kept so option sets round-trip through configs.
  std::uint64_t seed = 0;
  /// Above this many barrier variables Newton systems are solved matrix-free.
  Index dense_limit = 2000;
};

struct SolveReport {
  LogFactorSet logparams;
  double objective = 0.0;
  /// Certified bound on objective minus the optimum over the feasible set.
  double kkt_residual = 0.0;
  /// Largest constraint violation of the returned point, recomputed from scratch.
  double feasibility_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Fewer observations than facets.
  bool underdetermined = false;
  /// Coordinates no observation touches; pinned to the point of [eta_k, nu_k] nearest 0.
  Index unobserved = 0;
  std::vector<BarrierStep> trace;
};

/// max(2, 1.5 * max_i y_i)
double default_bound_M(const ObservationSet& obs);

/// epsilon-solution of min R(U) over Phi.
SolveReport solve_convex(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts);
/// Same over Phi intersected with {||U||_1 <= lambda}. Throws ConfigError without lambda.
SolveReport solve_sparse(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts);

/// Largest violation of the Phi constraints (and of the l1 budget when given).
double phi_violation(const LogFactorSet& logparams, std::optional<double> lambda = std::nullopt);

/// Independent verification of an epsilon-solution.
///
/// Recomputes constraint violations and the objective, requires the report's
/// own residuals to be within epsilon, and bounds the suboptimality by the
/// Frank-Wolfe gap  g.u - min_{w feasible} g.w  with g the risk gradient at u;
/// the inner linear program is solved by the same barrier code to epsilon/10
/// and its certified error is added to the bound.
bool check_epsilon_solution(const SolveReport& report, const ObservationSet& obs, const PartitionComplex& complex,
                            const SolveOptions& opts);

/// I-divergence risk as a barrier objective over the concatenated facet arrays.
class RiskObjective final : public SmoothObjective {
 public:
  explicit RiskObjective(const CellDesign& design) : design_(design) {}
  Index dim() const override { return design_.num_params(); }
  double value(const Eigen::VectorXd& u) const override { return design_.risk(u); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const override { return design_.gradient(u); }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& u) const override { return design_.hessian(u); }
  Eigen::VectorXd hessian_vector(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const override {
    return design_.hessian_vector(u, v);
  }
  Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& u) const override;
  Eigen::SparseMatrix<double> hessian_sparse(const Eigen::VectorXd& u) const override;
  double value_change(const Eigen::VectorXd& u, const Eigen::VectorXd& du) const override;

 private:
  const CellDesign& design_;
};

}  // namespace hdt
