#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <vector>

namespace hdt {

/// Convex C^2 objective over the leading `dim()` coordinates of the barrier
/// variable; trailing coordinates enter only through the constraints.
class SmoothObjective {
 public:
  virtual ~SmoothObjective() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd hessian_vector(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const = 0;
  virtual Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::SparseMatrix<double> hessian_sparse(const Eigen::VectorXd& x) const {
    return hessian(x).sparseView();
  }
  /// value(x + dx) - value(x); override when cancellation matters.
  virtual double value_change(const Eigen::VectorXd& x, const Eigen::VectorXd& dx) const {
    return value(x + dx) - value(x);
  }
};

class LinearObjective final : public SmoothObjective {
 public:
  explicit LinearObjective(Eigen::VectorXd c) : c_(std::move(c)) {}
  Eigen::Index dim() const override { return c_.size(); }
  double value(const Eigen::VectorXd& x) const override { return c_.dot(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd&) const override { return c_; }
  Eigen::MatrixXd hessian(const Eigen::VectorXd&) const override { return Eigen::MatrixXd::Zero(c_.size(), c_.size()); }
  Eigen::VectorXd hessian_vector(const Eigen::VectorXd&, const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Zero(c_.size());
  }
  Eigen::VectorXd hessian_diagonal(const Eigen::VectorXd&) const override { return Eigen::VectorXd::Zero(c_.size()); }
  double value_change(const Eigen::VectorXd&, const Eigen::VectorXd& dx) const override { return c_.dot(dx); }
  Eigen::SparseMatrix<double> hessian_sparse(const Eigen::VectorXd&) const override {
    return Eigen::SparseMatrix<double>(c_.size(), c_.size());
  }

 private:
  Eigen::VectorXd c_;
};

/// Polytope {z : A z <= b} together with a bounding box that contains it.
/// The box only feeds the certified gap bound; it is not enforced.
struct LinearConstraints {
  Eigen::SparseMatrix<double, Eigen::RowMajor> A;
  Eigen::VectorXd b;
  Eigen::VectorXd box_lower;
  Eigen::VectorXd box_upper;

  Eigen::Index num_constraints() const { return A.rows(); }
  Eigen::Index num_variables() const { return A.cols(); }
  /// max_i (A z - b)_i, clipped at 0.
  double max_violation(const Eigen::VectorXd& z) const;
};

struct BarrierSettings {
  double epsilon = 1e-6;
  int max_newton_steps = 500;
  double growth = 10.0;
  double tau0 = 1.0;
  double centering_tolerance = 0.25;  // on lambda^2 / 2
  /// Newton systems up to this many variables are factored (sparse LDLT);
  /// larger ones go through matrix-free preconditioned CG.
  Eigen::Index dense_limit = 2000;
};

/// One outer iteration of the path-following loop.
struct BarrierStep {
  double tau;
  double objective;
  double merit_before;  // tau f + phi when centering started
  double merit_after;
  double gap_bound;
  int newton_steps;
};

struct BarrierResult {
  Eigen::VectorXd z;
  double objective = 0.0;
  /// Certified upper bound on objective(z) - min over the polytope.
  double gap_bound = 0.0;
  double max_violation = 0.0;
  int newton_steps = 0;
  bool converged = false;
  std::vector<BarrierStep> trace;
};

/// Log-barrier path following: minimises tau f(z) - sum log(b - A z) by damped
/// Newton for tau = tau0, tau0*growth, ... until the certified gap bound falls
/// to epsilon. `z0` must be strictly feasible.
///
/// The bound is m/tau + sum_i |r_i| D_i, where r = grad f + A^T(1/(tau s)) is the
/// Lagrangian gradient at z and D_i the distance from z_i to the box end that
/// -r_i points to; it holds for inexactly centred points too.
BarrierResult barrier_minimize(const SmoothObjective& f, const LinearConstraints& cons, Eigen::VectorXd z0,
                               const BarrierSettings& settings);

}  // namespace hdt
