#include "hdt/barrier.hpp"

#include "hdt/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>

namespace hdt {

using Eigen::Index;
using Eigen::VectorXd;

double LinearConstraints::max_violation(const VectorXd& z) const {
  if (A.rows() == 0) return 0.0;
  return std::max(0.0, (A * z - b).maxCoeff());
}

namespace {

constexpr double kArmijo = 0.25;
constexpr double kBacktrack = 0.5;
constexpr double kFractionToBoundary = 0.99;
constexpr double kTauCeiling = 1e18;
constexpr Index kDenseRowNnz = 16;

// tau * H_f + A^T diag(d^2) A, applied without forming it.
class NewtonOperator {
 public:
  NewtonOperator(const SmoothObjective& f, const LinearConstraints& cons, const VectorXd& z, const VectorXd& d2,
                 double tau)
      : f_(&f), cons_(&cons), z_(&z), d2_(&d2), tau_(tau) {}

  VectorXd apply(const VectorXd& v) const {
    VectorXd out = cons_->A.transpose() * d2_->cwiseProduct(cons_->A * v);
    const Index k = f_->dim();
    out.head(k) += tau_ * f_->hessian_vector(z_->head(k), v.head(k));
    return out;
  }

 private:
  const SmoothObjective* f_;
  const LinearConstraints* cons_;
  const VectorXd* z_;
  const VectorXd* d2_;
  double tau_;
};

class PathFollower {
 public:
  PathFollower(const SmoothObjective& f, const LinearConstraints& cons, const BarrierSettings& settings)
      : f_(f), cons_(cons), settings_(settings), k_(f.dim()), mc_(static_cast<double>(cons.num_constraints())) {}

  VectorXd slack(const VectorXd& z) const { return cons_.b - cons_.A * z; }

  double merit(const VectorXd& z, double tau) const {
    const VectorXd s = slack(z);
    if ((s.array() <= 0.0).any()) return std::numeric_limits<double>::infinity();
    return tau * f_.value(z.head(k_)) - s.array().log().sum();
  }

  // merit(z + t dz) - merit(z), evaluated without cancelling the large terms.
  double merit_change(const VectorXd& z, const VectorXd& s, const VectorXd& Adz, const VectorXd& dz, double t,
                      double tau) const {
    double barrier = 0.0;
    for (Index i = 0; i < s.size(); ++i) {
      const double ratio = t * Adz[i] / s[i];
      if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
      barrier -= std::log1p(-ratio);
    }
    return tau * f_.value_change(z.head(k_), t * dz.head(k_)) + barrier;
  }

  double gap_bound(const VectorXd& z, double tau) const {
    const VectorXd d = slack(z).cwiseInverse();
    VectorXd r = cons_.A.transpose() * d / tau;
    r.head(k_) += f_.gradient(z.head(k_));
    double total = mc_ / tau;
    // min over the box of r.(w - z): each coordinate moves to the end r points away from
    for (Index i = 0; i < z.size(); ++i) {
      const double reach = r[i] > 0.0 ? z[i] - cons_.box_lower[i] : cons_.box_upper[i] - z[i];
      total += std::abs(r[i]) * std::max(reach, 0.0);
    }
    return total;
  }

  struct Direction {
    VectorXd dz;
    VectorXd grad;
    double decrement_sq = 0.0;
  };

  Direction newton_direction(const VectorXd& z, double tau) const {
    const VectorXd d = slack(z).cwiseInverse();
    const VectorXd d2 = d.cwiseProduct(d);
    Direction out;
    out.grad = cons_.A.transpose() * d;
    out.grad.head(k_) += tau * f_.gradient(z.head(k_));
    const Index N = z.size();
    if (N <= settings_.dense_limit) {
      out.dz = -direct_solve(z, d2, tau, out.grad);
    } else {
      NewtonOperator op(f_, cons_, z, d2, tau);
      VectorXd diag = cons_.A.cwiseAbs2().transpose() * d2;
      diag.head(k_) += tau * f_.hessian_diagonal(z.head(k_));
      out.dz = pcg_solve(op, diag.cwiseMax(std::numeric_limits<double>::min()).cwiseInverse(), -out.grad);
    }
    out.decrement_sq = -out.grad.dot(out.dz);
    return out;
  }

  // Factors tau H_f + sum over sparse rows of d^2 a a^T and folds the few dense
  // rows (sums over a whole block of variables) back in with Woodbury.
  VectorXd direct_solve(const VectorXd& z, const VectorXd& d2, double tau, const VectorXd& rhs) const {
    const Index N = z.size();
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<Index> dense_rows;
    for (Index r = 0; r < cons_.A.outerSize(); ++r) {
      const Index nnz = cons_.A.outerIndexPtr()[r + 1] - cons_.A.outerIndexPtr()[r];
      if (nnz > kDenseRowNnz) {
        dense_rows.push_back(r);
        continue;
      }
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator a(cons_.A, r); a; ++a)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator b(cons_.A, r); b; ++b)
          trip.emplace_back(a.col(), b.col(), d2[r] * a.value() * b.value());
    }
    Eigen::SparseMatrix<double> H(N, N);
    H.setFromTriplets(trip.begin(), trip.end());
    if (k_ > 0) {
      Eigen::SparseMatrix<double> Hf = f_.hessian_sparse(z.head(k_));
      Hf.conservativeResize(N, N);
      H += tau * Hf;
    }
    Eigen::MatrixXd U(N, static_cast<Index>(dense_rows.size()));
    for (std::size_t c = 0; c < dense_rows.size(); ++c)
      U.col(static_cast<Index>(c)) = std::sqrt(d2[dense_rows[c]]) * cons_.A.row(dense_rows[c]).transpose();

    // Symmetric Jacobi scaling keeps the factorisation accurate when barrier terms dominate.
    VectorXd diag = H.diagonal() + U.rowwise().squaredNorm();
    const VectorXd scale = diag.cwiseMax(std::numeric_limits<double>::min()).cwiseSqrt().cwiseInverse();
    Eigen::SparseMatrix<double> Hs = scale.asDiagonal() * H * scale.asDiagonal();
    const Eigen::MatrixXd Us = scale.asDiagonal() * U;
    const VectorXd bs = scale.cwiseProduct(rhs);

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(Hs);
    if (ldlt.info() != Eigen::Success) {
      Eigen::SparseMatrix<double> shift(N, N);
      shift.setIdentity();
      ldlt.compute(Hs + 1e-12 * shift);
    }
    VectorXd x = ldlt.solve(bs);
    if (Us.cols() > 0) {
      const Eigen::MatrixXd SinvU = ldlt.solve(Us);
      Eigen::MatrixXd cap = Us.transpose() * SinvU;
      cap.diagonal().array() += 1.0;
      x -= SinvU * cap.ldlt().solve(Us.transpose() * x);
    }
    return scale.cwiseProduct(x);
  }

  // Jacobi-preconditioned conjugate gradients on the Newton operator.
  VectorXd pcg_solve(const NewtonOperator& op, const VectorXd& minv, const VectorXd& rhs) const {
    VectorXd x = VectorXd::Zero(rhs.size());
    VectorXd r = rhs;
    VectorXd zr = minv.cwiseProduct(r);
    VectorXd p = zr;
    double rz = r.dot(zr);
    const double stop = 1e-24 * rhs.squaredNorm();
    for (Index it = 0; it < 10 * rhs.size() && r.squaredNorm() > stop; ++it) {
      const VectorXd Ap = op.apply(p);
      const double alpha = rz / p.dot(Ap);
      x += alpha * p;
      r -= alpha * Ap;
      zr = minv.cwiseProduct(r);
      const double rz_next = r.dot(zr);
      p = zr + (rz_next / rz) * p;
      rz = rz_next;
    }
    return x;
  }

  // Returns false when no acceptable step exists.
  bool line_search(VectorXd& z, const Direction& dir, double tau) const {
    const VectorXd s = slack(z);
    const VectorXd Adz = cons_.A * dir.dz;
    double t = 1.0;
    for (Index i = 0; i < s.size(); ++i)
      if (Adz[i] > 0.0) t = std::min(t, kFractionToBoundary * s[i] / Adz[i]);
    const double slope = dir.grad.dot(dir.dz);
    while (t > 1e-16) {
      const double change = merit_change(z, s, Adz, dir.dz, t, tau);
      if (std::isfinite(change) && change <= kArmijo * t * slope) {
        VectorXd next = z + t * dir.dz;
        if ((slack(next).array() > 0.0).all()) {
          z = std::move(next);
          return true;
        }
      }
      t *= kBacktrack;
    }
    return false;
  }

  BarrierResult run(VectorXd z) const {
    if (z.size() != cons_.num_variables()) throw DimensionError("start point has the wrong length");
    if ((slack(z).array() <= 0.0).any()) throw ConfigError("barrier start point is not strictly feasible");
    BarrierResult res;
    double tau = settings_.tau0;
    const double eps = settings_.epsilon;
    while (true) {
      const bool final_stage = mc_ / tau <= eps / 2;
      BarrierStep step{tau, 0.0, merit(z, tau), 0.0, 0.0, 0};
      while (res.newton_steps < settings_.max_newton_steps) {
        if (final_stage && gap_bound(z, tau) <= eps) break;
        const Direction dir = newton_direction(z, tau);
        if (!(dir.decrement_sq >= 0.0) || !dir.dz.allFinite()) break;
        if (dir.decrement_sq / 2 <= (final_stage ? 1e-20 : settings_.centering_tolerance)) break;
        if (!line_search(z, dir, tau)) break;
        ++res.newton_steps;
        ++step.newton_steps;
      }
      step.merit_after = merit(z, tau);
      step.objective = f_.value(z.head(k_));
      step.gap_bound = gap_bound(z, tau);
      res.trace.push_back(step);
      if (final_stage && step.gap_bound <= eps) {
        res.converged = true;
        break;
      }
      if (res.newton_steps >= settings_.max_newton_steps) break;
      if (tau >= kTauCeiling) break;
      tau *= settings_.growth;
    }
    res.objective = f_.value(z.head(k_));
    res.gap_bound = gap_bound(z, tau);
    res.max_violation = cons_.max_violation(z);
    res.z = std::move(z);
    return res;
  }

 private:
  const SmoothObjective& f_;
  const LinearConstraints& cons_;
  const BarrierSettings& settings_;
  Index k_;
  double mc_;
};

}  // namespace

BarrierResult barrier_minimize(const SmoothObjective& f, const LinearConstraints& cons, VectorXd z0,
                               const BarrierSettings& settings) {
  if (!(settings.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(settings.growth > 1.0)) throw ConfigError("barrier growth factor must exceed 1");
  if (f.dim() > cons.num_variables()) throw DimensionError("objective uses more variables than the constraints");
  return PathFollower(f, cons, settings).run(std::move(z0));
}

}  // namespace hdt
