#pragma once

#include "hdt/tensor.hpp"

#include <span>
#include <vector>

namespace hdt {

/// n sampled indices x<i> with their measured values y<i>.
///
/// Values must be strictly positive unless the set is built with
/// `allow_zero`, which admits y = 0 for fixtures such as the parity
/// counterexample tensor.
class ObservationSet {
 public:
  ObservationSet() = default;
  /// `coords` holds n*p 1-based coordinates, observation-major.
  ObservationSet(TensorShape shape, std::vector<int> coords, Eigen::VectorXd values, bool allow_zero = false);

  const TensorShape& shape() const { return shape_; }
  Index size() const { return values_.size(); }
  std::span<const int> index(Index i) const {
    return {coords_.data() + i * shape_.order(), static_cast<std::size_t>(shape_.order())};
  }
  double value(Index i) const { return values_[i]; }
  const Eigen::VectorXd& values() const { return values_; }
  const std::vector<int>& coords() const { return coords_; }
  bool allows_zero() const { return allow_zero_; }

  /// Observations [begin, end) in their original order.
  ObservationSet slice(Index begin, Index end) const;
  /// Keeps only the listed (1-based) positions, in the given order; the new
  /// shape has those dimensions.
  ObservationSet project(std::span<const int> positions) const;
  /// Number of distinct observed levels at a 1-based position.
  int distinct_levels(int position) const;

 private:
  TensorShape shape_;
  std::vector<int> coords_;
  Eigen::VectorXd values_;
  bool allow_zero_ = false;
};

/// Every index of `tensor` observed once, in row-major order, noiselessly.
ObservationSet exhaustive_observations(const DenseTensor& tensor, bool allow_zero = false);

/// Multiplicative noise y = (1+z) psi with (1+z) ~ Gamma(shape k, scale theta), k*theta = 1.
struct NoiseModel {
  enum class Family { none, gamma };
  Family family = Family::none;
  double shape_k = 1.0;
  double scale = 1.0;

  static NoiseModel none() { return {}; }
  /// Throws ConfigError unless k, theta > 0 and k*theta = 1.
  static NoiseModel gamma(double k, double theta);
};

/// Observations aggregated by the facet coordinates they touch.
///
/// The I-divergence risk only depends on, per distinct index, the number of
/// observations and the sum of their values, so repeated indices collapse
/// into one weighted cell. Coordinates are the concatenated facet arrays
/// (length rho), in FacetLayout order.
class CellDesign {
 public:
  CellDesign(const ObservationSet& obs, const PartitionComplex& complex);

  Index num_cells() const { return static_cast<Index>(counts_.size()); }
  Index num_params() const { return rho_; }
  int num_facets() const { return m_; }
  Index num_observations() const { return n_; }
  const FacetLayout& layout() const { return layout_; }

  std::span<const Index> offsets(Index cell) const {
    return {offsets_.data() + cell * m_, static_cast<std::size_t>(m_)};
  }
  double count(Index cell) const { return counts_[static_cast<std::size_t>(cell)]; }
  double value_sum(Index cell) const { return ysums_[static_cast<std::size_t>(cell)]; }
  /// Observation count touching each coordinate (0 means unidentified by data).
  const Eigen::VectorXd& coverage() const { return coverage_; }

  /// (1/n) sum_i [ -y_i s_i + exp(s_i) ] with s_i = sum_k u_{X_k<i>}.
  double risk(const Eigen::VectorXd& u) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& u) const;
  Eigen::VectorXd hessian_vector(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;

 private:
  FacetLayout layout_;
  int m_ = 0;
  Index rho_ = 0;
  Index n_ = 0;
  std::vector<Index> offsets_;
  std::vector<double> counts_;
  std::vector<double> ysums_;
  Eigen::VectorXd coverage_;
};

/// Reparametrised empirical risk R(U) = (1/n) sum_i [ -y_i sum_k u + exp(sum_k u) ].
double empirical_risk(const LogFactorSet& logparams, const ObservationSet& obs);
/// Same risk in the Theta parametrisation. Throws DomainError on theta <= 0.
double empirical_risk_theta(const FactorSet& params, const ObservationSet& obs);
/// dR/du_{X_j} = (1/n) sum over observations with X_j<i> = X_j of (-y_i + exp(s_i)).
std::vector<Eigen::VectorXd> risk_gradient(const LogFactorSet& logparams, const ObservationSet& obs);
/// (1/n) sum_i (y_i - prod_k theta)^2
double squared_loss(const FactorSet& params, const ObservationSet& obs);
/// Mean squared entry error over the whole index set.
double prediction_error(const DenseTensor& truth, const FactorSet& fitted);
double prediction_error(const DenseTensor& truth, const DenseTensor& fitted);

/// Constants with a_l L + b_l <= R <= a_u L + b_u for data and predictions in
/// [(mu M)^-1, mu M].
struct MajorizationConstants {
  double a_lower;
  double b_lower;
  double a_upper;
  double b_upper;
};
MajorizationConstants majorization_constants(double mu, double M);

/// Sum of `terms` by recursive halving; fixed order, so bit-reproducible.
double pairwise_sum(std::span<const double> terms);

}  // namespace hdt
