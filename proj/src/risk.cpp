#include "hdt/risk.hpp"

#include "hdt/decomposition.hpp"
#include "hdt/error.hpp"

#include <cmath>
#include <map>
#include <set>

namespace hdt {

ObservationSet::ObservationSet(TensorShape shape, std::vector<int> coords, Eigen::VectorXd values, bool allow_zero)
    : shape_(std::move(shape)), coords_(std::move(coords)), values_(std::move(values)), allow_zero_(allow_zero) {
  const auto p = static_cast<std::size_t>(shape_.order());
  if (values_.size() < 1) throw DimensionError("observation set needs at least one record");
  if (coords_.size() != static_cast<std::size_t>(values_.size()) * p)
    throw DimensionError("coordinate count does not match n * order");
  for (Index i = 0; i < values_.size(); ++i) {
    if (!shape_.contains(index(i)))
      throw DimensionError("observation " + std::to_string(i + 1) + " has an index outside the declared dims");
    const double y = values_[i];
    if (!std::isfinite(y) || y < 0.0 || (y == 0.0 && !allow_zero_))
      throw DomainError("observation " + std::to_string(i + 1) + " has nonpositive value " + std::to_string(y));
  }
}

ObservationSet ObservationSet::slice(Index begin, Index end) const {
  const auto p = static_cast<std::size_t>(shape_.order());
  std::vector<int> c(coords_.begin() + static_cast<std::ptrdiff_t>(begin * static_cast<Index>(p)),
                     coords_.begin() + static_cast<std::ptrdiff_t>(end * static_cast<Index>(p)));
  return ObservationSet(shape_, std::move(c), values_.segment(begin, end - begin), allow_zero_);
}

ObservationSet ObservationSet::project(std::span<const int> positions) const {
  std::vector<int> dims;
  for (int j : positions) dims.push_back(shape_.dim(j));
  std::vector<int> c;
  c.reserve(static_cast<std::size_t>(size()) * positions.size());
  for (Index i = 0; i < size(); ++i) {
    auto x = index(i);
    for (int j : positions) c.push_back(x[static_cast<std::size_t>(j - 1)]);
  }
  return ObservationSet(TensorShape(std::move(dims)), std::move(c), values_, allow_zero_);
}

int ObservationSet::distinct_levels(int position) const {
  shape_.dim(position);
  std::set<int> levels;
  for (Index i = 0; i < size(); ++i) levels.insert(index(i)[static_cast<std::size_t>(position - 1)]);
  return static_cast<int>(levels.size());
}

ObservationSet exhaustive_observations(const DenseTensor& tensor, bool allow_zero) {
  std::vector<int> coords;
  coords.reserve(static_cast<std::size_t>(tensor.shape.total_entries() * tensor.shape.order()));
  for_each_index(tensor.shape, [&](std::span<const int> x) { coords.insert(coords.end(), x.begin(), x.end()); });
  return ObservationSet(tensor.shape, std::move(coords), tensor.entries, allow_zero);
}

NoiseModel NoiseModel::gamma(double k, double theta) {
  if (!(k > 0.0) || !(theta > 0.0)) throw ConfigError("gamma noise needs positive shape and scale");
  if (std::abs(k * theta - 1.0) > 1e-9) throw ConfigError("gamma noise needs shape * scale = 1 so that E(1+z) = 1");
  return NoiseModel{Family::gamma, k, theta};
}

// ---------------------------------------------------------------------------

CellDesign::CellDesign(const ObservationSet& obs, const PartitionComplex& complex)
    : layout_(obs.shape(), complex), m_(complex.num_facets()), rho_(layout_.total()), n_(obs.size()) {
  std::map<std::vector<Index>, std::size_t> cell_of;
  std::vector<Index> key(static_cast<std::size_t>(m_));
  for (Index i = 0; i < obs.size(); ++i) {
    auto x = obs.index(i);
    for (int k = 0; k < m_; ++k) key[static_cast<std::size_t>(k)] = layout_.global_offset(k, x);
    auto [it, inserted] = cell_of.try_emplace(key, counts_.size());
    if (inserted) {
      counts_.push_back(0.0);
      ysums_.push_back(0.0);
    }
    counts_[it->second] += 1.0;
    ysums_[it->second] += obs.value(i);
  }
  // Re-emit cells in key order so the layout is independent of sampling order.
  std::vector<double> counts, ysums;
  for (const auto& [k, c] : cell_of) {
    offsets_.insert(offsets_.end(), k.begin(), k.end());
    counts.push_back(counts_[c]);
    ysums.push_back(ysums_[c]);
  }
  counts_ = std::move(counts);
  ysums_ = std::move(ysums);
  coverage_ = Eigen::VectorXd::Zero(rho_);
  for (Index c = 0; c < num_cells(); ++c)
    for (Index off : offsets(c)) coverage_[off] += count(c);
}

double CellDesign::risk(const Eigen::VectorXd& u) const {
  double total = 0.0;
  for (Index c = 0; c < num_cells(); ++c) {
    double s = 0.0;
    for (Index off : offsets(c)) s += u[off];
    total += -value_sum(c) * s + count(c) * std::exp(s);
  }
  return total / static_cast<double>(n_);
}

Eigen::VectorXd CellDesign::gradient(const Eigen::VectorXd& u) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(rho_);
  for (Index c = 0; c < num_cells(); ++c) {
    double s = 0.0;
    for (Index off : offsets(c)) s += u[off];
    const double w = -value_sum(c) + count(c) * std::exp(s);
    for (Index off : offsets(c)) g[off] += w;
  }
  return g / static_cast<double>(n_);
}

Eigen::MatrixXd CellDesign::hessian(const Eigen::VectorXd& u) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(rho_, rho_);
  for (Index c = 0; c < num_cells(); ++c) {
    double s = 0.0;
    auto offs = offsets(c);
    for (Index off : offs) s += u[off];
    const double w = count(c) * std::exp(s);
    for (Index a : offs)
      for (Index b : offs) h(a, b) += w;
  }
  return h / static_cast<double>(n_);
}

Eigen::VectorXd CellDesign::hessian_vector(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  Eigen::VectorXd hv = Eigen::VectorXd::Zero(rho_);
  for (Index c = 0; c < num_cells(); ++c) {
    double s = 0.0, dv = 0.0;
    auto offs = offsets(c);
    for (Index off : offs) {
      s += u[off];
      dv += v[off];
    }
    const double w = count(c) * std::exp(s) * dv;
    for (Index off : offs) hv[off] += w;
  }
  return hv / static_cast<double>(n_);
}

// ---------------------------------------------------------------------------

double pairwise_sum(std::span<const double> terms) {
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const auto half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

namespace {

void require_same_shape(const TensorShape& a, const TensorShape& b) {
  if (!(a == b)) throw DimensionError("parameter shape does not match observation shape");
}

}  // namespace

double empirical_risk(const LogFactorSet& lp, const ObservationSet& obs) {
  require_same_shape(lp.shape, obs.shape());
  FacetLayout layout(lp.shape, lp.complex);
  std::vector<double> terms(static_cast<std::size_t>(obs.size()));
  for (Index i = 0; i < obs.size(); ++i) {
    auto x = obs.index(i);
    double s = 0.0;
    for (int k = 0; k < layout.num_facets(); ++k) s += lp.factors[static_cast<std::size_t>(k)][layout.local_offset(k, x)];
    terms[static_cast<std::size_t>(i)] = -obs.value(i) * s + std::exp(s);
  }
  return pairwise_sum(terms) / static_cast<double>(obs.size());
}

double empirical_risk_theta(const FactorSet& params, const ObservationSet& obs) {
  require_same_shape(params.shape, obs.shape());
  FacetLayout layout(params.shape, params.complex);
  std::vector<double> terms(static_cast<std::size_t>(obs.size()));
  for (Index i = 0; i < obs.size(); ++i) {
    auto x = obs.index(i);
    double log_sum = 0.0, prod = 1.0;
    for (int k = 0; k < layout.num_facets(); ++k) {
      const double theta = params.factors[static_cast<std::size_t>(k)][layout.local_offset(k, x)];
      if (!(theta > 0.0)) throw DomainError("theta must be positive in the I-divergence risk");
      log_sum += std::log(theta);
      prod *= theta;
    }
    terms[static_cast<std::size_t>(i)] = -obs.value(i) * log_sum + prod;
  }
  return pairwise_sum(terms) / static_cast<double>(obs.size());
}

std::vector<Eigen::VectorXd> risk_gradient(const LogFactorSet& lp, const ObservationSet& obs) {
  require_same_shape(lp.shape, obs.shape());
  FacetLayout layout(lp.shape, lp.complex);
  auto grad = zero_facet_arrays(lp.shape, lp.complex);
  for (Index i = 0; i < obs.size(); ++i) {
    auto x = obs.index(i);
    double s = 0.0;
    for (int k = 0; k < layout.num_facets(); ++k) s += lp.factors[static_cast<std::size_t>(k)][layout.local_offset(k, x)];
    const double w = -obs.value(i) + std::exp(s);
    for (int k = 0; k < layout.num_facets(); ++k) grad[static_cast<std::size_t>(k)][layout.local_offset(k, x)] += w;
  }
  for (auto& g : grad) g /= static_cast<double>(obs.size());
  return grad;
}

double squared_loss(const FactorSet& params, const ObservationSet& obs) {
  require_same_shape(params.shape, obs.shape());
  FacetLayout layout(params.shape, params.complex);
  std::vector<double> terms(static_cast<std::size_t>(obs.size()));
  for (Index i = 0; i < obs.size(); ++i) {
    auto x = obs.index(i);
    double prod = 1.0;
    for (int k = 0; k < layout.num_facets(); ++k) prod *= params.factors[static_cast<std::size_t>(k)][layout.local_offset(k, x)];
    const double r = obs.value(i) - prod;
    terms[static_cast<std::size_t>(i)] = r * r;
  }
  return pairwise_sum(terms) / static_cast<double>(obs.size());
}

double prediction_error(const DenseTensor& truth, const DenseTensor& fitted) {
  if (!(truth.shape == fitted.shape)) throw DimensionError("prediction error needs matching shapes");
  std::vector<double> terms(static_cast<std::size_t>(truth.entries.size()));
  for (Index i = 0; i < truth.entries.size(); ++i) {
    const double d = truth.entries[i] - fitted.entries[i];
    terms[static_cast<std::size_t>(i)] = d * d;
  }
  return pairwise_sum(terms) / static_cast<double>(truth.entries.size());
}

double prediction_error(const DenseTensor& truth, const FactorSet& fitted) {
  if (!(truth.shape == fitted.shape)) throw DimensionError("prediction error needs matching shapes");
  return prediction_error(truth, to_dense(fitted));
}

MajorizationConstants majorization_constants(double mu, double M) {
  const double K = mu * M;
  return {1.0 / (2.0 * K * K * K), -K * std::log(K) + 1.0 / K, K * K * K / 2.0, std::log(K) / K + K};
}

}  // namespace hdt
