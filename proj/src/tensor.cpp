#include "hdt/tensor.hpp"

#include "hdt/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hdt {

TensorShape::TensorShape(std::vector<int> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw DimensionError("tensor order must be at least 1");
  total_ = 1;
  for (int r : dims_) {
    if (r < 1) throw DimensionError("every dimension must be at least 1, got " + std::to_string(r));
    total_ *= r;
  }
}

int TensorShape::dim(int position) const {
  if (position < 1 || position > order())
    throw DimensionError("position " + std::to_string(position) + " outside 1.." + std::to_string(order()));
  return dims_[static_cast<std::size_t>(position - 1)];
}

int TensorShape::max_dim() const { return *std::max_element(dims_.begin(), dims_.end()); }

bool TensorShape::contains(std::span<const int> coords) const {
  if (static_cast<int>(coords.size()) != order()) return false;
  for (std::size_t i = 0; i < coords.size(); ++i)
    if (coords[i] < 1 || coords[i] > dims_[i]) return false;
  return true;
}

Index TensorShape::linear_index(std::span<const int> coords) const {
  if (static_cast<int>(coords.size()) != order())
    throw DimensionError("index has " + std::to_string(coords.size()) + " coordinates, tensor order is " +
                         std::to_string(order()));
  Index lin = 0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] < 1 || coords[i] > dims_[i])
      throw DimensionError("coordinate " + std::to_string(coords[i]) + " at position " + std::to_string(i + 1) +
                           " outside 1.." + std::to_string(dims_[i]));
    lin = lin * dims_[i] + (coords[i] - 1);
  }
  return lin;
}

void TensorShape::unravel(Index linear, std::span<int> coords) const {
  for (int i = order() - 1; i >= 0; --i) {
    const int r = dims_[static_cast<std::size_t>(i)];
    coords[static_cast<std::size_t>(i)] = static_cast<int>(linear % r) + 1;
    linear /= r;
  }
}

void for_each_index(const TensorShape& shape, const std::function<void(std::span<const int>)>& fn) {
  std::vector<int> x(static_cast<std::size_t>(shape.order()), 1);
  for (Index lin = 0; lin < shape.total_entries(); ++lin) {
    fn(x);
    for (int i = shape.order() - 1; i >= 0; --i) {
      auto& c = x[static_cast<std::size_t>(i)];
      if (++c <= shape.dims()[static_cast<std::size_t>(i)]) break;
      c = 1;
    }
  }
}

DenseTensor::DenseTensor(TensorShape s, Eigen::VectorXd e) : shape(std::move(s)), entries(std::move(e)) {
  if (entries.size() != shape.total_entries())
    throw DimensionError("tensor has " + std::to_string(entries.size()) + " entries, shape needs " +
                         std::to_string(shape.total_entries()));
}

DenseTensor::DenseTensor(TensorShape s) : shape(std::move(s)), entries(Eigen::VectorXd::Zero(shape.total_entries())) {}

// ---------------------------------------------------------------------------

PartitionComplex::PartitionComplex(std::vector<std::vector<int>> facets, int order, ComplexKind kind)
    : facets_(std::move(facets)), order_(order), kind_(kind) {
  if (order_ < 1) throw DimensionError("complex order must be at least 1");
  if (facets_.empty()) throw DimensionError("complex needs at least one facet");
  for (auto& f : facets_) {
    if (f.empty()) throw DimensionError("facets must be nonempty");
    std::sort(f.begin(), f.end());
    if (std::adjacent_find(f.begin(), f.end()) != f.end()) throw DimensionError("facet repeats a position");
    if (f.front() < 1 || f.back() > order_)
      throw DimensionError("facet references position outside 1.." + std::to_string(order_));
  }
  for (std::size_t a = 0; a < facets_.size(); ++a)
    for (std::size_t b = 0; b < facets_.size(); ++b)
      if (a != b && std::includes(facets_[b].begin(), facets_[b].end(), facets_[a].begin(), facets_[a].end()))
        throw DimensionError("facet " + std::to_string(a + 1) + " is contained in facet " + std::to_string(b + 1));
  if (kind_ == ComplexKind::partition) {
    std::vector<int> seen(static_cast<std::size_t>(order_), 0);
    for (const auto& f : facets_)
      for (int j : f) ++seen[static_cast<std::size_t>(j - 1)];
    for (int j = 0; j < order_; ++j)
      if (seen[static_cast<std::size_t>(j)] != 1)
        throw DimensionError("partition must place position " + std::to_string(j + 1) + " in exactly one facet");
  }
}

PartitionComplex PartitionComplex::partition(std::vector<std::vector<int>> facets, int order) {
  return PartitionComplex(std::move(facets), order, ComplexKind::partition);
}

PartitionComplex PartitionComplex::general(std::vector<std::vector<int>> facets, int order) {
  return PartitionComplex(std::move(facets), order, ComplexKind::general);
}

PartitionComplex PartitionComplex::singletons(int order) {
  std::vector<std::vector<int>> f;
  for (int j = 1; j <= order; ++j) f.push_back({j});
  return partition(std::move(f), order);
}

PartitionComplex PartitionComplex::full(int order) {
  std::vector<int> all(static_cast<std::size_t>(order));
  for (int j = 0; j < order; ++j) all[static_cast<std::size_t>(j)] = j + 1;
  return partition({all}, order);
}

std::string PartitionComplex::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < facets_.size(); ++k) {
    if (k) os << ',';
    os << '[';
    for (std::size_t i = 0; i < facets_[k].size(); ++i) os << (i ? "," : "") << facets_[k][i];
    os << ']';
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------

FacetLayout::FacetLayout(const TensorShape& shape, const PartitionComplex& complex) {
  if (complex.order() != shape.order())
    throw DimensionError("complex order " + std::to_string(complex.order()) + " does not match tensor order " +
                         std::to_string(shape.order()));
  for (const auto& f : complex.facets()) {
    std::vector<int> pos;
    std::vector<Index> strides(f.size());
    Index size = 1;
    for (int j : f) {
      if (j < 1 || j > shape.order()) throw DimensionError("facet references position " + std::to_string(j));
      pos.push_back(j - 1);
    }
    for (int i = static_cast<int>(f.size()) - 1; i >= 0; --i) {
      strides[static_cast<std::size_t>(i)] = size;
      size *= shape.dims()[static_cast<std::size_t>(pos[static_cast<std::size_t>(i)])];
    }
    positions_.push_back(std::move(pos));
    strides_.push_back(std::move(strides));
    bases_.push_back(total_);
    sizes_.push_back(size);
    total_ += size;
  }
}

Index FacetLayout::local_offset(int k, std::span<const int> x) const {
  const auto& pos = positions_[static_cast<std::size_t>(k)];
  const auto& st = strides_[static_cast<std::size_t>(k)];
  Index off = 0;
  for (std::size_t i = 0; i < pos.size(); ++i) off += (x[static_cast<std::size_t>(pos[i])] - 1) * st[i];
  return off;
}

std::vector<Eigen::VectorXd> zero_facet_arrays(const TensorShape& shape, const PartitionComplex& complex) {
  FacetLayout layout(shape, complex);
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < layout.num_facets(); ++k) out.push_back(Eigen::VectorXd::Zero(layout.facet_size(k)));
  return out;
}

Eigen::VectorXd flatten(const std::vector<Eigen::VectorXd>& arrays) {
  Index total = 0;
  for (const auto& a : arrays) total += a.size();
  Eigen::VectorXd flat(total);
  Index at = 0;
  for (const auto& a : arrays) {
    flat.segment(at, a.size()) = a;
    at += a.size();
  }
  return flat;
}

std::vector<Eigen::VectorXd> unflatten(const Eigen::VectorXd& flat, const FacetLayout& layout) {
  if (flat.size() != layout.total()) throw DimensionError("flat parameter vector has the wrong length");
  std::vector<Eigen::VectorXd> out;
  for (int k = 0; k < layout.num_facets(); ++k) out.emplace_back(flat.segment(layout.facet_base(k), layout.facet_size(k)));
  return out;
}

bool satisfies_omega(const FactorSet& params, double tolerance) {
  const double M = params.M;
  for (const auto& f : params.factors)
    for (double v : f)
      if (!(v >= 1.0 / (M * M) * (1 - tolerance) && v <= M * M * (1 + tolerance))) return false;
  FacetLayout layout(params.shape, params.complex);
  bool ok = true;
  for_each_index(params.shape, [&](std::span<const int> x) {
    double prod = 1.0;
    for (int k = 0; k < layout.num_facets(); ++k) prod *= params.factors[static_cast<std::size_t>(k)][layout.local_offset(k, x)];
    if (!(prod >= (1.0 / M) * (1 - tolerance) && prod <= M * (1 + tolerance))) ok = false;
  });
  return ok;
}

bool satisfies_phi(const LogFactorSet& lp, double tolerance) {
  const double L = std::log(lp.M);
  const int m = lp.num_facets();
  if (lp.eta.size() != m || lp.nu.size() != m) return false;
  for (int k = 0; k < m; ++k) {
    const auto& u = lp.factors[static_cast<std::size_t>(k)];
    if (lp.eta[k] < -2 * L - tolerance || lp.nu[k] > 2 * L + tolerance) return false;
    if (u.size() > 0 && (u.minCoeff() < lp.eta[k] - tolerance || u.maxCoeff() > lp.nu[k] + tolerance)) return false;
  }
  return lp.eta.sum() >= -L - tolerance && lp.nu.sum() <= L + tolerance;
}

}  // namespace hdt
