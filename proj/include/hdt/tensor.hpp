#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hdt {

using Index = Eigen::Index;

/// Dimensions r_1..r_p of an order-p tensor.
///
/// Positions are 1-based at every public entry point (position 1 is the first
/// mode, coordinate 1 the first level of a mode). Flat storage is row-major
/// with the last index varying fastest.
class TensorShape {
 public:
  TensorShape() = default;
  explicit TensorShape(std::vector<int> dims);

  int order() const { return static_cast<int>(dims_.size()); }
  /// Dimension of a 1-based position.
  int dim(int position) const;
  const std::vector<int>& dims() const { return dims_; }
  Index total_entries() const { return total_; }
  int max_dim() const;

  bool contains(std::span<const int> coords) const;
  /// Row-major offset of 1-based coordinates; throws DimensionError when out of range.
  Index linear_index(std::span<const int> coords) const;
  /// Inverse of linear_index; writes 1-based coordinates.
  void unravel(Index linear, std::span<int> coords) const;

  bool operator==(const TensorShape&) const = default;

 private:
  std::vector<int> dims_;
  Index total_ = 0;
};

/// A tuple x = (x_1..x_p) of 1-based coordinates.
struct MultiIndex {
  std::vector<int> coords;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> c) : coords(c) {}
  explicit MultiIndex(std::vector<int> c) : coords(std::move(c)) {}

  int order() const { return static_cast<int>(coords.size()); }
  operator std::span<const int>() const { return coords; }
  bool operator==(const MultiIndex&) const = default;
};

/// Calls fn with the 1-based coordinates of every index in row-major order.
void for_each_index(const TensorShape& shape, const std::function<void(std::span<const int>)>& fn);

struct DenseTensor {
  TensorShape shape;
  Eigen::VectorXd entries;

  DenseTensor() = default;
  DenseTensor(TensorShape s, Eigen::VectorXd e);
  explicit DenseTensor(TensorShape s);

  double operator()(std::span<const int> coords) const { return entries[shape.linear_index(coords)]; }
  double& operator()(std::span<const int> coords) { return entries[shape.linear_index(coords)]; }
  double operator()(const MultiIndex& x) const { return (*this)(std::span<const int>(x.coords)); }
};

enum class ComplexKind { partition, general };

/// Ordered facets F_1..F_m of a simplicial complex over positions 1..p.
///
/// Each facet is stored sorted. Facets must be inclusion-maximal; a partition
/// additionally has pairwise-disjoint facets covering every position.
class PartitionComplex {
 public:
  PartitionComplex() = default;

  static PartitionComplex partition(std::vector<std::vector<int>> facets, int order);
  static PartitionComplex general(std::vector<std::vector<int>> facets, int order);
  static PartitionComplex singletons(int order);
  static PartitionComplex full(int order);

  int order() const { return order_; }
  int num_facets() const { return static_cast<int>(facets_.size()); }
  const std::vector<std::vector<int>>& facets() const { return facets_; }
  const std::vector<int>& facet(int k) const { return facets_.at(static_cast<std::size_t>(k)); }
  ComplexKind kind() const { return kind_; }
  bool is_partition() const { return kind_ == ComplexKind::partition; }

  /// e.g. "[[1,2],[3],[4]]"
  std::string to_string() const;

  bool operator==(const PartitionComplex&) const = default;

 private:
  PartitionComplex(std::vector<std::vector<int>> facets, int order, ComplexKind kind);

  std::vector<std::vector<int>> facets_;
  int order_ = 0;
  ComplexKind kind_ = ComplexKind::general;
};

/// Maps a full index x to the row-major offset of X_k inside facet k's array,
/// and to the offset inside the concatenation of all facet arrays (length rho).
class FacetLayout {
 public:
  FacetLayout(const TensorShape& shape, const PartitionComplex& complex);

  int num_facets() const { return static_cast<int>(sizes_.size()); }
  Index facet_size(int k) const { return sizes_[static_cast<std::size_t>(k)]; }
  Index facet_base(int k) const { return bases_[static_cast<std::size_t>(k)]; }
  /// rho: total coefficient count.
  Index total() const { return total_; }

  /// Offset of X_k within facet k (x carries 1-based coordinates).
  Index local_offset(int k, std::span<const int> x) const;
  Index global_offset(int k, std::span<const int> x) const { return facet_base(k) + local_offset(k, x); }

 private:
  std::vector<std::vector<int>> positions_;  // 0-based positions per facet
  std::vector<std::vector<Index>> strides_;
  std::vector<Index> sizes_;
  std::vector<Index> bases_;
  Index total_ = 0;
};

/// Theta: one positive array per facet, with the bound M of the ambient tensor.
struct FactorSet {
  TensorShape shape;
  PartitionComplex complex;
  std::vector<Eigen::VectorXd> factors;
  double M = 2.0;

  int num_facets() const { return complex.num_facets(); }
};

/// U = log(Theta) with optional per-facet bounds eta_k <= u <= nu_k.
struct LogFactorSet {
  TensorShape shape;
  PartitionComplex complex;
  std::vector<Eigen::VectorXd> factors;
  Eigen::VectorXd eta;
  Eigen::VectorXd nu;
  double M = 2.0;

  int num_facets() const { return complex.num_facets(); }
};

/// Zero-initialised facet arrays sized for (shape, complex).
std::vector<Eigen::VectorXd> zero_facet_arrays(const TensorShape& shape, const PartitionComplex& complex);

/// Concatenates facet arrays into one vector of length rho.
Eigen::VectorXd flatten(const std::vector<Eigen::VectorXd>& arrays);
std::vector<Eigen::VectorXd> unflatten(const Eigen::VectorXd& flat, const FacetLayout& layout);

/// Checks the Omega invariants: factors in [M^-2, M^2] and every full product in
/// [M^-1, M]. Enumerates all indices, so meant for desk-scale shapes.
bool satisfies_omega(const FactorSet& params, double tolerance = 1e-12);
/// Checks the Phi invariants of a LogFactorSet, including its eta/nu auxiliaries.
bool satisfies_phi(const LogFactorSet& logparams, double tolerance = 1e-12);

}  // namespace hdt
