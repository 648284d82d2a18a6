#pragma once

#include "hdt/tensor.hpp"

#include <vector>

namespace hdt {

/// prod_k theta^(k)_{X_k}. Throws DimensionError when x does not fit the shape.
double eval_decomposition(const FactorSet& params, const MultiIndex& x);
double eval_decomposition(const FactorSet& params, std::span<const int> x);

/// Expands params into the full dense tensor (enumerates every index).
DenseTensor to_dense(const FactorSet& params);

/// rho = sum_k prod_{j in F_k} r_j.
Index effective_dimension(const PartitionComplex& complex, const TensorShape& shape);

/// Builds factors reproducing `tensor` exactly under `complex`.
///
/// Partitions use pivot peeling anchored at the lexicographically smallest
/// index u = (1,..,1): the first facet takes theta^(1)_a = psi(a, U_rest) and
/// every later facet takes theta^(k)_a = psi(a, U_rest) / psi(u), so that
/// theta^(k)_{U_k} = 1 for k >= 2 and all factors stay inside [M^-2, M^2].
/// General complexes use the corner-point (Moebius) expansion of log psi with
/// each face charged to the first facet containing it.
///
/// Throws BoundViolation when the tensor leaves [M^-1, M] or a factor leaves
/// [M^-2, M^2], and IncorrectComplex when the reconstruction misses any entry
/// by more than 1e-9 relative.
FactorSet construct_exact_decomposition(const DenseTensor& tensor, const PartitionComplex& complex, double M);

/// One rank-1 term: a vector per tensor mode, in position order.
using RankOneTerm = std::vector<Eigen::VectorXd>;

/// Expands a partition decomposition whose facets have at most two positions
/// into a sum of rank-1 terms, via the SVD of each matrix-shaped factor. The
/// number of terms is the product of the numerical ranks of the matrix factors.
std::vector<RankOneTerm> partition_to_cp(const FactorSet& params);

/// u = log(theta). eta/nu are set to the per-facet min/max of u.
LogFactorSet log_reparam(const FactorSet& params);
FactorSet exp_reparam(const LogFactorSet& logparams);

}  // namespace hdt
