#include "hdt/decomposition.hpp"

#include "hdt/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <bit>
#include <cmath>

namespace hdt {

namespace {

constexpr double kCorrectnessTolerance = 1e-9;
constexpr double kBoundSlack = 1e-12;

void require_layout_matches(const FactorSet& params, const FacetLayout& layout) {
  if (static_cast<int>(params.factors.size()) != layout.num_facets())
    throw DimensionError("factor count does not match facet count");
  for (int k = 0; k < layout.num_facets(); ++k)
    if (params.factors[static_cast<std::size_t>(k)].size() != layout.facet_size(k))
      throw DimensionError("factor " + std::to_string(k + 1) + " has the wrong number of entries");
}

// Enumerates the local coordinates of a facet; fills `x` (full 1-based index,
// other positions left at 1) for every local offset in row-major order.
template <typename Fn>
void for_each_facet_entry(const TensorShape& shape, const std::vector<int>& facet, Fn&& fn) {
  std::vector<int> x(static_cast<std::size_t>(shape.order()), 1);
  Index count = 1;
  for (int j : facet) count *= shape.dim(j);
  for (Index off = 0; off < count; ++off) {
    fn(off, std::span<const int>(x));
    for (int i = static_cast<int>(facet.size()) - 1; i >= 0; --i) {
      const int pos = facet[static_cast<std::size_t>(i)];
      auto& c = x[static_cast<std::size_t>(pos - 1)];
      if (++c <= shape.dim(pos)) break;
      c = 1;
    }
  }
}

std::vector<Eigen::VectorXd> peel_partition(const DenseTensor& tensor, const PartitionComplex& complex) {
  const auto& shape = tensor.shape;
  std::vector<int> pivot(static_cast<std::size_t>(shape.order()), 1);
  const double psi_pivot = tensor(pivot);
  std::vector<Eigen::VectorXd> factors;
  for (int k = 0; k < complex.num_facets(); ++k) {
    const auto& facet = complex.facet(k);
    Index size = 1;
    for (int j : facet) size *= shape.dim(j);
    Eigen::VectorXd theta(size);
    for_each_facet_entry(shape, facet, [&](Index off, std::span<const int> x) {
      theta[off] = (k == 0) ? tensor(x) : tensor(x) / psi_pivot;
    });
    factors.push_back(std::move(theta));
  }
  return factors;
}

// Corner-point expansion: log theta_k(x_F) = sum over faces S of F_k not
// already owned by an earlier facet of
//   lambda_S(x_S) = sum_{T subset S} (-1)^{|S|-|T|} log psi(x_T, 1 elsewhere).
std::vector<Eigen::VectorXd> moebius_general(const DenseTensor& tensor, const PartitionComplex& complex) {
  const auto& shape = tensor.shape;
  std::vector<Eigen::VectorXd> factors;
  std::vector<int> y(static_cast<std::size_t>(shape.order()));
  for (int k = 0; k < complex.num_facets(); ++k) {
    const auto& facet = complex.facet(k);
    const unsigned nsub = 1u << facet.size();
    std::vector<unsigned> owned;
    for (unsigned s = 0; s < nsub; ++s) {
      bool earlier = false;
      for (int l = 0; l < k && !earlier; ++l) {
        const auto& prev = complex.facet(l);
        bool inside = true;
        for (std::size_t i = 0; i < facet.size() && inside; ++i)
          if ((s >> i) & 1u) inside = std::binary_search(prev.begin(), prev.end(), facet[i]);
        earlier = inside;
      }
      if (!earlier) owned.push_back(s);
    }
    Index size = 1;
    for (int j : facet) size *= shape.dim(j);
    Eigen::VectorXd theta(size);
    for_each_facet_entry(shape, facet, [&](Index off, std::span<const int> x) {
      double log_theta = 0.0;
      for (unsigned s : owned) {
        const int s_bits = std::popcount(s);
        // enumerate T subset of S
        for (unsigned t = s;; t = (t - 1) & s) {
          std::fill(y.begin(), y.end(), 1);
          for (std::size_t i = 0; i < facet.size(); ++i)
            if ((t >> i) & 1u) y[static_cast<std::size_t>(facet[i] - 1)] = x[static_cast<std::size_t>(facet[i] - 1)];
          const double sign = ((s_bits - std::popcount(t)) % 2 == 0) ? 1.0 : -1.0;
          log_theta += sign * std::log(tensor(std::span<const int>(y)));
          if (t == 0) break;
        }
      }
      theta[off] = std::exp(log_theta);
    });
    factors.push_back(std::move(theta));
  }
  return factors;
}

}  // namespace

double eval_decomposition(const FactorSet& params, std::span<const int> x) {
  if (!params.shape.contains(x)) throw DimensionError("index outside the decomposition's shape");
  FacetLayout layout(params.shape, params.complex);
  require_layout_matches(params, layout);
  double prod = 1.0;
  for (int k = 0; k < layout.num_facets(); ++k) prod *= params.factors[static_cast<std::size_t>(k)][layout.local_offset(k, x)];
  return prod;
}

double eval_decomposition(const FactorSet& params, const MultiIndex& x) {
  return eval_decomposition(params, std::span<const int>(x.coords));
}

DenseTensor to_dense(const FactorSet& params) {
  FacetLayout layout(params.shape, params.complex);
  require_layout_matches(params, layout);
  DenseTensor out(params.shape);
  Index lin = 0;
  for_each_index(params.shape, [&](std::span<const int> x) {
    double prod = 1.0;
    for (int k = 0; k < layout.num_facets(); ++k) prod *= params.factors[static_cast<std::size_t>(k)][layout.local_offset(k, x)];
    out.entries[lin++] = prod;
  });
  return out;
}

Index effective_dimension(const PartitionComplex& complex, const TensorShape& shape) {
  Index rho = 0;
  for (const auto& f : complex.facets()) {
    Index size = 1;
    for (int j : f) {
      if (j < 1 || j > shape.order())
        throw DimensionError("facet references position " + std::to_string(j) + " beyond tensor order " +
                             std::to_string(shape.order()));
      size *= shape.dim(j);
    }
    rho += size;
  }
  return rho;
}

FactorSet construct_exact_decomposition(const DenseTensor& tensor, const PartitionComplex& complex, double M) {
  if (!(M > 1.0)) throw ConfigError("bound M must exceed 1");
  if (complex.order() != tensor.shape.order()) throw DimensionError("complex order does not match tensor order");
  for (Index i = 0; i < tensor.entries.size(); ++i) {
    const double v = tensor.entries[i];
    if (!(v >= (1.0 / M) * (1 - kBoundSlack) && v <= M * (1 + kBoundSlack)))
      throw BoundViolation("tensor entry " + std::to_string(v) + " outside [1/M, M]");
  }

  FactorSet out;
  out.shape = tensor.shape;
  out.complex = complex;
  out.M = M;
  out.factors = complex.is_partition() ? peel_partition(tensor, complex) : moebius_general(tensor, complex);

  const DenseTensor rebuilt = to_dense(out);
  for (Index i = 0; i < tensor.entries.size(); ++i) {
    const double rel = std::abs(rebuilt.entries[i] - tensor.entries[i]) / std::abs(tensor.entries[i]);
    if (rel > kCorrectnessTolerance)
      throw IncorrectComplex("complex " + complex.to_string() + " does not reproduce the tensor (relative error " +
                             std::to_string(rel) + ")");
  }
  const double lo = 1.0 / (M * M), hi = M * M;
  for (const auto& f : out.factors)
    for (double v : f)
      if (!(v >= lo * (1 - kBoundSlack) && v <= hi * (1 + kBoundSlack)))
        throw BoundViolation("constructed factor " + std::to_string(v) + " outside [M^-2, M^2]");
  return out;
}

std::vector<RankOneTerm> partition_to_cp(const FactorSet& params) {
  if (!params.complex.is_partition()) throw UnsupportedFacet("CP expansion needs a partition complex");
  FacetLayout layout(params.shape, params.complex);
  require_layout_matches(params, layout);
  const int p = params.shape.order();

  // Per facet: list of alternatives, each a set of (position, vector) pairs.
  using Piece = std::vector<std::pair<int, Eigen::VectorXd>>;
  std::vector<std::vector<Piece>> options;
  for (int k = 0; k < params.num_facets(); ++k) {
    const auto& facet = params.complex.facet(k);
    const auto& theta = params.factors[static_cast<std::size_t>(k)];
    if (facet.size() == 1) {
      options.push_back({Piece{{facet[0], theta}}});
      continue;
    }
    if (facet.size() != 2)
      throw UnsupportedFacet("facet " + std::to_string(k + 1) + " has " + std::to_string(facet.size()) +
                             " positions; CP expansion handles vectors and matrices only");
    const int ra = params.shape.dim(facet[0]);
    const int rb = params.shape.dim(facet[1]);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> mat(theta.data(), ra, rb);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = sv.size() ? sv[0] * std::max(ra, rb) * 1e-12 : 0.0;
    std::vector<Piece> alts;
    for (Index j = 0; j < sv.size(); ++j) {
      if (sv[j] <= cutoff) break;
      alts.push_back(Piece{{facet[0], Eigen::VectorXd(sv[j] * svd.matrixU().col(j))},
                           {facet[1], Eigen::VectorXd(svd.matrixV().col(j))}});
    }
    if (alts.empty()) alts.push_back(Piece{{facet[0], Eigen::VectorXd::Zero(ra)}, {facet[1], Eigen::VectorXd::Zero(rb)}});
    options.push_back(std::move(alts));
  }

  std::vector<RankOneTerm> terms;
  std::vector<std::size_t> choice(options.size(), 0);
  while (true) {
    RankOneTerm term(static_cast<std::size_t>(p));
    for (std::size_t k = 0; k < options.size(); ++k)
      for (const auto& [pos, vec] : options[k][choice[k]]) term[static_cast<std::size_t>(pos - 1)] = vec;
    terms.push_back(std::move(term));
    std::size_t k = options.size();
    while (k > 0) {
      --k;
      if (++choice[k] < options[k].size()) break;
      choice[k] = 0;
      if (k == 0) return terms;
    }
    if (options.empty()) return terms;
  }
}

LogFactorSet log_reparam(const FactorSet& params) {
  LogFactorSet out;
  out.shape = params.shape;
  out.complex = params.complex;
  out.M = params.M;
  const auto m = params.factors.size();
  out.eta.resize(static_cast<Index>(m));
  out.nu.resize(static_cast<Index>(m));
  for (std::size_t k = 0; k < m; ++k) {
    const auto& theta = params.factors[k];
    if (theta.size() == 0) throw DimensionError("empty factor");
    if ((theta.array() <= 0.0).any() || !theta.allFinite())
      throw DomainError("factor " + std::to_string(k + 1) + " has a nonpositive entry");
    Eigen::VectorXd u = theta.array().log();
    out.eta[static_cast<Index>(k)] = u.minCoeff();
    out.nu[static_cast<Index>(k)] = u.maxCoeff();
    out.factors.push_back(std::move(u));
  }
  return out;
}

FactorSet exp_reparam(const LogFactorSet& logparams) {
  FactorSet out;
  out.shape = logparams.shape;
  out.complex = logparams.complex;
  out.M = logparams.M;
  for (const auto& u : logparams.factors) out.factors.emplace_back(u.array().exp());
  return out;
}

}  // namespace hdt
