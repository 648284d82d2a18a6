#pragma once

#include "hdt/decomposition.hpp"
#include "hdt/risk.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hdt {

/// Rank-q CP model: factor i is r_i x q, and psi_x = sum_j prod_i V_i(x_i, j).
struct CpModel {
  TensorShape shape;
  int rank = 1;
  std::vector<Eigen::MatrixXd> factors;
};

double cp_eval(const CpModel& model, std::span<const int> x);
double cp_eval(const CpModel& model, const MultiIndex& x);
DenseTensor cp_to_dense(const CpModel& model);
/// (1/n) sum_i (y_i - cp_eval(x_i))^2
double cp_squared_loss(const CpModel& model, const ObservationSet& obs);
/// Packs rank-1 terms (e.g. from partition_to_cp) as columns of a CP model.
CpModel cp_from_terms(const TensorShape& shape, const std::vector<RankOneTerm>& terms);

struct AlsOptions {
  int rank = 1;
  int sweeps = 100;
  std::uint64_t seed = 0;
  /// Added to the diagonal of every row's normal equations.
  double ridge = 1e-8;
};

struct AlsFit {
  CpModel model;
  /// Training squared loss before the first sweep and after each sweep.
  std::vector<double> training_loss;
};

/// Alternating least squares. Factors start uniform in [0.5, 1.5]; a sweep
/// updates modes 1..p in turn, each row of a factor by its own ridge-damped
/// least-squares problem over the observations at that level.
AlsFit als_fit(const ObservationSet& obs, const AlsOptions& opts);

struct RankSelection {
  int rank = 1;
  AlsFit fit;
  /// (rank, held-out squared loss) per candidate.
  std::vector<std::pair<int, double>> scores;
};

/// Fits each candidate rank on observations floor(n/2)..n-1, scores squared
/// loss on the first floor(n/2), refits the winner (ties: smallest rank) on
/// everything. With n < 4 no split is possible and the smallest rank is used.
RankSelection als_select_rank(const ObservationSet& obs, std::span<const int> ranks, const AlsOptions& base);

}  // namespace hdt
