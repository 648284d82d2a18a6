#include "hdt/baselines.hpp"

#include "hdt/error.hpp"
#include "hdt/synth.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <limits>

namespace hdt {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double cp_eval(const CpModel& model, std::span<const int> x) {
  if (!model.shape.contains(x)) throw DimensionError("index outside the CP model's shape");
  double total = 0.0;
  for (int j = 0; j < model.rank; ++j) {
    double prod = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i) prod *= model.factors[i](x[i] - 1, j);
    total += prod;
  }
  return total;
}

double cp_eval(const CpModel& model, const MultiIndex& x) { return cp_eval(model, std::span<const int>(x.coords)); }

DenseTensor cp_to_dense(const CpModel& model) {
  DenseTensor out(model.shape);
  Index lin = 0;
  for_each_index(model.shape, [&](std::span<const int> x) { out.entries[lin++] = cp_eval(model, x); });
  return out;
}

double cp_squared_loss(const CpModel& model, const ObservationSet& obs) {
  std::vector<double> terms(static_cast<std::size_t>(obs.size()));
  for (Index i = 0; i < obs.size(); ++i) {
    const double r = obs.value(i) - cp_eval(model, obs.index(i));
    terms[static_cast<std::size_t>(i)] = r * r;
  }
  return pairwise_sum(terms) / static_cast<double>(obs.size());
}

CpModel cp_from_terms(const TensorShape& shape, const std::vector<RankOneTerm>& terms) {
  if (terms.empty()) throw DimensionError("CP model needs at least one term");
  CpModel model;
  model.shape = shape;
  model.rank = static_cast<int>(terms.size());
  for (int i = 0; i < shape.order(); ++i) {
    MatrixXd V(shape.dims()[static_cast<std::size_t>(i)], model.rank);
    for (int j = 0; j < model.rank; ++j) {
      const auto& v = terms[static_cast<std::size_t>(j)].at(static_cast<std::size_t>(i));
      if (v.size() != V.rows()) throw DimensionError("rank-1 term does not match the shape");
      V.col(j) = v;
    }
    model.factors.push_back(std::move(V));
  }
  return model;
}

AlsFit als_fit(const ObservationSet& obs, const AlsOptions& opts) {
  if (opts.rank < 1) throw ConfigError("ALS rank must be at least 1");
  if (opts.sweeps < 1) throw ConfigError("ALS needs at least one sweep");
  if (!(opts.ridge >= 0.0)) throw ConfigError("ridge must be >= 0");
  const int p = obs.shape().order();
  const int q = opts.rank;

  AlsFit fit;
  fit.model.shape = obs.shape();
  fit.model.rank = q;
  Rng rng(opts.seed);
  for (int i = 0; i < p; ++i) {
    MatrixXd V(obs.shape().dims()[static_cast<std::size_t>(i)], q);
    for (Index a = 0; a < V.rows(); ++a)
      for (int j = 0; j < q; ++j) V(a, j) = 0.5 + rng.uniform();
    fit.model.factors.push_back(std::move(V));
  }
  fit.training_loss.push_back(cp_squared_loss(fit.model, obs));

  const Index n = obs.size();
  MatrixXd B(n, q);  // row i: prod over other modes of V(x_i, :)
  for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
    for (int w = 0; w < p; ++w) {
      B.setOnes();
      for (Index i = 0; i < n; ++i) {
        auto x = obs.index(i);
        for (int o = 0; o < p; ++o)
          if (o != w) B.row(i).array() *= fit.model.factors[static_cast<std::size_t>(o)].row(x[static_cast<std::size_t>(o)] - 1).array();
      }
      MatrixXd& V = fit.model.factors[static_cast<std::size_t>(w)];
      std::vector<MatrixXd> gram(static_cast<std::size_t>(V.rows()), MatrixXd::Zero(q, q));
      std::vector<VectorXd> rhs(static_cast<std::size_t>(V.rows()), VectorXd::Zero(q));
      for (Index i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(obs.index(i)[static_cast<std::size_t>(w)] - 1);
        gram[a].noalias() += B.row(i).transpose() * B.row(i);
        rhs[a].noalias() += obs.value(i) * B.row(i).transpose();
      }
      for (Index a = 0; a < V.rows(); ++a) {
        MatrixXd G = gram[static_cast<std::size_t>(a)];
        G.diagonal().array() += opts.ridge;
        V.row(a) = G.ldlt().solve(rhs[static_cast<std::size_t>(a)]).transpose();
      }
    }
    fit.training_loss.push_back(cp_squared_loss(fit.model, obs));
  }
  return fit;
}

RankSelection als_select_rank(const ObservationSet& obs, std::span<const int> ranks, const AlsOptions& base) {
  if (ranks.empty()) throw ConfigError("rank grid is empty");
  RankSelection out;
  const Index n = obs.size();
  out.rank = *std::min_element(ranks.begin(), ranks.end());
  if (n >= 4) {
    const ObservationSet validation = obs.slice(0, n / 2);
    const ObservationSet training = obs.slice(n / 2, n);
    double best = std::numeric_limits<double>::infinity();
    for (int r : ranks) {
      AlsOptions o = base;
      o.rank = r;
      const double score = cp_squared_loss(als_fit(training, o).model, validation);
      out.scores.emplace_back(r, score);
      if (score < best || (score == best && r < out.rank)) {
        best = score;
        out.rank = r;
      }
    }
  }
  AlsOptions o = base;
  o.rank = out.rank;
  out.fit = als_fit(obs, o);
  return out;
}

}  // namespace hdt
