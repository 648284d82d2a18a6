#include "hdt/solver.hpp"

#include "hdt/error.hpp"

#include <algorithm>
#include <cmath>

namespace hdt {

using Eigen::VectorXd;

Eigen::VectorXd RiskObjective::hessian_diagonal(const VectorXd& u) const {
  VectorXd diag = VectorXd::Zero(design_.num_params());
  for (Index c = 0; c < design_.num_cells(); ++c) {
    double s = 0.0;
    for (Index off : design_.offsets(c)) s += u[off];
    const double w = design_.count(c) * std::exp(s);
    for (Index off : design_.offsets(c)) diag[off] += w;
  }
  return diag / static_cast<double>(design_.num_observations());
}

Eigen::SparseMatrix<double> RiskObjective::hessian_sparse(const VectorXd& u) const {
  std::vector<Eigen::Triplet<double>> trip;
  const double inv_n = 1.0 / static_cast<double>(design_.num_observations());
  for (Index c = 0; c < design_.num_cells(); ++c) {
    double s = 0.0;
    auto offs = design_.offsets(c);
    for (Index off : offs) s += u[off];
    const double w = design_.count(c) * std::exp(s) * inv_n;
    for (Index a : offs)
      for (Index b : offs) trip.emplace_back(a, b, w);
  }
  Eigen::SparseMatrix<double> h(design_.num_params(), design_.num_params());
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

double RiskObjective::value_change(const VectorXd& u, const VectorXd& du) const {
  double total = 0.0;
  for (Index c = 0; c < design_.num_cells(); ++c) {
    double s = 0.0, ds = 0.0;
    for (Index off : design_.offsets(c)) {
      s += u[off];
      ds += du[off];
    }
    total += -design_.value_sum(c) * ds + design_.count(c) * std::exp(s) * std::expm1(ds);
  }
  return total / static_cast<double>(design_.num_observations());
}

double default_bound_M(const ObservationSet& obs) { return std::max(2.0, 1.5 * obs.values().maxCoeff()); }

namespace {

struct Problem {
  LinearConstraints cons;
  VectorXd start;
  Index rho = 0;
  int m = 0;
};

// Variables: u (rho), eta (m), nu (m), then s (rho) when an l1 budget is set.
Problem build_problem(const FacetLayout& layout, double L, std::optional<double> lambda) {
  Problem pb;
  pb.rho = layout.total();
  pb.m = layout.num_facets();
  const Index rho = pb.rho;
  const int m = pb.m;
  const Index eta0 = rho, nu0 = rho + m, s0 = rho + 2 * m;
  const Index N = lambda ? s0 + rho : s0;

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> rhs;
  auto row = [&](std::initializer_list<std::pair<Index, double>> coeffs, double b) {
    const auto r = static_cast<Index>(rhs.size());
    for (auto [col, v] : coeffs) trip.emplace_back(r, col, v);
    rhs.push_back(b);
  };

  for (int k = 0; k < m; ++k) {
    for (Index i = layout.facet_base(k); i < layout.facet_base(k) + layout.facet_size(k); ++i) {
      row({{eta0 + k, 1.0}, {i, -1.0}}, 0.0);
      row({{i, 1.0}, {nu0 + k, -1.0}}, 0.0);
      row({{i, 1.0}}, 2 * L);
      row({{i, -1.0}}, 2 * L);
    }
  }
  for (int k = 0; k < m; ++k) {
    row({{eta0 + k, 1.0}}, 2 * L);
    row({{eta0 + k, -1.0}}, 2 * L);
    row({{nu0 + k, 1.0}}, 2 * L);
    row({{nu0 + k, -1.0}}, 2 * L);
  }
  {
    const auto r = static_cast<Index>(rhs.size());
    for (int k = 0; k < m; ++k) trip.emplace_back(r, eta0 + k, -1.0);
    rhs.push_back(L);
    for (int k = 0; k < m; ++k) trip.emplace_back(r + 1, nu0 + k, 1.0);
    rhs.push_back(L);
  }
  if (lambda) {
    for (Index i = 0; i < rho; ++i) {
      row({{i, 1.0}, {s0 + i, -1.0}}, 0.0);
      row({{i, -1.0}, {s0 + i, -1.0}}, 0.0);
    }
    const auto r = static_cast<Index>(rhs.size());
    for (Index i = 0; i < rho; ++i) trip.emplace_back(r, s0 + i, 1.0);
    rhs.push_back(*lambda);
  }

  pb.cons.A.resize(static_cast<Index>(rhs.size()), N);
  pb.cons.A.setFromTriplets(trip.begin(), trip.end());
  pb.cons.b = Eigen::Map<const VectorXd>(rhs.data(), static_cast<Index>(rhs.size()));
  pb.cons.box_lower = VectorXd::Constant(N, -2 * L);
  pb.cons.box_upper = VectorXd::Constant(N, 2 * L);
  if (lambda) {
    pb.cons.box_lower.tail(rho).setZero();
    pb.cons.box_upper.tail(rho).setConstant(*lambda);
  }

  // Strictly interior: half of each budget is used.
  pb.start = VectorXd::Zero(N);
  pb.start.segment(eta0, m).setConstant(-L / (2.0 * m));
  pb.start.segment(nu0, m).setConstant(L / (2.0 * m));
  if (lambda) pb.start.tail(rho).setConstant(*lambda / (2.0 * static_cast<double>(rho)));
  return pb;
}

double resolve_M(const ObservationSet& obs, const SolveOptions& opts) {
  const double M = opts.M ? *opts.M : default_bound_M(obs);
  if (!std::isfinite(M) || !(M > 1.0)) throw ConfigError("bound M must be a finite value above 1");
  return M;
}

void validate(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (opts.max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
  if (!(opts.barrier_mu_growth > 1.0)) throw ConfigError("barrier growth factor must exceed 1");
  if (complex.order() != obs.shape().order())
    throw DimensionError("complex order " + std::to_string(complex.order()) + " does not match data order " +
                         std::to_string(obs.shape().order()));
}

SolveReport solve_impl(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts,
                       std::optional<double> lambda) {
  validate(obs, complex, opts);
  const double M = resolve_M(obs, opts);
  const double L = std::log(M);
  const CellDesign design(obs, complex);
  const FacetLayout& layout = design.layout();
  const int m = layout.num_facets();
  const Index rho = layout.total();

  SolveReport rep;
  rep.logparams.shape = obs.shape();
  rep.logparams.complex = complex;
  rep.logparams.M = M;
  rep.underdetermined = obs.size() < m;
  for (Index i = 0; i < rho; ++i)
    if (design.coverage()[i] == 0.0) ++rep.unobserved;

  if (lambda && *lambda == 0.0) {
    rep.logparams.factors = zero_facet_arrays(obs.shape(), complex);
    rep.logparams.eta = VectorXd::Zero(m);
    rep.logparams.nu = VectorXd::Zero(m);
    rep.objective = design.risk(VectorXd::Zero(rho));
    rep.converged = true;
    return rep;
  }

  const Problem pb = build_problem(layout, L, lambda);
  BarrierSettings settings;
  // Half the budget, so that an independent re-check has room for its own error.
  settings.epsilon = opts.epsilon / 2;
  settings.max_newton_steps = opts.max_iterations;
  settings.growth = opts.barrier_mu_growth;
  settings.dense_limit = opts.dense_limit;
  const RiskObjective objective(design);
  BarrierResult res = barrier_minimize(objective, pb.cons, pb.start, settings);

  VectorXd u = res.z.head(rho);
  VectorXd eta = res.z.segment(rho, m);
  VectorXd nu = res.z.segment(rho + m, m);
  for (int k = 0; k < m; ++k)
    for (Index i = layout.facet_base(k); i < layout.facet_base(k) + layout.facet_size(k); ++i)
      if (design.coverage()[i] == 0.0) u[i] = std::clamp(0.0, eta[k], nu[k]);

  rep.logparams.factors = unflatten(u, layout);
  rep.logparams.eta = eta;
  rep.logparams.nu = nu;
  rep.objective = design.risk(u);
  rep.kkt_residual = res.gap_bound;
  rep.feasibility_residual = phi_violation(rep.logparams, lambda);
  rep.iterations = res.newton_steps;
  rep.trace = std::move(res.trace);
  rep.converged = res.converged && rep.kkt_residual <= opts.epsilon && rep.feasibility_residual <= opts.epsilon;
  return rep;
}

}  // namespace

SolveReport solve_convex(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts) {
  return solve_impl(obs, complex, opts, std::nullopt);
}

SolveReport solve_sparse(const ObservationSet& obs, const PartitionComplex& complex, const SolveOptions& opts) {
  if (!opts.lambda) throw ConfigError("sparse solve needs an l1 budget lambda");
  if (!(*opts.lambda >= 0.0) || !std::isfinite(*opts.lambda)) throw ConfigError("lambda must be finite and >= 0");
  return solve_impl(obs, complex, opts, opts.lambda);
}

double phi_violation(const LogFactorSet& lp, std::optional<double> lambda) {
  const double L = std::log(lp.M);
  const int m = lp.num_facets();
  if (lp.eta.size() != m || lp.nu.size() != m || static_cast<int>(lp.factors.size()) != m)
    return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  double l1 = 0.0;
  for (int k = 0; k < m; ++k) {
    const auto& u = lp.factors[static_cast<std::size_t>(k)];
    const double eta = lp.eta[k], nu = lp.nu[k];
    worst = std::max({worst, -2 * L - eta, eta - 2 * L, nu - 2 * L, -2 * L - nu});
    for (double v : u) worst = std::max({worst, eta - v, v - nu, std::abs(v) - 2 * L});
    l1 += u.cwiseAbs().sum();
  }
  worst = std::max({worst, -L - lp.eta.sum(), lp.nu.sum() - L});
  if (lambda) worst = std::max(worst, l1 - *lambda);
  return worst;
}

bool check_epsilon_solution(const SolveReport& report, const ObservationSet& obs, const PartitionComplex& complex,
                            const SolveOptions& opts) {
  const double eps = opts.epsilon;
  if (!(eps > 0.0)) return false;
  const auto& lp = report.logparams;
  if (!(lp.complex == complex) || !(lp.shape == obs.shape())) return false;
  if (!(report.kkt_residual <= eps) || !(report.feasibility_residual <= eps)) return false;

  double M = 0.0;
  try {
    M = resolve_M(obs, opts);
  } catch (const ConfigError&) {
    return false;
  }
  LogFactorSet probe = lp;
  probe.M = M;
  if (!(phi_violation(probe, opts.lambda) <= eps)) return false;

  const CellDesign design(obs, complex);
  const FacetLayout& layout = design.layout();
  for (int k = 0; k < layout.num_facets(); ++k)
    if (lp.factors[static_cast<std::size_t>(k)].size() != layout.facet_size(k)) return false;
  const VectorXd u = flatten(lp.factors);
  if (!(std::abs(design.risk(u) - report.objective) <= eps)) return false;
  if (opts.lambda && *opts.lambda == 0.0) return u.cwiseAbs().maxCoeff() <= eps;

  const VectorXd g = design.gradient(u);
  const Problem pb = build_problem(layout, std::log(M), opts.lambda);
  BarrierSettings settings;
  settings.epsilon = eps / 10;
  settings.max_newton_steps = 1000;
  settings.dense_limit = opts.dense_limit;
  const BarrierResult lp_res = barrier_minimize(LinearObjective(g), pb.cons, pb.start, settings);
  if (!lp_res.converged) return false;
  const double frank_wolfe = g.dot(u) - (lp_res.objective - lp_res.gap_bound);
  return frank_wolfe <= eps;
}

}  // namespace hdt
