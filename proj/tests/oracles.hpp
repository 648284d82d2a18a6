#pragma once

// Reference computations written independently of the library code paths:
// raw loops over observations, closed forms and derivative-free search.

#include "hdt/risk.hpp"
#include "hdt/tensor.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

namespace oracle {

using hdt::Index;

// R(u) for singleton facets, u laid out mode by mode (u_1 then u_2 ...).
inline double singleton_risk(const hdt::ObservationSet& obs, const std::vector<double>& u) {
  const auto& dims = obs.shape().dims();
  double total = 0.0;
  for (Index i = 0; i < obs.size(); ++i) {
    const auto x = obs.index(i);
    double s = 0.0;
    std::size_t base = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      s += u[base + static_cast<std::size_t>(x[j] - 1)];
      base += static_cast<std::size_t>(dims[j]);
    }
    total += -obs.value(i) * s + std::exp(s);
  }
  return total / static_cast<double>(obs.size());
}

// Projection of Phi onto u for singleton facets: sum_k min u^(k) >= -L,
// sum_k max u^(k) <= L, |u| <= 2L.
inline bool singleton_feasible(const std::vector<int>& dims, const std::vector<double>& u, double L) {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t base = 0;
  for (int r : dims) {
    double mn = 1e300;
    double mx = -1e300;
    for (int a = 0; a < r; ++a) {
      const double v = u[base + static_cast<std::size_t>(a)];
      if (std::abs(v) > 2.0 * L) return false;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    lo += mn;
    hi += mx;
    base += static_cast<std::size_t>(r);
  }
  return lo >= -L && hi <= L;
}

// Grid search over [-L, L]^rho followed by pattern search along +-e_i and
// +-e_i +- e_j, with halving steps, restricted to the feasible set.
inline double grid_pattern_minimum(const hdt::ObservationSet& obs, double M, int grid_points = 9) {
  const auto& dims = obs.shape().dims();
  const double L = std::log(M);
  std::size_t rho = 0;
  for (int r : dims) rho += static_cast<std::size_t>(r);

  std::vector<double> best(rho, 0.0);
  double best_val = singleton_risk(obs, best);
  std::vector<int> digit(rho, 0);
  std::vector<double> u(rho);
  for (;;) {
    for (std::size_t i = 0; i < rho; ++i) u[i] = -L + 2.0 * L * digit[i] / (grid_points - 1);
    if (singleton_feasible(dims, u, L)) {
      const double v = singleton_risk(obs, u);
      if (v < best_val) {
        best_val = v;
        best = u;
      }
    }
    std::size_t i = 0;
    while (i < rho && ++digit[i] == grid_points) digit[i++] = 0;
    if (i == rho) break;
  }

  std::vector<std::vector<double>> dirs;
  for (std::size_t i = 0; i < rho; ++i)
    for (double s : {1.0, -1.0}) {
      std::vector<double> d(rho, 0.0);
      d[i] = s;
      dirs.push_back(d);
      for (std::size_t j = i + 1; j < rho; ++j)
        for (double t : {1.0, -1.0}) {
          std::vector<double> e = d;
          e[j] = t;
          dirs.push_back(e);
        }
    }
  for (double step = 2.0 * L / (grid_points - 1); step > 1e-9; step *= 0.5) {
    bool improved = true;
    while (improved) {
      improved = false;
      for (const auto& d : dirs) {
        std::vector<double> trial = best;
        for (std::size_t i = 0; i < rho; ++i) trial[i] += step * d[i];
        if (!singleton_feasible(dims, trial, L)) continue;
        const double v = singleton_risk(obs, trial);
        if (v < best_val - 1e-15) {
          best_val = v;
          best = trial;
          improved = true;
        }
      }
    }
  }
  return best_val;
}

// I-divergence risk gap of positions (j, q) when neither fit touches the bound:
// the coupled fit is the per-cell mean, the decoupled fit is the Poisson
// independence model with exposures (solved by iterative proportional fitting).
inline double independence_gap(const hdt::ObservationSet& obs, int j, int q) {
  const int rj = obs.shape().dim(j);
  const int rq = obs.shape().dim(q);
  std::vector<double> c(static_cast<std::size_t>(rj * rq), 0.0);
  std::vector<double> S(c.size(), 0.0);
  for (Index i = 0; i < obs.size(); ++i) {
    const auto x = obs.index(i);
    const auto cell = static_cast<std::size_t>((x[j - 1] - 1) * rq + (x[q - 1] - 1));
    c[cell] += 1.0;
    S[cell] += obs.value(i);
  }
  const double n = static_cast<double>(obs.size());
  auto risk_of = [&](const std::function<double(int, int)>& s) {
    double r = 0.0;
    for (int a = 0; a < rj; ++a)
      for (int b = 0; b < rq; ++b) {
        const auto cell = static_cast<std::size_t>(a * rq + b);
        if (c[cell] > 0) r += c[cell] * std::exp(s(a, b)) - S[cell] * s(a, b);
      }
    return r / n;
  };
  const double coupled = risk_of([&](int a, int b) {
    const auto cell = static_cast<std::size_t>(a * rq + b);
    return std::log(S[cell] / c[cell]);
  });
  std::vector<double> alpha(static_cast<std::size_t>(rj), 0.0);
  std::vector<double> beta(static_cast<std::size_t>(rq), 0.0);
  for (int it = 0; it < 5000; ++it) {
    for (int a = 0; a < rj; ++a) {
      double num = 0.0;
      double den = 0.0;
      for (int b = 0; b < rq; ++b) {
        num += S[static_cast<std::size_t>(a * rq + b)];
        den += c[static_cast<std::size_t>(a * rq + b)] * std::exp(beta[static_cast<std::size_t>(b)]);
      }
      alpha[static_cast<std::size_t>(a)] = std::log(num / den);
    }
    for (int b = 0; b < rq; ++b) {
      double num = 0.0;
      double den = 0.0;
      for (int a = 0; a < rj; ++a) {
        num += S[static_cast<std::size_t>(a * rq + b)];
        den += c[static_cast<std::size_t>(a * rq + b)] * std::exp(alpha[static_cast<std::size_t>(a)]);
      }
      beta[static_cast<std::size_t>(b)] = std::log(num / den);
    }
  }
  const double decoupled = risk_of(
      [&](int a, int b) { return alpha[static_cast<std::size_t>(a)] + beta[static_cast<std::size_t>(b)]; });
  return decoupled - coupled;
}

// Central finite-difference gradient of f at u.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& u,
                                   double h = 1e-5) {
  Eigen::VectorXd g(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    Eigen::VectorXd a = u;
    Eigen::VectorXd b = u;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

// Random rank-1 tensor with factor entries uniform in [lo, hi].
inline hdt::DenseTensor random_rank_one(const std::vector<int>& dims, std::mt19937_64& gen, double lo = 0.5,
                                        double hi = 1.5) {
  std::uniform_real_distribution<double> U(lo, hi);
  std::vector<std::vector<double>> v;
  for (int r : dims) {
    v.emplace_back();
    for (int a = 0; a < r; ++a) v.back().push_back(U(gen));
  }
  hdt::DenseTensor t{hdt::TensorShape(dims)};
  hdt::for_each_index(t.shape, [&](std::span<const int> x) {
    double p = 1.0;
    for (std::size_t j = 0; j < x.size(); ++j) p *= v[j][static_cast<std::size_t>(x[j] - 1)];
    t(x) = p;
  });
  return t;
}

}  // namespace oracle
