#include "hdt/synth.hpp"

#include "hdt/error.hpp"

#include <boost/math/distributions/gamma.hpp>

#include <cmath>

namespace hdt {

double Rng::uniform() {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(next() >> 11) + 0.5) * kScale;
}

int Rng::uniform_int(int lo, int hi) {
  if (hi < lo) throw ConfigError("empty integer range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t v;
  do {
    v = next();
  } while (v >= limit);
  return lo + static_cast<int>(v % span);
}

double Rng::normal() {
  double a, b, s;
  do {
    a = 2.0 * uniform() - 1.0;
    b = 2.0 * uniform() - 1.0;
    s = a * a + b * b;
  } while (s >= 1.0 || s == 0.0);
  return a * std::sqrt(-2.0 * std::log(s) / s);
}

double Rng::gamma(double k, double theta) {
  if (!(k > 0.0) || !(theta > 0.0)) throw ConfigError("gamma parameters must be positive");
  if (k < 1.0) {
    const double g = gamma(k + 1.0, 1.0);
    return g * std::pow(uniform(), 1.0 / k) * theta;
  }
  const double d = k - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * theta;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * theta;
  }
}

ObservationSet sample_observations(const DenseTensor& truth, Index n, const NoiseModel& noise, Rng& rng) {
  if (n < 1) throw ConfigError("sample count must be at least 1");
  const int p = truth.shape.order();
  std::vector<int> coords(static_cast<std::size_t>(n * p));
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    std::span<int> x(coords.data() + i * p, static_cast<std::size_t>(p));
    for (int j = 0; j < p; ++j) x[static_cast<std::size_t>(j)] = rng.uniform_int(1, truth.shape.dims()[static_cast<std::size_t>(j)]);
    const double factor = noise.family == NoiseModel::Family::gamma ? rng.gamma(noise.shape_k, noise.scale) : 1.0;
    y[i] = factor * truth(std::span<const int>(x));
  }
  return ObservationSet(truth.shape, std::move(coords), std::move(y), (truth.entries.array() <= 0.0).any());
}

ObservationSet sample_observations(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw ConfigError("trials must be at least 1");
  Rng rng(spec.seed);
  return sample_observations(spec.truth, spec.n, spec.noise, rng);
}

FactorSet benchmark_tensor() {
  FactorSet fs;
  fs.shape = TensorShape({3, 3, 3, 3, 3});
  fs.complex = PartitionComplex::partition({{1, 2}, {3}, {4}, {5}}, 5);
  fs.factors.push_back((Eigen::VectorXd(9) << 2, 1, 1, 1, 2, 1, 1, 1, 2).finished());
  fs.factors.push_back((Eigen::VectorXd(3) << 1, 2, 3).finished());
  fs.factors.push_back(Eigen::VectorXd::Ones(3));
  fs.factors.push_back(Eigen::VectorXd::Ones(3));
  fs.M = 6.0;
  return fs;
}

DenseTensor counterexample_tensor() {
  // Row-major over (x1, x2, x3): psi(x1,x2,1) = 2[x1==x2], psi(x1,x2,2) = 2[x1!=x2].
  return DenseTensor(TensorShape({2, 2, 2}), (Eigen::VectorXd(8) << 2, 0, 0, 2, 0, 2, 2, 0).finished());
}

double noise_quantile(const NoiseModel& noise, double q) {
  if (noise.family == NoiseModel::Family::none) return 1.0;
  return boost::math::quantile(boost::math::gamma_distribution<double>(noise.shape_k, noise.scale), q);
}

}  // namespace hdt
