#pragma once

#include "hdt/risk.hpp"
#include "hdt/tensor.hpp"

#include <cstdint>
#include <random>

namespace hdt {

/// mt19937_64 with hand-written distributions.
///
/// The standard library's distribution objects are implementation-defined, so
/// every draw here is spelled out to keep sampled data bit-identical across
/// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Uniform integer in [lo, hi], by rejection.
  int uniform_int(int lo, int hi);
  /// Standard normal (Marsaglia polar method, one value per accepted pair).
  double normal();
  /// Gamma(shape k, scale theta) by Marsaglia-Tsang; k < 1 uses the
  /// Gamma(k+1) * U^(1/k) boost.
  double gamma(double k, double theta);

 private:
  std::mt19937_64 engine_;
};

/// Per-trial seed derivation.
inline std::uint64_t trial_seed(std::uint64_t seed, int trial) { return seed + static_cast<std::uint64_t>(trial); }

struct ExperimentSpec {
  DenseTensor truth;
  Index n = 1;
  NoiseModel noise;
  std::uint64_t seed = 0;
  int trials = 1;
};

/// n uniform indices with y = (1+z) psi_x; (1+z) ~ Gamma(k, theta) under gamma
/// noise, 1 otherwise. Per record the coordinates are drawn first (position
/// order), then the noise factor.
ObservationSet sample_observations(const DenseTensor& truth, Index n, const NoiseModel& noise, Rng& rng);
/// Uses spec.seed directly; trial seeds come from trial_seed().
ObservationSet sample_observations(const ExperimentSpec& spec);

/// A (x) v (x) 1 (x) 1 over 3^5 indices, A = [[2,1,1],[1,2,1],[1,1,2]], v = (1,2,3),
/// with facets {{1,2},{3},{4},{5}} and M = 6.
FactorSet benchmark_tensor();

/// 2x2x2 parity tensor: slice x3=1 is [[2,0],[0,2]], slice x3=2 is [[0,2],[2,0]].
/// Contains zeros; observe it with allow_zero.
DenseTensor counterexample_tensor();

/// Quantile of the noise factor (1+z); 1 for noise-free data.
double noise_quantile(const NoiseModel& noise, double q = 0.999);

}  // namespace hdt
