#pragma once

// Seeded Monte Carlo generation of quality scenarios and the empirical
// (SAA) violation measures.
//
// Streams are counter-based: each (stream tag, supplier, biomass) triple is
// hashed into an independent key, and scenario s reads the s-th output of
// that stream. Adding suppliers or biomass types never perturbs the draws of
// existing (i, b) pairs, and regeneration is bit-for-bit reproducible on any
// platform.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blend/model.hpp"

namespace blend {

namespace rng {

inline constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer.
inline std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t tag,
                                std::uint64_t i, std::uint64_t b) {
  std::uint64_t k = mix(seed + kGamma);
  k = mix(k ^ mix(tag + kGamma));
  k = mix(k ^ mix(i + 2 * kGamma));
  k = mix(k ^ mix(b + 3 * kGamma));
  return k;
}

inline double u01(std::uint64_t key, std::uint64_t n) {
  // 53-bit mantissa draw in [0, 1).
  return static_cast<double>(mix(key + (n + 1) * kGamma) >> 11) *
         0x1.0p-53;
}

}  // namespace rng

// Stream tags. Validation check samples use a distinct tag so they never
// reuse optimization samples.
enum class SampleStream : std::uint64_t {
  kOptimization = 0x1,
  kValidation = 0x2,
};

inline double triangular_icdf(const TriangularParams& t, double u) {
  double span = t.max - t.min;
  if (span <= 0.0) return t.mode;  // degenerate support
  double cut = (t.mode - t.min) / span;
  if (u < cut) {
    return t.min + std::sqrt(u * span * (t.mode - t.min));
  }
  return t.max - std::sqrt((1.0 - u) * span * (t.max - t.mode));
}

struct ScenarioSet {
  std::size_t count = 0;  // N
  std::size_t num_suppliers = 0;
  std::size_t num_biomass = 0;
  std::uint64_t seed = 0;
  // ash[s][i][b] flattened: index(s, i, b).
  std::vector<double> ash;   // wt.%
  std::vector<double> heat;  // 10^6 BTU/DT

  std::size_t index(std::size_t s, std::size_t i, std::size_t b) const {
    return (s * num_suppliers + i) * num_biomass + b;
  }
  double ash_at(std::size_t s, std::size_t i, std::size_t b) const {
    return ash[index(s, i, b)];
  }
  double heat_at(std::size_t s, std::size_t i, std::size_t b) const {
    return heat[index(s, i, b)];
  }
};

inline ScenarioSet sample_scenarios(const ProblemInstance& instance,
                                    std::size_t n, std::uint64_t seed,
                                    SampleStream stream =
                                        SampleStream::kOptimization) {
  if (n == 0) throw std::invalid_argument("scenario count must be >= 1");
  ScenarioSet set;
  set.count = n;
  set.num_suppliers = instance.num_suppliers();
  set.num_biomass = instance.num_biomass();
  set.seed = seed;
  set.ash.resize(n * set.num_suppliers * set.num_biomass);
  set.heat.resize(set.ash.size());
  std::uint64_t tag = static_cast<std::uint64_t>(stream);
  for (std::size_t i = 0; i < set.num_suppliers; ++i) {
    for (std::size_t b = 0; b < set.num_biomass; ++b) {
      const BiomassType& bt = instance.biomass[b];
      std::uint64_t ash_key = rng::stream_key(seed, tag * 2, i, b);
      std::uint64_t heat_key = rng::stream_key(seed, tag * 2 + 1, i, b);
      for (std::size_t s = 0; s < n; ++s) {
        set.ash[set.index(s, i, b)] =
            triangular_icdf(bt.ash_dist, rng::u01(ash_key, s));
        set.heat[set.index(s, i, b)] =
            bt.heat_dist.low + rng::u01(heat_key, s) *
                                   (bt.heat_dist.high - bt.heat_dist.low);
      }
    }
  }
  return set;
}

// Empirical violation rates of the two chance constraints at purchase plan
// x[i][b] (totals over brackets). Violation is strict positivity of the
// excess; ties at zero count as satisfied.
inline std::pair<double, double> empirical_violation_rates(
    const std::vector<std::vector<double>>& x, const ScenarioSet& scenarios,
    double alpha, double tau, const std::vector<double>& efficiency) {
  if (x.size() != scenarios.num_suppliers ||
      (!x.empty() && x.front().size() != scenarios.num_biomass)) {
    throw std::invalid_argument("solution/scenario dimension mismatch");
  }
  std::size_t ash_violations = 0;
  std::size_t heat_violations = 0;
  for (std::size_t s = 0; s < scenarios.count; ++s) {
    double e1 = 0.0;
    double e2 = tau;
    for (std::size_t i = 0; i < scenarios.num_suppliers; ++i) {
      for (std::size_t b = 0; b < scenarios.num_biomass; ++b) {
        double q = x[i][b];
        e1 += (scenarios.ash_at(s, i, b) - alpha) * q;
        e2 -= efficiency[b] * scenarios.heat_at(s, i, b) * q;
      }
    }
    if (e1 > 0.0) ++ash_violations;
    if (e2 > 0.0) ++heat_violations;
  }
  double n = static_cast<double>(scenarios.count);
  return {static_cast<double>(ash_violations) / n,
          static_cast<double>(heat_violations) / n};
}

}  // namespace blend
