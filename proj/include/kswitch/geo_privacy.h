#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "kswitch/model.h"

namespace kswitch {

// Rate of the planar Laplace mechanism. A privacy level epsilon over a
// protection radius r gives a per-meter rate epsilon / r, so the mean noise
// radius is 2r / epsilon.
struct GeoIParams {
  double epsilon_per_meter = 0.0;

  static GeoIParams from_level(double epsilon, double r);
  static GeoIParams from_instance(const ProblemInstance& instance) {
    return from_level(instance.epsilon, instance.r);
  }
};

// Noise vector drawn from the planar Laplace density
//   D(x0)(x) = eps^2 / (2 pi) * exp(-eps * d(x0, x)).
// The angle is uniform and the radius is Erlang-2(eps), drawn as the sum of
// two Exponential(eps) variates.
Location planar_laplace_noise(const GeoIParams& params, Rng& rng);

Location perturb(const Location& loc, const GeoIParams& params, Rng& rng);

// Returns a copy with every worker and task perturbed independently, using
// the same rate for all entities. The rng stream is taken from
// instance.rng_seed.
ProblemInstance perturb_instance(const ProblemInstance& instance);
ProblemInstance perturb_instance(const ProblemInstance& instance, Rng& rng);

// Monte-Carlo estimate of Pr(d(w, t) <= reach | d(w', t') = observed) when both
// endpoints were perturbed independently.
//
// The posterior is discretized over candidate true separations
// s_i = i * observed / 50 for i = 0..150 (i.e. up to 3 * observed) with a
// uniform prior. The likelihood of a candidate is the probability that the
// perturbed separation lands within +-observed/50 of the observed one. It is
// estimated from a bank of `sample_count` simulated noise differences
// N_w - N_t; because the difference is rotationally symmetric, each sample
// contributes the exact fraction of its angular circle falling inside the
// band, rather than a 0/1 hit.
//
// Results are cached per (observed rounded to 10 m, reach, rate). The cache
// allows concurrent readers; concurrent misses may compute the same entry
// twice, which is harmless because the value depends only on the key and seed.
class ReachProbEstimator {
 public:
  static constexpr int kDefaultSampleCount = 20000;
  static constexpr double kDistanceQuantum = 10.0;
  static constexpr int kGridIntervals = 150;
  static constexpr double kStepFraction = 1.0 / 50.0;

  explicit ReachProbEstimator(int sample_count = kDefaultSampleCount, uint64_t rng_seed = 0);

  // Throws ArgumentError on negative distance or non-positive reach.
  double probability(double observed_distance, double reach, const GeoIParams& params) const;

  int sample_count() const { return sample_count_; }
  size_t cache_size() const;

 private:
  struct Bank {
    std::vector<double> sorted_radii;  // |N_w - N_t|, ascending
  };
  using Key = std::tuple<int64_t, double, double>;

  const Bank& bank_for(const GeoIParams& params) const;
  double compute(double observed, double reach, const Bank& bank) const;

  int sample_count_;
  uint64_t seed_;
  mutable std::shared_mutex mu_;
  mutable std::map<double, std::shared_ptr<const Bank>> banks_;
  mutable std::map<Key, double> cache_;
};

}  // namespace kswitch
