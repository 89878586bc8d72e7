#include "kswitch/geo_privacy.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>

namespace kswitch {

GeoIParams GeoIParams::from_level(double epsilon, double r) {
  if (!(epsilon > 0.0) || !(r > 0.0))
    throw ArgumentError("privacy level and radius must be positive");
  return GeoIParams{epsilon / r};
}

Location planar_laplace_noise(const GeoIParams& params, Rng& rng) {
  if (!(params.epsilon_per_meter > 0.0)) throw ArgumentError("epsilon_per_meter must be > 0");
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::exponential_distribution<double> expo(params.epsilon_per_meter);
  double theta = angle(rng);
  double radius = expo(rng) + expo(rng);
  return {radius * std::cos(theta), radius * std::sin(theta)};
}

Location perturb(const Location& loc, const GeoIParams& params, Rng& rng) {
  Location noise = planar_laplace_noise(params, rng);
  return {loc.x + noise.x, loc.y + noise.y};
}

ProblemInstance perturb_instance(const ProblemInstance& instance) {
  Rng rng(derive_seed(instance.rng_seed, {0x9e0}));
  return perturb_instance(instance, rng);
}

ProblemInstance perturb_instance(const ProblemInstance& instance, Rng& rng) {
  ProblemInstance out = instance;
  if (out.workers.empty() && out.tasks.empty()) return out;
  GeoIParams params = GeoIParams::from_instance(instance);
  for (auto& w : out.workers) w.perturbed_loc = perturb(w.true_loc, params, rng);
  for (auto& t : out.tasks) t.perturbed_loc = perturb(t.true_loc, params, rng);
  return out;
}

ReachProbEstimator::ReachProbEstimator(int sample_count, uint64_t rng_seed)
    : sample_count_(sample_count), seed_(rng_seed) {
  if (sample_count < 1) throw ArgumentError("sample_count must be >= 1");
}

size_t ReachProbEstimator::cache_size() const {
  std::shared_lock lock(mu_);
  return cache_.size();
}

const ReachProbEstimator::Bank& ReachProbEstimator::bank_for(const GeoIParams& params) const {
  {
    std::shared_lock lock(mu_);
    auto it = banks_.find(params.epsilon_per_meter);
    if (it != banks_.end()) return *it->second;
  }
  auto bank = std::make_shared<Bank>();
  Rng rng(derive_seed(seed_, {std::bit_cast<uint64_t>(params.epsilon_per_meter)}));
  bank->sorted_radii.reserve(sample_count_);
  for (int i = 0; i < sample_count_; ++i) {
    Location a = planar_laplace_noise(params, rng);
    Location b = planar_laplace_noise(params, rng);
    bank->sorted_radii.push_back(std::hypot(a.x - b.x, a.y - b.y));
  }
  std::sort(bank->sorted_radii.begin(), bank->sorted_radii.end());
  std::unique_lock lock(mu_);
  auto [it, inserted] = banks_.emplace(params.epsilon_per_meter, std::move(bank));
  return *it->second;
}

namespace {

// Fraction of the circle {s*e + z*u : u on the unit circle} whose length lies
// in [lo, hi].
double annulus_fraction(double s, double z, double lo, double hi) {
  if (s == 0.0 || z == 0.0) {
    double rho = std::max(s, z);
    return (rho >= lo && rho <= hi) ? 1.0 : 0.0;
  }
  double two_sz = 2.0 * s * z;
  double base = s * s + z * z;
  double c_lo = std::clamp((lo * lo - base) / two_sz, -1.0, 1.0);
  double c_hi = std::clamp((hi * hi - base) / two_sz, -1.0, 1.0);
  return (std::acos(c_lo) - std::acos(c_hi)) / std::numbers::pi;
}

}  // namespace

double ReachProbEstimator::compute(double observed, double reach, const Bank& bank) const {
  const double d = std::max(observed, kDistanceQuantum / 2);
  const double step = d * kStepFraction;
  const double band = d * kStepFraction;
  const double s_max = kGridIntervals * step;

  // Histogram of |N_w - N_t| over the range any candidate can reach.
  const double bin_width = band / 2;
  const double z_max = s_max + d + band;
  const size_t bins = static_cast<size_t>(std::ceil(z_max / bin_width)) + 1;
  std::vector<int> counts(bins, 0);
  for (double z : bank.sorted_radii) {
    if (z > z_max) break;
    ++counts[static_cast<size_t>(z / bin_width)];
  }

  double total = 0.0, reachable = 0.0;
  double prior_reachable = 0.0;
  const double lo = std::max(0.0, d - band), hi = d + band;
  for (int i = 0; i <= kGridIntervals; ++i) {
    const double s = i * step;
    const double z_from = std::max({0.0, lo - s, s - hi});
    const double z_to = std::min(z_max, s + hi);
    size_t b0 = static_cast<size_t>(z_from / bin_width);
    size_t b1 = std::min(bins - 1, static_cast<size_t>(z_to / bin_width));
    double likelihood = 0.0;
    for (size_t b = b0; b <= b1; ++b) {
      if (counts[b] == 0) continue;
      likelihood += counts[b] * annulus_fraction(s, (b + 0.5) * bin_width, lo, hi);
    }
    // Each candidate stands for the cell of separations around it; the cell
    // straddling `reach` counts in proportion. A 0/1 cut makes the answer
    // jump whenever a grid point crosses reach as `observed` moves.
    const double cell_lo = std::max(0.0, s - step / 2), cell_hi = s + step / 2;
    const double inside = std::clamp((reach - cell_lo) / (cell_hi - cell_lo), 0.0, 1.0);
    total += likelihood;
    reachable += inside * likelihood;
    prior_reachable += inside;
  }
  if (total <= 0.0) return prior_reachable / (kGridIntervals + 1);
  return std::clamp(reachable / total, 0.0, 1.0);
}

double ReachProbEstimator::probability(double observed_distance, double reach,
                                       const GeoIParams& params) const {
  if (!(observed_distance >= 0.0)) throw ArgumentError("observed distance must be >= 0");
  if (!(reach > 0.0)) throw ArgumentError("reach must be > 0");
  const auto quantized = static_cast<int64_t>(std::llround(observed_distance / kDistanceQuantum));
  const Key key{quantized, reach, params.epsilon_per_meter};
  {
    std::shared_lock lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const Bank& bank = bank_for(params);
  double p = compute(quantized * kDistanceQuantum, reach, bank);
  std::unique_lock lock(mu_);
  cache_.emplace(key, p);
  return p;
}

}  // namespace kswitch
