#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kswitch/geo_privacy.h"
#include "kswitch/k_switch.h"
#include "kswitch/model.h"

namespace kswitch {

enum class Method { kOM, kORR, kKS, kOPT };

std::string to_string(Method m);
// Throws ArgumentError for an unknown name.
Method method_from_string(const std::string& s);

inline constexpr double kSyntheticExtent = 8000.0;
inline constexpr double kDefaultReach = 1500.0;
inline constexpr double kEarthRadius = 6371000.0;

struct ExperimentConfig {
  Method method = Method::kKS;
  int n_workers = 100;
  int n_tasks = 100;
  double epsilon = 0.4;
  double r = 1000.0;
  double reach = kDefaultReach;
  int k = 2;
  int lambda = 20;
  int trials = 1;
  uint64_t seed = 0;
  std::string dataset;  // empty = synthetic, otherwise a CSV path
  unsigned key_bits = 512;
  unsigned threads = 1;  // trials run in parallel
  int orr_samples = ReachProbEstimator::kDefaultSampleCount;
};

struct RunResult {
  Method method = Method::kKS;
  int n_workers = 0;
  int n_tasks = 0;
  double epsilon = 0.0;
  int k = 0;
  int lambda = 0;
  int trial = 0;
  int utility = 0;
  int matching_size = 0;
  double wall_time_s = 0.0;
  std::vector<RoundReport> rounds;  // KS only
};

// Uniform i.i.d. locations in [0, 8000]^2; every worker gets `reach`.
ProblemInstance gen_synthetic(int n_workers, int n_tasks, double reach, Rng& rng);

// Reads `role,lat,lon` (degrees, equirectangular projection around the mean
// latitude, lower-left corner shifted to the origin) or `role,x,y` (meters),
// chosen by the header. Roles are `w` or `t`. Throws ParseError with the
// line number on malformed rows.
ProblemInstance ingest_csv(std::istream& in, double reach);
ProblemInstance ingest_file(const std::string& path, double reach);
void write_instance_csv(std::ostream& out, const ProblemInstance& instance);

// The perturbed instance used by every method for trial `trial`. The
// instance and its perturbation come from independent streams derived from
// (seed, trial), so methods are compared on identical inputs.
ProblemInstance trial_instance(const ExperimentConfig& cfg, int trial);

RunResult run_trial(const ExperimentConfig& cfg, int trial, const ProblemInstance& perturbed);
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg);

// method,n_workers,n_tasks,epsilon,k,lambda,trial,utility,matching_size,wall_time_s
void write_results_csv(std::ostream& out, const std::vector<RunResult>& results,
                       bool header = true);

struct ExternalResult {
  std::string method;
  double utility = 0.0;
};

// `method,utility` rows supplied by the user for methods not run here.
std::vector<ExternalResult> read_external_results(std::istream& in);

// Mean / std / min / max per metric, grouped by (method, n, epsilon, k,
// lambda); external results are echoed under "external".
std::string summary_json(const std::vector<RunResult>& results,
                         const std::vector<ExternalResult>& external = {});

struct CalibrationResult {
  double reach = 0.0;
  double opt_fraction = 0.0;
};

// Binary search for the reach at which mean OPT utility / min(n_workers,
// n_tasks) over `trials` synthetic instances reaches `target`.
CalibrationResult calibrate_reach(int n_workers, int n_tasks, double target, int trials,
                                  uint64_t seed, double lo = 100.0, double hi = 8000.0,
                                  int iterations = 30);

}  // namespace kswitch
