#include "kswitch/harness.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "kswitch/geo_privacy.h"
#include "kswitch/matching.h"

namespace kswitch {

std::string to_string(Method m) {
  switch (m) {
    case Method::kOM:
      return "OM";
    case Method::kORR:
      return "ORR";
    case Method::kKS:
      return "KS";
    case Method::kOPT:
      return "OPT";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  if (s == "OM") return Method::kOM;
  if (s == "ORR") return Method::kORR;
  if (s == "KS") return Method::kKS;
  if (s == "OPT") return Method::kOPT;
  throw ArgumentError("unknown method '" + s + "' (expected OM, ORR, KS or OPT)");
}

ProblemInstance gen_synthetic(int n_workers, int n_tasks, double reach, Rng& rng) {
  if (n_workers < 0 || n_tasks < 0) throw ArgumentError("counts must be >= 0");
  std::uniform_real_distribution<double> coord(0.0, kSyntheticExtent);
  ProblemInstance inst;
  for (int i = 0; i < n_workers; ++i) {
    double x = coord(rng);
    double y = coord(rng);
    inst.workers.push_back({i, {x, y}, std::nullopt, reach});
  }
  for (int j = 0; j < n_tasks; ++j) {
    double x = coord(rng);
    double y = coord(rng);
    inst.tasks.push_back({j, {x, y}, std::nullopt});
  }
  return inst;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) {
    auto b = f.find_first_not_of(" \t");
    auto e = f.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? "" : f.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, size_t line_no) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace

ProblemInstance ingest_csv(std::istream& in, double reach) {
  ProblemInstance inst;
  std::string line;
  size_t line_no = 0;
  bool latlon = false, have_header = false;
  struct Row {
    bool worker;
    double a, b;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto fields = split_csv(line);
    if (!have_header) {
      have_header = true;
      if (fields.size() == 3 && fields[0] == "role") {
        if (fields[1] == "lat" && fields[2] == "lon") {
          latlon = true;
          continue;
        }
        if (fields[1] == "x" && fields[2] == "y") continue;
        throw ParseError("line 1: header must be role,lat,lon or role,x,y");
      }
      throw ParseError("line 1: missing header (role,lat,lon or role,x,y)");
    }
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(line_no) + ": expected 3 fields");
    if (fields[0] != "w" && fields[0] != "t")
      throw ParseError("line " + std::to_string(line_no) + ": role must be w or t");
    rows.push_back({fields[0] == "w", parse_number(fields[1], line_no),
                    parse_number(fields[2], line_no)});
  }
  if (rows.empty()) return inst;

  std::vector<Location> locs;
  if (latlon) {
    constexpr double kDeg = std::numbers::pi / 180.0;
    double mean_lat = 0.0;
    for (const auto& r : rows) mean_lat += r.a;
    mean_lat /= static_cast<double>(rows.size());
    const double cos0 = std::cos(mean_lat * kDeg);
    for (const auto& r : rows) locs.push_back({kEarthRadius * r.b * kDeg * cos0, kEarthRadius * r.a * kDeg});
    double min_x = locs[0].x, min_y = locs[0].y;
    for (const auto& l : locs) {
      min_x = std::min(min_x, l.x);
      min_y = std::min(min_y, l.y);
    }
    for (auto& l : locs) l = {l.x - min_x, l.y - min_y};
  } else {
    for (const auto& r : rows) locs.push_back({r.a, r.b});
  }
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].worker) {
      auto id = static_cast<EntityId>(inst.workers.size());
      inst.workers.push_back({id, locs[i], std::nullopt, reach});
    } else {
      auto id = static_cast<EntityId>(inst.tasks.size());
      inst.tasks.push_back({id, locs[i], std::nullopt});
    }
  }
  return inst;
}

ProblemInstance ingest_file(const std::string& path, double reach) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return ingest_csv(in, reach);
}

void write_instance_csv(std::ostream& out, const ProblemInstance& instance) {
  out << "role,x,y\n" << std::setprecision(17);
  for (const auto& w : instance.workers) out << "w," << w.true_loc.x << ',' << w.true_loc.y << '\n';
  for (const auto& t : instance.tasks) out << "t," << t.true_loc.x << ',' << t.true_loc.y << '\n';
}

ProblemInstance trial_instance(const ExperimentConfig& cfg, int trial) {
  const auto t = static_cast<uint64_t>(trial);
  ProblemInstance inst;
  if (cfg.dataset.empty()) {
    Rng gen = derive_rng(cfg.seed, {t, 0});
    inst = gen_synthetic(cfg.n_workers, cfg.n_tasks, cfg.reach, gen);
  } else {
    inst = ingest_file(cfg.dataset, cfg.reach);
  }
  inst.epsilon = cfg.epsilon;
  inst.r = cfg.r;
  inst.rng_seed = derive_seed(cfg.seed, {t, 1});
  inst.validate();
  return perturb_instance(inst);
}

RunResult run_trial(const ExperimentConfig& cfg, int trial, const ProblemInstance& perturbed) {
  RunResult res;
  res.method = cfg.method;
  res.n_workers = static_cast<int>(perturbed.workers.size());
  res.n_tasks = static_cast<int>(perturbed.tasks.size());
  res.epsilon = cfg.epsilon;
  res.k = cfg.k;
  res.lambda = cfg.lambda;
  res.trial = trial;

  const ProblemInstance view = server_view(perturbed);
  const auto start = std::chrono::steady_clock::now();
  Matching m;
  switch (cfg.method) {
    case Method::kOM:
      m = oblivious_m(view);
      break;
    case Method::kORR: {
      ReachProbEstimator est(cfg.orr_samples, derive_seed(cfg.seed, {0x0a2a}));
      Rng rng = derive_rng(cfg.seed, {static_cast<uint64_t>(trial), 2});
      m = oblivious_rr(view, est, rng);
      break;
    }
    case Method::kKS: {
      KSwitchConfig ks{cfg.k, cfg.lambda, GroupingMethod::kGreedy,
                       derive_seed(cfg.seed, {static_cast<uint64_t>(trial), 3}), cfg.key_bits};
      KSwitchResult r = k_switch(view, PartyDirectory::from_instance(perturbed), ks);
      m = std::move(r.matching);
      res.rounds = std::move(r.rounds);
      break;
    }
    case Method::kOPT:
      m = opt_matching(perturbed);
      break;
  }
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.matching_size = static_cast<int>(m.size());
  res.utility = utility(m, perturbed);
  return res;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw ArgumentError("trials must be >= 1");
  std::vector<RunResult> results(cfg.trials);
  parallel_for(static_cast<size_t>(cfg.trials), cfg.threads, [&](size_t t) {
    const int trial = static_cast<int>(t);
    results[t] = run_trial(cfg, trial, trial_instance(cfg, trial));
  });
  return results;
}

void write_results_csv(std::ostream& out, const std::vector<RunResult>& results, bool header) {
  if (header)
    out << "method,n_workers,n_tasks,epsilon,k,lambda,trial,utility,matching_size,wall_time_s\n";
  for (const auto& r : results) {
    out << to_string(r.method) << ',' << r.n_workers << ',' << r.n_tasks << ',' << r.epsilon
        << ',' << r.k << ',' << r.lambda << ',' << r.trial << ',' << r.utility << ','
        << r.matching_size << ',' << std::fixed << std::setprecision(6) << r.wall_time_s
        << std::defaultfloat << '\n';
  }
}

std::vector<ExternalResult> read_external_results(std::istream& in) {
  std::vector<ExternalResult> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("method,")) continue;
    auto f = split_csv(line);
    if (f.size() != 2) throw ParseError("line " + std::to_string(line_no) + ": expected method,utility");
    out.push_back({f[0], parse_number(f[1], line_no)});
  }
  return out;
}

std::string summary_json(const std::vector<RunResult>& results,
                         const std::vector<ExternalResult>& external) {
  using nlohmann::json;
  std::map<std::tuple<std::string, int, int, double, int, int>, std::vector<const RunResult*>> by_point;
  for (const auto& r : results)
    by_point[{to_string(r.method), r.n_workers, r.n_tasks, r.epsilon, r.k, r.lambda}].push_back(&r);

  auto stats = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    return json{{"mean", mean},
                {"std", sd},
                {"min", *std::min_element(v.begin(), v.end())},
                {"max", *std::max_element(v.begin(), v.end())}};
  };

  json points = json::array();
  for (const auto& [key, rows] : by_point) {
    std::vector<double> util, size, time;
    for (const auto* r : rows) {
      util.push_back(r->utility);
      size.push_back(r->matching_size);
      time.push_back(r->wall_time_s);
    }
    points.push_back({{"method", std::get<0>(key)},
                      {"n_workers", std::get<1>(key)},
                      {"n_tasks", std::get<2>(key)},
                      {"epsilon", std::get<3>(key)},
                      {"k", std::get<4>(key)},
                      {"lambda", std::get<5>(key)},
                      {"trials", rows.size()},
                      {"utility", stats(util)},
                      {"matching_size", stats(size)},
                      {"wall_time_s", stats(time)}});
  }
  json out{{"points", points}};
  if (!external.empty()) {
    json ext = json::array();
    for (const auto& e : external) ext.push_back({{"method", e.method}, {"utility", e.utility}});
    out["external"] = ext;
  }
  return out.dump(2);
}

CalibrationResult calibrate_reach(int n_workers, int n_tasks, double target, int trials,
                                  uint64_t seed, double lo, double hi, int iterations) {
  if (!(target > 0.0 && target <= 1.0)) throw ArgumentError("target must be in (0, 1]");
  if (trials < 1) throw ArgumentError("trials must be >= 1");
  const int cap = std::min(n_workers, n_tasks);
  if (cap == 0) throw ArgumentError("need at least one worker and one task");
  auto fraction = [&](double reach) {
    double total = 0.0;
    for (int t = 0; t < trials; ++t) {
      Rng rng = derive_rng(seed, {static_cast<uint64_t>(t), 0});
      ProblemInstance inst = gen_synthetic(n_workers, n_tasks, reach, rng);
      total += static_cast<double>(opt_matching(inst).size()) / cap;
    }
    return total / trials;
  };
  for (int i = 0; i < iterations; ++i) {
    double mid = 0.5 * (lo + hi);
    (fraction(mid) >= target ? hi : lo) = mid;
  }
  return {hi, fraction(hi)};
}

}  // namespace kswitch
