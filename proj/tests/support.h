// Shared fixtures and brute-force oracles for the unit tests. Nothing here
// calls into the library's algorithms; oracles are independent re-derivations.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "kswitch/model.h"

namespace testing {

using namespace kswitch;

struct Pt {
  double x, y;
};

// Workers and tasks at the given points. Perturbed locations equal the true
// ones unless `perturbed_*` is given.
inline ProblemInstance make_instance(const std::vector<Pt>& ws, const std::vector<Pt>& ts,
                                     double reach, const std::vector<Pt>& perturbed_ws = {},
                                     const std::vector<Pt>& perturbed_ts = {}) {
  ProblemInstance inst;
  for (size_t i = 0; i < ws.size(); ++i) {
    Worker w{static_cast<EntityId>(i), {ws[i].x, ws[i].y}, std::nullopt, reach};
    const Pt& p = perturbed_ws.empty() ? ws[i] : perturbed_ws[i];
    w.perturbed_loc = Location{p.x, p.y};
    inst.workers.push_back(w);
  }
  for (size_t j = 0; j < ts.size(); ++j) {
    Task t{static_cast<EntityId>(j), {ts[j].x, ts[j].y}, std::nullopt};
    const Pt& p = perturbed_ts.empty() ? ts[j] : perturbed_ts[j];
    t.perturbed_loc = Location{p.x, p.y};
    inst.tasks.push_back(t);
  }
  return inst;
}

// Uniform true and (independently uniform) perturbed locations. The
// perturbed field is not derived from the true one on purpose: it decouples
// server-side behavior from the ground truth in property tests.
inline ProblemInstance random_instance(int nw, int nt, double extent, double reach,
                                       std::mt19937_64& rng, double jitter = -1.0) {
  std::uniform_real_distribution<double> u(0.0, extent);
  std::normal_distribution<double> n(0.0, jitter > 0 ? jitter : 1.0);
  auto pick = [&](const Location& truth) {
    return jitter > 0 ? Location{truth.x + n(rng), truth.y + n(rng)} : Location{u(rng), u(rng)};
  };
  ProblemInstance inst;
  for (int i = 0; i < nw; ++i) {
    Worker w{i, {u(rng), u(rng)}, std::nullopt, reach};
    w.perturbed_loc = pick(w.true_loc);
    inst.workers.push_back(w);
  }
  for (int j = 0; j < nt; ++j) {
    Task t{j, {u(rng), u(rng)}, std::nullopt};
    t.perturbed_loc = pick(t.true_loc);
    inst.tasks.push_back(t);
  }
  return inst;
}

// Adjacency from plain distance arithmetic.
inline std::vector<std::vector<char>> adjacency(const ProblemInstance& inst, bool perturbed) {
  std::vector<std::vector<char>> adj(inst.workers.size(), std::vector<char>(inst.tasks.size(), 0));
  for (size_t i = 0; i < inst.workers.size(); ++i)
    for (size_t j = 0; j < inst.tasks.size(); ++j) {
      const Location& a = perturbed ? *inst.workers[i].perturbed_loc : inst.workers[i].true_loc;
      const Location& b = perturbed ? *inst.tasks[j].perturbed_loc : inst.tasks[j].true_loc;
      const double dx = a.x - b.x, dy = a.y - b.y;
      adj[i][j] = std::sqrt(dx * dx + dy * dy) <= inst.workers[i].reach;
    }
  return adj;
}

// Maximum bipartite matching size by trying every worker choice (skip or one
// of the free tasks). Exponential; n <= 8.
inline int brute_force_max_matching(const std::vector<std::vector<char>>& adj) {
  const size_t nw = adj.size();
  const size_t nt = nw ? adj[0].size() : 0;
  std::vector<char> used(nt, 0);
  std::function<int(size_t)> go = [&](size_t i) -> int {
    if (i == nw) return 0;
    int best = go(i + 1);
    for (size_t j = 0; j < nt; ++j)
      if (adj[i][j] && !used[j]) {
        used[j] = 1;
        best = std::max(best, 1 + go(i + 1));
        used[j] = 0;
      }
    return best;
  };
  return go(0);
}

// Every perfect pairing of {0..n-1}, n even. Each pairing lists (i, j) with
// i < j, first element ascending.
inline std::vector<std::vector<std::pair<int, int>>> all_pairings(int n) {
  std::vector<std::vector<std::pair<int, int>>> out;
  std::vector<std::pair<int, int>> cur;
  std::vector<char> used(n, 0);
  std::function<void()> go = [&] {
    int i = 0;
    while (i < n && used[i]) ++i;
    if (i == n) {
      out.push_back(cur);
      return;
    }
    used[i] = 1;
    for (int j = i + 1; j < n; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      cur.push_back({i, j});
      go();
      cur.pop_back();
      used[j] = 0;
    }
    used[i] = 0;
  };
  go();
  return out;
}

// Pearson chi-square goodness of fit; returns the p-value.
inline double chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected_prob) {
  double total = std::accumulate(observed.begin(), observed.end(), 0.0);
  double stat = 0.0;
  int cells = 0;
  for (size_t i = 0; i < observed.size(); ++i) {
    if (expected_prob[i] <= 0) continue;
    const double e = total * expected_prob[i];
    stat += (observed[i] - e) * (observed[i] - e) / e;
    ++cells;
  }
  boost::math::chi_squared dist(cells - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Kolmogorov-Smirnov statistic of a sample against a CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// Erlang-2 CDF with rate eps.
inline double erlang2_cdf(double r, double eps) {
  return r <= 0 ? 0.0 : 1.0 - std::exp(-eps * r) * (1.0 + eps * r);
}

// Number of pairs of m reachable under true locations, recomputed by hand.
inline int true_utility(const std::vector<MatchedPair>& m, const ProblemInstance& inst) {
  int u = 0;
  for (const auto& p : m) {
    const Location& a = inst.workers[p.worker_id].true_loc;
    const Location& b = inst.tasks[p.task_id].true_loc;
    u += std::hypot(a.x - b.x, a.y - b.y) <= inst.workers[p.worker_id].reach;
  }
  return u;
}

}  // namespace testing
