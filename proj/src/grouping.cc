#include "kswitch/grouping.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace kswitch {

namespace {

const Location& perturbed(const Worker& w) {
  if (!w.perturbed_loc) throw StateError("worker " + std::to_string(w.id) + " not perturbed");
  return *w.perturbed_loc;
}

const Location& perturbed(const Task& t) {
  if (!t.perturbed_loc) throw StateError("task " + std::to_string(t.id) + " not perturbed");
  return *t.perturbed_loc;
}

}  // namespace

double oscore2(const MatchedPair& p1, const MatchedPair& p2, const ProblemInstance& instance) {
  if (p1.worker_id == p2.worker_id)
    throw ArgumentError("2-group needs two distinct workers");
  return euclidean_distance(perturbed(instance.worker(p1.worker_id)),
                            perturbed(instance.worker(p2.worker_id))) +
         euclidean_distance(perturbed(instance.task(p1.task_id)),
                            perturbed(instance.task(p2.task_id)));
}

double oscore_k(const KGroup& g, const ProblemInstance& instance) {
  double total = 0.0;
  for (size_t i = 0; i < g.pairs.size(); ++i)
    for (size_t j = i + 1; j < g.pairs.size(); ++j)
      total += oscore2(g.pairs[i], g.pairs[j], instance);
  return total;
}

double division_score(const KDivision& d, const ProblemInstance& instance) {
  double total = 0.0;
  for (const auto& g : d.groups) total += oscore_k(g, instance);
  return total;
}

std::string check_division(const KDivision& d, const Matching& m0) {
  if (d.k < 2) return "k must be >= 2";
  const size_t n = m0.size();
  const size_t expected = (n + d.k - 1) / d.k;
  if (d.groups.size() != expected)
    return "expected " + std::to_string(expected) + " groups, got " +
           std::to_string(d.groups.size());
  int short_groups = 0;
  std::set<EntityId> workers;
  std::set<MatchedPair> seen;
  for (const auto& g : d.groups) {
    const size_t s = g.pairs.size();
    if (s == 0 || s > static_cast<size_t>(d.k)) return "group size out of range";
    if (s < static_cast<size_t>(d.k)) ++short_groups;
    for (const auto& p : g.pairs) {
      if (!m0.contains(p)) return "pair not in baseline matching";
      if (!workers.insert(p.worker_id).second) return "worker appears in two groups";
      seen.insert(p);
    }
  }
  if (short_groups > 1) return "more than one short group";
  if (seen.size() != n) return "division does not cover the matching";
  return {};
}

KDivision greedy_grouping(const Matching& m0, int k, const ProblemInstance& instance, Rng& rng) {
  if (k < 2) throw ArgumentError("k must be >= 2");
  KDivision division{k, {}};
  std::vector<MatchedPair> pairs = m0.sorted_pairs();
  const size_t n = pairs.size();
  if (n == 0) return division;

  struct Entry {
    double score;
    uint32_t i, j;  // i < j, indices into pairs (sorted by worker id)
  };
  std::vector<Entry> heap;
  heap.reserve(n * (n - 1) / 2);
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t j = i + 1; j < n; ++j)
      heap.push_back({oscore2(pairs[i], pairs[j], instance), i, j});
  // Popping the heap in order is the same as walking it sorted.
  std::sort(heap.begin(), heap.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.score, a.i, a.j) < std::tie(b.score, b.i, b.j);
  });

  std::vector<char> used(n, 0);
  size_t unused = n;
  size_t cursor = 0;
  auto take = [&](KGroup& g, size_t idx) {
    used[idx] = 1;
    --unused;
    g.pairs.push_back(pairs[idx]);
  };

  const size_t group_count = (n + k - 1) / k;
  for (size_t gi = 0; gi < group_count && unused > 0; ++gi) {
    KGroup g;
    while (g.pairs.size() < static_cast<size_t>(k) && unused > 0) {
      if (g.pairs.size() == static_cast<size_t>(k) - 1) {
        std::uniform_int_distribution<size_t> pick(0, unused - 1);
        size_t target = pick(rng);
        for (size_t idx = 0; idx < n; ++idx) {
          if (used[idx]) continue;
          if (target-- == 0) {
            take(g, idx);
            break;
          }
        }
        break;
      }
      while (cursor < heap.size() && (used[heap[cursor].i] || used[heap[cursor].j])) ++cursor;
      if (cursor == heap.size()) {
        // Fewer than two unused pairs remain.
        for (size_t idx = 0; idx < n && g.pairs.size() < static_cast<size_t>(k); ++idx)
          if (!used[idx]) take(g, idx);
        break;
      }
      take(g, heap[cursor].i);
      take(g, heap[cursor].j);
      ++cursor;
    }
    division.groups.push_back(std::move(g));
  }
  return division;
}

WeightedCompleteGraph WeightedCompleteGraph::from_matching(const Matching& m0,
                                                           const ProblemInstance& instance) {
  WeightedCompleteGraph g;
  g.vertices = m0.sorted_pairs();
  const size_t n = g.vertices.size();
  g.weight.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      g.weight[i][j] = g.weight[j][i] = oscore2(g.vertices[i], g.vertices[j], instance);
  return g;
}

BipartiteGraph graph_transform(const WeightedCompleteGraph& g) {
  BipartiteGraph out;
  const int v = static_cast<int>(g.size());
  out.left_count = out.right_count = v;
  for (int i = 0; i < v; ++i)
    for (int j = i + 1; j < v; ++j) out.edges.push_back({i, j, g.weight[i][j]});
  return out;
}

namespace {

constexpr size_t kMaxExactVertices = 20;

std::vector<int> pairing_by_subset_dp(const std::vector<std::vector<double>>& w) {
  const size_t n = w.size();
  const uint32_t full = (1u << n) - 1;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[mask] = min cost to pair up the vertices in `mask`.
  std::vector<double> best(size_t{1} << n, kInf);
  std::vector<uint8_t> partner(size_t{1} << n, 0);
  best[0] = 0.0;
  for (uint32_t mask = 1; mask <= full; ++mask) {
    if (std::popcount(mask) % 2) continue;
    const int i = std::countr_zero(mask);
    for (int j = i + 1; j < static_cast<int>(n); ++j) {
      if (!(mask & (1u << j))) continue;
      const double c = best[mask & ~(1u << i) & ~(1u << j)] + w[i][j];
      if (c < best[mask]) {
        best[mask] = c;
        partner[mask] = static_cast<uint8_t>(j);
      }
    }
  }
  std::vector<int> mate(n, -1);
  for (uint32_t mask = full; mask;) {
    const int i = std::countr_zero(mask), j = partner[mask];
    mate[i] = j;
    mate[j] = i;
    mask &= ~(1u << i) & ~(1u << j);
  }
  return mate;
}

// Maximum-weight matching on a dense general graph, O(n^3) Edmonds blossom
// with dual labels. Vertices are 1-based; weight 0 means no edge. Blossoms
// get ids n+1 .. 2n.
class DenseBlossom {
 public:
  explicit DenseBlossom(int n)
      : n_(n),
        g_(2 * n + 1, std::vector<Edge>(2 * n + 1)),
        lab_(2 * n + 1, 0),
        match_(2 * n + 1, 0),
        slack_(2 * n + 1, 0),
        st_(2 * n + 1, 0),
        pa_(2 * n + 1, 0),
        flo_from_(2 * n + 1, std::vector<int>(n + 1, 0)),
        s_(2 * n + 1, 0),
        vis_(2 * n + 1, 0),
        flo_(2 * n + 1) {
    for (int u = 1; u <= n; ++u)
      for (int v = 1; v <= n; ++v) g_[u][v] = {u, v, 0};
  }

  void set_weight(int u, int v, long long w) { g_[u][v].w = g_[v][u].w = w; }

  // mate per vertex (1-based, 0 = unmatched)
  std::vector<int> solve() {
    n_x_ = n_;
    for (int u = 0; u <= n_; ++u) {
      st_[u] = u;
      flo_[u].clear();
    }
    long long w_max = 0;
    for (int u = 1; u <= n_; ++u)
      for (int v = 1; v <= n_; ++v) {
        flo_from_[u][v] = (u == v ? u : 0);
        w_max = std::max(w_max, g_[u][v].w);
      }
    for (int u = 1; u <= n_; ++u) lab_[u] = w_max;
    while (augmenting_phase()) {
    }
    return {match_.begin(), match_.begin() + n_ + 1};
  }

 private:
  struct Edge {
    int u = 0, v = 0;
    long long w = 0;
  };

  long long e_delta(const Edge& e) const { return lab_[e.u] + lab_[e.v] - g_[e.u][e.v].w * 2; }

  void update_slack(int u, int x) {
    if (!slack_[x] || e_delta(g_[u][x]) < e_delta(g_[slack_[x]][x])) slack_[x] = u;
  }

  void set_slack(int x) {
    slack_[x] = 0;
    for (int u = 1; u <= n_; ++u)
      if (g_[u][x].w > 0 && st_[u] != x && s_[st_[u]] == 0) update_slack(u, x);
  }

  void q_push(int x) {
    if (x <= n_) {
      q_.push_back(x);
    } else {
      for (int y : flo_[x]) q_push(y);
    }
  }

  void set_st(int x, int b) {
    st_[x] = b;
    if (x > n_)
      for (int y : flo_[x]) set_st(y, b);
  }

  int get_pr(int b, int xr) {
    auto& f = flo_[b];
    const int pr = static_cast<int>(std::find(f.begin(), f.end(), xr) - f.begin());
    if (pr % 2 == 1) {
      std::reverse(f.begin() + 1, f.end());
      return static_cast<int>(f.size()) - pr;
    }
    return pr;
  }

  void set_match(int u, int v) {
    match_[u] = g_[u][v].v;
    if (u <= n_) return;
    const Edge e = g_[u][v];
    const int xr = flo_from_[u][e.u], pr = get_pr(u, xr);
    for (int i = 0; i < pr; ++i) set_match(flo_[u][i], flo_[u][i ^ 1]);
    set_match(xr, v);
    std::rotate(flo_[u].begin(), flo_[u].begin() + pr, flo_[u].end());
  }

  void augment(int u, int v) {
    for (;;) {
      const int xnv = st_[match_[u]];
      set_match(u, v);
      if (!xnv) return;
      set_match(xnv, st_[pa_[xnv]]);
      u = st_[pa_[xnv]];
      v = xnv;
    }
  }

  int get_lca(int u, int v) {
    for (++stamp_; u || v; std::swap(u, v)) {
      if (u == 0) continue;
      if (vis_[u] == stamp_) return u;
      vis_[u] = stamp_;
      u = st_[match_[u]];
      if (u) u = st_[pa_[u]];
    }
    return 0;
  }

  void add_blossom(int u, int lca, int v) {
    int b = n_ + 1;
    while (b <= n_x_ && st_[b]) ++b;
    if (b > n_x_) ++n_x_;
    lab_[b] = 0;
    s_[b] = 0;
    match_[b] = match_[lca];
    auto& f = flo_[b];
    f.clear();
    f.push_back(lca);
    for (int x = u, y; x != lca; x = st_[pa_[y]]) {
      f.push_back(x);
      f.push_back(y = st_[match_[x]]);
      q_push(y);
    }
    std::reverse(f.begin() + 1, f.end());
    for (int x = v, y; x != lca; x = st_[pa_[y]]) {
      f.push_back(x);
      f.push_back(y = st_[match_[x]]);
      q_push(y);
    }
    set_st(b, b);
    for (int x = 1; x <= n_x_; ++x) g_[b][x].w = g_[x][b].w = 0;
    for (int x = 1; x <= n_; ++x) flo_from_[b][x] = 0;
    for (int xs : f) {
      for (int x = 1; x <= n_x_; ++x)
        if (g_[b][x].w == 0 || e_delta(g_[xs][x]) < e_delta(g_[b][x])) {
          g_[b][x] = g_[xs][x];
          g_[x][b] = g_[x][xs];
        }
      for (int x = 1; x <= n_; ++x)
        if (flo_from_[xs][x]) flo_from_[b][x] = xs;
    }
    set_slack(b);
  }

  void expand_blossom(int b) {
    for (int x : flo_[b]) set_st(x, x);
    const int xr = flo_from_[b][g_[b][pa_[b]].u], pr = get_pr(b, xr);
    for (int i = 0; i < pr; i += 2) {
      const int xs = flo_[b][i], xns = flo_[b][i + 1];
      pa_[xs] = g_[xns][xs].u;
      s_[xs] = 1;
      s_[xns] = 0;
      slack_[xs] = 0;
      set_slack(xns);
      q_push(xns);
    }
    s_[xr] = 1;
    pa_[xr] = pa_[b];
    for (size_t i = pr + 1; i < flo_[b].size(); ++i) {
      const int xs = flo_[b][i];
      s_[xs] = -1;
      set_slack(xs);
    }
    st_[b] = 0;
  }

  bool on_found_edge(const Edge& e) {
    const int u = st_[e.u], v = st_[e.v];
    if (s_[v] == -1) {
      pa_[v] = e.u;
      s_[v] = 1;
      const int nu = st_[match_[v]];
      slack_[v] = slack_[nu] = 0;
      s_[nu] = 0;
      q_push(nu);
    } else if (s_[v] == 0) {
      const int lca = get_lca(u, v);
      if (!lca) {
        augment(u, v);
        augment(v, u);
        return true;
      }
      add_blossom(u, lca, v);
    }
    return false;
  }

  bool augmenting_phase() {
    std::fill(s_.begin() + 1, s_.begin() + n_x_ + 1, -1);
    std::fill(slack_.begin() + 1, slack_.begin() + n_x_ + 1, 0);
    q_.clear();
    for (int x = 1; x <= n_x_; ++x)
      if (st_[x] == x && !match_[x]) {
        pa_[x] = 0;
        s_[x] = 0;
        q_push(x);
      }
    if (q_.empty()) return false;
    for (;;) {
      for (size_t qi = 0; qi < q_.size(); ++qi) {
        const int u = q_[qi];
        if (s_[st_[u]] == 1) continue;
        for (int v = 1; v <= n_; ++v)
          if (g_[u][v].w > 0 && st_[u] != st_[v]) {
            if (e_delta(g_[u][v]) == 0) {
              if (on_found_edge(g_[u][v])) return true;
            } else {
              update_slack(u, st_[v]);
            }
          }
      }
      long long d = std::numeric_limits<long long>::max();
      for (int b = n_ + 1; b <= n_x_; ++b)
        if (st_[b] == b && s_[b] == 1) d = std::min(d, lab_[b] / 2);
      for (int x = 1; x <= n_x_; ++x)
        if (st_[x] == x && slack_[x]) {
          if (s_[x] == -1) {
            d = std::min(d, e_delta(g_[slack_[x]][x]));
          } else if (s_[x] == 0) {
            d = std::min(d, e_delta(g_[slack_[x]][x]) / 2);
          }
        }
      for (int u = 1; u <= n_; ++u) {
        if (s_[st_[u]] == 0) {
          if (lab_[u] <= d) return false;
          lab_[u] -= d;
        } else if (s_[st_[u]] == 1) {
          lab_[u] += d;
        }
      }
      for (int b = n_ + 1; b <= n_x_; ++b)
        if (st_[b] == b) {
          if (s_[st_[b]] == 0) {
            lab_[b] += d * 2;
          } else if (s_[st_[b]] == 1) {
            lab_[b] -= d * 2;
          }
        }
      q_.clear();
      for (int x = 1; x <= n_x_; ++x)
        if (st_[x] == x && slack_[x] && st_[slack_[x]] != x && e_delta(g_[slack_[x]][x]) == 0)
          if (on_found_edge(g_[slack_[x]][x])) return true;
      for (int b = n_ + 1; b <= n_x_; ++b)
        if (st_[b] == b && s_[b] == 1 && lab_[b] == 0) expand_blossom(b);
    }
  }

  int n_, n_x_ = 0, stamp_ = 0;
  std::vector<std::vector<Edge>> g_;
  std::vector<long long> lab_;
  std::vector<int> match_, slack_, st_, pa_;
  std::vector<std::vector<int>> flo_from_;
  std::vector<int> s_, vis_;
  std::vector<std::vector<int>> flo_;
  std::vector<int> q_;
};

// Weights are converted to integer millimeters and flipped so that a
// maximum-weight matching is a minimum-weight perfect matching.
std::vector<int> pairing_by_blossom(const std::vector<std::vector<double>>& w) {
  const int n = static_cast<int>(w.size());
  long long max_w = 0;
  std::vector<std::vector<long long>> iw(n, std::vector<long long>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      iw[i][j] = std::llround(w[i][j] * 1000.0);
      max_w = std::max(max_w, iw[i][j]);
    }
  const long long big = static_cast<long long>(n) * (max_w + 1) + 1;
  DenseBlossom solver(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) solver.set_weight(i + 1, j + 1, big - iw[i][j]);
  const std::vector<int> mate = solver.solve();
  std::vector<int> out(n, -1);
  for (int i = 0; i < n; ++i) {
    if (mate[i + 1] == 0) throw Error("weighted matching did not return a perfect matching");
    out[i] = mate[i + 1] - 1;
  }
  return out;
}

}  // namespace

std::vector<int> blossom_perfect_matching(const std::vector<std::vector<double>>& weight) {
  if (weight.size() % 2) throw ArgumentError("perfect matching needs an even vertex count");
  if (weight.empty()) return {};
  return pairing_by_blossom(weight);
}

std::vector<int> min_weight_perfect_matching(const std::vector<std::vector<double>>& weight) {
  if (weight.size() % 2) throw ArgumentError("perfect matching needs an even vertex count");
  if (weight.empty()) return {};
  return weight.size() <= kMaxExactVertices ? pairing_by_subset_dp(weight)
                                            : pairing_by_blossom(weight);
}

KDivision exact_2grouping(const Matching& m0, const ProblemInstance& instance, Rng& rng) {
  KDivision division{2, {}};
  std::vector<MatchedPair> pairs = m0.sorted_pairs();
  if (pairs.empty()) return division;
  std::optional<MatchedPair> leftover;
  if (pairs.size() % 2) {
    std::uniform_int_distribution<size_t> pick(0, pairs.size() - 1);
    size_t idx = pick(rng);
    leftover = pairs[idx];
    pairs.erase(pairs.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  const size_t n = pairs.size();
  std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) w[i][j] = w[j][i] = oscore2(pairs[i], pairs[j], instance);
  std::vector<int> mate = min_weight_perfect_matching(w);
  for (size_t i = 0; i < n; ++i)
    if (static_cast<int>(i) < mate[i]) division.groups.push_back({{pairs[i], pairs[mate[i]]}});
  if (leftover) division.groups.push_back({{*leftover}});
  return division;
}

}  // namespace kswitch
