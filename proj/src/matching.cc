#include "kswitch/matching.h"

#include <cmath>
#include <limits>
#include <queue>
#include <tuple>

namespace kswitch {

FlowNetwork::FlowNetwork(int num_workers, int num_tasks)
    : num_workers_(num_workers), num_tasks_(num_tasks), adj_(2 + num_workers + num_tasks) {
  for (int w = 0; w < num_workers; ++w) add_edge(kSource, worker_node(w), 1.0);
  for (int t = 0; t < num_tasks; ++t) add_edge(task_node(t), kSink, 1.0);
}

int FlowNetwork::add_edge(int from, int to, double capacity) {
  if (capacity < 0.0) throw ArgumentError("negative capacity");
  auto& out = adj_[from];
  auto& in = adj_[to];
  out.push_back({to, static_cast<int>(in.size()), capacity, true, capacity});
  in.push_back({from, static_cast<int>(out.size()) - 1, 0.0, false, 0.0});
  forward_arcs_.emplace_back(from, static_cast<int>(out.size()) - 1);
  return static_cast<int>(forward_arcs_.size()) - 1;
}

std::vector<FlowNetwork::Edge> FlowNetwork::edges() const {
  std::vector<Edge> out;
  out.reserve(forward_arcs_.size());
  for (auto [node, idx] : forward_arcs_) {
    const Arc& a = adj_[node][idx];
    out.push_back({node, a.to, a.capacity, a.capacity - a.residual});
  }
  return out;
}

std::vector<FlowNetwork::Edge> FlowNetwork::worker_task_edges() const {
  std::vector<Edge> out;
  for (const Edge& e : edges())
    if (e.from >= 2 && e.from < 2 + num_workers_ && e.capacity > 0.0) out.push_back(e);
  return out;
}

double FlowNetwork::flow_value() const {
  double v = 0.0;
  for (const Arc& a : adj_[kSource])
    if (a.forward) v += a.capacity - a.residual;
  return v;
}

bool FlowNetwork::is_feasible(double tol) const {
  std::vector<double> balance(num_nodes(), 0.0);
  for (const Edge& e : edges()) {
    if (e.flow < -tol || e.flow > e.capacity + tol) return false;
    balance[e.from] -= e.flow;
    balance[e.to] += e.flow;
  }
  for (int v = 2; v < num_nodes(); ++v)
    if (std::abs(balance[v]) > tol) return false;
  return true;
}

void FlowNetwork::max_flow(double min_bottleneck) {
  const int n = num_nodes();
  std::vector<double> best(n);
  std::vector<std::pair<int, int>> parent(n);  // (node, arc index) into v
  std::vector<char> done(n);
  // Max-heap on bottleneck; on ties the lower node id comes first.
  using Entry = std::pair<double, int>;
  auto cmp = [](const Entry& a, const Entry& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second > b.second;
  };

  while (true) {
    std::fill(best.begin(), best.end(), 0.0);
    std::fill(done.begin(), done.end(), 0);
    best[kSource] = std::numeric_limits<double>::infinity();
    std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
    heap.emplace(best[kSource], kSource);
    while (!heap.empty()) {
      auto [b, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = 1;
      if (u == kSink) break;
      for (int i = 0; i < static_cast<int>(adj_[u].size()); ++i) {
        const Arc& a = adj_[u][i];
        if (a.residual <= min_bottleneck || done[a.to]) continue;
        double nb = std::min(b, a.residual);
        if (nb > best[a.to] || (nb == best[a.to] && nb > 0.0 && u < parent[a.to].first)) {
          best[a.to] = nb;
          parent[a.to] = {u, i};
          heap.emplace(nb, a.to);
        }
      }
    }
    if (!done[kSink] || best[kSink] <= min_bottleneck) break;
    const double push = best[kSink];
    for (int v = kSink; v != kSource;) {
      auto [u, i] = parent[v];
      Arc& a = adj_[u][i];
      a.residual -= push;
      adj_[v][a.rev].residual += push;
      v = u;
    }
  }
}

FlowNetwork build_reachability_graph(const ProblemInstance& instance, bool use_perturbed) {
  const int nw = static_cast<int>(instance.workers.size());
  const int nt = static_cast<int>(instance.tasks.size());
  if (use_perturbed && !instance.has_perturbed())
    throw StateError("perturbed locations missing");
  FlowNetwork net(nw, nt);
  for (const Worker& w : instance.workers) {
    const Location& wl = use_perturbed ? *w.perturbed_loc : w.true_loc;
    for (const Task& t : instance.tasks) {
      const Location& tl = use_perturbed ? *t.perturbed_loc : t.true_loc;
      if (euclidean_distance(wl, tl) <= w.reach) net.add_worker_task_edge(w.id, t.id, 1.0);
    }
  }
  return net;
}

Matching saturated_pairs(const FlowNetwork& net) {
  Matching m;
  const int first_task = 2 + net.num_workers();
  for (const auto& e : net.worker_task_edges())
    if (e.flow > 0.5) m.insert({e.from - 2, e.to - first_task});
  return m;
}

Matching oblivious_m(const ProblemInstance& instance) {
  FlowNetwork net = build_reachability_graph(instance, /*use_perturbed=*/true);
  net.max_flow();
  return saturated_pairs(net);
}

Matching opt_matching(const ProblemInstance& instance) {
  FlowNetwork net = build_reachability_graph(instance, /*use_perturbed=*/false);
  net.max_flow();
  return saturated_pairs(net);
}

FractionalAssignment fractional_assignment(const FlowNetwork& net, double min_flow) {
  FractionalAssignment out;
  out.per_worker.resize(net.num_workers());
  const int first_task = 2 + net.num_workers();
  for (const auto& e : net.worker_task_edges())
    if (e.flow > min_flow) out.per_worker[e.from - 2].push_back({e.to - first_task, e.flow});
  return out;
}

std::vector<double> rounding_probabilities(std::span<const TaskFlow> flows) {
  double sum = 0.0;
  for (const auto& f : flows) sum += f.flow;
  std::vector<double> p(flows.size(), 0.0);
  if (sum <= 0.0) return p;
  for (size_t i = 0; i < flows.size(); ++i) p[i] = flows[i].flow / sum;
  return p;
}

Matching round_assignment(const FractionalAssignment& assignment, Rng& rng) {
  Matching m;
  std::vector<char> claimed;
  for (const auto& flows : assignment.per_worker)
    for (const auto& f : flows) claimed.resize(std::max<size_t>(claimed.size(), f.task + 1), 0);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (size_t w = 0; w < assignment.per_worker.size(); ++w) {
    std::vector<TaskFlow> open;
    for (const auto& f : assignment.per_worker[w])
      if (!claimed[f.task] && f.flow > 0.0) open.push_back(f);
    if (open.empty()) continue;
    std::vector<double> p = rounding_probabilities(open);
    double u = unit(rng), acc = 0.0;
    size_t pick = open.size() - 1;
    for (size_t i = 0; i < open.size(); ++i) {
      acc += p[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    claimed[open[pick].task] = 1;
    m.insert({static_cast<EntityId>(w), open[pick].task});
  }
  return m;
}

FlowNetwork build_probability_graph(const ProblemInstance& instance,
                                    const ReachProbEstimator& estimator) {
  if (!instance.has_perturbed()) throw StateError("perturbed locations missing");
  const GeoIParams params = GeoIParams::from_instance(instance);
  FlowNetwork net(static_cast<int>(instance.workers.size()),
                  static_cast<int>(instance.tasks.size()));
  for (const Worker& w : instance.workers) {
    for (const Task& t : instance.tasks) {
      double d = euclidean_distance(*w.perturbed_loc, *t.perturbed_loc);
      double p = estimator.probability(d, w.reach, params);
      if (p > 0.0) net.add_worker_task_edge(w.id, t.id, p);
    }
  }
  return net;
}

Matching oblivious_rr(const ProblemInstance& instance, const ReachProbEstimator& estimator,
                      Rng& rng) {
  FlowNetwork net = build_probability_graph(instance, estimator);
  net.max_flow();
  return round_assignment(fractional_assignment(net), rng);
}

}  // namespace kswitch
