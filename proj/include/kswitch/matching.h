#pragma once

#include <span>
#include <vector>

#include "kswitch/geo_privacy.h"
#include "kswitch/model.h"

namespace kswitch {

// Bipartite flow network: source -> worker -> task -> sink.
// Node layout: 0 = source, 1 = sink, then one node per worker, then one node
// per task.
class FlowNetwork {
 public:
  struct Edge {
    int from = 0;
    int to = 0;
    double capacity = 0.0;
    double flow = 0.0;
  };

  static constexpr int kSource = 0;
  static constexpr int kSink = 1;

  FlowNetwork(int num_workers, int num_tasks);

  int num_workers() const { return num_workers_; }
  int num_tasks() const { return num_tasks_; }
  int num_nodes() const { return 2 + num_workers_ + num_tasks_; }
  int worker_node(EntityId w) const { return 2 + w; }
  int task_node(EntityId t) const { return 2 + num_workers_ + t; }

  // Adds a forward edge with its residual twin; returns the forward index.
  int add_edge(int from, int to, double capacity);
  void add_worker_task_edge(EntityId w, EntityId t, double capacity) {
    add_edge(worker_node(w), task_node(t), capacity);
  }

  // Forward edges only, in insertion order.
  std::vector<Edge> edges() const;
  // Forward worker->task edges with positive capacity.
  std::vector<Edge> worker_task_edges() const;
  double flow_value() const;

  // Capacity bounds and conservation at every inner node, within tol.
  bool is_feasible(double tol = 1e-9) const;

  // Maximum flow by Ford-Fulkerson with fattest-path augmentation: every
  // augmenting path is one maximizing its bottleneck residual capacity,
  // found by a max-bottleneck Dijkstra search. Equal bottlenecks are broken
  // towards the lower node id. Augmentation stops once the best bottleneck
  // is <= min_bottleneck.
  void max_flow(double min_bottleneck = 1e-12);

 private:
  struct Arc {
    int to;
    int rev;  // index of the twin arc in adj_[to]
    double residual;
    bool forward;
    double capacity;
  };

  int num_workers_;
  int num_tasks_;
  std::vector<std::vector<Arc>> adj_;
  std::vector<std::pair<int, int>> forward_arcs_;  // (node, index in adj_)
};

// Unit-capacity reachability network over perturbed (or true) locations:
// worker w -> task t iff d(loc(w), loc(t)) <= w.reach.
// Throws StateError if perturbed locations are requested but missing.
FlowNetwork build_reachability_graph(const ProblemInstance& instance, bool use_perturbed);

// Pairs carrying (at least half a unit of) flow on worker->task edges.
Matching saturated_pairs(const FlowNetwork& net);

// Max-cardinality matching on the perturbed reachability graph.
Matching oblivious_m(const ProblemInstance& instance);

// Max-cardinality matching on the true reachability graph.
Matching opt_matching(const ProblemInstance& instance);

struct TaskFlow {
  EntityId task = 0;
  double flow = 0.0;
};

// Outgoing flow per worker; entries are strictly positive.
struct FractionalAssignment {
  std::vector<std::vector<TaskFlow>> per_worker;
};

FractionalAssignment fractional_assignment(const FlowNetwork& net, double min_flow = 1e-12);

// Selection probabilities flow / sum(flow). All zero when the sum is zero.
std::vector<double> rounding_probabilities(std::span<const TaskFlow> flows);

// Rounds a fractional assignment: workers in ascending id order each sample
// one of their still-unclaimed tasks proportionally to flow. A worker with
// no unclaimed positive-flow task stays unmatched.
Matching round_assignment(const FractionalAssignment& assignment, Rng& rng);

// Probability-capacity network (capacity = estimated reach probability on the
// perturbed distance), maximum flow, then randomized rounding.
FlowNetwork build_probability_graph(const ProblemInstance& instance,
                                    const ReachProbEstimator& estimator);
Matching oblivious_rr(const ProblemInstance& instance, const ReachProbEstimator& estimator,
                      Rng& rng);

}  // namespace kswitch
