#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kswitch/common.h"

namespace kswitch {

// Planar coordinates in meters.
struct Location {
  double x = 0.0;
  double y = 0.0;

  bool is_finite() const;
  friend bool operator==(const Location&, const Location&) = default;
};

using EntityId = int32_t;

struct Worker {
  EntityId id = 0;
  Location true_loc;
  std::optional<Location> perturbed_loc;
  double reach = 0.0;  // meters, > 0
};

struct Task {
  EntityId id = 0;
  Location true_loc;
  std::optional<Location> perturbed_loc;
};

struct MatchedPair {
  EntityId worker_id = 0;
  EntityId task_id = 0;

  friend bool operator==(const MatchedPair&, const MatchedPair&) = default;
  friend auto operator<=>(const MatchedPair&, const MatchedPair&) = default;
};

// A set of worker->task pairs where no worker and no task repeats.
class Matching {
 public:
  Matching() = default;
  Matching(std::initializer_list<MatchedPair> pairs);

  // Throws StructuralError if the worker or the task is already matched.
  void insert(MatchedPair p);
  bool try_insert(MatchedPair p);
  void erase_worker(EntityId w);

  std::optional<EntityId> task_of(EntityId w) const;
  std::optional<EntityId> worker_of(EntityId t) const;
  bool contains(MatchedPair p) const;

  size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  // Pairs ordered by worker id.
  std::vector<MatchedPair> sorted_pairs() const;
  std::span<const MatchedPair> pairs() const { return pairs_; }

  friend bool operator==(const Matching& a, const Matching& b) {
    return a.sorted_pairs() == b.sorted_pairs();
  }

 private:
  std::vector<MatchedPair> pairs_;
};

// Workers and tasks use dense ids: workers[i].id == i, tasks[j].id == j.
struct ProblemInstance {
  std::vector<Worker> workers;
  std::vector<Task> tasks;
  double epsilon = 0.4;   // privacy level l = epsilon * r
  double r = 1000.0;      // protection radius, meters
  uint64_t rng_seed = 0;

  // Checks id density, reach > 0, epsilon > 0, r > 0 and finite true
  // locations. Throws StructuralError / ArgumentError.
  void validate() const;

  const Worker& worker(EntityId id) const;
  const Task& task(EntityId id) const;
  bool has_perturbed() const;
};

double euclidean_distance(const Location& a, const Location& b);
double squared_distance(const Location& a, const Location& b);

bool is_reachable_true(const Worker& w, const Task& t);

// Number of pairs in m that are reachable under true locations.
int utility(const Matching& m, const ProblemInstance& instance);

// Copy of the instance as the untrusted server sees it: true locations are
// replaced by NaN. Server-side algorithms must produce identical results on
// this view.
ProblemInstance server_view(const ProblemInstance& instance);

}  // namespace kswitch
