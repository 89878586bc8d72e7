#include "kswitch/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kswitch {

bool Location::is_finite() const { return std::isfinite(x) && std::isfinite(y); }

Matching::Matching(std::initializer_list<MatchedPair> pairs) {
  for (const auto& p : pairs) insert(p);
}

void Matching::insert(MatchedPair p) {
  if (!try_insert(p))
    throw StructuralError("matching already contains worker " +
                          std::to_string(p.worker_id) + " or task " +
                          std::to_string(p.task_id));
}

bool Matching::try_insert(MatchedPair p) {
  for (const auto& q : pairs_)
    if (q.worker_id == p.worker_id || q.task_id == p.task_id) return false;
  pairs_.push_back(p);
  return true;
}

void Matching::erase_worker(EntityId w) {
  std::erase_if(pairs_, [w](const MatchedPair& p) { return p.worker_id == w; });
}

std::optional<EntityId> Matching::task_of(EntityId w) const {
  for (const auto& p : pairs_)
    if (p.worker_id == w) return p.task_id;
  return std::nullopt;
}

std::optional<EntityId> Matching::worker_of(EntityId t) const {
  for (const auto& p : pairs_)
    if (p.task_id == t) return p.worker_id;
  return std::nullopt;
}

bool Matching::contains(MatchedPair p) const {
  return std::find(pairs_.begin(), pairs_.end(), p) != pairs_.end();
}

std::vector<MatchedPair> Matching::sorted_pairs() const {
  std::vector<MatchedPair> out = pairs_;
  std::sort(out.begin(), out.end());
  return out;
}

void ProblemInstance::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw ArgumentError("epsilon must be > 0");
  if (!(r > 0.0) || !std::isfinite(r)) throw ArgumentError("r must be > 0");
  for (size_t i = 0; i < workers.size(); ++i) {
    const Worker& w = workers[i];
    if (w.id != static_cast<EntityId>(i))
      throw StructuralError("worker ids must be dense, got " + std::to_string(w.id) +
                            " at index " + std::to_string(i));
    if (!(w.reach > 0.0)) throw ArgumentError("worker reach must be > 0");
    if (!w.true_loc.is_finite()) throw ArgumentError("non-finite worker location");
  }
  for (size_t j = 0; j < tasks.size(); ++j) {
    if (tasks[j].id != static_cast<EntityId>(j))
      throw StructuralError("task ids must be dense, got " + std::to_string(tasks[j].id) +
                            " at index " + std::to_string(j));
    if (!tasks[j].true_loc.is_finite()) throw ArgumentError("non-finite task location");
  }
}

const Worker& ProblemInstance::worker(EntityId id) const {
  if (id < 0 || static_cast<size_t>(id) >= workers.size())
    throw StructuralError("unknown worker id " + std::to_string(id));
  return workers[id];
}

const Task& ProblemInstance::task(EntityId id) const {
  if (id < 0 || static_cast<size_t>(id) >= tasks.size())
    throw StructuralError("unknown task id " + std::to_string(id));
  return tasks[id];
}

bool ProblemInstance::has_perturbed() const {
  return std::all_of(workers.begin(), workers.end(),
                     [](const Worker& w) { return w.perturbed_loc.has_value(); }) &&
         std::all_of(tasks.begin(), tasks.end(),
                     [](const Task& t) { return t.perturbed_loc.has_value(); });
}

double squared_distance(const Location& a, const Location& b) {
  double dx = a.x - b.x, dy = a.y - b.y;
  return dx * dx + dy * dy;
}

double euclidean_distance(const Location& a, const Location& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool is_reachable_true(const Worker& w, const Task& t) {
  return euclidean_distance(w.true_loc, t.true_loc) <= w.reach;
}

int utility(const Matching& m, const ProblemInstance& instance) {
  int count = 0;
  for (const auto& p : m.pairs())
    if (is_reachable_true(instance.worker(p.worker_id), instance.task(p.task_id))) ++count;
  return count;
}

ProblemInstance server_view(const ProblemInstance& instance) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  ProblemInstance view = instance;
  for (auto& w : view.workers) w.true_loc = {kNaN, kNaN};
  for (auto& t : view.tasks) t.true_loc = {kNaN, kNaN};
  return view;
}

}  // namespace kswitch
