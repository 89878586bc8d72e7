#pragma once

#include <vector>

#include "kswitch/model.h"

namespace kswitch {

struct KGroup {
  std::vector<MatchedPair> pairs;
};

struct KDivision {
  int k = 2;
  std::vector<KGroup> groups;
};

// Obfuscation score of a 2-group: distance between the two workers plus
// distance between their two tasks, both on perturbed locations.
// Throws ArgumentError when both pairs share a worker.
double oscore2(const MatchedPair& p1, const MatchedPair& p2, const ProblemInstance& instance);

// Sum of oscore2 over all unordered 2-subsets of the group.
double oscore_k(const KGroup& g, const ProblemInstance& instance);

double division_score(const KDivision& d, const ProblemInstance& instance);

// Checks that d is a k-division of m0: ceil(|m0|/k) groups, every group of
// size k except at most one of size in [1, k-1], groups disjoint in workers,
// and the union equal to m0. Returns an empty string when valid, otherwise a
// description of the first violated property.
std::string check_division(const KDivision& d, const Matching& m0);

// Greedy k-grouping. All 2-groups of m0 are ordered by OScore (ties by the
// worker ids of the two pairs). Each group is packed by popping the cheapest
// 2-group whose pairs are both still unused; for odd k the last slot gets a
// uniformly random unused pair. Once fewer than two unused pairs remain the
// leftover is appended as-is.
KDivision greedy_grouping(const Matching& m0, int k, const ProblemInstance& instance, Rng& rng);

// Complete graph over matched pairs weighted by oscore2.
struct WeightedCompleteGraph {
  std::vector<MatchedPair> vertices;
  std::vector<std::vector<double>> weight;  // symmetric, zero diagonal

  static WeightedCompleteGraph from_matching(const Matching& m0, const ProblemInstance& instance);
  size_t size() const { return vertices.size(); }
};

struct BipartiteEdge {
  int left = 0;   // original node n_i
  int right = 0;  // copy n'_j
  double weight = 0.0;
};

struct BipartiteGraph {
  int left_count = 0;
  int right_count = 0;
  std::vector<BipartiteEdge> edges;
};

// Copies every node n_i to n'_i and connects n_i to n'_j for i < j with the
// original edge weight. Self copies and mirrored duplicates are omitted.
BipartiteGraph graph_transform(const WeightedCompleteGraph& g);

// Minimum-score 2-division. For an odd |m0| one uniformly random pair is set
// aside as a singleton group and the rest are paired optimally.
KDivision exact_2grouping(const Matching& m0, const ProblemInstance& instance, Rng& rng);

// Minimum-weight perfect matching on a complete graph with an even number of
// vertices. Returns mate[i] for every vertex. Small graphs are solved by
// exact subset dynamic programming, larger ones by weighted blossom matching.
std::vector<int> min_weight_perfect_matching(const std::vector<std::vector<double>>& weight);
// The blossom path alone, whatever the size. Weights are rounded to mm.
std::vector<int> blossom_perfect_matching(const std::vector<std::vector<double>>& weight);

}  // namespace kswitch
