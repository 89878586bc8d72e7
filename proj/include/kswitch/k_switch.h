#pragma once

#include <optional>
#include <vector>

#include "kswitch/grouping.h"
#include "kswitch/khe.h"
#include "kswitch/model.h"

namespace kswitch {

enum class GroupingMethod { kGreedy, kExact2 };

struct KSwitchConfig {
  int k = 2;
  int lambda = 20;
  GroupingMethod grouping = GroupingMethod::kGreedy;
  uint64_t rng_seed = 0;
  unsigned key_bits = 512;
  unsigned threads = 1;  // per-round k-HE parallelism, 0 = hardware concurrency
  bool record_transcripts = false;

  void validate() const;
};

struct RoundReport {
  int round = 0;
  int groups_formed = 0;
  int swaps_applied = 0;
  int utility_delta = 0;  // sum of the gains reported by the groups' P_b
};

struct KSwitchResult {
  Matching baseline;
  Matching matching;
  std::vector<RoundReport> rounds;
  // Matching after each round, same length as `rounds`.
  std::vector<Matching> history;
  Transcript transcript;  // filled when record_transcripts is set
};

// Division for round `round`, on the current (post-swap) matching. The rng
// stream depends on (seed, round) only, so odd-k picks and the exact-2
// leftover differ from round to round.
KDivision refresh_division(const Matching& m, const KSwitchConfig& cfg,
                           const ProblemInstance& view, int round);

// Baseline Oblivious-M matching, then up to lambda rounds of grouping and
// k-HE. Swaps from a round are committed together after all its groups ran;
// the loop stops after the first round without swaps.
//
// `view` is what the server sees (only perturbed locations and reach are
// read from it); `parties` stands for the workers and tasks and is only
// reached through the k-HE protocol.
KSwitchResult k_switch(const ProblemInstance& view, const PartyDirectory& parties,
                       const KSwitchConfig& cfg);
KSwitchResult k_switch_from(const Matching& baseline, const ProblemInstance& view,
                            const PartyDirectory& parties, const KSwitchConfig& cfg);

// Convenience: splits a full instance into server view and parties.
KSwitchResult k_switch(const ProblemInstance& instance, const KSwitchConfig& cfg);

}  // namespace kswitch
