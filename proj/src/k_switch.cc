#include "kswitch/k_switch.h"

#include <string>

#include "kswitch/matching.h"

namespace kswitch {

void KSwitchConfig::validate() const {
  if (k < 2) throw ArgumentError("k must be >= 2");
  if (lambda < 1) throw ArgumentError("lambda must be >= 1");
  if (grouping == GroupingMethod::kExact2 && k != 2)
    throw ArgumentError("exact grouping is only defined for k = 2");
}

KDivision refresh_division(const Matching& m, const KSwitchConfig& cfg,
                           const ProblemInstance& view, int round) {
  Rng rng = derive_rng(cfg.rng_seed, {0x6701, static_cast<uint64_t>(round)});
  if (cfg.grouping == GroupingMethod::kExact2) return exact_2grouping(m, view, rng);
  return greedy_grouping(m, cfg.k, view, rng);
}

KSwitchResult k_switch_from(const Matching& baseline, const ProblemInstance& view,
                            const PartyDirectory& parties, const KSwitchConfig& cfg) {
  cfg.validate();
  KSwitchResult result;
  result.baseline = baseline;
  result.matching = baseline;

  for (int round = 1; round <= cfg.lambda; ++round) {
    const KDivision division = refresh_division(result.matching, cfg, view, round);
    const size_t groups = division.groups.size();
    std::vector<std::optional<GroupResult>> outcomes(groups);
    std::vector<Transcript> transcripts(cfg.record_transcripts ? groups : 0);

    parallel_for(groups, cfg.threads, [&](size_t gi) {
      const KGroup& g = division.groups[gi];
      if (g.pairs.size() < 2) return;  // nothing to swap with
      Rng rng = derive_rng(cfg.rng_seed, {0x4e11, static_cast<uint64_t>(round), gi});
      KheOptions opts{cfg.key_bits, round, static_cast<int>(gi)};
      outcomes[gi] =
          run_khe(g, parties, rng, opts, cfg.record_transcripts ? &transcripts[gi] : nullptr);
    });

    RoundReport report{round, static_cast<int>(groups), 0, 0};
    Matching next;
    for (size_t gi = 0; gi < groups; ++gi) {
      const auto& outcome = outcomes[gi];
      const auto& pairs = outcome ? outcome->new_pairs : division.groups[gi].pairs;
      for (const auto& p : pairs) next.insert(p);
      if (outcome && outcome->swapped) {
        ++report.swaps_applied;
        report.utility_delta += outcome->group_utility_after - outcome->group_utility_before;
      }
    }
    for (const auto& t : transcripts) result.transcript.extend(t);
    result.matching = std::move(next);
    result.rounds.push_back(report);
    result.history.push_back(result.matching);
    if (report.swaps_applied == 0) break;
  }
  return result;
}

KSwitchResult k_switch(const ProblemInstance& view, const PartyDirectory& parties,
                       const KSwitchConfig& cfg) {
  return k_switch_from(oblivious_m(view), view, parties, cfg);
}

KSwitchResult k_switch(const ProblemInstance& instance, const KSwitchConfig& cfg) {
  return k_switch(server_view(instance), PartyDirectory::from_instance(instance), cfg);
}

}  // namespace kswitch
