#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "kswitch/grouping.h"
#include "kswitch/model.h"
#include "kswitch/secure_compute.h"

namespace kswitch {

enum class PartyRole { kWorker, kTask };

// A worker or task taking part in a k-group.
struct Member {
  PartyRole role = PartyRole::kWorker;
  EntityId id = 0;

  std::string label() const;  // "w<id>" or "t<id>"
  friend bool operator==(const Member&, const Member&) = default;
};

std::vector<Member> members_of(const KGroup& g);

// The workers and tasks themselves. Each party's true location stays inside
// this object; the only thing a party will release is its own location
// encrypted under a key it was handed. Server-side code can hold a
// PartyDirectory but cannot read coordinates out of it.
class PartyDirectory {
 public:
  static PartyDirectory from_instance(const ProblemInstance& instance);

  // Public information, also known to the server.
  double reach(EntityId worker) const;
  size_t num_workers() const { return worker_locs_.size(); }
  size_t num_tasks() const { return task_locs_.size(); }

  EncryptedLocation encrypt_own_location(const Member& m, const PublicKey& pk, BigRng& rng) const;
  // Largest |coordinate| among the members, rounded; lets P_b size its key.
  double max_abs_coordinate(const std::vector<Member>& ms) const;

 private:
  const Location& location(const Member& m) const;

  std::vector<Location> worker_locs_;
  std::vector<Location> task_locs_;
  std::vector<double> reach_;
};

enum class MessageKind { kPublicKey, kCiphertext, kDecision };

std::string to_string(MessageKind kind);
MessageKind message_kind_from_string(const std::string& s);

struct TranscriptEntry {
  int round = 0;
  int group = 0;
  std::string sender;
  std::string receiver;
  MessageKind kind = MessageKind::kCiphertext;
  std::vector<uint8_t> payload;
};

// Append-only record of every inter-party message.
class Transcript {
 public:
  void append(TranscriptEntry e) { entries_.push_back(std::move(e)); }
  const std::vector<TranscriptEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  void extend(const Transcript& other);

  // Lines of `round,group,sender,receiver,kind,hex-payload`, with a header.
  void write_csv(std::ostream& out, bool header = true) const;
  static Transcript read_csv(std::istream& in);

 private:
  std::vector<TranscriptEntry> entries_;
};

struct ProxyElection {
  Member a;
  Member b;
};

// Two distinct members drawn uniformly from the group's workers and tasks.
// Groups with fewer than two pairs are rejected with ProtocolError.
ProxyElection elect_proxies(const KGroup& g, Rng& rng);

struct GroupResult {
  std::vector<MatchedPair> new_pairs;
  int group_utility_before = 0;
  int group_utility_after = 0;
  bool swapped = false;
  ProxyElection proxies;
};

struct KheOptions {
  unsigned key_bits = 512;
  int round = 0;  // tags transcript entries
  int group = 0;
};

// One run of the k-HE protocol inside a group. P_b ends up with the exact
// squared distances of all k x k worker/task combinations, re-matches the
// group to maximize the number of reachable pairs and reports the new
// assignment only when it strictly improves on the incoming one. The result
// always assigns every group worker one group task: reachable pairs are
// maximized and the remaining workers and tasks are paired up in id order.
GroupResult run_khe(const KGroup& g, const PartyDirectory& parties, Rng& rng,
                    const KheOptions& options = {}, Transcript* transcript = nullptr);
GroupResult run_khe(const KGroup& g, const ProblemInstance& instance, Rng& rng,
                    const KheOptions& options = {}, Transcript* transcript = nullptr);

// True iff no payload carries a party's true coordinate in a plaintext form
// used by the protocol (whole-meter integer, IEEE double, or length-prefixed
// big-endian integer) and every message parses as its kind: public keys all
// equal, ciphertexts single values in (0, N^2) coprime to N under that key,
// decisions "w<id>:t<id>" lists.
bool audit_transcript(const Transcript& t, const ProblemInstance& instance);

}  // namespace kswitch
