#include "kswitch/khe.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "kswitch/matching.h"

namespace kswitch {

std::string Member::label() const {
  return (role == PartyRole::kWorker ? "w" : "t") + std::to_string(id);
}

std::vector<Member> members_of(const KGroup& g) {
  std::vector<Member> out;
  for (const auto& p : g.pairs) out.push_back({PartyRole::kWorker, p.worker_id});
  for (const auto& p : g.pairs) out.push_back({PartyRole::kTask, p.task_id});
  return out;
}

PartyDirectory PartyDirectory::from_instance(const ProblemInstance& instance) {
  PartyDirectory d;
  for (const auto& w : instance.workers) {
    d.worker_locs_.push_back(w.true_loc);
    d.reach_.push_back(w.reach);
  }
  for (const auto& t : instance.tasks) d.task_locs_.push_back(t.true_loc);
  return d;
}

double PartyDirectory::reach(EntityId worker) const {
  if (worker < 0 || static_cast<size_t>(worker) >= reach_.size())
    throw StructuralError("unknown worker id " + std::to_string(worker));
  return reach_[worker];
}

const Location& PartyDirectory::location(const Member& m) const {
  const auto& locs = m.role == PartyRole::kWorker ? worker_locs_ : task_locs_;
  if (m.id < 0 || static_cast<size_t>(m.id) >= locs.size())
    throw StructuralError("unknown party " + m.label());
  return locs[m.id];
}

EncryptedLocation PartyDirectory::encrypt_own_location(const Member& m, const PublicKey& pk,
                                                       BigRng& rng) const {
  const Location& loc = location(m);
  return encrypt_location(loc.x, loc.y, pk, rng);
}

double PartyDirectory::max_abs_coordinate(const std::vector<Member>& ms) const {
  double out = 0.0;
  for (const auto& m : ms) {
    const Location& loc = location(m);
    out = std::max({out, std::abs(std::round(loc.x)), std::abs(std::round(loc.y))});
  }
  return out;
}

std::string to_string(MessageKind kind) {
  switch (kind) {
    case MessageKind::kPublicKey:
      return "public_key";
    case MessageKind::kCiphertext:
      return "ciphertext";
    case MessageKind::kDecision:
      return "decision";
  }
  return "unknown";
}

MessageKind message_kind_from_string(const std::string& s) {
  if (s == "public_key") return MessageKind::kPublicKey;
  if (s == "ciphertext") return MessageKind::kCiphertext;
  if (s == "decision") return MessageKind::kDecision;
  throw ParseError("unknown message kind '" + s + "'");
}

void Transcript::extend(const Transcript& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

void Transcript::write_csv(std::ostream& out, bool header) const {
  static constexpr char kHex[] = "0123456789abcdef";
  if (header) out << "round,group,sender,receiver,kind,hex-payload\n";
  for (const auto& e : entries_) {
    out << e.round << ',' << e.group << ',' << e.sender << ',' << e.receiver << ','
        << to_string(e.kind) << ',';
    for (uint8_t b : e.payload) out << kHex[b >> 4] << kHex[b & 0xf];
    out << '\n';
  }
}

Transcript Transcript::read_csv(std::istream& in) {
  Transcript t;
  std::string line;
  size_t line_no = 0;
  auto hex_value = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ParseError("line " + std::to_string(line_no) + ": bad hex digit");
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.starts_with("round,")) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 6)
      throw ParseError("line " + std::to_string(line_no) + ": expected 6 fields");
    TranscriptEntry e;
    try {
      e.round = std::stoi(fields[0]);
      e.group = std::stoi(fields[1]);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(line_no) + ": bad round/group");
    }
    e.sender = fields[2];
    e.receiver = fields[3];
    e.kind = message_kind_from_string(fields[4]);
    const std::string& hex = fields[5];
    if (hex.size() % 2) throw ParseError("line " + std::to_string(line_no) + ": odd hex length");
    for (size_t i = 0; i < hex.size(); i += 2)
      e.payload.push_back(static_cast<uint8_t>(hex_value(hex[i]) * 16 + hex_value(hex[i + 1])));
    t.append(std::move(e));
  }
  return t;
}

ProxyElection elect_proxies(const KGroup& g, Rng& rng) {
  if (g.pairs.size() < 2) throw ProtocolError("k-HE needs a group of at least two pairs");
  std::vector<Member> ms = members_of(g);
  std::uniform_int_distribution<size_t> first(0, ms.size() - 1);
  std::uniform_int_distribution<size_t> second(0, ms.size() - 2);
  size_t a = first(rng);
  size_t b = second(rng);
  if (b >= a) ++b;
  return {ms[a], ms[b]};
}

namespace {

std::vector<uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

// P_b's private re-matching over the group's k workers and k tasks.
// reachable[i][j]: worker i can reach task j (group-local indices).
// Returns task index per worker.
std::vector<int> best_assignment(const std::vector<std::vector<char>>& reachable) {
  const int k = static_cast<int>(reachable.size());
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  if (k <= 5) {
    std::vector<int> best = perm;
    int best_count = -1;
    do {
      int c = 0;
      for (int i = 0; i < k; ++i) c += reachable[i][perm[i]];
      if (c > best_count) {
        best_count = c;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  FlowNetwork net(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (reachable[i][j]) net.add_worker_task_edge(i, j, 1.0);
  net.max_flow();
  std::vector<int> task_of(k, -1);
  std::vector<char> taken(k, 0);
  const Matching flow_pairs = saturated_pairs(net);
  for (const auto& p : flow_pairs.pairs()) {
    task_of[p.worker_id] = p.task_id;
    taken[p.task_id] = 1;
  }
  int next = 0;
  for (int i = 0; i < k; ++i) {
    if (task_of[i] >= 0) continue;
    while (taken[next]) ++next;
    task_of[i] = next;
    taken[next] = 1;
  }
  return task_of;
}

}  // namespace

GroupResult run_khe(const KGroup& g, const PartyDirectory& parties, Rng& rng,
                    const KheOptions& options, Transcript* transcript) {
  GroupResult result;
  result.proxies = elect_proxies(g, rng);
  const std::vector<Member> members = members_of(g);
  const size_t k = g.pairs.size();
  {
    std::set<EntityId> ws, ts;
    for (const auto& p : g.pairs)
      if (!ws.insert(p.worker_id).second || !ts.insert(p.task_id).second)
        throw StructuralError("group repeats a worker or task");
  }
  const std::string label_a = result.proxies.a.label();
  const std::string label_b = result.proxies.b.label();
  auto log = [&](const std::string& from, const std::string& to, MessageKind kind,
                 std::vector<uint8_t> payload) {
    if (transcript)
      transcript->append({options.round, options.group, from, to, kind, std::move(payload)});
  };

  // P_b generates the key pair and hands out the public key.
  BigRng key_rng(rng());
  ProxyB pb(keygen(options.key_bits, key_rng), rng());
  const PublicKey pk = pb.pk();
  {
    // Squared distances must stay below N/4 to decode unambiguously.
    const double c = parties.max_abs_coordinate(members);
    mpz_class bound(std::ceil(2.0 * c) + 1);
    if (8 * bound * bound >= pk.n() / 4)
      throw ProtocolError("key too short for the group's coordinate range");
  }
  for (const auto& m : members)
    if (!(m == result.proxies.b)) log(label_b, m.label(), MessageKind::kPublicKey, serialize(pk.n()));

  // Every member sends its encrypted location to P_a.
  ProxyA pa(pk, rng());
  BigRng member_rng(rng());
  std::vector<EncryptedLocation> enc;
  enc.reserve(members.size());
  for (const auto& m : members) {
    enc.push_back(parties.encrypt_own_location(m, pk, member_rng));
    log(m.label(), label_a, MessageKind::kCiphertext, serialize(enc.back().x.value));
    log(m.label(), label_a, MessageKind::kCiphertext, serialize(enc.back().y.value));
  }

  ProxyWire wire;
  if (transcript) {
    wire = [&](ProxyRole from, ProxyRole, const Ciphertext& c) {
      bool a_to_b = from == ProxyRole::kA;
      log(a_to_b ? label_a : label_b, a_to_b ? label_b : label_a, MessageKind::kCiphertext,
          serialize(c.value));
    };
  }

  // P_a and P_b compute all k x k squared distances; only P_b sees them.
  std::vector<std::vector<char>> reachable(k, std::vector<char>(k, 0));
  for (size_t i = 0; i < k; ++i) {
    const double reach = parties.reach(g.pairs[i].worker_id);
    for (size_t j = 0; j < k; ++j) {
      Ciphertext sq = secure_distance(pa, pb, enc[i], enc[k + j], wire);
      log(label_a, label_b, MessageKind::kCiphertext, serialize(sq.value));
      const mpz_class d2 = pb.sk().decrypt_signed(sq);
      reachable[i][j] = d2.get_d() <= reach * reach;
    }
  }

  for (size_t i = 0; i < k; ++i) result.group_utility_before += reachable[i][i];
  const std::vector<int> assignment = best_assignment(reachable);
  for (size_t i = 0; i < k; ++i) result.group_utility_after += reachable[i][assignment[i]];

  if (result.group_utility_after > result.group_utility_before) {
    result.swapped = true;
    for (size_t i = 0; i < k; ++i)
      result.new_pairs.push_back({g.pairs[i].worker_id, g.pairs[assignment[i]].task_id});
  } else {
    result.group_utility_after = result.group_utility_before;
    result.new_pairs = g.pairs;
  }

  std::string decision;
  for (const auto& p : result.new_pairs) {
    if (!decision.empty()) decision += ',';
    decision += "w" + std::to_string(p.worker_id) + ":t" + std::to_string(p.task_id);
  }
  log(label_b, "server", MessageKind::kDecision, to_bytes(decision));
  return result;
}

GroupResult run_khe(const KGroup& g, const ProblemInstance& instance, Rng& rng,
                    const KheOptions& options, Transcript* transcript) {
  return run_khe(g, PartyDirectory::from_instance(instance), rng, options, transcript);
}

namespace {

bool contains_bytes(const std::vector<uint8_t>& hay, const uint8_t* needle, size_t n) {
  if (hay.size() < n) return false;
  return std::search(hay.begin(), hay.end(), needle, needle + n) != hay.end();
}

template <typename T>
bool contains_value(const std::vector<uint8_t>& hay, T v) {
  uint8_t le[sizeof(T)], be[sizeof(T)];
  std::memcpy(le, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(le, le + sizeof(T));
  std::reverse_copy(le, le + sizeof(T), be);
  return contains_bytes(hay, le, sizeof(T)) || contains_bytes(hay, be, sizeof(T));
}

std::optional<Member> parse_label(const std::string& s) {
  if (s.size() < 2 || (s[0] != 'w' && s[0] != 't')) return std::nullopt;
  if (!std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return std::nullopt;
  return Member{s[0] == 'w' ? PartyRole::kWorker : PartyRole::kTask, std::stoi(s.substr(1))};
}

bool valid_decision(const std::vector<uint8_t>& payload, const std::set<std::string>& labels) {
  std::string text(payload.begin(), payload.end());
  if (text.empty()) return true;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto colon = item.find(':');
    if (colon == std::string::npos) return false;
    auto w = parse_label(item.substr(0, colon));
    auto t = parse_label(item.substr(colon + 1));
    if (!w || !t || w->role != PartyRole::kWorker || t->role != PartyRole::kTask) return false;
    if (!labels.count(w->label()) || !labels.count(t->label())) return false;
  }
  return text.back() != ',';
}

}  // namespace

bool audit_transcript(const Transcript& t, const ProblemInstance& instance) {
  std::map<std::pair<int, int>, std::vector<const TranscriptEntry*>> sessions;
  for (const auto& e : t.entries()) sessions[{e.round, e.group}].push_back(&e);

  for (const auto& [id, entries] : sessions) {
    std::set<std::string> labels;
    std::vector<Location> secrets;
    for (const auto* e : entries) {
      for (const std::string* l : {&e->sender, &e->receiver}) {
        if (*l == "server" || !labels.insert(*l).second) continue;
        auto m = parse_label(*l);
        if (!m) return false;
        try {
          secrets.push_back(m->role == PartyRole::kWorker ? instance.worker(m->id).true_loc
                                                          : instance.task(m->id).true_loc);
        } catch (const StructuralError&) {
          return false;
        }
      }
    }

    std::optional<mpz_class> n;
    for (const auto* e : entries) {
      if (e->kind != MessageKind::kPublicKey) continue;
      size_t off = 0;
      mpz_class v;
      try {
        v = deserialize(e->payload, off);
      } catch (const ParseError&) {
        return false;
      }
      if (off != e->payload.size() || v < 2 || (n && *n != v)) return false;
      n = v;
    }

    for (const auto* e : entries) {
      for (const Location& s : secrets) {
        for (double c : {s.x, s.y}) {
          if (contains_value(e->payload, c)) return false;
          if (contains_value(e->payload, static_cast<int64_t>(std::llround(c)))) return false;
        }
      }
      if (e->kind == MessageKind::kDecision) {
        if (e->receiver != "server" || !valid_decision(e->payload, labels)) return false;
        continue;
      }
      if (e->kind != MessageKind::kCiphertext) continue;
      if (!n) return false;
      size_t off = 0;
      mpz_class c;
      try {
        c = deserialize(e->payload, off);
      } catch (const ParseError&) {
        return false;
      }
      if (off != e->payload.size()) return false;
      const mpz_class n2 = *n * *n;
      if (c <= 0 || c >= n2) return false;
      mpz_class g;
      mpz_gcd(g.get_mpz_t(), c.get_mpz_t(), n->get_mpz_t());
      if (g != 1) return false;
      for (const Location& s : secrets) {
        for (double coord : {s.x, s.y}) {
          mpz_class v(static_cast<long>(std::llround(coord)));
          mpz_class enc = v % *n;
          if (enc < 0) enc += *n;
          if (c == enc || c == abs(v)) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace kswitch
