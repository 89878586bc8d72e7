#include <algorithm>
#include <chrono>
#include <cstring>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "kswitch/khe.h"
#include "support.h"

using namespace kswitch;
using testing::make_instance;

namespace {

// True layout: w0-t1 and w2-t2 are the incoming pairs; w0 reaches t2 and w2
// reaches t1, w2 does not reach t2.
ProblemInstance swap_example() {
  return make_instance({{0, 0}, {-900, 0}, {1200, 700}}, {{-500, 0}, {600, 700}, {300, -800}}, 1000);
}

constexpr unsigned kFastBits = 256;

KheOptions fast() {
  KheOptions o;
  o.key_bits = kFastBits;
  return o;
}

// Reachable pairs of the best permutation of the group's tasks, by trying
// all of them.
int brute_force_group_optimum(const KGroup& g, const ProblemInstance& inst) {
  std::vector<int> perm(g.pairs.size());
  std::iota(perm.begin(), perm.end(), 0);
  int best = 0;
  do {
    int u = 0;
    for (size_t i = 0; i < perm.size(); ++i)
      u += is_reachable_true(inst.workers[g.pairs[i].worker_id],
                             inst.tasks[g.pairs[perm[i]].task_id]);
    best = std::max(best, u);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

int incoming_utility(const KGroup& g, const ProblemInstance& inst) {
  int u = 0;
  for (const auto& p : g.pairs) u += is_reachable_true(inst.workers[p.worker_id], inst.tasks[p.task_id]);
  return u;
}

std::vector<uint8_t> be64(int64_t v) {
  std::vector<uint8_t> out(8);
  for (int i = 7; i >= 0; --i, v >>= 8) out[i] = static_cast<uint8_t>(v & 0xff);
  return out;
}

std::vector<uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

}  // namespace

TEST_SUITE("khe") {

TEST_CASE("proxy election is uniform over ordered member pairs") {
  KGroup g{{{0, 0}, {1, 1}}};
  // 4 members, 12 ordered (a, b) pairs.
  std::map<std::pair<std::string, std::string>, double> counts;
  std::mt19937_64 rng(77);
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    auto e = elect_proxies(g, rng);
    REQUIRE_FALSE(e.a == e.b);
    counts[{e.a.label(), e.b.label()}] += 1;
  }
  REQUIRE(counts.size() == 12);
  std::vector<double> obs, prob;
  for (auto& [k, v] : counts) {
    obs.push_back(v);
    prob.push_back(1.0 / 12);
  }
  CHECK(testing::chi_square_p(obs, prob) > 0.001);

  std::mt19937_64 r1(5), r2(5);
  for (int i = 0; i < 50; ++i) {
    auto a = elect_proxies(g, r1);
    auto b = elect_proxies(g, r2);
    CHECK(a.a == b.a);
    CHECK(a.b == b.b);
  }

  CHECK_THROWS_AS(elect_proxies(KGroup{{{0, 0}}}, rng), ProtocolError);
  CHECK_THROWS_AS(elect_proxies(KGroup{}, rng), ProtocolError);
}

TEST_CASE("members and labels") {
  KGroup g{{{3, 7}, {1, 2}}};
  auto ms = members_of(g);
  REQUIRE(ms.size() == 4);
  CHECK(ms[0].label() == "w3");
  CHECK(ms[1].label() == "w1");
  CHECK(ms[2].label() == "t7");
  CHECK(ms[3].label() == "t2");
}

TEST_CASE("a 2-group swaps when the exchange gains") {
  auto inst = swap_example();
  std::mt19937_64 rng(1);
  KGroup g{{{0, 1}, {2, 2}}};
  auto r = run_khe(g, inst, rng, fast());
  CHECK(r.group_utility_before == 1);
  CHECK(r.group_utility_after == 2);
  CHECK(r.swapped);
  std::vector<MatchedPair> want{{0, 2}, {2, 1}};
  auto got = r.new_pairs;
  std::sort(got.begin(), got.end());
  CHECK(got == want);
}

TEST_CASE("no swap when the incoming pairs are already best") {
  auto inst = swap_example();
  std::mt19937_64 rng(2);
  // w0-t1 and w1-t0 are both reachable.
  KGroup g{{{0, 1}, {1, 0}}};
  auto r = run_khe(g, inst, rng, fast());
  CHECK_FALSE(r.swapped);
  CHECK(r.group_utility_before == 2);
  CHECK(r.group_utility_after == 2);
  CHECK(r.new_pairs == g.pairs);

  // Ties do not trigger a swap either: neither arrangement reaches.
  auto far = make_instance({{0, 0}, {0, 10000}}, {{5000, 0}, {5000, 10000}}, 100);
  KGroup h{{{0, 0}, {1, 1}}};
  auto r2 = run_khe(h, far, rng, fast());
  CHECK_FALSE(r2.swapped);
  CHECK(r2.new_pairs == h.pairs);
}

TEST_CASE("group result matches the brute-force optimum") {
  std::mt19937_64 rng(31);
  for (int k : {2, 3}) {
    for (int trial = 0; trial < 15; ++trial) {
      auto inst = testing::random_instance(k, k, 2500, 1200, rng);
      std::vector<int> perm(k);
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      KGroup g;
      for (int i = 0; i < k; ++i) g.pairs.push_back({i, perm[i]});
      auto r = run_khe(g, inst, rng, fast());
      const int before = incoming_utility(g, inst);
      const int best = brute_force_group_optimum(g, inst);
      CHECK(r.group_utility_before == before);
      CHECK(r.group_utility_after == best);
      CHECK(r.swapped == (best > before));
      CHECK(testing::true_utility(r.new_pairs, inst) == best);

      // A full reassignment among the group's own workers and tasks.
      std::set<EntityId> ws, ts, gws, gts;
      for (const auto& p : g.pairs) gws.insert(p.worker_id), gts.insert(p.task_id);
      for (const auto& p : r.new_pairs) ws.insert(p.worker_id), ts.insert(p.task_id);
      CHECK(r.new_pairs.size() == g.pairs.size());
      CHECK(ws == gws);
      CHECK(ts == gts);
    }
  }
}

TEST_CASE("group errors") {
  auto inst = swap_example();
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(run_khe(KGroup{{{0, 0}}}, inst, rng, fast()), ProtocolError);
  CHECK_THROWS_AS(run_khe(KGroup{{{0, 0}, {0, 1}}}, inst, rng, fast()), StructuralError);
  CHECK_THROWS_AS(run_khe(KGroup{{{0, 0}, {9, 1}}}, inst, rng, fast()), StructuralError);
  // A 64-bit modulus cannot hold squared distances of this size safely.
  KheOptions tiny;
  tiny.key_bits = 64;
  auto wide = make_instance({{0, 0}, {1e9, 1e9}}, {{0, 0}, {1e9, 0}}, 100);
  CHECK_THROWS_AS(run_khe(KGroup{{{0, 0}, {1, 1}}}, wide, rng, tiny), ProtocolError);
}

TEST_CASE("transcripts pass the audit and leaks do not") {
  auto inst = swap_example();
  std::mt19937_64 rng(4);
  Transcript t;
  KheOptions o = fast();
  o.round = 3;
  o.group = 1;
  auto r = run_khe(KGroup{{{0, 1}, {2, 2}}}, inst, rng, o, &t);
  REQUIRE_FALSE(t.empty());
  CHECK(audit_transcript(t, inst));
  CHECK(audit_transcript(Transcript{}, inst));

  // Public key to the 3 other members, 2 ciphertexts per member, one
  // decision; the rest is proxy traffic.
  int keys = 0, decisions = 0;
  std::set<std::string> labels{"w0", "w2", "t1", "t2"};
  for (const auto& e : t.entries()) {
    CHECK(e.round == 3);
    CHECK(e.group == 1);
    keys += e.kind == MessageKind::kPublicKey;
    decisions += e.kind == MessageKind::kDecision;
    if (e.kind == MessageKind::kDecision) {
      CHECK(e.receiver == "server");
      CHECK(std::string(e.payload.begin(), e.payload.end()) == "w0:t2,w2:t1");
    } else {
      CHECK(labels.count(e.sender) == 1);
      CHECK(labels.count(e.receiver) == 1);
    }
  }
  CHECK(keys == 3);
  CHECK(decisions == 1);
  CHECK(r.proxies.b.label() != r.proxies.a.label());

  auto with = [&](TranscriptEntry e) {
    Transcript bad = t;
    bad.append(std::move(e));
    return audit_transcript(bad, inst);
  };
  const Location& w2 = inst.workers[2].true_loc;  // (1200, 700)
  // Whole-meter coordinate as a length-prefixed integer.
  CHECK_FALSE(with({3, 1, "w2", "w0", MessageKind::kCiphertext, serialize(mpz_class(1200))}));
  // Coordinate as raw IEEE bytes inside a payload.
  std::vector<uint8_t> raw(8);
  std::memcpy(raw.data(), &w2.y, 8);
  CHECK_FALSE(with({3, 1, "w2", "w0", MessageKind::kCiphertext, raw}));
  // Big-endian 64-bit integer.
  CHECK_FALSE(with({3, 1, "w2", "w0", MessageKind::kCiphertext, be64(700)}));
  // A plaintext coordinate where a decision belongs.
  CHECK_FALSE(with({3, 1, "w2", "server", MessageKind::kDecision, bytes_of("w2:1200")}));
  // Unknown party.
  CHECK_FALSE(with({3, 1, "w9", "w0", MessageKind::kCiphertext, serialize(mpz_class(5))}));
  // Ciphertext out of range for the session key.
  size_t off = 0;
  mpz_class n = deserialize(t.entries().front().payload, off);
  CHECK_FALSE(with({3, 1, "w2", "w0", MessageKind::kCiphertext, serialize(n * n + 1)}));
  // A second, different key in the same session.
  CHECK_FALSE(with({3, 1, "w2", "w0", MessageKind::kPublicKey, serialize(n + 2)}));
}

TEST_CASE("transcript CSV roundtrip") {
  auto inst = swap_example();
  std::mt19937_64 rng(6);
  Transcript t;
  run_khe(KGroup{{{0, 1}, {1, 0}}}, inst, rng, fast(), &t);
  std::stringstream ss;
  t.write_csv(ss);
  CHECK(ss.str().rfind("round,group,sender,receiver,kind,hex-payload\n", 0) == 0);
  Transcript back = Transcript::read_csv(ss);
  REQUIRE(back.entries().size() == t.entries().size());
  for (size_t i = 0; i < t.entries().size(); ++i) {
    const auto& a = t.entries()[i];
    const auto& b = back.entries()[i];
    CHECK(a.round == b.round);
    CHECK(a.group == b.group);
    CHECK(a.sender == b.sender);
    CHECK(a.receiver == b.receiver);
    CHECK(a.kind == b.kind);
    CHECK(a.payload == b.payload);
  }

  std::stringstream bad1("0,0,w0,w1,ciphertext,abc\n");
  CHECK_THROWS_AS(Transcript::read_csv(bad1), ParseError);
  std::stringstream bad2("0,0,w0,w1,telegram,00\n");
  CHECK_THROWS_AS(Transcript::read_csv(bad2), ParseError);
  std::stringstream bad3("0,0,w0,w1\n");
  CHECK_THROWS_AS(Transcript::read_csv(bad3), ParseError);
  std::stringstream bad4("x,0,w0,w1,decision,\n");
  CHECK_THROWS_AS(Transcript::read_csv(bad4), ParseError);
}

TEST_CASE("a 2-group at 512 bits is fast") {
  auto inst = swap_example();
  std::mt19937_64 rng(8);
  auto t0 = std::chrono::steady_clock::now();
  auto r = run_khe(KGroup{{{0, 1}, {2, 2}}}, inst, rng);
  double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(r.swapped);
  CHECK(s < 1.0);
}

}  // TEST_SUITE
