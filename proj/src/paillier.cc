#include "kswitch/paillier.h"

#include <string>
#include <utility>

namespace kswitch {

BigRng::BigRng(uint64_t seed) : state_(gmp_randinit_mt) {
  mpz_class s;
  mpz_import(s.get_mpz_t(), 1, 1, sizeof(seed), 0, 0, &seed);
  state_.seed(s);
}

mpz_class BigRng::below(const mpz_class& bound) { return state_.get_z_range(bound); }

mpz_class BigRng::unit_mod(const mpz_class& n) {
  while (true) {
    mpz_class r = state_.get_z_range(n);
    if (r == 0) continue;
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
    if (g == 1) return r;
  }
}

mpz_class BigRng::exact_bits(unsigned bits) {
  mpz_class r = state_.get_z_bits(bits);
  mpz_setbit(r.get_mpz_t(), bits - 1);
  return r;
}

namespace {

uint64_t fingerprint_of(const mpz_class& n) {
  uint64_t low = 0;
  mpz_class masked = n & ((mpz_class(1) << 64) - 1);
  mpz_export(&low, nullptr, -1, sizeof(low), 0, 0, masked.get_mpz_t());
  return mix64(low ^ mix64(mpz_sizeinbase(n.get_mpz_t(), 2)));
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

bool is_probable_prime(const mpz_class& v) {
  // 40 Miller-Rabin rounds: error < 4^-40 = 2^-80.
  return mpz_probab_prime_p(v.get_mpz_t(), 40) > 0;
}

}  // namespace

PublicKey::PublicKey(mpz_class n)
    : n_(std::move(n)), n2_(n_ * n_), half_(n_ / 2), fingerprint_(fingerprint_of(n_)) {}

size_t PublicKey::bits() const { return mpz_sizeinbase(n_.get_mpz_t(), 2); }

mpz_class PublicKey::encode(const mpz_class& v) const {
  mpz_class m = v % n_;
  if (m < 0) m += n_;
  return m;
}

mpz_class PublicKey::decode(const mpz_class& m) const { return m > half_ ? mpz_class(m - n_) : m; }

Ciphertext PublicKey::encrypt(const mpz_class& m, BigRng& rng) const {
  if (m < 0 || m >= n_) throw ArgumentError("plaintext outside [0, N)");
  mpz_class r = rng.unit_mod(n_);
  mpz_class c = ((1 + m * n_) % n2_) * powm(r, n_, n2_) % n2_;
  return {std::move(c), fingerprint_};
}

Ciphertext PublicKey::encrypt_signed(int64_t v, BigRng& rng) const {
  mpz_class mv(static_cast<long>(v));
  if (abs(mv) > half_) throw ArgumentError("signed plaintext does not fit the key");
  return encrypt(encode(mv), rng);
}

void PublicKey::check(const Ciphertext& c) const {
  if (c.key_fingerprint != fingerprint_) throw ProtocolError("ciphertext under a different key");
  if (c.value < 0 || c.value >= n2_) throw ProtocolError("ciphertext out of range");
}

PrivateKey::PrivateKey(const mpz_class& p, const mpz_class& q) : pk_(p * q) {
  mpz_class pm1 = p - 1, qm1 = q - 1;
  mpz_lcm(lambda_.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
  if (mpz_invert(mu_.get_mpz_t(), lambda_.get_mpz_t(), pk_.n().get_mpz_t()) == 0)
    throw ArgumentError("lambda not invertible mod N");
  p_ = p;
  q_ = q;
  p2_ = p * p;
  q2_ = q * q;
  // h_p = L_p(g^(p-1) mod p^2)^-1 mod p, with g = N + 1
  auto h = [&](const mpz_class& pr, const mpz_class& pr2) {
    mpz_class u = powm(pk_.n() + 1, pr - 1, pr2);
    mpz_class l = (u - 1) / pr, inv;
    if (mpz_invert(inv.get_mpz_t(), l.get_mpz_t(), pr.get_mpz_t()) == 0)
      throw ArgumentError("degenerate prime for CRT decryption");
    return inv;
  };
  hp_ = h(p_, p2_);
  hq_ = h(q_, q2_);
  mpz_invert(q_inv_p_.get_mpz_t(), q_.get_mpz_t(), p_.get_mpz_t());
}

mpz_class PrivateKey::decrypt(const Ciphertext& c) const {
  pk_.check(c);
  mpz_class mp = (powm(c.value % p2_, p_ - 1, p2_) - 1) / p_ * hp_ % p_;
  mpz_class mq = (powm(c.value % q2_, q_ - 1, q2_) - 1) / q_ * hq_ % q_;
  mpz_class diff = (mp - mq) * q_inv_p_ % p_;
  if (diff < 0) diff += p_;
  return mq + diff * q_;
}

mpz_class PrivateKey::decrypt_signed(const Ciphertext& c) const { return pk_.decode(decrypt(c)); }

KeyPair keypair_from_primes(const mpz_class& p, const mpz_class& q) {
  if (p == q) throw ArgumentError("p and q must differ");
  if (!is_probable_prime(p) || !is_probable_prime(q)) throw ArgumentError("p and q must be prime");
  mpz_class n = p * q, phi = (p - 1) * (q - 1), g;
  mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
  if (g != 1) throw ArgumentError("gcd(N, phi(N)) != 1");
  PrivateKey sk(p, q);
  return {sk.public_key(), sk};
}

KeyPair keygen(unsigned bits, BigRng& rng) {
  if (bits < 16) throw ArgumentError("key length must be >= 16 bits");
  const unsigned p_bits = bits / 2, q_bits = bits - p_bits;
  while (true) {
    mpz_class p, q;
    for (auto [prime, pb] : {std::pair{&p, p_bits}, std::pair{&q, q_bits}}) {
      // Top two bits set so that the product has exactly `bits` bits.
      mpz_class cand = rng.exact_bits(pb);
      mpz_setbit(cand.get_mpz_t(), pb - 2);
      mpz_nextprime(prime->get_mpz_t(), cand.get_mpz_t());
    }
    if (p == q || !is_probable_prime(p) || !is_probable_prime(q)) continue;
    mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != bits) continue;
    mpz_class phi = (p - 1) * (q - 1), g;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
    if (g != 1) continue;
    return keypair_from_primes(p, q);
  }
}

Ciphertext hom_add(const Ciphertext& a, const Ciphertext& b, const PublicKey& pk) {
  pk.check(a);
  pk.check(b);
  return {a.value * b.value % pk.n_squared(), pk.fingerprint()};
}

Ciphertext hom_neg(const Ciphertext& a, const PublicKey& pk) {
  pk.check(a);
  return {powm(a.value, pk.n() - 1, pk.n_squared()), pk.fingerprint()};
}

Ciphertext hom_scalar_mul(const Ciphertext& a, const mpz_class& k, const PublicKey& pk) {
  pk.check(a);
  return {powm(a.value, pk.encode(k), pk.n_squared()), pk.fingerprint()};
}

std::vector<uint8_t> serialize(const mpz_class& v) {
  if (v < 0) throw ArgumentError("cannot serialize a negative value");
  size_t count = 0;
  std::vector<uint8_t> magnitude((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  if (v != 0) mpz_export(magnitude.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  magnitude.resize(count);
  std::vector<uint8_t> out(4 + count);
  const auto len = static_cast<uint32_t>(count);
  out[0] = len >> 24;
  out[1] = (len >> 16) & 0xff;
  out[2] = (len >> 8) & 0xff;
  out[3] = len & 0xff;
  std::copy(magnitude.begin(), magnitude.end(), out.begin() + 4);
  return out;
}

mpz_class deserialize(std::span<const uint8_t> bytes, size_t& offset) {
  if (offset + 4 > bytes.size()) throw ParseError("truncated length prefix");
  const uint32_t len = (uint32_t{bytes[offset]} << 24) | (uint32_t{bytes[offset + 1]} << 16) |
                       (uint32_t{bytes[offset + 2]} << 8) | uint32_t{bytes[offset + 3]};
  offset += 4;
  if (offset + len > bytes.size()) throw ParseError("truncated value");
  mpz_class v;
  if (len) mpz_import(v.get_mpz_t(), len, 1, 1, 1, 0, bytes.data() + offset);
  offset += len;
  return v;
}

}  // namespace kswitch
