#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <gmpxx.h>

#include "kswitch/common.h"

namespace kswitch {

// Deterministic bignum randomness (Mersenne twister inside GMP).
class BigRng {
 public:
  explicit BigRng(uint64_t seed);

  // Uniform in [0, bound).
  mpz_class below(const mpz_class& bound);
  // Uniform in [1, n) and coprime to n.
  mpz_class unit_mod(const mpz_class& n);
  // Uniform with exactly `bits` bits (top bit set).
  mpz_class exact_bits(unsigned bits);

 private:
  gmp_randclass state_;
};

struct Ciphertext {
  mpz_class value;
  uint64_t key_fingerprint = 0;
};

// Paillier public key with g = N + 1.
class PublicKey {
 public:
  PublicKey() = default;
  explicit PublicKey(mpz_class n);

  const mpz_class& n() const { return n_; }
  const mpz_class& n_squared() const { return n2_; }
  uint64_t fingerprint() const { return fingerprint_; }
  size_t bits() const;

  // Signed plaintexts v are represented as v mod N; decoding maps values
  // above N/2 back to negatives.
  mpz_class encode(const mpz_class& v) const;
  mpz_class decode(const mpz_class& m) const;

  // c = (1 + m N) r^N mod N^2 with fresh r coprime to N. Requires m in [0, N).
  Ciphertext encrypt(const mpz_class& m, BigRng& rng) const;
  Ciphertext encrypt_signed(int64_t v, BigRng& rng) const;

  // Throws ProtocolError unless c was produced under this key and lies in
  // [0, N^2).
  void check(const Ciphertext& c) const;

  friend bool operator==(const PublicKey& a, const PublicKey& b) { return a.n_ == b.n_; }

 private:
  mpz_class n_;
  mpz_class n2_;
  mpz_class half_;
  uint64_t fingerprint_ = 0;
};

class PrivateKey {
 public:
  PrivateKey() = default;
  PrivateKey(const mpz_class& p, const mpz_class& q);

  const mpz_class& lambda() const { return lambda_; }
  const mpz_class& mu() const { return mu_; }

  // Raw plaintext in [0, N). Ciphertexts tagged with another key's
  // fingerprint are rejected with ProtocolError; an untagged foreign
  // ciphertext would decrypt to garbage.
  mpz_class decrypt(const Ciphertext& c) const;
  mpz_class decrypt_signed(const Ciphertext& c) const;

  const PublicKey& public_key() const { return pk_; }

 private:
  PublicKey pk_;
  mpz_class lambda_;
  mpz_class mu_;
  // CRT form of decryption, same result as L(c^lambda mod N^2) * mu mod N.
  mpz_class p_, q_, p2_, q2_, hp_, hq_, q_inv_p_;
};

struct KeyPair {
  PublicKey pk;
  PrivateKey sk;
};

// Probabilistic primes with Miller-Rabin error below 2^-80. N has exactly
// `bits` bits. bits >= 16.
KeyPair keygen(unsigned bits, BigRng& rng);
// Throws ArgumentError unless p != q are prime and gcd(N, (p-1)(q-1)) = 1.
KeyPair keypair_from_primes(const mpz_class& p, const mpz_class& q);

// E(a) * E(b) mod N^2 decrypts to a + b.
Ciphertext hom_add(const Ciphertext& a, const Ciphertext& b, const PublicKey& pk);
// E(a)^(N-1) mod N^2 decrypts to -a.
Ciphertext hom_neg(const Ciphertext& a, const PublicKey& pk);
// E(a)^k mod N^2 decrypts to k * a.
Ciphertext hom_scalar_mul(const Ciphertext& a, const mpz_class& k, const PublicKey& pk);

// Big-endian magnitude with a 4-byte big-endian length prefix.
std::vector<uint8_t> serialize(const mpz_class& v);
// Parses one serialized value starting at `offset`, advancing it. Throws
// ParseError on truncation.
mpz_class deserialize(std::span<const uint8_t> bytes, size_t& offset);

}  // namespace kswitch
