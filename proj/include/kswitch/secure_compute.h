#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "kswitch/paillier.h"

namespace kswitch {

enum class ProxyRole { kA, kB };

// Observer for ciphertexts crossing between the two proxies.
using ProxyWire = std::function<void(ProxyRole from, ProxyRole to, const Ciphertext&)>;

// P_a: holds the public key and the operands, never the secret key.
class ProxyA {
 public:
  ProxyA(PublicKey pk, uint64_t seed) : pk_(std::move(pk)), rng_(seed) {}
  const PublicKey& pk() const { return pk_; }
  BigRng& rng() { return rng_; }

 private:
  PublicKey pk_;
  BigRng rng_;
};

// P_b: holds the key pair. Everything it decrypts while serving SecMul is
// recorded in view() so tests can check that it only ever sees blinded
// values.
class ProxyB {
 public:
  ProxyB(KeyPair keys, uint64_t seed) : keys_(std::move(keys)), rng_(seed) {}
  const PublicKey& pk() const { return keys_.pk; }
  const PrivateKey& sk() const { return keys_.sk; }
  BigRng& rng() { return rng_; }

  struct MulRequest {
    Ciphertext blinded_a;  // E(a + r_a)
    Ciphertext blinded_b;  // E(b + r_b)
  };

  // Round 2 of SecMul: decrypt both blinded operands, multiply mod N and
  // return the fresh encryption of the product.
  Ciphertext respond(const MulRequest& req);

  const std::vector<mpz_class>& view() const { return view_; }
  void clear_view() { view_.clear(); }

 private:
  KeyPair keys_;
  BigRng rng_;
  std::vector<mpz_class> view_;
};

// P_a's side of one SecMul run:
//   request():  r_a, r_b uniform in Z_N, send E(a + r_a), E(b + r_b)
//   finish(c):  E(ab) = c * E(a)^(-r_b) * E(b)^(-r_a) * E(-r_a r_b)
// Calling finish before request, or either one twice, is a ProtocolError.
class SecMulSession {
 public:
  SecMulSession(ProxyA& a, Ciphertext ea, Ciphertext eb);

  ProxyB::MulRequest request();
  Ciphertext finish(const Ciphertext& product_of_blinded);

 private:
  enum class Stage { kFresh, kRequested, kDone };
  ProxyA& a_;
  Ciphertext ea_, eb_;
  mpz_class r_a_, r_b_;
  Stage stage_ = Stage::kFresh;
};

// Runs both rounds of SecMul between the proxies; result decrypts to
// decrypt(ea) * decrypt(eb) mod N.
Ciphertext sec_mul(ProxyA& a, ProxyB& b, const Ciphertext& ea, const Ciphertext& eb,
                   const ProxyWire& wire = {});

struct EncryptedLocation {
  Ciphertext x;
  Ciphertext y;
};

// Coordinates rounded to whole meters, then encrypted.
EncryptedLocation encrypt_location(double x, double y, const PublicKey& pk, BigRng& rng);

// E((xw - xt)^2 + (yw - yt)^2): differences via hom_add/hom_neg at P_a,
// squares via SecMul, sum via hom_add.
Ciphertext secure_distance(ProxyA& a, ProxyB& b, const EncryptedLocation& ew,
                           const EncryptedLocation& et, const ProxyWire& wire = {});

}  // namespace kswitch
