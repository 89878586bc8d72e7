#include "kswitch/secure_compute.h"

#include <cmath>

namespace kswitch {

Ciphertext ProxyB::respond(const MulRequest& req) {
  const PublicKey& pk = keys_.pk;
  pk.check(req.blinded_a);
  pk.check(req.blinded_b);
  mpz_class x = keys_.sk.decrypt(req.blinded_a);
  mpz_class y = keys_.sk.decrypt(req.blinded_b);
  view_.push_back(x);
  view_.push_back(y);
  return pk.encrypt(x * y % pk.n(), rng_);
}

SecMulSession::SecMulSession(ProxyA& a, Ciphertext ea, Ciphertext eb)
    : a_(a), ea_(std::move(ea)), eb_(std::move(eb)) {
  a_.pk().check(ea_);
  a_.pk().check(eb_);
}

ProxyB::MulRequest SecMulSession::request() {
  if (stage_ != Stage::kFresh) throw ProtocolError("SecMul request already sent");
  const PublicKey& pk = a_.pk();
  r_a_ = a_.rng().below(pk.n());
  r_b_ = a_.rng().below(pk.n());
  stage_ = Stage::kRequested;
  return {hom_add(ea_, pk.encrypt(r_a_, a_.rng()), pk),
          hom_add(eb_, pk.encrypt(r_b_, a_.rng()), pk)};
}

Ciphertext SecMulSession::finish(const Ciphertext& product_of_blinded) {
  if (stage_ != Stage::kRequested) throw ProtocolError("SecMul response out of order");
  const PublicKey& pk = a_.pk();
  pk.check(product_of_blinded);
  stage_ = Stage::kDone;
  // (a + r_a)(b + r_b) - r_b a - r_a b - r_a r_b = ab
  Ciphertext out = product_of_blinded;
  out = hom_add(out, hom_scalar_mul(ea_, -r_b_, pk), pk);
  out = hom_add(out, hom_scalar_mul(eb_, -r_a_, pk), pk);
  out = hom_add(out, pk.encrypt(pk.encode(-r_a_ * r_b_), a_.rng()), pk);
  return out;
}

Ciphertext sec_mul(ProxyA& a, ProxyB& b, const Ciphertext& ea, const Ciphertext& eb,
                   const ProxyWire& wire) {
  if (!(a.pk() == b.pk())) throw ProtocolError("proxies hold different keys");
  SecMulSession session(a, ea, eb);
  ProxyB::MulRequest req = session.request();
  if (wire) {
    wire(ProxyRole::kA, ProxyRole::kB, req.blinded_a);
    wire(ProxyRole::kA, ProxyRole::kB, req.blinded_b);
  }
  Ciphertext reply = b.respond(req);
  if (wire) wire(ProxyRole::kB, ProxyRole::kA, reply);
  return session.finish(reply);
}

EncryptedLocation encrypt_location(double x, double y, const PublicKey& pk, BigRng& rng) {
  return {pk.encrypt_signed(std::llround(x), rng), pk.encrypt_signed(std::llround(y), rng)};
}

Ciphertext secure_distance(ProxyA& a, ProxyB& b, const EncryptedLocation& ew,
                           const EncryptedLocation& et, const ProxyWire& wire) {
  const PublicKey& pk = a.pk();
  Ciphertext dx = hom_add(ew.x, hom_neg(et.x, pk), pk);
  Ciphertext dy = hom_add(ew.y, hom_neg(et.y, pk), pk);
  Ciphertext sq_x = sec_mul(a, b, dx, dx, wire);
  Ciphertext sq_y = sec_mul(a, b, dy, dy, wire);
  return hom_add(sq_x, sq_y, pk);
}

}  // namespace kswitch
