#include "threatmesh/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>

namespace threatmesh::crypto {

namespace {

void check(bool ok, const char* what) {
  if (!ok) {
    throw Error(ErrorCode::integrity_mismatch, what);
  }
}

Bytes ed25519_pk_to_curve(const Bytes& ed_pk) {
  Bytes curve(crypto_scalarmult_curve25519_BYTES);
  if (crypto_sign_ed25519_pk_to_curve25519(curve.data(), ed_pk.data()) != 0) {
    throw Error(ErrorCode::malformed_encoding, "public key not convertible");
  }
  return curve;
}

Bytes ed25519_sk_to_curve(const Bytes& ed_sk) {
  Bytes curve(crypto_scalarmult_curve25519_BYTES);
  if (crypto_sign_ed25519_sk_to_curve25519(curve.data(), ed_sk.data()) != 0) {
    throw Error(ErrorCode::malformed_encoding, "secret key not convertible");
  }
  return curve;
}

}  // namespace

void init() {
  static std::once_flag flag;
  std::call_once(flag, [] {
    if (sodium_init() < 0) {
      throw std::runtime_error("libsodium initialization failed");
    }
  });
}

Digest sha256(const std::uint8_t* data, std::size_t len) {
  init();
  Digest out;
  crypto_hash_sha256(out.data(), data, len);
  return out;
}

Digest sha256(const Bytes& data) { return sha256(data.data(), data.size()); }

Digest sha256(std::string_view data) {
  return sha256(reinterpret_cast<const std::uint8_t*>(data.data()), data.size());
}

Rng::Rng(std::uint64_t seed) {
  init();
  ByteWriter w;
  w.str("threatmesh.rng.v1");
  w.u64(seed);
  seed_ = sha256(w.data());
}

Rng::Rng(const Digest& seed, std::uint64_t counter) : seed_(seed), counter_(counter) {
  init();
}

Bytes Rng::bytes(std::size_t n) {
  ByteWriter w;
  w.raw(seed_);
  w.u64(counter_++);
  const Digest block_seed = sha256(w.data());
  static_assert(sizeof(Digest) == randombytes_SEEDBYTES);
  Bytes out(n);
  if (n > 0) {
    randombytes_buf_deterministic(out.data(), n, block_seed.data());
  }
  return out;
}

std::uint64_t Rng::next_u64() {
  const Bytes b = bytes(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t Rng::uniform(std::uint64_t lo, std::uint64_t hi) {
  if (lo >= hi) return lo;
  const std::uint64_t span = hi - lo + 1;
  return lo + next_u64() % span;
}

bool Rng::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  const double u = static_cast<double>(next_u64() >> 11) * 0x1p-53;
  return u < p;
}

SigningKeyPair generate_signing_keypair(Rng& rng) {
  init();
  const Bytes seed = rng.bytes(crypto_sign_SEEDBYTES);
  SigningKeyPair kp;
  kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
  kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
  crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
  return kp;
}

Bytes sign(const Bytes& secret_key, const Bytes& message) {
  init();
  Bytes sig(crypto_sign_BYTES);
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(),
                       secret_key.data());
  return sig;
}

bool verify_signature(const Bytes& public_key, const Bytes& message, const Bytes& signature) {
  init();
  if (public_key.size() != crypto_sign_PUBLICKEYBYTES ||
      signature.size() != crypto_sign_BYTES) {
    return false;
  }
  return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                     public_key.data()) == 0;
}

Bytes aead_encrypt(const Bytes& key, const Bytes& nonce, const Bytes& plaintext) {
  init();
  check(key.size() == kAeadKeyBytes, "bad aead key size");
  check(nonce.size() == kAeadNonceBytes, "bad aead nonce size");
  Bytes out(plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long clen = 0;
  crypto_aead_xchacha20poly1305_ietf_encrypt(out.data(), &clen, plaintext.data(),
                                             plaintext.size(), nullptr, 0, nullptr,
                                             nonce.data(), key.data());
  out.resize(clen);
  return out;
}

Bytes aead_decrypt(const Bytes& key, const Bytes& nonce, const Bytes& ciphertext) {
  init();
  check(key.size() == kAeadKeyBytes, "bad aead key size");
  check(nonce.size() == kAeadNonceBytes, "bad aead nonce size");
  if (ciphertext.size() < crypto_aead_xchacha20poly1305_ietf_ABYTES) {
    throw Error(ErrorCode::integrity_mismatch, "ciphertext too short");
  }
  Bytes out(ciphertext.size() - crypto_aead_xchacha20poly1305_ietf_ABYTES);
  unsigned long long mlen = 0;
  if (crypto_aead_xchacha20poly1305_ietf_decrypt(out.data(), &mlen, nullptr,
                                                 ciphertext.data(), ciphertext.size(),
                                                 nullptr, 0, nonce.data(),
                                                 key.data()) != 0) {
    throw Error(ErrorCode::integrity_mismatch, "ciphertext authentication failed");
  }
  out.resize(mlen);
  return out;
}

Bytes seal_to(const Bytes& recipient_ed25519_pk, const Bytes& plaintext, Rng& rng) {
  init();
  const Bytes recipient_curve_pk = ed25519_pk_to_curve(recipient_ed25519_pk);

  const Bytes eph_seed = rng.bytes(crypto_box_SEEDBYTES);
  Bytes eph_pk(crypto_box_PUBLICKEYBYTES);
  Bytes eph_sk(crypto_box_SECRETKEYBYTES);
  crypto_box_seed_keypair(eph_pk.data(), eph_sk.data(), eph_seed.data());

  // Same nonce derivation as libsodium sealed boxes: blake2b(eph_pk || rpk).
  Bytes nonce(crypto_box_NONCEBYTES);
  Bytes nonce_input;
  nonce_input.insert(nonce_input.end(), eph_pk.begin(), eph_pk.end());
  nonce_input.insert(nonce_input.end(), recipient_curve_pk.begin(), recipient_curve_pk.end());
  crypto_generichash(nonce.data(), nonce.size(), nonce_input.data(), nonce_input.size(),
                     nullptr, 0);

  Bytes out(eph_pk.size() + plaintext.size() + crypto_box_MACBYTES);
  std::memcpy(out.data(), eph_pk.data(), eph_pk.size());
  if (crypto_box_easy(out.data() + eph_pk.size(), plaintext.data(), plaintext.size(),
                      nonce.data(), recipient_curve_pk.data(), eph_sk.data()) != 0) {
    throw Error(ErrorCode::integrity_mismatch, "seal failed");
  }
  sodium_memzero(eph_sk.data(), eph_sk.size());
  return out;
}

Bytes unseal(const Bytes& recipient_ed25519_pk, const Bytes& recipient_ed25519_sk,
             const Bytes& sealed) {
  init();
  if (sealed.size() < kSealOverheadBytes) {
    throw Error(ErrorCode::integrity_mismatch, "sealed box too short");
  }
  const Bytes curve_pk = ed25519_pk_to_curve(recipient_ed25519_pk);
  Bytes curve_sk = ed25519_sk_to_curve(recipient_ed25519_sk);
  Bytes out(sealed.size() - kSealOverheadBytes);
  const int rc = crypto_box_seal_open(out.data(), sealed.data(), sealed.size(),
                                      curve_pk.data(), curve_sk.data());
  sodium_memzero(curve_sk.data(), curve_sk.size());
  if (rc != 0) {
    throw Error(ErrorCode::integrity_mismatch, "sealed box does not open");
  }
  return out;
}

}  // namespace threatmesh::crypto
