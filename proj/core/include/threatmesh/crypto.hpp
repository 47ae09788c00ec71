#pragma once

#include <cstdint>

#include "threatmesh/bytes.hpp"

namespace threatmesh::crypto {

// Idempotent libsodium initialization; every public entry point calls it.
void init();

Digest sha256(const std::uint8_t* data, std::size_t len);
Digest sha256(const Bytes& data);
Digest sha256(std::string_view data);

// Deterministic random stream: every draw derives a fresh block seed from
// (seed, counter), so the stream is reproducible and resumable from the
// persisted (seed, counter) pair alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(const Digest& seed, std::uint64_t counter);

  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  // Inclusive range.
  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi);
  bool bernoulli(double p);

  const Digest& seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  Digest seed_;
  std::uint64_t counter_ = 0;
};

constexpr std::size_t kSignPublicKeyBytes = 32;
constexpr std::size_t kSignSecretKeyBytes = 64;
constexpr std::size_t kSignatureBytes = 64;

struct SigningKeyPair {
  Bytes public_key;  // 32 bytes, Ed25519
  Bytes secret_key;  // 64 bytes
};

SigningKeyPair generate_signing_keypair(Rng& rng);
Bytes sign(const Bytes& secret_key, const Bytes& message);
bool verify_signature(const Bytes& public_key, const Bytes& message, const Bytes& signature);

// Authenticated symmetric cipher (XChaCha20-Poly1305).
constexpr std::size_t kAeadKeyBytes = 32;
constexpr std::size_t kAeadNonceBytes = 24;

Bytes aead_encrypt(const Bytes& key, const Bytes& nonce, const Bytes& plaintext);
// Throws ErrorCode::integrity_mismatch when authentication fails.
Bytes aead_decrypt(const Bytes& key, const Bytes& nonce, const Bytes& ciphertext);

// Sealed box to an Ed25519 identity: ephemeral X25519 key agreement plus an
// authenticated cipher, one ephemeral key per message. The ephemeral key is
// drawn from the caller's Rng so sealed bytes are reproducible run-to-run.
// Output layout matches libsodium sealed boxes.
constexpr std::size_t kSealOverheadBytes = 32 + 16;

Bytes seal_to(const Bytes& recipient_ed25519_pk, const Bytes& plaintext, Rng& rng);
// Throws ErrorCode::integrity_mismatch when the box does not open.
Bytes unseal(const Bytes& recipient_ed25519_pk, const Bytes& recipient_ed25519_sk,
             const Bytes& sealed);

}  // namespace threatmesh::crypto
