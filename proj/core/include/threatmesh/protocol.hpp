#pragma once

#include <string>
#include <vector>

#include "threatmesh/attck_layers.hpp"
#include "threatmesh/sim.hpp"
#include "threatmesh/threatshare.hpp"

namespace threatmesh::protocol {

// Authenticated hybrid encryption of one canonical layer JSON under a fresh
// content key; the signature covers the plaintext hash so integrity holds
// end-to-end, past decryption.
struct EncryptedObject {
  Bytes ciphertext;
  Bytes nonce;
  Bytes sender_signature;

  Bytes encode() const;
  static EncryptedObject decode(const Bytes& bytes);
};

Bytes plaintext_signature_bytes(const Digest& plaintext_hash);

struct ShareOutcome {
  cas::Cid cid;
  Digest txid;
};

// The full sender-side flow: serialize, encrypt, sign, store in CAS, wrap the
// content key per recipient, and commit the ShareRecord through the ledger
// pipeline. Throws on any stage failure; nothing lands on the ledger when the
// sender's identity is rejected.
ShareOutcome share_threat(sim::Simulation& sim, const std::string& actor_name,
                          const attck::Layer& layer,
                          const std::vector<std::string>& recipient_dids);

// Non-blocking variant used by the bench runner: returns once the endorse
// requests are in flight.
ShareOutcome begin_share_threat(sim::Simulation& sim, const std::string& actor_name,
                                const attck::Layer& layer,
                                const std::vector<std::string>& recipient_dids);

// Recipient-side flow: record lookup, grant check (before any block moves),
// CAS fetch, signature/key/decrypt/hash verification, parse.
attck::Layer fetch_threat(sim::Simulation& sim, const std::string& actor_name,
                          const cas::Cid& cid);

attck::Layer compare_shared(sim::Simulation& sim, const std::string& actor_name,
                            const cas::Cid& cid_a, const cas::Cid& cid_b,
                            const attck::OverlapPalette& palette = {});

Digest grant_access(sim::Simulation& sim, const std::string& actor_name, const cas::Cid& cid,
                    const std::string& recipient_did);
Digest revoke_access(sim::Simulation& sim, const std::string& actor_name, const cas::Cid& cid,
                     const std::string& recipient_did);

struct EraseOutcome {
  Digest txid;
  cas::ErasureReceipt receipt;
};

// Ledger audit record first (sender check), then CAS erasure with notice
// propagation.
EraseOutcome erase_share(sim::Simulation& sim, const std::string& actor_name,
                         const cas::Cid& cid);

identity::DidDocument resolve_did(sim::Simulation& sim, const std::string& reader_actor,
                                  const std::string& did);

threatshare::ShareRecord read_record(sim::Simulation& sim, const std::string& actor_name,
                                     const cas::Cid& cid);

}  // namespace threatmesh::protocol
