#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "threatmesh/cas.hpp"
#include "threatmesh/ledger.hpp"

namespace threatmesh::threatshare {

constexpr const char* kContractName = "threatshare";
constexpr const char* kGrantsCollection = "grants";

std::string share_key(const std::string& cid_text);
std::string grant_key(const std::string& cid_text, const std::string& recipient_did);
std::string did_key(const std::string& did);

// The on-ledger artifact binding a CID to its sender. The public part lives
// in world state under share/<cid>; per-recipient wrapped keys live in the
// grants private collection.
struct ShareRecord {
  std::string cid;  // text form
  Digest content_hash{};     // sha256 of the plaintext canonical layer JSON
  std::string sender_did;
  Bytes sender_signature;    // over (cid, content_hash)
  std::string threat_name;
  std::uint64_t created_at = 0;
  bool erased = false;
  std::vector<std::string> recipients;

  Bytes signing_bytes() const;
  Bytes encode() const;
  static ShareRecord decode(const Bytes& bytes);
  nlohmann::json to_json() const;  // audit rendering
};

struct GrantEntry {
  std::string recipient_did;
  Bytes wrapped_key;
};

Bytes encode_grants(const std::vector<GrantEntry>& grants);
std::vector<GrantEntry> decode_grants(const Bytes& bytes);

// Chaincode for the sharing workflow: publish_share, grant_access,
// revoke_access, record_erasure.
class ThreatShareContract : public ledger::Contract {
 public:
  std::string name() const override { return kContractName; }
  void execute(ledger::TxContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override;

 private:
  void publish_share(ledger::TxContext& ctx, const std::vector<Bytes>& args);
  void grant_access(ledger::TxContext& ctx, const std::vector<Bytes>& args);
  void revoke_access(ledger::TxContext& ctx, const std::vector<Bytes>& args);
  void record_erasure(ledger::TxContext& ctx, const std::vector<Bytes>& args);

  ShareRecord load_sender_checked(ledger::TxContext& ctx, const std::string& cid_text);
};

// Anchors DID documents: register(did, cid) writes did/<did> -> cid text,
// accepted only from the DID's own controller.
class DidRegistryContract : public ledger::Contract {
 public:
  std::string name() const override { return "didregistry"; }
  void execute(ledger::TxContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override;
};

}  // namespace threatmesh::threatshare
