#include "threatmesh/threatshare.hpp"

#include <algorithm>

namespace threatmesh::threatshare {

using nlohmann::json;

std::string share_key(const std::string& cid_text) { return "share/" + cid_text; }

std::string grant_key(const std::string& cid_text, const std::string& recipient_did) {
  return "grant/" + cid_text + "/" + recipient_did;
}

std::string did_key(const std::string& did) { return "did/" + did; }

Bytes ShareRecord::signing_bytes() const {
  ByteWriter w;
  w.str("threatmesh.share.v1");
  w.raw(cas::Cid::parse(cid).encode());
  w.raw(content_hash);
  return w.take();
}

Bytes ShareRecord::encode() const {
  ByteWriter w;
  w.str(cid);
  w.raw(content_hash);
  w.str(sender_did);
  w.var_bytes(sender_signature);
  w.str(threat_name);
  w.u64(created_at);
  w.u8(erased ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(recipients.size()));
  for (const std::string& did : recipients) w.str(did);
  return w.take();
}

ShareRecord ShareRecord::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  ShareRecord record;
  record.cid = r.str();
  record.content_hash = r.digest32();
  record.sender_did = r.str();
  record.sender_signature = r.var_bytes();
  record.threat_name = r.str();
  record.created_at = r.u64();
  record.erased = r.u8() == 1;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) record.recipients.push_back(r.str());
  r.expect_end();
  return record;
}

json ShareRecord::to_json() const {
  json j;
  j["cid"] = cid;
  j["content_hash"] = hex_encode(content_hash);
  j["sender_did"] = sender_did;
  j["sender_signature"] = hex_encode(sender_signature);
  j["threat_name"] = threat_name;
  j["created_at"] = created_at;
  j["erased"] = erased;
  j["recipients"] = recipients;
  return j;
}

Bytes encode_grants(const std::vector<GrantEntry>& grants) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(grants.size()));
  for (const GrantEntry& g : grants) {
    w.str(g.recipient_did);
    w.var_bytes(g.wrapped_key);
  }
  return w.take();
}

std::vector<GrantEntry> decode_grants(const Bytes& bytes) {
  ByteReader r(bytes);
  std::vector<GrantEntry> grants;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    GrantEntry g;
    g.recipient_did = r.str();
    g.wrapped_key = r.var_bytes();
    grants.push_back(std::move(g));
  }
  r.expect_end();
  return grants;
}

void ThreatShareContract::execute(ledger::TxContext& ctx, const std::string& operation,
                                  const std::vector<Bytes>& args) {
  if (operation == "publish_share") {
    publish_share(ctx, args);
  } else if (operation == "grant_access") {
    grant_access(ctx, args);
  } else if (operation == "revoke_access") {
    revoke_access(ctx, args);
  } else if (operation == "record_erasure") {
    record_erasure(ctx, args);
  } else {
    throw Error(ErrorCode::contract_error, "unknown operation " + operation);
  }
}

void ThreatShareContract::publish_share(ledger::TxContext& ctx, const std::vector<Bytes>& args) {
  if (args.size() != 2) {
    throw Error(ErrorCode::contract_error, "publish_share expects (record, grants)");
  }
  const ShareRecord record = ShareRecord::decode(args[0]);
  const std::vector<GrantEntry> grants = decode_grants(args[1]);

  const std::string creator_did = identity::did_for(ctx.creator().public_key);
  if (creator_did != record.sender_did) {
    throw Error(ErrorCode::bad_signature, "sender_did does not match the proposal creator");
  }
  if (!crypto::verify_signature(ctx.creator().public_key, record.signing_bytes(),
                                record.sender_signature)) {
    throw Error(ErrorCode::bad_signature, "share record signature does not verify");
  }
  if (ctx.get_state(share_key(record.cid))) {
    throw Error(ErrorCode::already_shared, record.cid);
  }
  if (record.erased) {
    throw Error(ErrorCode::contract_error, "cannot publish an erased record");
  }

  ctx.put_state(share_key(record.cid), record.encode());
  for (const GrantEntry& g : grants) {
    ctx.put_private(kGrantsCollection, grant_key(record.cid, g.recipient_did), g.wrapped_key);
  }
}

ShareRecord ThreatShareContract::load_sender_checked(ledger::TxContext& ctx,
                                                     const std::string& cid_text) {
  const auto bytes = ctx.get_state(share_key(cid_text));
  if (!bytes) {
    throw Error(ErrorCode::no_such_share, cid_text);
  }
  ShareRecord record = ShareRecord::decode(*bytes);
  if (identity::did_for(ctx.creator().public_key) != record.sender_did) {
    throw Error(ErrorCode::not_sender, "only the original sender may do this");
  }
  return record;
}

void ThreatShareContract::grant_access(ledger::TxContext& ctx, const std::vector<Bytes>& args) {
  if (args.size() != 3) {
    throw Error(ErrorCode::contract_error,
                "grant_access expects (cid, recipient_did, wrapped_key)");
  }
  const std::string cid_text = to_string(args[0]);
  const std::string recipient = to_string(args[1]);
  ShareRecord record = load_sender_checked(ctx, cid_text);

  if (std::find(record.recipients.begin(), record.recipients.end(), recipient) ==
      record.recipients.end()) {
    record.recipients.push_back(recipient);
  }
  ctx.put_state(share_key(cid_text), record.encode());
  ctx.put_private(kGrantsCollection, grant_key(cid_text, recipient), args[2]);
}

void ThreatShareContract::revoke_access(ledger::TxContext& ctx, const std::vector<Bytes>& args) {
  if (args.size() != 2) {
    throw Error(ErrorCode::contract_error, "revoke_access expects (cid, recipient_did)");
  }
  const std::string cid_text = to_string(args[0]);
  const std::string recipient = to_string(args[1]);
  ShareRecord record = load_sender_checked(ctx, cid_text);

  record.recipients.erase(
      std::remove(record.recipients.begin(), record.recipients.end(), recipient),
      record.recipients.end());
  ctx.put_state(share_key(cid_text), record.encode());
  ctx.delete_private(kGrantsCollection, grant_key(cid_text, recipient));
}

void ThreatShareContract::record_erasure(ledger::TxContext& ctx, const std::vector<Bytes>& args) {
  if (args.size() != 1) {
    throw Error(ErrorCode::contract_error, "record_erasure expects (cid)");
  }
  const std::string cid_text = to_string(args[0]);
  ShareRecord record = load_sender_checked(ctx, cid_text);
  record.erased = true;  // the record stays on-ledger for audit
  ctx.put_state(share_key(cid_text), record.encode());
}

void DidRegistryContract::execute(ledger::TxContext& ctx, const std::string& operation,
                                  const std::vector<Bytes>& args) {
  if (operation != "register") {
    throw Error(ErrorCode::contract_error, "unknown operation " + operation);
  }
  if (args.size() != 2) {
    throw Error(ErrorCode::contract_error, "register expects (did, cid)");
  }
  const std::string did = to_string(args[0]);
  if (identity::did_for(ctx.creator().public_key) != did) {
    throw Error(ErrorCode::access_denied, "a DID may only be registered by its controller");
  }
  cas::Cid::parse(to_string(args[1]));  // must be well-formed
  ctx.get_state(did_key(did));          // versioned read; re-registration conflicts out
  ctx.put_state(did_key(did), args[1]);
}

}  // namespace threatmesh::threatshare
