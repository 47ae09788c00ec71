#include "threatmesh/protocol.hpp"

namespace threatmesh::protocol {

using threatshare::GrantEntry;
using threatshare::ShareRecord;

Bytes EncryptedObject::encode() const {
  ByteWriter w;
  w.str("threatmesh.encobj.v1");
  w.var_bytes(ciphertext);
  w.var_bytes(nonce);
  w.var_bytes(sender_signature);
  return w.take();
}

EncryptedObject EncryptedObject::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  if (r.str() != "threatmesh.encobj.v1") {
    throw Error(ErrorCode::malformed_encoding, "bad encrypted object tag");
  }
  EncryptedObject obj;
  obj.ciphertext = r.var_bytes();
  obj.nonce = r.var_bytes();
  obj.sender_signature = r.var_bytes();
  r.expect_end();
  return obj;
}

Bytes plaintext_signature_bytes(const Digest& plaintext_hash) {
  ByteWriter w;
  w.str("threatmesh.plaintext.v1");
  w.raw(plaintext_hash);
  return w.take();
}

namespace {

void require_valid_identity(sim::Simulation& sim, const sim::Actor& actor) {
  const auto check = sim.msp().verify(actor.cert, sim.now());
  if (!check.accepted()) {
    throw Error(ErrorCode::identity_rejected, check.reason());
  }
}

identity::DidDocument resolve_did_impl(sim::Simulation& sim, sim::Actor& reader,
                                       const std::string& did) {
  ledger::Peer& peer = sim.any_peer_of(reader.org);
  const auto cid_bytes = peer.query(reader.cert, threatshare::did_key(did), sim.now());
  if (!cid_bytes) {
    throw Error(ErrorCode::unresolvable_recipient, did);
  }
  const cas::Cid cid = cas::Cid::parse(to_string(*cid_bytes));
  const Bytes doc_bytes = reader.cas_node->get_bytes(cid);
  identity::DidDocument doc = identity::DidDocument::from_json(to_string(doc_bytes));
  if (!doc.verify()) {
    throw Error(ErrorCode::signature_mismatch, "DID document signature does not verify");
  }
  if (doc.did != did) {
    throw Error(ErrorCode::signature_mismatch, "DID document does not match " + did);
  }
  return doc;
}

struct PreparedShare {
  ShareRecord record;
  std::vector<GrantEntry> grants;
  cas::Cid cid;
  Bytes content_key;
};

PreparedShare prepare_share(sim::Simulation& sim, sim::Actor& sender,
                            const attck::Layer& layer,
                            const std::vector<std::string>& recipient_dids) {
  require_valid_identity(sim, sender);

  // Recipients must resolve before anything is stored.
  std::vector<identity::DidDocument> recipient_docs;
  recipient_docs.reserve(recipient_dids.size());
  for (const std::string& did : recipient_dids) {
    recipient_docs.push_back(resolve_did_impl(sim, sender, did));
  }

  const Bytes plaintext = to_bytes(attck::serialize_layer(layer));
  const Digest content_hash = crypto::sha256(plaintext);

  PreparedShare prepared;
  prepared.content_key = sim.rng().bytes(crypto::kAeadKeyBytes);
  const Bytes nonce = sim.rng().bytes(crypto::kAeadNonceBytes);

  EncryptedObject obj;
  obj.ciphertext = crypto::aead_encrypt(prepared.content_key, nonce, plaintext);
  obj.nonce = nonce;
  obj.sender_signature =
      crypto::sign(sender.keys.secret_key, plaintext_signature_bytes(content_hash));

  prepared.cid = sender.cas_node->put_bytes(obj.encode(), sender.cert.fingerprint());

  prepared.record.cid = prepared.cid.to_string();
  prepared.record.content_hash = content_hash;
  prepared.record.sender_did = sender.did;
  prepared.record.threat_name = layer.name;
  prepared.record.created_at = sim.now();
  prepared.record.recipients = recipient_dids;
  prepared.record.sender_signature =
      crypto::sign(sender.keys.secret_key, prepared.record.signing_bytes());

  for (std::size_t i = 0; i < recipient_dids.size(); ++i) {
    GrantEntry grant;
    grant.recipient_did = recipient_dids[i];
    grant.wrapped_key = crypto::seal_to(recipient_docs[i].verification_keys.front(),
                                        prepared.content_key, sim.rng());
    prepared.grants.push_back(std::move(grant));
  }
  return prepared;
}

}  // namespace

ShareOutcome begin_share_threat(sim::Simulation& sim, const std::string& actor_name,
                                const attck::Layer& layer,
                                const std::vector<std::string>& recipient_dids) {
  sim::Actor& sender = sim.actor(actor_name);
  PreparedShare prepared = prepare_share(sim, sender, layer, recipient_dids);

  const Digest txid = sim.begin_proposal(
      actor_name, threatshare::kContractName, "publish_share",
      {prepared.record.encode(), threatshare::encode_grants(prepared.grants)},
      sim.default_endorse_orgs(true));
  sender.content_keys[prepared.record.cid] = prepared.content_key;
  return {prepared.cid, txid};
}

ShareOutcome share_threat(sim::Simulation& sim, const std::string& actor_name,
                          const attck::Layer& layer,
                          const std::vector<std::string>& recipient_dids) {
  const ShareOutcome outcome = begin_share_threat(sim, actor_name, layer, recipient_dids);
  const ledger::TxFlag flag = sim.run_tx(outcome.txid);
  if (flag != ledger::TxFlag::valid) {
    throw Error(ErrorCode::contract_error,
                std::string("share transaction flagged ") + ledger::tx_flag_name(flag));
  }
  return outcome;
}

attck::Layer fetch_threat(sim::Simulation& sim, const std::string& actor_name,
                          const cas::Cid& cid) {
  sim::Actor& recipient = sim.actor(actor_name);
  require_valid_identity(sim, recipient);

  ledger::Peer& peer = sim.any_peer_of(recipient.org);
  const auto record_bytes =
      peer.query(recipient.cert, threatshare::share_key(cid.to_string()), sim.now());
  if (!record_bytes) {
    throw Error(ErrorCode::not_found, "no share record for " + cid.to_string());
  }
  const ShareRecord record = ShareRecord::decode(*record_bytes);
  if (record.erased) {
    throw Error(ErrorCode::erased, cid.to_string());
  }

  // Authorization gate comes before any block exchange.
  const auto wrapped = peer.query_private(
      recipient.cert, threatshare::kGrantsCollection,
      threatshare::grant_key(cid.to_string(), recipient.did), sim.now());
  if (!wrapped) {
    throw Error(ErrorCode::access_denied, "no grant for " + recipient.did);
  }

  const identity::DidDocument sender_doc = resolve_did_impl(sim, recipient, record.sender_did);
  const Bytes& sender_key = sender_doc.verification_keys.front();
  if (!crypto::verify_signature(sender_key, record.signing_bytes(), record.sender_signature)) {
    throw Error(ErrorCode::signature_mismatch, "share record signature does not verify");
  }

  const Bytes obj_bytes = recipient.cas_node->get_bytes(cid);
  const EncryptedObject obj = EncryptedObject::decode(obj_bytes);

  const Bytes content_key =
      crypto::unseal(recipient.cert.public_key, recipient.keys.secret_key, *wrapped);
  const Bytes plaintext = crypto::aead_decrypt(content_key, obj.nonce, obj.ciphertext);

  const Digest plaintext_hash = crypto::sha256(plaintext);
  if (plaintext_hash != record.content_hash) {
    throw Error(ErrorCode::integrity_mismatch, "plaintext hash differs from the share record");
  }
  if (!crypto::verify_signature(sender_key, plaintext_signature_bytes(plaintext_hash),
                                obj.sender_signature)) {
    throw Error(ErrorCode::signature_mismatch, "plaintext signature does not verify");
  }
  return attck::parse_layer(to_string(plaintext));
}

attck::Layer compare_shared(sim::Simulation& sim, const std::string& actor_name,
                            const cas::Cid& cid_a, const cas::Cid& cid_b,
                            const attck::OverlapPalette& palette) {
  const attck::Layer a = fetch_threat(sim, actor_name, cid_a);
  const attck::Layer b = fetch_threat(sim, actor_name, cid_b);
  return attck::overlap(a, b, palette);
}

Digest grant_access(sim::Simulation& sim, const std::string& actor_name, const cas::Cid& cid,
                    const std::string& recipient_did) {
  sim::Actor& sender = sim.actor(actor_name);
  require_valid_identity(sim, sender);
  const auto key_it = sender.content_keys.find(cid.to_string());
  if (key_it == sender.content_keys.end()) {
    throw Error(ErrorCode::not_sender, actor_name + " holds no content key for " +
                                           cid.to_string());
  }
  const identity::DidDocument doc = resolve_did_impl(sim, sender, recipient_did);
  const Bytes wrapped =
      crypto::seal_to(doc.verification_keys.front(), key_it->second, sim.rng());

  const Digest txid = sim.begin_proposal(
      actor_name, threatshare::kContractName, "grant_access",
      {to_bytes(cid.to_string()), to_bytes(recipient_did), wrapped},
      sim.default_endorse_orgs(true));
  const ledger::TxFlag flag = sim.run_tx(txid);
  if (flag != ledger::TxFlag::valid) {
    throw Error(ErrorCode::contract_error,
                std::string("grant transaction flagged ") + ledger::tx_flag_name(flag));
  }
  return txid;
}

Digest revoke_access(sim::Simulation& sim, const std::string& actor_name, const cas::Cid& cid,
                     const std::string& recipient_did) {
  sim::Actor& sender = sim.actor(actor_name);
  require_valid_identity(sim, sender);
  const Digest txid = sim.begin_proposal(
      actor_name, threatshare::kContractName, "revoke_access",
      {to_bytes(cid.to_string()), to_bytes(recipient_did)}, sim.default_endorse_orgs(true));
  const ledger::TxFlag flag = sim.run_tx(txid);
  if (flag != ledger::TxFlag::valid) {
    throw Error(ErrorCode::contract_error,
                std::string("revoke transaction flagged ") + ledger::tx_flag_name(flag));
  }
  return txid;
}

EraseOutcome erase_share(sim::Simulation& sim, const std::string& actor_name,
                         const cas::Cid& cid) {
  sim::Actor& actor = sim.actor(actor_name);
  require_valid_identity(sim, actor);

  // The audit record commits first; a non-sender fails here before any
  // content is touched.
  const Digest txid =
      sim.begin_proposal(actor_name, threatshare::kContractName, "record_erasure",
                         {to_bytes(cid.to_string())}, sim.default_endorse_orgs(false));
  const ledger::TxFlag flag = sim.run_tx(txid);
  if (flag != ledger::TxFlag::valid) {
    throw Error(ErrorCode::contract_error,
                std::string("erasure transaction flagged ") + ledger::tx_flag_name(flag));
  }

  const Bytes proof =
      crypto::sign(actor.keys.secret_key, cas::erase_request_bytes(cid));
  EraseOutcome outcome;
  outcome.txid = txid;
  outcome.receipt = actor.cas_node->erase(cid, actor.cert, proof);
  sim.net().run_until_idle();
  return outcome;
}

identity::DidDocument resolve_did(sim::Simulation& sim, const std::string& reader_actor,
                                  const std::string& did) {
  sim::Actor& reader = sim.actor(reader_actor);
  require_valid_identity(sim, reader);
  return resolve_did_impl(sim, reader, did);
}

threatshare::ShareRecord read_record(sim::Simulation& sim, const std::string& actor_name,
                                     const cas::Cid& cid) {
  sim::Actor& actor = sim.actor(actor_name);
  require_valid_identity(sim, actor);
  ledger::Peer& peer = sim.any_peer_of(actor.org);
  const auto bytes = peer.query(actor.cert, threatshare::share_key(cid.to_string()), sim.now());
  if (!bytes) {
    throw Error(ErrorCode::not_found, "no share record for " + cid.to_string());
  }
  return ShareRecord::decode(*bytes);
}

}  // namespace threatmesh::protocol
