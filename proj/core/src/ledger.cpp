#include "threatmesh/ledger.hpp"

#include <algorithm>

namespace threatmesh::ledger {

Bytes Proposal::signing_bytes() const {
  ByteWriter w;
  w.str("threatmesh.proposal.v1");
  w.str(channel);
  w.str(contract);
  w.str(operation);
  w.u32(static_cast<std::uint32_t>(args.size()));
  for (const Bytes& a : args) w.var_bytes(a);
  w.var_bytes(creator.encode());
  w.raw(nonce.data(), nonce.size());
  return w.take();
}

Bytes Proposal::encode() const {
  ByteWriter w;
  w.var_bytes(signing_bytes());
  w.var_bytes(creator_signature);
  return w.take();
}

Proposal Proposal::decode(const Bytes& bytes) {
  ByteReader outer(bytes);
  const Bytes body = outer.var_bytes();
  const Bytes sig = outer.var_bytes();
  outer.expect_end();

  ByteReader r(body);
  Proposal p;
  if (r.str() != "threatmesh.proposal.v1") {
    throw Error(ErrorCode::malformed_encoding, "bad proposal tag");
  }
  p.channel = r.str();
  p.contract = r.str();
  p.operation = r.str();
  const std::uint32_t nargs = r.u32();
  for (std::uint32_t i = 0; i < nargs; ++i) p.args.push_back(r.var_bytes());
  p.creator = identity::Certificate::decode(r.var_bytes());
  const Bytes nonce = r.raw(16);
  std::copy(nonce.begin(), nonce.end(), p.nonce.begin());
  r.expect_end();
  p.creator_signature = sig;
  return p;
}

Digest Proposal::txid() const { return crypto::sha256(encode()); }

Proposal make_proposal(const std::string& channel, const std::string& contract,
                       const std::string& operation, std::vector<Bytes> args,
                       const identity::Certificate& creator, const Bytes& creator_sk,
                       crypto::Rng& rng) {
  Proposal p;
  p.channel = channel;
  p.contract = contract;
  p.operation = operation;
  p.args = std::move(args);
  p.creator = creator;
  const Bytes nonce = rng.bytes(16);
  std::copy(nonce.begin(), nonce.end(), p.nonce.begin());
  p.creator_signature = crypto::sign(creator_sk, p.signing_bytes());
  return p;
}

Bytes Endorsement::result_bytes() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(read_set.size()));
  for (const ReadItem& r : read_set) {
    w.str(r.key);
    w.u64(r.version.block);
    w.u32(r.version.tx);
  }
  w.u32(static_cast<std::uint32_t>(write_set.size()));
  for (const WriteItem& wr : write_set) {
    w.str(wr.key);
    w.u8(wr.is_delete ? 1 : 0);
    w.var_bytes(wr.value);
  }
  w.u32(static_cast<std::uint32_t>(private_writes.size()));
  for (const PrivateWrite& pw : private_writes) {
    w.str(pw.collection);
    w.str(pw.key);
    w.u8(pw.is_delete ? 1 : 0);
    w.raw(pw.value_hash);
  }
  return w.take();
}

Bytes Endorsement::signing_bytes(const Digest& txid) const {
  ByteWriter w;
  w.str("threatmesh.endorsement.v1");
  w.raw(txid);
  w.var_bytes(result_bytes());
  return w.take();
}

Bytes Endorsement::encode() const {
  ByteWriter w;
  w.var_bytes(endorser.encode());
  w.var_bytes(result_bytes());
  w.var_bytes(signature);
  return w.take();
}

Endorsement Endorsement::decode(const Bytes& bytes) {
  ByteReader outer(bytes);
  Endorsement e;
  e.endorser = identity::Certificate::decode(outer.var_bytes());
  const Bytes result = outer.var_bytes();
  e.signature = outer.var_bytes();
  outer.expect_end();

  ByteReader r(result);
  const std::uint32_t nreads = r.u32();
  for (std::uint32_t i = 0; i < nreads; ++i) {
    ReadItem item;
    item.key = r.str();
    item.version.block = r.u64();
    item.version.tx = r.u32();
    e.read_set.push_back(std::move(item));
  }
  const std::uint32_t nwrites = r.u32();
  for (std::uint32_t i = 0; i < nwrites; ++i) {
    WriteItem item;
    item.key = r.str();
    item.is_delete = r.u8() == 1;
    item.value = r.var_bytes();
    e.write_set.push_back(std::move(item));
  }
  const std::uint32_t nprivate = r.u32();
  for (std::uint32_t i = 0; i < nprivate; ++i) {
    PrivateWrite item;
    item.collection = r.str();
    item.key = r.str();
    item.is_delete = r.u8() == 1;
    item.value_hash = r.digest32();
    e.private_writes.push_back(std::move(item));
  }
  r.expect_end();
  return e;
}

void EndorsementPolicy::validate() const {
  if (required_orgs < 1 || required_orgs > member_orgs.size()) {
    throw Error(ErrorCode::config_error,
                "endorsement policy requires between 1 and " +
                    std::to_string(member_orgs.size()) + " orgs");
  }
}

bool EndorsementPolicy::satisfied_by(const std::set<std::string>& endorsing_orgs) const {
  std::uint32_t count = 0;
  for (const std::string& org : endorsing_orgs) {
    if (member_orgs.count(org)) ++count;
  }
  return count >= required_orgs;
}

const char* tx_flag_name(TxFlag flag) {
  switch (flag) {
    case TxFlag::valid: return "valid";
    case TxFlag::bad_endorsement: return "bad_endorsement";
    case TxFlag::mvcc_conflict: return "mvcc_conflict";
    case TxFlag::bad_identity: return "bad_identity";
  }
  return "unknown";
}

Bytes Transaction::encode() const {
  ByteWriter w;
  w.var_bytes(proposal.encode());
  w.u32(static_cast<std::uint32_t>(endorsements.size()));
  for (const Endorsement& e : endorsements) w.var_bytes(e.encode());
  return w.take();
}

Transaction Transaction::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  Transaction tx;
  tx.proposal = Proposal::decode(r.var_bytes());
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    tx.endorsements.push_back(Endorsement::decode(r.var_bytes()));
  }
  r.expect_end();
  return tx;
}

const CollectionSpec* ChannelConfig::collection(const std::string& name) const {
  for (const CollectionSpec& spec : collections) {
    if (spec.name == name) return &spec;
  }
  return nullptr;
}

Bytes ChannelConfig::encode() const {
  ByteWriter w;
  w.str("threatmesh.channel.v1");
  w.str(name);
  w.u32(static_cast<std::uint32_t>(member_orgs.size()));
  for (const std::string& org : member_orgs) w.str(org);
  w.u32(policy.required_orgs);
  w.u32(static_cast<std::uint32_t>(collections.size()));
  for (const CollectionSpec& spec : collections) {
    w.str(spec.name);
    w.u32(static_cast<std::uint32_t>(spec.member_orgs.size()));
    for (const std::string& org : spec.member_orgs) w.str(org);
  }
  return w.take();
}

ChannelConfig ChannelConfig::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  ChannelConfig cfg;
  if (r.str() != "threatmesh.channel.v1") {
    throw Error(ErrorCode::malformed_encoding, "bad channel config tag");
  }
  cfg.name = r.str();
  const std::uint32_t norgs = r.u32();
  for (std::uint32_t i = 0; i < norgs; ++i) cfg.member_orgs.insert(r.str());
  cfg.policy.required_orgs = r.u32();
  cfg.policy.member_orgs = cfg.member_orgs;
  const std::uint32_t ncollections = r.u32();
  for (std::uint32_t i = 0; i < ncollections; ++i) {
    CollectionSpec spec;
    spec.name = r.str();
    const std::uint32_t nmembers = r.u32();
    for (std::uint32_t m = 0; m < nmembers; ++m) spec.member_orgs.insert(r.str());
    cfg.collections.push_back(std::move(spec));
  }
  r.expect_end();
  return cfg;
}

Bytes LedgerBlock::header_bytes() const {
  ByteWriter w;
  w.str("threatmesh.block.v1");
  w.u64(number);
  w.raw(prev_hash);
  w.raw(data_hash);
  w.u64(cut_at);
  w.u32(static_cast<std::uint32_t>(revoked.size()));
  for (const auto& [org, serials] : revoked) {
    w.str(org);
    w.u32(static_cast<std::uint32_t>(serials.size()));
    for (const std::uint64_t s : serials) w.u64(s);
  }
  return w.take();
}

Digest LedgerBlock::block_hash() const { return crypto::sha256(header_bytes()); }

Bytes LedgerBlock::data_bytes() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(transactions.size()));
  for (const Transaction& tx : transactions) w.var_bytes(tx.encode());
  w.var_bytes(config ? config->encode() : Bytes{});
  return w.take();
}

Bytes LedgerBlock::encode() const {
  ByteWriter w;
  w.var_bytes(header_bytes());
  w.var_bytes(data_bytes());
  return w.take();
}

LedgerBlock LedgerBlock::decode(const Bytes& bytes) {
  ByteReader outer(bytes);
  const Bytes header = outer.var_bytes();
  const Bytes data = outer.var_bytes();
  outer.expect_end();

  LedgerBlock block;
  ByteReader h(header);
  if (h.str() != "threatmesh.block.v1") {
    throw Error(ErrorCode::malformed_encoding, "bad block tag");
  }
  block.number = h.u64();
  block.prev_hash = h.digest32();
  block.data_hash = h.digest32();
  block.cut_at = h.u64();
  const std::uint32_t norgs = h.u32();
  for (std::uint32_t i = 0; i < norgs; ++i) {
    const std::string org = h.str();
    const std::uint32_t nserials = h.u32();
    auto& serials = block.revoked[org];
    for (std::uint32_t s = 0; s < nserials; ++s) serials.insert(h.u64());
  }
  h.expect_end();

  ByteReader d(data);
  const std::uint32_t ntx = d.u32();
  for (std::uint32_t i = 0; i < ntx; ++i) {
    block.transactions.push_back(Transaction::decode(d.var_bytes()));
  }
  const Bytes config_bytes = d.var_bytes();
  if (!config_bytes.empty()) {
    block.config = ChannelConfig::decode(config_bytes);
  }
  d.expect_end();
  return block;
}

Bytes LedgerBlock::encode_file() const {
  ByteWriter w;
  w.var_bytes(encode());
  w.u32(static_cast<std::uint32_t>(flags.size()));
  for (const TxFlag f : flags) w.u8(static_cast<std::uint8_t>(f));
  return w.take();
}

LedgerBlock LedgerBlock::decode_file(const Bytes& bytes) {
  ByteReader r(bytes);
  LedgerBlock block = decode(r.var_bytes());
  const std::uint32_t nflags = r.u32();
  for (std::uint32_t i = 0; i < nflags; ++i) {
    block.flags.push_back(static_cast<TxFlag>(r.u8()));
  }
  r.expect_end();
  return block;
}

LedgerBlock make_genesis(const ChannelConfig& config) {
  LedgerBlock genesis;
  genesis.number = 0;
  genesis.config = config;
  genesis.data_hash = crypto::sha256(genesis.data_bytes());
  return genesis;
}

void verify_chain(const std::vector<LedgerBlock>& chain,
                  const std::optional<Digest>& expected_tip) {
  if (expected_tip && (chain.empty() || chain.back().block_hash() != *expected_tip)) {
    throw Error(ErrorCode::integrity_mismatch, "chain tip does not match the agreed head");
  }
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const LedgerBlock& block = chain[i];
    if (block.number != i) {
      throw Error(ErrorCode::integrity_mismatch,
                  "block " + std::to_string(i) + " has number " + std::to_string(block.number));
    }
    if (crypto::sha256(block.data_bytes()) != block.data_hash) {
      throw Error(ErrorCode::integrity_mismatch,
                  "block " + std::to_string(i) + " data hash mismatch");
    }
    if (block.flags.size() != block.transactions.size()) {
      throw Error(ErrorCode::integrity_mismatch,
                  "block " + std::to_string(i) + " flag count mismatch");
    }
    if (i == 0) {
      if (block.prev_hash != Digest{}) {
        throw Error(ErrorCode::integrity_mismatch, "genesis prev_hash not zero");
      }
    } else if (block.prev_hash != chain[i - 1].block_hash()) {
      throw Error(ErrorCode::integrity_mismatch,
                  "block " + std::to_string(i) + " prev hash mismatch");
    }
  }
}

std::optional<StateValue> WorldState::get(const std::string& key) const {
  const auto it = public_kv_.find(key);
  if (it == public_kv_.end()) return std::nullopt;
  return it->second;
}

Version WorldState::version_of(const std::string& key) const {
  const auto it = public_kv_.find(key);
  return it == public_kv_.end() ? Version{} : it->second.version;
}

void WorldState::put(const std::string& key, Bytes value, Version version) {
  public_kv_[key] = StateValue{std::move(value), version};
}

void WorldState::erase(const std::string& key) { public_kv_.erase(key); }

std::optional<StateValue> WorldState::get_private(const std::string& collection,
                                                  const std::string& key) const {
  const auto cit = private_kv_.find(collection);
  if (cit == private_kv_.end()) return std::nullopt;
  const auto it = cit->second.find(key);
  if (it == cit->second.end()) return std::nullopt;
  return it->second;
}

std::optional<Digest> WorldState::get_private_hash(const std::string& collection,
                                                   const std::string& key) const {
  const auto cit = private_hashes_.find(collection);
  if (cit == private_hashes_.end()) return std::nullopt;
  const auto it = cit->second.find(key);
  if (it == cit->second.end()) return std::nullopt;
  return it->second;
}

void WorldState::put_private(const std::string& collection, const std::string& key, Bytes value,
                             Version version) {
  private_kv_[collection][key] = StateValue{std::move(value), version};
}

void WorldState::put_private_hash(const std::string& collection, const std::string& key,
                                  const Digest& hash) {
  private_hashes_[collection][key] = hash;
}

void WorldState::erase_private(const std::string& collection, const std::string& key) {
  if (const auto it = private_kv_.find(collection); it != private_kv_.end()) {
    it->second.erase(key);
  }
  if (const auto it = private_hashes_.find(collection); it != private_hashes_.end()) {
    it->second.erase(key);
  }
}

Digest WorldState::public_state_hash() const {
  ByteWriter w;
  w.str("threatmesh.state.v1");
  w.u32(static_cast<std::uint32_t>(public_kv_.size()));
  for (const auto& [key, sv] : public_kv_) {
    w.str(key);
    w.var_bytes(sv.value);
    w.u64(sv.version.block);
    w.u32(sv.version.tx);
  }
  return crypto::sha256(w.data());
}

TxContext::TxContext(const WorldState& snapshot, const identity::Certificate& creator,
                     const ChannelConfig& channel, std::string endorsing_org, std::uint64_t now)
    : snapshot_(snapshot),
      creator_(creator),
      channel_(channel),
      endorsing_org_(std::move(endorsing_org)),
      now_(now) {}

std::optional<Bytes> TxContext::get_state(const std::string& key) {
  const bool seen = std::any_of(reads_.begin(), reads_.end(),
                                [&](const ReadItem& r) { return r.key == key; });
  if (!seen) {
    reads_.push_back({key, snapshot_.version_of(key)});
  }
  const auto value = snapshot_.get(key);
  if (!value) return std::nullopt;
  return value->value;
}

void TxContext::put_state(const std::string& key, Bytes value) {
  for (WriteItem& w : writes_) {
    if (w.key == key) {
      w.is_delete = false;
      w.value = std::move(value);
      return;
    }
  }
  writes_.push_back({key, false, std::move(value)});
}

void TxContext::delete_state(const std::string& key) {
  for (WriteItem& w : writes_) {
    if (w.key == key) {
      w.is_delete = true;
      w.value.clear();
      return;
    }
  }
  writes_.push_back({key, true, {}});
}

void TxContext::check_collection(const std::string& collection) const {
  const CollectionSpec* spec = channel_.collection(collection);
  if (!spec) {
    throw Error(ErrorCode::contract_error, "unknown collection " + collection);
  }
  if (!spec->member_orgs.count(endorsing_org_)) {
    throw Error(ErrorCode::access_denied,
                endorsing_org_ + " is not a member of collection " + collection);
  }
}

void TxContext::put_private(const std::string& collection, const std::string& key, Bytes value) {
  check_collection(collection);
  private_writes_.push_back({collection, key, false, crypto::sha256(value)});
  private_values_.push_back({collection, key, std::move(value)});
}

void TxContext::delete_private(const std::string& collection, const std::string& key) {
  check_collection(collection);
  private_writes_.push_back({collection, key, true, Digest{}});
}

Peer::Peer(std::string name, std::string org, identity::Certificate cert,
           crypto::SigningKeyPair keys, const identity::Msp* msp, ChannelConfig channel,
           LedgerBlock genesis)
    : name_(std::move(name)),
      org_(std::move(org)),
      cert_(std::move(cert)),
      keys_(std::move(keys)),
      msp_(msp),
      channel_(std::move(channel)) {
  genesis.flags.clear();
  chain_.push_back(std::move(genesis));
}

void Peer::install(std::shared_ptr<Contract> contract) {
  contracts_[contract->name()] = std::move(contract);
}

Peer::EndorseResult Peer::endorse(const Proposal& proposal, std::uint64_t now) const {
  if (proposal.channel != channel_.name) {
    throw Error(ErrorCode::channel_unknown, proposal.channel);
  }
  const auto identity_check = msp_->verify(proposal.creator, now);
  if (!identity_check.accepted()) {
    throw Error(ErrorCode::identity_rejected, identity_check.reason());
  }
  if (!crypto::verify_signature(proposal.creator.public_key, proposal.signing_bytes(),
                                proposal.creator_signature)) {
    throw Error(ErrorCode::identity_rejected, "proposal signature does not verify");
  }
  const auto it = contracts_.find(proposal.contract);
  if (it == contracts_.end()) {
    throw Error(ErrorCode::contract_error, "contract not installed: " + proposal.contract);
  }

  TxContext ctx(state_, proposal.creator, channel_, org_, now);
  it->second->execute(ctx, proposal.operation, proposal.args);

  EndorseResult result;
  result.endorsement.endorser = cert_;
  result.endorsement.read_set = ctx.read_set();
  result.endorsement.write_set = ctx.write_set();
  result.endorsement.private_writes = ctx.private_writes();
  result.endorsement.signature =
      crypto::sign(keys_.secret_key, result.endorsement.signing_bytes(proposal.txid()));
  result.private_values = ctx.private_values();
  return result;
}

void Peer::cache_private_value(const Digest& txid, const std::string& collection,
                               const std::string& key, Bytes value) {
  transient_[hex_encode(txid)][collection + "/" + key] = std::move(value);
}

TxFlag Peer::validate_tx(const Transaction& tx, const LedgerBlock& block) const {
  // Identity first: creator and every endorser, under the block's revocation
  // snapshot so every peer reaches the same verdict.
  const auto creator_check =
      msp_->verify_with_revocations(tx.proposal.creator, block.cut_at, block.revoked);
  if (!creator_check.accepted()) return TxFlag::bad_identity;
  if (!crypto::verify_signature(tx.proposal.creator.public_key, tx.proposal.signing_bytes(),
                                tx.proposal.creator_signature)) {
    return TxFlag::bad_identity;
  }
  for (const Endorsement& e : tx.endorsements) {
    const auto check = msp_->verify_with_revocations(e.endorser, block.cut_at, block.revoked);
    if (!check.accepted()) return TxFlag::bad_identity;
  }

  // Endorsement policy: enough distinct member orgs, peer role only, valid
  // signatures, and bit-identical execution results.
  std::set<std::string> endorsing_orgs;
  const Digest txid = tx.proposal.txid();
  Bytes reference;
  for (const Endorsement& e : tx.endorsements) {
    if (e.endorser.role != identity::Role::peer) return TxFlag::bad_endorsement;
    if (!channel_.member_orgs.count(e.endorser.organization)) return TxFlag::bad_endorsement;
    if (!crypto::verify_signature(e.endorser.public_key, e.signing_bytes(txid), e.signature)) {
      return TxFlag::bad_endorsement;
    }
    const Bytes result = e.result_bytes();
    if (reference.empty()) {
      reference = result;
    } else if (result != reference) {
      return TxFlag::bad_endorsement;
    }
    endorsing_orgs.insert(e.endorser.organization);
  }
  if (!channel_.policy.satisfied_by(endorsing_orgs)) return TxFlag::bad_endorsement;

  // Replay: a txid can commit at most once.
  if (committed_.count(hex_encode(txid))) return TxFlag::mvcc_conflict;

  // MVCC read-set check against current (intra-block sequential) state.
  for (const ReadItem& r : tx.endorsements.front().read_set) {
    if (state_.version_of(r.key) != r.version) return TxFlag::mvcc_conflict;
  }
  return TxFlag::valid;
}

void Peer::apply_tx(const Transaction& tx, std::uint64_t block_number, std::uint32_t tx_index) {
  const Version version{block_number, tx_index};
  const Endorsement& e = tx.endorsements.front();
  for (const WriteItem& w : e.write_set) {
    if (w.is_delete) {
      state_.erase(w.key);
    } else {
      state_.put(w.key, w.value, version);
    }
  }
  const std::string txid_hex = hex_encode(tx.proposal.txid());
  const auto transient = transient_.find(txid_hex);
  for (const PrivateWrite& pw : e.private_writes) {
    if (pw.is_delete) {
      state_.erase_private(pw.collection, pw.key);
      continue;
    }
    state_.put_private_hash(pw.collection, pw.key, pw.value_hash);
    const CollectionSpec* spec = channel_.collection(pw.collection);
    if (!spec || !spec->member_orgs.count(org_)) continue;
    if (transient == transient_.end()) continue;
    const auto value = transient->second.find(pw.collection + "/" + pw.key);
    if (value == transient->second.end()) continue;
    if (crypto::sha256(value->second) != pw.value_hash) continue;
    state_.put_private(pw.collection, pw.key, value->second, version);
  }
}

std::vector<TxFlag> Peer::validate_and_commit(LedgerBlock block) {
  if (block.number != chain_.size()) {
    throw Error(ErrorCode::chain_gap, "expected block " + std::to_string(chain_.size()) +
                                          ", got " + std::to_string(block.number));
  }
  if (block.prev_hash != chain_.back().block_hash()) {
    throw Error(ErrorCode::integrity_mismatch, "prev hash mismatch at block " +
                                                   std::to_string(block.number));
  }
  if (crypto::sha256(block.data_bytes()) != block.data_hash) {
    throw Error(ErrorCode::integrity_mismatch, "data hash mismatch at block " +
                                                   std::to_string(block.number));
  }

  block.flags.clear();
  for (std::uint32_t i = 0; i < block.transactions.size(); ++i) {
    const Transaction& tx = block.transactions[i];
    const TxFlag flag = validate_tx(tx, block);
    if (flag == TxFlag::valid) {
      apply_tx(tx, block.number, i);
    }
    block.flags.push_back(flag);
    committed_[hex_encode(tx.proposal.txid())] = CommitInfo{block.number, i, flag};
    transient_.erase(hex_encode(tx.proposal.txid()));
  }
  const std::vector<TxFlag> flags = block.flags;
  chain_.push_back(std::move(block));
  return flags;
}

void Peer::apply_committed(LedgerBlock block) {
  if (block.number != chain_.size()) {
    throw Error(ErrorCode::chain_gap, "expected block " + std::to_string(chain_.size()));
  }
  if (block.flags.size() != block.transactions.size()) {
    throw Error(ErrorCode::integrity_mismatch, "block flags missing");
  }
  for (std::uint32_t i = 0; i < block.transactions.size(); ++i) {
    const Transaction& tx = block.transactions[i];
    if (block.flags[i] == TxFlag::valid) {
      apply_tx(tx, block.number, i);
    }
    committed_[hex_encode(tx.proposal.txid())] = CommitInfo{block.number, i, block.flags[i]};
  }
  chain_.push_back(std::move(block));
}

std::optional<Bytes> Peer::query(const identity::Certificate& caller, const std::string& key,
                                 std::uint64_t now) const {
  const auto check = msp_->verify(caller, now);
  if (!check.accepted()) {
    throw Error(ErrorCode::identity_rejected, check.reason());
  }
  const auto value = state_.get(key);
  if (!value) return std::nullopt;
  return value->value;
}

std::optional<Bytes> Peer::query_private(const identity::Certificate& caller,
                                         const std::string& collection, const std::string& key,
                                         std::uint64_t now) const {
  const auto check = msp_->verify(caller, now);
  if (!check.accepted()) {
    throw Error(ErrorCode::identity_rejected, check.reason());
  }
  const CollectionSpec* spec = channel_.collection(collection);
  if (!spec) {
    throw Error(ErrorCode::contract_error, "unknown collection " + collection);
  }
  if (!spec->member_orgs.count(caller.organization)) {
    throw Error(ErrorCode::access_denied,
                caller.organization + " is not a member of " + collection);
  }
  const auto value = state_.get_private(collection, key);
  if (!value) return std::nullopt;
  return value->value;
}

Bytes Peer::chain_bytes() const {
  ByteWriter w;
  for (const LedgerBlock& block : chain_) {
    w.var_bytes(block.encode_file());
  }
  return w.take();
}

std::optional<Peer::CommitInfo> Peer::committed(const Digest& txid) const {
  const auto it = committed_.find(hex_encode(txid));
  if (it == committed_.end()) return std::nullopt;
  return it->second;
}

SoloOrderer::SoloOrderer(OrdererConfig config, const LedgerBlock& genesis,
                         const identity::Msp* msp)
    : config_(config), msp_(msp) {
  next_number_ = genesis.number + 1;
  prev_hash_ = genesis.block_hash();
}

void SoloOrderer::restore_tail(const LedgerBlock& last_block) {
  next_number_ = last_block.number + 1;
  prev_hash_ = last_block.block_hash();
}

void SoloOrderer::submit(Transaction tx, std::uint64_t now) {
  pending_.emplace_back(std::move(tx), now);
}

LedgerBlock SoloOrderer::cut_block(std::size_t count, std::uint64_t now) {
  LedgerBlock block;
  block.number = next_number_++;
  block.prev_hash = prev_hash_;
  block.cut_at = now;
  block.revoked = msp_->revocation_snapshot();
  for (std::size_t i = 0; i < count; ++i) {
    block.transactions.push_back(std::move(pending_[i].first));
  }
  pending_.erase(pending_.begin(), pending_.begin() + static_cast<std::ptrdiff_t>(count));
  block.data_hash = crypto::sha256(block.data_bytes());
  prev_hash_ = block.block_hash();
  return block;
}

std::vector<LedgerBlock> SoloOrderer::try_cut(std::uint64_t now) {
  std::vector<LedgerBlock> blocks;
  while (!pending_.empty() && now >= busy_until_) {
    const bool full = pending_.size() >= config_.batch_size;
    const bool aged = pending_.front().second + config_.batch_timeout_ticks <= now;
    if (!full && !aged) break;
    const std::size_t count =
        std::min<std::size_t>(pending_.size(), config_.batch_size);
    blocks.push_back(cut_block(count, now));
    busy_until_ = now + config_.cut_cost_ticks;
  }
  return blocks;
}

std::optional<std::uint64_t> SoloOrderer::next_wakeup(std::uint64_t now) const {
  if (pending_.empty()) return std::nullopt;
  const std::uint64_t age_ready = pending_.front().second + config_.batch_timeout_ticks;
  const std::uint64_t ready =
      pending_.size() >= config_.batch_size ? now + 1 : std::max(age_ready, now + 1);
  return std::max(ready, busy_until_);
}

}  // namespace threatmesh::ledger
