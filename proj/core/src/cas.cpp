#include "threatmesh/cas.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

namespace threatmesh::cas {

using nlohmann::json;

const char* codec_name(Codec codec) {
  switch (codec) {
    case Codec::raw_leaf: return "raw_leaf";
    case Codec::dag_node: return "dag_node";
  }
  return "unknown";
}

Bytes Cid::encode() const {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(codec));
  w.u8(static_cast<std::uint8_t>(hash_algo));
  w.raw(digest);
  return w.take();
}

Cid Cid::decode(ByteReader& r) {
  Cid cid;
  const std::uint8_t codec = r.u8();
  if (codec > 1) {
    throw Error(ErrorCode::malformed_encoding, "bad cid codec");
  }
  cid.codec = static_cast<Codec>(codec);
  const std::uint8_t algo = r.u8();
  if (algo != 0) {
    throw Error(ErrorCode::malformed_encoding, "unsupported hash algorithm");
  }
  cid.hash_algo = static_cast<HashAlgo>(algo);
  cid.digest = r.digest32();
  return cid;
}

Cid Cid::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  Cid cid = decode(r);
  r.expect_end();
  return cid;
}

std::string Cid::to_string() const {
  return std::string("cid1:") + codec_name(codec) + ":" + hex_encode(digest);
}

Cid Cid::parse(std::string_view text) {
  const auto fail = [&] {
    throw Error(ErrorCode::malformed_encoding, "bad cid: " + std::string(text));
  };
  if (text.substr(0, 5) != "cid1:") fail();
  text.remove_prefix(5);
  const auto sep = text.find(':');
  if (sep == std::string_view::npos) fail();
  const std::string_view codec_text = text.substr(0, sep);
  const std::string_view hex = text.substr(sep + 1);
  Cid cid;
  if (codec_text == "raw_leaf") {
    cid.codec = Codec::raw_leaf;
  } else if (codec_text == "dag_node") {
    cid.codec = Codec::dag_node;
  } else {
    fail();
  }
  if (hex.size() != 64) fail();
  cid.digest = digest_from_hex(hex);
  return cid;
}

Cid cid_for_block(Codec codec, const Bytes& bytes) {
  Cid cid;
  cid.codec = codec;
  cid.digest = crypto::sha256(bytes);
  return cid;
}

std::uint64_t DagNode::total_size() const {
  std::uint64_t total = 0;
  for (const DagLink& link : links) total += link.size;
  return total;
}

Bytes DagNode::encode() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(links.size()));
  for (const DagLink& link : links) {
    w.var_bytes(link.cid.encode());
    w.u64(link.size);
  }
  return w.take();
}

DagNode DagNode::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  DagNode node;
  const std::uint32_t count = r.u32();
  if (count < 2) {
    throw Error(ErrorCode::malformed_encoding, "dag node needs at least 2 links");
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    DagLink link;
    link.cid = Cid::decode(r.var_bytes());
    link.size = r.u64();
    node.links.push_back(std::move(link));
  }
  r.expect_end();
  return node;
}

void ProviderRegistry::register_node(const std::string& node_id) {
  node_ids_.insert(node_id);
}

void ProviderRegistry::register_provider(const Cid& cid, const std::string& node_id,
                                         std::uint64_t tick) {
  auto& records = providers_[cid.to_string()];
  for (const ProviderRecord& rec : records) {
    if (rec.node_id == node_id) return;
  }
  records.push_back({cid, node_id, tick});
}

void ProviderRegistry::unregister(const Cid& cid, const std::string& node_id) {
  const auto it = providers_.find(cid.to_string());
  if (it == providers_.end()) return;
  auto& records = it->second;
  records.erase(std::remove_if(records.begin(), records.end(),
                               [&](const ProviderRecord& r) { return r.node_id == node_id; }),
                records.end());
}

void ProviderRegistry::unregister_all(const Cid& cid) {
  providers_.erase(cid.to_string());
}

std::vector<std::string> ProviderRegistry::providers(const Cid& cid) const {
  std::vector<std::string> out;
  const auto it = providers_.find(cid.to_string());
  if (it == providers_.end()) return out;
  for (const ProviderRecord& rec : it->second) out.push_back(rec.node_id);
  return out;
}

const std::vector<ProviderRecord>& ProviderRegistry::records(const Cid& cid) const {
  static const std::vector<ProviderRecord> empty;
  const auto it = providers_.find(cid.to_string());
  return it == providers_.end() ? empty : it->second;
}

void ProviderRegistry::record_owner(const Cid& cid, const std::string& owner_fingerprint) {
  owners_.emplace(cid.to_string(), owner_fingerprint);  // first writer wins
}

std::optional<std::string> ProviderRegistry::owner(const Cid& cid) const {
  const auto it = owners_.find(cid.to_string());
  if (it == owners_.end()) return std::nullopt;
  return it->second;
}

std::string ProviderRegistry::to_json() const {
  json j;
  j["nodes"] = json::array();
  for (const std::string& id : node_ids_) j["nodes"].push_back(id);
  json provs = json::object();
  for (const auto& [cid_text, records] : providers_) {
    json list = json::array();
    for (const ProviderRecord& rec : records) {
      list.push_back({{"node_id", rec.node_id}, {"registered_at", rec.registered_at}});
    }
    provs[cid_text] = std::move(list);
  }
  j["providers"] = std::move(provs);
  json owners = json::object();
  for (const auto& [cid_text, fp] : owners_) owners[cid_text] = fp;
  j["owners"] = std::move(owners);
  return j.dump(2);
}

ProviderRegistry ProviderRegistry::from_json(const std::string& text) {
  const json j = json::parse(text);
  ProviderRegistry reg;
  for (const auto& id : j.at("nodes")) reg.node_ids_.insert(id.get<std::string>());
  for (const auto& [cid_text, list] : j.at("providers").items()) {
    const Cid cid = Cid::parse(cid_text);
    for (const auto& rec : list) {
      reg.providers_[cid_text].push_back(
          {cid, rec.at("node_id").get<std::string>(), rec.at("registered_at").get<std::uint64_t>()});
    }
  }
  for (const auto& [cid_text, fp] : j.at("owners").items()) {
    reg.owners_[cid_text] = fp.get<std::string>();
  }
  return reg;
}

void BlockStore::store_block(const std::string& hex, const Bytes& bytes) {
  if (blocks_.count(hex)) return;
  if (used_bytes_ + bytes.size() > config_.capacity_bytes) {
    throw Error(ErrorCode::storage_full, "block store capacity exceeded");
  }
  used_bytes_ += bytes.size();
  blocks_[hex] = bytes;
}

BlockStore::PutResult BlockStore::put(const Bytes& content) {
  std::vector<std::pair<Cid, Bytes>> chunks;
  if (content.empty()) {
    chunks.emplace_back(cid_for_block(Codec::raw_leaf, {}), Bytes{});
  } else {
    for (std::size_t off = 0; off < content.size(); off += config_.chunk_size) {
      const std::size_t len = std::min(config_.chunk_size, content.size() - off);
      Bytes chunk(content.begin() + off, content.begin() + off + len);
      chunks.emplace_back(cid_for_block(Codec::raw_leaf, chunk), std::move(chunk));
    }
  }

  Cid root;
  std::vector<std::pair<Cid, const Bytes*>> to_store;
  Bytes node_bytes;
  if (chunks.size() == 1) {
    root = chunks[0].first;
    to_store.emplace_back(chunks[0].first, &chunks[0].second);
  } else {
    DagNode node;
    for (const auto& [cid, bytes] : chunks) {
      node.links.push_back({cid, bytes.size()});
    }
    node_bytes = node.encode();
    root = cid_for_block(Codec::dag_node, node_bytes);
    to_store.emplace_back(root, &node_bytes);
    for (const auto& [cid, bytes] : chunks) {
      to_store.emplace_back(cid, &bytes);
    }
  }

  const std::string root_text = root.to_string();
  if (roots_.count(root_text)) {
    return {root, true};
  }

  std::vector<std::string> hexes;
  for (const auto& [cid, bytes] : to_store) {
    const std::string hex = cid.digest_hex();
    store_block(hex, *bytes);
    if (std::find(hexes.begin(), hexes.end(), hex) == hexes.end()) {
      hexes.push_back(hex);
    }
  }
  for (const std::string& hex : hexes) ++refs_[hex];
  roots_[root_text] = std::move(hexes);
  return {root, false};
}

std::optional<Bytes> BlockStore::block(const Digest& digest) const {
  const auto it = blocks_.find(hex_encode(digest));
  if (it == blocks_.end()) return std::nullopt;
  return it->second;
}

bool BlockStore::has_block(const Digest& digest) const {
  return blocks_.count(hex_encode(digest)) > 0;
}

Bytes BlockStore::get(const Cid& cid) const {
  const auto root_block = block(cid.digest);
  if (!root_block) {
    throw Error(ErrorCode::not_found, cid.to_string());
  }
  if (crypto::sha256(*root_block) != cid.digest) {
    throw Error(ErrorCode::integrity_mismatch, "block bytes do not match " + cid.to_string());
  }
  if (cid.codec == Codec::raw_leaf) {
    return *root_block;
  }
  const DagNode node = DagNode::decode(*root_block);
  Bytes out;
  out.reserve(node.total_size());
  for (const DagLink& link : node.links) {
    const auto leaf = block(link.cid.digest);
    if (!leaf) {
      throw Error(ErrorCode::not_found, "missing leaf " + link.cid.to_string());
    }
    if (crypto::sha256(*leaf) != link.cid.digest) {
      throw Error(ErrorCode::integrity_mismatch,
                  "leaf bytes do not match " + link.cid.to_string());
    }
    if (leaf->size() != link.size) {
      throw Error(ErrorCode::integrity_mismatch, "leaf size mismatch");
    }
    out.insert(out.end(), leaf->begin(), leaf->end());
  }
  return out;
}

std::vector<Digest> BlockStore::dag_blocks(const Cid& cid) const {
  std::vector<Digest> out{cid.digest};
  if (cid.codec == Codec::dag_node) {
    const auto root_block = block(cid.digest);
    if (root_block) {
      const DagNode node = DagNode::decode(*root_block);
      for (const DagLink& link : node.links) out.push_back(link.cid.digest);
    }
  }
  return out;
}

bool BlockStore::has_all(const Cid& cid) const {
  if (!has_block(cid.digest)) return false;
  if (cid.codec == Codec::raw_leaf) return true;
  for (const Digest& d : dag_blocks(cid)) {
    if (!has_block(d)) return false;
  }
  return true;
}

std::vector<Digest> BlockStore::missing_blocks(const Cid& cid) const {
  std::vector<Digest> missing;
  if (!has_block(cid.digest)) {
    missing.push_back(cid.digest);
    return missing;  // links unknown until the root block arrives
  }
  for (const Digest& d : dag_blocks(cid)) {
    if (!has_block(d)) missing.push_back(d);
  }
  return missing;
}

void BlockStore::add_block(const Bytes& bytes) {
  store_block(hex_encode(crypto::sha256(bytes)), bytes);
}

void BlockStore::adopt_root(const Cid& cid) {
  const std::string root_text = cid.to_string();
  if (roots_.count(root_text)) return;
  std::vector<std::string> hexes;
  for (const Digest& d : dag_blocks(cid)) {
    const std::string hex = hex_encode(d);
    if (!blocks_.count(hex)) {
      throw Error(ErrorCode::not_found, "cannot adopt incomplete dag");
    }
    if (std::find(hexes.begin(), hexes.end(), hex) == hexes.end()) {
      hexes.push_back(hex);
    }
  }
  for (const std::string& hex : hexes) ++refs_[hex];
  roots_[root_text] = std::move(hexes);
}

bool BlockStore::has_root(const Cid& cid) const { return roots_.count(cid.to_string()) > 0; }

std::vector<Digest> BlockStore::erase_root(const Cid& cid) {
  std::vector<Digest> removed;
  const auto it = roots_.find(cid.to_string());
  if (it == roots_.end()) return removed;
  for (const std::string& hex : it->second) {
    const auto ref = refs_.find(hex);
    if (ref == refs_.end()) continue;
    if (--ref->second <= 0) {
      refs_.erase(ref);
      const auto blk = blocks_.find(hex);
      if (blk != blocks_.end()) {
        used_bytes_ -= blk->second.size();
        removed.push_back(digest_from_hex(hex));
        blocks_.erase(blk);
      }
    }
  }
  roots_.erase(it);
  return removed;
}

std::vector<std::string> BlockStore::root_cids() const {
  std::vector<std::string> out;
  for (const auto& [text, _] : roots_) out.push_back(text);
  return out;
}

void BlockStore::corrupt_block(const Digest& digest, std::size_t byte_index) {
  const auto it = blocks_.find(hex_encode(digest));
  if (it == blocks_.end() || it->second.empty()) return;
  it->second[byte_index % it->second.size()] ^= 0x01;
}

void BlockStore::restore_block(const Digest& digest, const Bytes& bytes) {
  blocks_[hex_encode(digest)] = bytes;
}

void BlockStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [hex, bytes] : blocks_) {
    std::ofstream out(dir / hex, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  json index;
  index["roots"] = json::object();
  for (const auto& [cid_text, hexes] : roots_) {
    index["roots"][cid_text] = hexes;
  }
  std::ofstream out(dir / "index.json", std::ios::trunc);
  out << index.dump(2) << '\n';
}

BlockStore BlockStore::load(const std::filesystem::path& dir, CasConfig config) {
  BlockStore store(config);
  std::ifstream in(dir / "index.json");
  if (!in) {
    throw Error(ErrorCode::not_found, "no block store index at " + dir.string());
  }
  const json index = json::parse(in);
  for (const auto& [cid_text, hexes] : index.at("roots").items()) {
    std::vector<std::string> list;
    for (const auto& hex : hexes) {
      const std::string h = hex.get<std::string>();
      if (!store.blocks_.count(h)) {
        std::ifstream blk(dir / h, std::ios::binary);
        if (!blk) {
          throw Error(ErrorCode::not_found, "missing block file " + h);
        }
        Bytes bytes((std::istreambuf_iterator<char>(blk)), std::istreambuf_iterator<char>());
        store.used_bytes_ += bytes.size();
        store.blocks_[h] = std::move(bytes);
      }
      ++store.refs_[h];
      list.push_back(h);
    }
    store.roots_[cid_text] = std::move(list);
  }
  return store;
}

Bytes erase_request_bytes(const Cid& cid) {
  ByteWriter w;
  w.str("threatmesh.erase.v1");
  w.raw(cid.encode());
  return w.take();
}

Bytes Delegation::signing_bytes() const {
  ByteWriter w;
  w.str("threatmesh.delegation.v1");
  w.raw(cid.encode());
  w.str(delegate_fingerprint);
  return w.take();
}

Bytes Delegation::encode() const {
  ByteWriter w;
  w.raw(cid.encode());
  w.str(delegate_fingerprint);
  w.var_bytes(owner_cert.encode());
  w.var_bytes(owner_signature);
  return w.take();
}

Delegation Delegation::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  Delegation d;
  d.cid = Cid::decode(r);
  d.delegate_fingerprint = r.str();
  d.owner_cert = identity::Certificate::decode(r.var_bytes());
  d.owner_signature = r.var_bytes();
  r.expect_end();
  return d;
}

Delegation make_delegation(const Cid& cid, const std::string& delegate_fingerprint,
                           const identity::Certificate& owner_cert, const Bytes& owner_sk) {
  Delegation d;
  d.cid = cid;
  d.delegate_fingerprint = delegate_fingerprint;
  d.owner_cert = owner_cert;
  d.owner_signature = crypto::sign(owner_sk, d.signing_bytes());
  return d;
}

CasNode::CasNode(std::string node_id, ProviderRegistry* registry, netsim::Network* net,
                 identity::Msp* msp, CasConfig config)
    : node_id_(std::move(node_id)),
      registry_(registry),
      net_(net),
      msp_(msp),
      config_(config),
      store_(config) {
  if (registry_) registry_->register_node(node_id_);
}

Cid CasNode::put_bytes(const Bytes& content, const std::string& owner_fingerprint) {
  const BlockStore::PutResult result = store_.put(content);
  if (registry_) {
    registry_->record_owner(result.cid, owner_fingerprint);
    registry_->register_provider(result.cid, node_id_, net_ ? net_->now() : 0);
  }
  return result.cid;
}

Bytes CasNode::get_bytes(const Cid& cid) {
  if (!store_.has_all(cid)) {
    if (!net_) {
      throw Error(ErrorCode::not_found, cid.to_string());
    }
    exchange_want(cid);
  }
  return store_.get(cid);
}

std::vector<std::string> CasNode::find_providers(const Cid& cid) const {
  return registry_ ? registry_->providers(cid) : std::vector<std::string>{};
}

void CasNode::request(FetchState& fetch, const std::vector<Cid>& cids) {
  if (cids.empty() || fetch.providers.empty()) return;
  const std::string& provider = fetch.providers[fetch.provider_cursor % fetch.providers.size()];
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(cids.size()));
  for (const Cid& cid : cids) w.raw(cid.encode());
  exchange_stats_.want_entries_sent += cids.size();
  net_->send(node_id_, provider, kWantKind, w.data());
}

void CasNode::exchange_want(const Cid& cid) {
  if (!net_ || !registry_) {
    throw Error(ErrorCode::not_found, "node is offline");
  }
  exchange_stats_ = {};
  std::vector<std::string> providers;
  for (const std::string& p : registry_->providers(cid)) {
    if (p != node_id_) providers.push_back(p);
  }
  if (providers.empty()) {
    throw Error(ErrorCode::not_found, "no provider for " + cid.to_string());
  }

  FetchState fetch;
  fetch.root = cid;
  fetch.providers = std::move(providers);
  std::vector<Cid> wants;
  for (const Digest& d : store_.missing_blocks(cid)) {
    const std::string hex = hex_encode(d);
    fetch.pending.insert(hex);
    const Codec codec = (d == cid.digest) ? cid.codec : Codec::raw_leaf;
    fetch.codecs[hex] = codec;
    wants.push_back(Cid{codec, HashAlgo::sha2_256, d});
  }
  fetch_ = std::move(fetch);
  request(*fetch_, wants);

  net_->run_until([this] { return fetch_->done() || fetch_->failed; },
                  config_.want_timeout_ticks);

  FetchState finished = std::move(*fetch_);
  fetch_.reset();
  if (finished.failed) {
    throw Error(finished.fail_code, finished.fail_reason);
  }
  if (!finished.done()) {
    throw Error(ErrorCode::timeout, "block exchange did not complete for " + cid.to_string());
  }

  store_.adopt_root(cid);
  if (config_.replicate_on_fetch) {
    registry_->register_provider(cid, node_id_, net_->now());
  }
}

void CasNode::on_want(const netsim::Delivery& d) {
  ByteReader r(d.payload);
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const Cid cid = Cid::decode(r);
    const auto bytes = store_.block(cid.digest);
    if (!bytes) continue;  // nothing to offer; requester times out
    ByteWriter w;
    w.raw(cid.encode());
    w.var_bytes(*bytes);
    net_->send(node_id_, d.from, kBlockKind, w.data());
  }
}

void CasNode::on_block(const netsim::Delivery& d) {
  if (!fetch_ || fetch_->failed) return;
  ByteReader r(d.payload);
  const Cid cid = Cid::decode(r);
  const Bytes bytes = r.var_bytes();
  r.expect_end();

  const std::string hex = cid.digest_hex();
  if (!fetch_->pending.count(hex)) return;  // duplicate or stale

  if (crypto::sha256(bytes) != cid.digest) {
    ++exchange_stats_.integrity_failures;
    const int attempts = ++fetch_->attempts[hex];
    if (attempts > 1) {
      fetch_->failed = true;
      fetch_->fail_code = ErrorCode::integrity_mismatch;
      fetch_->fail_reason = "block " + cid.to_string() + " failed hash check twice";
      return;
    }
    ++fetch_->provider_cursor;  // retry once, next provider if there is one
    request(*fetch_, {cid});
    return;
  }

  ++exchange_stats_.blocks_received;
  try {
    store_.add_block(bytes);
  } catch (const Error& e) {
    fetch_->failed = true;
    fetch_->fail_code = e.code();
    fetch_->fail_reason = e.what();
    return;
  }
  fetch_->pending.erase(hex);

  if (cid == fetch_->root && cid.codec == Codec::dag_node) {
    const DagNode node = DagNode::decode(bytes);
    std::vector<Cid> wants;
    for (const DagLink& link : node.links) {
      const std::string leaf_hex = link.cid.digest_hex();
      if (store_.has_block(link.cid.digest) || fetch_->pending.count(leaf_hex)) continue;
      fetch_->pending.insert(leaf_hex);
      fetch_->codecs[leaf_hex] = link.cid.codec;
      wants.push_back(link.cid);
    }
    request(*fetch_, wants);
  }
}

void CasNode::verify_erase_authority(const Cid& cid, const identity::Certificate& requester,
                                     const Bytes& proof,
                                     const std::optional<Delegation>& delegation) const {
  const auto owner = registry_->owner(cid);
  if (!owner) {
    throw Error(ErrorCode::not_found, "no owner recorded for " + cid.to_string());
  }
  if (msp_) {
    const auto result = msp_->verify(requester, net_ ? net_->now() : 0);
    if (!result.accepted()) {
      throw Error(ErrorCode::identity_rejected, result.reason());
    }
  }
  if (!crypto::verify_signature(requester.public_key, erase_request_bytes(cid), proof)) {
    throw Error(ErrorCode::not_owner, "erase request signature does not verify");
  }
  if (requester.fingerprint() == *owner) {
    return;
  }
  if (!delegation) {
    throw Error(ErrorCode::not_owner, "requester is not the owner and holds no delegation");
  }
  if (delegation->cid != cid || delegation->delegate_fingerprint != requester.fingerprint() ||
      delegation->owner_cert.fingerprint() != *owner ||
      !crypto::verify_signature(delegation->owner_cert.public_key, delegation->signing_bytes(),
                                delegation->owner_signature)) {
    throw Error(ErrorCode::not_owner, "delegation does not verify");
  }
}

ErasureReceipt CasNode::erase(const Cid& cid, const identity::Certificate& requester,
                              const Bytes& proof, const std::optional<Delegation>& delegation) {
  if (!registry_) {
    throw Error(ErrorCode::not_found, "node has no registry");
  }
  verify_erase_authority(cid, requester, proof, delegation);

  ErasureReceipt receipt;
  receipt.cid = cid;
  receipt.requester_fingerprint = requester.fingerprint();
  receipt.tick = net_ ? net_->now() : 0;

  store_.erase_root(cid);
  registry_->unregister_all(cid);

  if (net_) {
    ByteWriter w;
    w.raw(cid.encode());
    w.var_bytes(requester.encode());
    w.var_bytes(proof);
    w.u8(delegation ? 1 : 0);
    if (delegation) w.var_bytes(delegation->encode());
    for (const std::string& other : registry_->nodes()) {
      if (other == node_id_ || !net_->has_node(other)) continue;
      net_->send(node_id_, other, kEraseKind, w.data());
      ++receipt.notices_sent;
    }
  }
  return receipt;
}

void CasNode::on_erase_notice(const netsim::Delivery& d) {
  ByteReader r(d.payload);
  const Cid cid = Cid::decode(r);
  const identity::Certificate requester = identity::Certificate::decode(r.var_bytes());
  const Bytes proof = r.var_bytes();
  std::optional<Delegation> delegation;
  if (r.u8() == 1) {
    delegation = Delegation::decode(r.var_bytes());
  }
  r.expect_end();

  // Owner fingerprints are recorded globally, so the notice can be
  // re-verified here; a forged notice is dropped.
  try {
    const auto owner = registry_->owner(cid);
    if (!owner) return;
    if (!crypto::verify_signature(requester.public_key, erase_request_bytes(cid), proof)) return;
    if (requester.fingerprint() != *owner) {
      if (!delegation || delegation->cid != cid ||
          delegation->delegate_fingerprint != requester.fingerprint() ||
          delegation->owner_cert.fingerprint() != *owner ||
          !crypto::verify_signature(delegation->owner_cert.public_key,
                                    delegation->signing_bytes(), delegation->owner_signature)) {
        return;
      }
    }
  } catch (const Error&) {
    return;
  }
  store_.erase_root(cid);
  registry_->unregister(cid, node_id_);
}

void CasNode::handle_message(const netsim::Delivery& d) {
  if (d.kind == kWantKind) {
    on_want(d);
  } else if (d.kind == kBlockKind) {
    on_block(d);
  } else if (d.kind == kEraseKind) {
    on_erase_notice(d);
  }
}

}  // namespace threatmesh::cas
