#include "threatmesh/sim.hpp"

#include <algorithm>
#include <fstream>

#include "threatmesh/threatshare.hpp"

namespace threatmesh::sim {

using nlohmann::json;

namespace {

constexpr const char* kEndorseReq = "endorse_req";
constexpr const char* kEndorseResp = "endorse_resp";
constexpr const char* kSubmit = "submit";
constexpr const char* kBlock = "block";
constexpr const char* kPrivateData = "private_data";

std::string peer_node_id(const std::string& org, std::uint32_t index) {
  return org + ".peer" + std::to_string(index);
}

std::string client_node_id(const std::string& org, const std::string& label) {
  return org + "." + label;
}

json keypair_to_json(const crypto::SigningKeyPair& keys) {
  return {{"public_key", hex_encode(keys.public_key)},
          {"secret_key", hex_encode(keys.secret_key)}};
}

crypto::SigningKeyPair keypair_from_json(const json& j) {
  crypto::SigningKeyPair keys;
  keys.public_key = hex_decode(j.at("public_key").get<std::string>());
  keys.secret_key = hex_decode(j.at("secret_key").get<std::string>());
  return keys;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::config_error, "cannot write " + path.string());
  }
  out << text;
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::config_error, "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::config_error, "cannot read " + path.string());
  }
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Bytes read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::config_error, "cannot read " + path.string());
  }
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

void ScenarioConfig::validate() const {
  if (orgs.empty()) {
    throw Error(ErrorCode::config_error, "need at least one organization");
  }
  std::set<std::string> names;
  for (const OrgSpec& org : orgs) {
    if (org.name.empty() || org.peers < 1) {
      throw Error(ErrorCode::config_error, "org needs a name and at least one peer");
    }
    if (!names.insert(org.name).second) {
      throw Error(ErrorCode::config_error, "duplicate org name " + org.name);
    }
  }
  if (endorsement_required < 1 || endorsement_required > orgs.size()) {
    throw Error(ErrorCode::config_error,
                "endorsement_required must be between 1 and the org count");
  }
  net.validate();
  for (const ledger::CollectionSpec& spec : collections) {
    for (const std::string& member : spec.member_orgs) {
      if (!names.count(member)) {
        throw Error(ErrorCode::config_error,
                    "collection " + spec.name + " names unknown org " + member);
      }
    }
    if (spec.member_orgs.size() < endorsement_required) {
      throw Error(ErrorCode::config_error,
                  "collection " + spec.name + " has fewer members than the endorsement policy");
    }
  }
}

json ScenarioConfig::to_json() const {
  json j;
  j["channel"] = channel_name;
  j["endorsement_required"] = endorsement_required;
  j["cert_validity_ticks"] = cert_validity_ticks;
  j["op_timeout_ticks"] = op_timeout_ticks;
  j["orgs"] = json::array();
  for (const OrgSpec& org : orgs) {
    j["orgs"].push_back({{"name", org.name}, {"peers", org.peers}});
  }
  j["net"] = {{"seed", net.seed},
              {"latency_min", net.latency_min},
              {"latency_max", net.latency_max},
              {"loss_rate", net.loss_rate}};
  if (!net.partitions.empty()) {
    json pairs = json::array();
    for (const auto& [a, b] : net.partitions) pairs.push_back({a, b});
    j["net"]["partitions"] = std::move(pairs);
  }
  j["orderer"] = {{"batch_size", orderer.batch_size},
                  {"batch_timeout_ticks", orderer.batch_timeout_ticks},
                  {"cut_cost_ticks", orderer.cut_cost_ticks}};
  j["cas"] = {{"chunk_size", cas.chunk_size},
              {"capacity_bytes", cas.capacity_bytes},
              {"replicate_on_fetch", cas.replicate_on_fetch},
              {"want_timeout_ticks", cas.want_timeout_ticks}};
  j["collections"] = json::array();
  for (const ledger::CollectionSpec& spec : collections) {
    json members = json::array();
    for (const std::string& org : spec.member_orgs) members.push_back(org);
    j["collections"].push_back({{"name", spec.name}, {"members", members}});
  }
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  ScenarioConfig cfg;
  cfg.channel_name = j.value("channel", cfg.channel_name);
  cfg.endorsement_required = j.value("endorsement_required", cfg.endorsement_required);
  cfg.cert_validity_ticks = j.value("cert_validity_ticks", cfg.cert_validity_ticks);
  cfg.op_timeout_ticks = j.value("op_timeout_ticks", cfg.op_timeout_ticks);
  cfg.orgs.clear();
  for (const json& org : j.at("orgs")) {
    cfg.orgs.push_back({org.at("name").get<std::string>(), org.value("peers", 1u)});
  }
  if (j.contains("net")) {
    const json& n = j["net"];
    cfg.net.seed = n.value("seed", cfg.net.seed);
    cfg.net.latency_min = n.value("latency_min", cfg.net.latency_min);
    cfg.net.latency_max = n.value("latency_max", cfg.net.latency_max);
    cfg.net.loss_rate = n.value("loss_rate", cfg.net.loss_rate);
    if (n.contains("partitions")) {
      for (const json& pair : n["partitions"]) {
        std::string a = pair.at(0).get<std::string>();
        std::string b = pair.at(1).get<std::string>();
        if (b < a) std::swap(a, b);
        cfg.net.partitions.insert({a, b});
      }
    }
  }
  if (j.contains("orderer")) {
    const json& o = j["orderer"];
    cfg.orderer.batch_size = o.value("batch_size", cfg.orderer.batch_size);
    cfg.orderer.batch_timeout_ticks =
        o.value("batch_timeout_ticks", cfg.orderer.batch_timeout_ticks);
    cfg.orderer.cut_cost_ticks = o.value("cut_cost_ticks", cfg.orderer.cut_cost_ticks);
  }
  if (j.contains("cas")) {
    const json& c = j["cas"];
    cfg.cas.chunk_size = c.value("chunk_size", cfg.cas.chunk_size);
    cfg.cas.capacity_bytes = c.value("capacity_bytes", cfg.cas.capacity_bytes);
    cfg.cas.replicate_on_fetch = c.value("replicate_on_fetch", cfg.cas.replicate_on_fetch);
    cfg.cas.want_timeout_ticks = c.value("want_timeout_ticks", cfg.cas.want_timeout_ticks);
  }
  if (j.contains("collections")) {
    cfg.collections.clear();
    for (const json& spec : j["collections"]) {
      ledger::CollectionSpec cs;
      cs.name = spec.at("name").get<std::string>();
      for (const json& member : spec.at("members")) {
        cs.member_orgs.insert(member.get<std::string>());
      }
      cfg.collections.push_back(std::move(cs));
    }
  }
  return cfg;
}

ScenarioConfig ScenarioConfig::default_config() {
  ScenarioConfig cfg;
  cfg.orgs = {{"org1", 1}, {"org2", 1}, {"org3", 1}};
  cfg.endorsement_required = 2;
  cfg.net.seed = 42;
  cfg.net.latency_min = 1;
  cfg.net.latency_max = 3;
  cfg.collections.push_back({threatshare::kGrantsCollection, {"org1", "org2"}});
  return cfg;
}

Actor& Simulation::make_actor(const std::string& org, const std::string& label) {
  auto& ca = cas_by_org_.at(org);
  const std::string node_id = client_node_id(org, label);
  auto issued = ca.issue(node_id, org, identity::Role::client, net_->now(),
                         net_->now() + config_.cert_validity_ticks, rng());
  Actor actor;
  actor.name = node_id;
  actor.org = org;
  actor.cert = std::move(issued.cert);
  actor.keys = std::move(issued.keys);
  actor.did = identity::did_for(actor.cert.public_key);
  actor.did_doc = identity::make_did_document(actor.cert, actor.keys);
  actor.cas_node =
      std::make_unique<cas::CasNode>(node_id, &providers_, net_.get(), &msp_, config_.cas);
  auto [it, _] = actors_.emplace(node_id, std::move(actor));

  Actor* stored = &it->second;
  net_->register_node(node_id, stored->keys, [this, node_id](const netsim::Delivery& d) {
    on_client_message(node_id, d);
  });
  return it->second;
}

void Simulation::publish_did(Actor& actor) {
  const Bytes doc_bytes = to_bytes(actor.did_doc.canonical_json(true));
  const cas::Cid cid = actor.cas_node->put_bytes(doc_bytes, actor.cert.fingerprint());
  const Digest txid = begin_proposal(
      actor.name, "didregistry", "register",
      {to_bytes(actor.did), to_bytes(cid.to_string())}, default_endorse_orgs(false));
  run_tx(txid);
}

std::unique_ptr<Simulation> Simulation::create(const ScenarioConfig& config) {
  config.validate();
  auto sim = std::unique_ptr<Simulation>(new Simulation());
  sim->config_ = config;
  sim->net_ = std::make_unique<netsim::Network>(config.net);

  // Identity material: one CA per organization, MSP shared by every node.
  // Disjoint serial bases keep serial numbers unique across CAs.
  std::uint64_t serial_base = 1'000'000;
  for (const OrgSpec& org : config.orgs) {
    auto ca = identity::CertificateAuthority::init(org.name + "-ca", org.name, sim->rng(), 0,
                                                   config.cert_validity_ticks, serial_base);
    serial_base += 1'000'000;
    sim->msp_.add_org(org.name, ca.root(), ca.crl());
    sim->cas_by_org_.emplace(org.name, std::move(ca));
  }

  sim->channel_.name = config.channel_name;
  for (const OrgSpec& org : config.orgs) sim->channel_.member_orgs.insert(org.name);
  sim->channel_.policy.required_orgs = config.endorsement_required;
  sim->channel_.policy.member_orgs = sim->channel_.member_orgs;
  sim->channel_.collections = config.collections;
  sim->channel_.policy.validate();

  const ledger::LedgerBlock genesis = ledger::make_genesis(sim->channel_);

  for (const OrgSpec& org : config.orgs) {
    auto& ca = sim->cas_by_org_.at(org.name);
    for (std::uint32_t i = 0; i < org.peers; ++i) {
      const std::string node_id = peer_node_id(org.name, i);
      auto issued = ca.issue(node_id, org.name, identity::Role::peer, 0,
                             config.cert_validity_ticks, sim->rng());
      sim->peer_certs_[node_id] = issued.cert;
      sim->node_keys_[node_id] = issued.keys;
      auto peer = std::make_unique<ledger::Peer>(node_id, org.name, std::move(issued.cert),
                                                 std::move(issued.keys), &sim->msp_,
                                                 sim->channel_, genesis);
      sim->install_contracts(*peer);
      sim->peer_index_[node_id] = sim->peers_.size();
      sim->peers_.push_back(std::move(peer));
    }
  }

  {
    auto& ca = sim->cas_by_org_.at(config.orgs.front().name);
    auto issued = ca.issue("orderer0", config.orgs.front().name, identity::Role::orderer, 0,
                           config.cert_validity_ticks, sim->rng());
    sim->orderer_cert_ = std::move(issued.cert);
    sim->node_keys_["orderer0"] = std::move(issued.keys);
    sim->orderer_ = std::make_unique<ledger::SoloOrderer>(config.orderer, genesis, &sim->msp_);
  }

  sim->wire_nodes();

  for (const OrgSpec& org : config.orgs) {
    Actor& actor = sim->make_actor(org.name, "client");
    sim->publish_did(actor);
  }
  return sim;
}

void Simulation::install_contracts(ledger::Peer& peer) {
  peer.install(std::make_shared<threatshare::ThreatShareContract>());
  peer.install(std::make_shared<threatshare::DidRegistryContract>());
}

void Simulation::wire_nodes() {
  for (std::size_t i = 0; i < peers_.size(); ++i) {
    const std::string node_id = peers_[i]->name();
    net_->register_node(node_id, node_keys_.at(node_id),
                        [this, i](const netsim::Delivery& d) { on_peer_message(i, d); });
  }
  net_->register_node("orderer0", node_keys_.at("orderer0"),
                      [this](const netsim::Delivery& d) { on_orderer_message(d); });
}

std::vector<ledger::Peer*> Simulation::peers() {
  std::vector<ledger::Peer*> out;
  for (auto& p : peers_) out.push_back(p.get());
  return out;
}

std::vector<const ledger::Peer*> Simulation::peers() const {
  std::vector<const ledger::Peer*> out;
  for (const auto& p : peers_) out.push_back(p.get());
  return out;
}

Actor& Simulation::actor(const std::string& name) {
  const auto it = actors_.find(name);
  if (it == actors_.end()) {
    throw Error(ErrorCode::unknown_node, "no actor " + name);
  }
  return it->second;
}

Actor& Simulation::add_client(const std::string& org, const std::string& label) {
  if (!cas_by_org_.count(org)) {
    throw Error(ErrorCode::unknown_node, "no org " + org);
  }
  Actor& actor = make_actor(org, label);
  publish_did(actor);
  return actor;
}

ledger::Peer& Simulation::peer(const std::string& node_id) {
  const auto it = peer_index_.find(node_id);
  if (it == peer_index_.end()) {
    throw Error(ErrorCode::unknown_node, "no peer " + node_id);
  }
  return *peers_[it->second];
}

ledger::Peer& Simulation::any_peer_of(const std::string& org) {
  for (auto& p : peers_) {
    if (p->org() == org) return *p;
  }
  throw Error(ErrorCode::unknown_node, "no peer in org " + org);
}

identity::CertificateAuthority& Simulation::ca(const std::string& org) {
  const auto it = cas_by_org_.find(org);
  if (it == cas_by_org_.end()) {
    throw Error(ErrorCode::unknown_node, "no org " + org);
  }
  return it->second;
}

std::vector<std::string> Simulation::default_endorse_orgs(bool private_write) const {
  std::vector<std::string> orgs;
  if (private_write) {
    const ledger::CollectionSpec* spec = channel_.collection(threatshare::kGrantsCollection);
    if (spec) {
      orgs.assign(spec->member_orgs.begin(), spec->member_orgs.end());
      return orgs;
    }
  }
  for (const std::string& org : channel_.member_orgs) {
    orgs.push_back(org);
    if (orgs.size() == channel_.policy.required_orgs) break;
  }
  return orgs;
}

Digest Simulation::begin_proposal(const std::string& actor_name, const std::string& contract,
                                  const std::string& operation, std::vector<Bytes> args,
                                  const std::vector<std::string>& endorse_orgs) {
  Actor& a = actor(actor_name);
  const ledger::Proposal proposal =
      ledger::make_proposal(channel_.name, contract, operation, std::move(args), a.cert,
                            a.keys.secret_key, rng());
  const Digest txid = proposal.txid();
  const std::string txid_hex = hex_encode(txid);

  PendingOp op;
  op.proposal = proposal;
  op.expected = endorse_orgs.size();
  pending_[txid_hex] = std::move(op);
  stats_[txid_hex].begin_tick = net_->now();

  for (const std::string& org : endorse_orgs) {
    net_->send(actor_name, peer_node_id(org, 0), kEndorseReq, proposal.encode());
  }
  return txid;
}

ledger::Peer::EndorseResult Simulation::endorse_direct(const std::string& peer_id,
                                                       const ledger::Proposal& proposal) {
  ledger::Peer& p = peer(peer_id);
  auto result = p.endorse(proposal, net_->now());
  // In-process distribution of the private values to member peers, matching
  // what the networked path does with private_data messages.
  const Digest txid = proposal.txid();
  for (const auto& value : result.private_values) {
    const ledger::CollectionSpec* spec = channel_.collection(value.collection);
    if (!spec) continue;
    for (auto& member : peers_) {
      if (spec->member_orgs.count(member->org())) {
        member->cache_private_value(txid, value.collection, value.key, value.value);
      }
    }
  }
  return result;
}

Digest Simulation::submit(const std::string& actor_name, const ledger::Proposal& proposal,
                          std::vector<ledger::Endorsement> endorsements) {
  if (proposal.channel != channel_.name) {
    throw Error(ErrorCode::channel_unknown, proposal.channel);
  }
  Actor& a = actor(actor_name);
  ledger::Transaction tx;
  tx.proposal = proposal;
  tx.endorsements = std::move(endorsements);
  const Digest txid = proposal.txid();
  const std::string txid_hex = hex_encode(txid);
  auto& stats = stats_[txid_hex];
  if (stats.begin_tick == 0) stats.begin_tick = net_->now();
  stats.submitted = true;
  stats.submit_tick = net_->now();
  net_->send(a.name, "orderer0", kSubmit, tx.encode());
  return txid;
}

void Simulation::on_client_message(const std::string& client, const netsim::Delivery& d) {
  Actor& a = actor(client);
  if (d.kind == kEndorseResp) {
    ByteReader r(d.payload);
    const Digest txid = r.digest32();
    const std::string txid_hex = hex_encode(txid);
    const auto it = pending_.find(txid_hex);
    if (it == pending_.end()) return;
    const bool ok = r.u8() == 1;
    if (!ok) {
      const auto code = static_cast<ErrorCode>(r.u8());
      auto& stats = stats_[txid_hex];
      stats.error = code;
      stats.error_message = r.str();
      pending_.erase(it);
      return;
    }
    it->second.endorsements.push_back(ledger::Endorsement::decode(r.var_bytes()));
    if (it->second.endorsements.size() == it->second.expected) {
      PendingOp op = std::move(it->second);
      pending_.erase(it);
      submit(client, op.proposal, std::move(op.endorsements));
    }
    return;
  }
  if (d.kind == cas::CasNode::kWantKind || d.kind == cas::CasNode::kBlockKind ||
      d.kind == cas::CasNode::kEraseKind) {
    a.cas_node->handle_message(d);
  }
}

void Simulation::on_peer_message(std::size_t peer_index, const netsim::Delivery& d) {
  ledger::Peer& p = *peers_[peer_index];
  if (d.kind == kEndorseReq) {
    const ledger::Proposal proposal = ledger::Proposal::decode(d.payload);
    const Digest txid = proposal.txid();
    ByteWriter resp;
    resp.raw(txid);
    try {
      auto result = p.endorse(proposal, net_->now());
      resp.u8(1);
      resp.var_bytes(result.endorsement.encode());
      // Forward private values to every member-org peer; the endorser itself
      // caches directly.
      for (const auto& value : result.private_values) {
        const ledger::CollectionSpec* spec = channel_.collection(value.collection);
        if (!spec) continue;
        ByteWriter pd;
        pd.raw(txid);
        pd.str(value.collection);
        pd.str(value.key);
        pd.var_bytes(value.value);
        for (auto& member : peers_) {
          if (!spec->member_orgs.count(member->org())) continue;
          if (member->name() == p.name()) {
            p.cache_private_value(txid, value.collection, value.key, value.value);
          } else {
            net_->send(p.name(), member->name(), kPrivateData, pd.data());
          }
        }
      }
    } catch (const Error& e) {
      resp.u8(0);
      resp.u8(static_cast<std::uint8_t>(e.code()));
      resp.str(e.what());
    }
    net_->send(p.name(), d.from, kEndorseResp, resp.data());
    return;
  }
  if (d.kind == kBlock) {
    ledger::LedgerBlock block = ledger::LedgerBlock::decode(d.payload);
    p.validate_and_commit(std::move(block));
    for (const ledger::Transaction& tx : p.chain().back().transactions) {
      auto& stats = stats_[hex_encode(tx.proposal.txid())];
      stats.commit_tick = std::max(stats.commit_tick, net_->now());
    }
    return;
  }
  if (d.kind == kPrivateData) {
    ByteReader r(d.payload);
    const Digest txid = r.digest32();
    const std::string collection = r.str();
    const std::string key = r.str();
    Bytes value = r.var_bytes();
    r.expect_end();
    p.cache_private_value(txid, collection, key, std::move(value));
    return;
  }
}

void Simulation::on_orderer_message(const netsim::Delivery& d) {
  if (d.kind != kSubmit) return;
  ledger::Transaction tx = ledger::Transaction::decode(d.payload);
  if (tx.proposal.channel != channel_.name) {
    return;  // unknown channel: dropped at ordering, surfaced client-side
  }
  const std::string txid_hex = hex_encode(tx.proposal.txid());
  orderer_->submit(std::move(tx), net_->now());
  auto& stats = stats_[txid_hex];
  if (!stats.submitted) {
    stats.submitted = true;
    stats.submit_tick = net_->now();
  }
  orderer_pump();
}

void Simulation::orderer_pump() {
  const std::vector<ledger::LedgerBlock> blocks = orderer_->try_cut(net_->now());
  for (const ledger::LedgerBlock& block : blocks) {
    for (const ledger::Transaction& tx : block.transactions) {
      auto& stats = stats_[hex_encode(tx.proposal.txid())];
      stats.ordered = true;
      stats.order_tick = net_->now();
    }
    broadcast_block(block);
  }
  if (orderer_->pending_count() > 0 && !orderer_wakeup_scheduled_) {
    const auto wakeup = orderer_->next_wakeup(net_->now());
    if (wakeup) {
      orderer_wakeup_scheduled_ = true;
      net_->schedule(*wakeup, [this] {
        orderer_wakeup_scheduled_ = false;
        orderer_pump();
      });
    }
  }
}

void Simulation::broadcast_block(const ledger::LedgerBlock& block) {
  const Bytes bytes = block.encode();
  for (auto& p : peers_) {
    net_->send("orderer0", p->name(), kBlock, bytes);
  }
}

ledger::TxFlag Simulation::run_tx(const Digest& txid) {
  const std::string txid_hex = hex_encode(txid);
  net_->run_until(
      [&] {
        const auto it = stats_.find(txid_hex);
        if (it != stats_.end() && it->second.error) return true;
        return tx_committed_everywhere(txid);
      },
      config_.op_timeout_ticks);

  const auto it = stats_.find(txid_hex);
  if (it != stats_.end() && it->second.error) {
    throw Error(*it->second.error, it->second.error_message);
  }
  if (!tx_committed_everywhere(txid)) {
    throw Error(ErrorCode::timeout, "transaction " + txid_hex + " did not commit");
  }
  return *tx_flag(txid);
}

std::optional<ledger::TxFlag> Simulation::tx_flag(const Digest& txid) const {
  if (peers_.empty()) return std::nullopt;
  const auto info = peers_.front()->committed(txid);
  if (!info) return std::nullopt;
  return info->flag;
}

bool Simulation::tx_committed_everywhere(const Digest& txid) const {
  for (const auto& p : peers_) {
    if (!p->committed(txid)) return false;
  }
  return true;
}

const TxStats* Simulation::stats(const Digest& txid) const {
  const auto it = stats_.find(hex_encode(txid));
  return it == stats_.end() ? nullptr : &it->second;
}

void Simulation::revoke_cert(std::uint64_t serial) {
  for (auto& [org, ca] : cas_by_org_) {
    if (ca.has_issued(serial)) {
      ca.revoke(serial, net_->now());
      msp_.update_crl(org, ca.crl());
      return;
    }
  }
  throw Error(ErrorCode::unknown_serial, "serial " + std::to_string(serial));
}

std::uint64_t Simulation::chain_height() const {
  return peers_.empty() ? 0 : peers_.front()->height();
}

void Simulation::save(const std::filesystem::path& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_file(dir / "config.json", config_.to_json().dump(2) + "\n");

  json meta;
  meta["tick"] = net_->now();
  meta["rng_seed"] = hex_encode(net_->rng().seed());
  meta["rng_counter"] = net_->rng().counter();
  write_file(dir / "meta.json", meta.dump(2) + "\n");

  json identities;
  identities["cas"] = json::object();
  for (const auto& [org, ca] : cas_by_org_) {
    identities["cas"][org] = json::parse(ca.to_json());
  }
  identities["orderer"] = {{"cert", hex_encode(orderer_cert_.encode())},
                           {"keys", keypair_to_json(node_keys_.at("orderer0"))}};
  identities["peers"] = json::object();
  for (const auto& p : peers_) {
    identities["peers"][p->name()] = {{"org", p->org()},
                                      {"cert", hex_encode(peer_certs_.at(p->name()).encode())},
                                      {"keys", keypair_to_json(node_keys_.at(p->name()))}};
  }
  identities["actors"] = json::object();
  for (const auto& [name, actor] : actors_) {
    json a;
    a["org"] = actor.org;
    a["cert"] = hex_encode(actor.cert.encode());
    a["keys"] = keypair_to_json(actor.keys);
    a["did"] = actor.did;
    a["did_doc"] = json::parse(actor.did_doc.canonical_json(true));
    json content_keys = json::object();
    for (const auto& [cid, key] : actor.content_keys) content_keys[cid] = hex_encode(key);
    a["content_keys"] = std::move(content_keys);
    identities["actors"][name] = std::move(a);
  }
  write_file(dir / "identities.json", identities.dump(2) + "\n");

  // All peers hold byte-identical chains; persist one copy, one file per block.
  fs::create_directories(dir / "chain");
  const auto& chain = peers_.front()->chain();
  for (const ledger::LedgerBlock& block : chain) {
    write_file(dir / "chain" / ("blk" + std::to_string(block.number)), block.encode_file());
  }

  fs::create_directories(dir / "private");
  for (const auto& p : peers_) {
    json priv = json::object();
    for (const auto& [collection, kv] : p->state().private_entries()) {
      json entries = json::object();
      for (const auto& [key, sv] : kv) {
        entries[key] = {{"value", hex_encode(sv.value)},
                        {"block", sv.version.block},
                        {"tx", sv.version.tx}};
      }
      priv[collection] = std::move(entries);
    }
    write_file(dir / "private" / (p->name() + ".json"), priv.dump(2) + "\n");
  }

  write_file(dir / "cas_registry.json", providers_.to_json() + "\n");
  for (const auto& [name, actor] : actors_) {
    actor.cas_node->store().save(dir / "cas" / name);
  }
}

std::unique_ptr<Simulation> Simulation::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  const ScenarioConfig config =
      ScenarioConfig::from_json(json::parse(read_text(dir / "config.json")));
  config.validate();

  auto sim = std::unique_ptr<Simulation>(new Simulation());
  sim->config_ = config;
  sim->net_ = std::make_unique<netsim::Network>(config.net);

  const json meta = json::parse(read_text(dir / "meta.json"));
  sim->net_->set_now(meta.at("tick").get<std::uint64_t>());

  const json identities = json::parse(read_text(dir / "identities.json"));
  for (const auto& [org, ca_json] : identities.at("cas").items()) {
    auto ca = identity::CertificateAuthority::from_json(ca_json.dump());
    sim->msp_.add_org(org, ca.root(), ca.crl());
    sim->cas_by_org_.emplace(org, std::move(ca));
  }

  sim->channel_.name = config.channel_name;
  for (const OrgSpec& org : config.orgs) sim->channel_.member_orgs.insert(org.name);
  sim->channel_.policy.required_orgs = config.endorsement_required;
  sim->channel_.policy.member_orgs = sim->channel_.member_orgs;
  sim->channel_.collections = config.collections;

  // Chain files: genesis plus committed blocks, flags included.
  std::vector<ledger::LedgerBlock> chain;
  for (std::uint64_t n = 0;; ++n) {
    const fs::path path = dir / "chain" / ("blk" + std::to_string(n));
    if (!fs::exists(path)) break;
    chain.push_back(ledger::LedgerBlock::decode_file(read_bytes(path)));
  }
  if (chain.empty()) {
    throw Error(ErrorCode::config_error, "state directory has no chain");
  }
  ledger::verify_chain(chain);

  for (const OrgSpec& org : config.orgs) {
    for (std::uint32_t i = 0; i < org.peers; ++i) {
      const std::string node_id = peer_node_id(org.name, i);
      const json& pj = identities.at("peers").at(node_id);
      identity::Certificate cert =
          identity::Certificate::decode(hex_decode(pj.at("cert").get<std::string>()));
      crypto::SigningKeyPair keys = keypair_from_json(pj.at("keys"));
      sim->peer_certs_[node_id] = cert;
      sim->node_keys_[node_id] = keys;
      auto peer = std::make_unique<ledger::Peer>(node_id, org.name, std::move(cert),
                                                 std::move(keys), &sim->msp_, sim->channel_,
                                                 chain.front());
      sim->install_contracts(*peer);
      for (std::size_t b = 1; b < chain.size(); ++b) {
        peer->apply_committed(chain[b]);
      }
      const json priv = json::parse(read_text(dir / "private" / (node_id + ".json")));
      for (const auto& [collection, entries] : priv.items()) {
        for (const auto& [key, sv] : entries.items()) {
          peer->state().put_private(
              collection, key, hex_decode(sv.at("value").get<std::string>()),
              {sv.at("block").get<std::uint64_t>(), sv.at("tx").get<std::uint32_t>()});
        }
      }
      sim->peer_index_[node_id] = sim->peers_.size();
      sim->peers_.push_back(std::move(peer));
    }
  }

  sim->orderer_cert_ =
      identity::Certificate::decode(hex_decode(identities.at("orderer").at("cert").get<std::string>()));
  sim->node_keys_["orderer0"] = keypair_from_json(identities.at("orderer").at("keys"));
  sim->orderer_ = std::make_unique<ledger::SoloOrderer>(config.orderer, chain.front(), &sim->msp_);
  sim->orderer_->restore_tail(chain.back());

  sim->wire_nodes();

  sim->providers_ = cas::ProviderRegistry::from_json(read_text(dir / "cas_registry.json"));
  for (const auto& [name, a] : identities.at("actors").items()) {
    Actor actor;
    actor.name = name;
    actor.org = a.at("org").get<std::string>();
    actor.cert = identity::Certificate::decode(hex_decode(a.at("cert").get<std::string>()));
    actor.keys = keypair_from_json(a.at("keys"));
    actor.did = a.at("did").get<std::string>();
    actor.did_doc = identity::DidDocument::from_json(a.at("did_doc").dump());
    for (const auto& [cid, key] : a.at("content_keys").items()) {
      actor.content_keys[cid] = hex_decode(key.get<std::string>());
    }
    actor.cas_node =
        std::make_unique<cas::CasNode>(name, &sim->providers_, sim->net_.get(), &sim->msp_,
                                       config.cas);
    actor.cas_node->store() = cas::BlockStore::load(dir / "cas" / name, config.cas);
    const std::string node_id = name;
    auto [it, _] = sim->actors_.emplace(name, std::move(actor));
    sim->net_->register_node(node_id, it->second.keys, [sp = sim.get(), node_id](
                                                           const netsim::Delivery& d) {
      sp->on_client_message(node_id, d);
    });
  }

  // Restore the deterministic stream last so setup-time draws do not differ
  // between a fresh create() and a reload.
  sim->net_->reseat_rng(digest_from_hex(meta.at("rng_seed").get<std::string>()),
                        meta.at("rng_counter").get<std::uint64_t>());
  return sim;
}

}  // namespace threatmesh::sim
