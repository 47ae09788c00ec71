#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "threatmesh/cas.hpp"
#include "threatmesh/identity.hpp"
#include "threatmesh/ledger.hpp"
#include "threatmesh/netsim.hpp"

namespace threatmesh::sim {

struct OrgSpec {
  std::string name;
  std::uint32_t peers = 1;
};

struct ScenarioConfig {
  std::vector<OrgSpec> orgs;
  std::uint32_t endorsement_required = 2;
  netsim::NetConfig net;
  std::vector<ledger::CollectionSpec> collections;
  ledger::OrdererConfig orderer;
  std::string channel_name = "threatnet";
  std::uint64_t cert_validity_ticks = 1'000'000'000;
  cas::CasConfig cas;
  std::uint64_t op_timeout_ticks = 10'000;

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig default_config();  // 3 orgs, 2-of-3, grants = org1+org2
};

// One client entity: certificate, DID, a CAS node, and (for senders) the
// retained content keys that make later grants possible.
struct Actor {
  std::string name;  // also the netsim node id, e.g. "org1.client"
  std::string org;
  identity::Certificate cert;
  crypto::SigningKeyPair keys;
  std::string did;
  identity::DidDocument did_doc;
  std::unique_ptr<cas::CasNode> cas_node;
  std::map<std::string, Bytes> content_keys;  // cid text -> content key
};

struct TxStats {
  std::uint64_t begin_tick = 0;
  std::uint64_t submit_tick = 0;
  std::uint64_t order_tick = 0;
  std::uint64_t commit_tick = 0;  // latest peer commit
  bool submitted = false;
  bool ordered = false;
  std::optional<ErrorCode> error;  // endorsement-time failure
  std::string error_message;
};

// One deterministic multi-organization run: all peers, the orderer, clients,
// and CAS nodes wired over one discrete-event network. Heap-only because the
// network handlers capture `this`.
class Simulation {
 public:
  static std::unique_ptr<Simulation> create(const ScenarioConfig& config);
  static std::unique_ptr<Simulation> load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const ScenarioConfig& config() const { return config_; }
  netsim::Network& net() { return *net_; }
  const netsim::Network& net() const { return *net_; }
  identity::Msp& msp() { return msp_; }
  crypto::Rng& rng() { return net_->rng(); }
  std::uint64_t now() const { return net_->now(); }
  const ledger::ChannelConfig& channel() const { return channel_; }
  cas::ProviderRegistry& providers() { return providers_; }

  Actor& actor(const std::string& name);
  const std::map<std::string, Actor>& actors() const { return actors_; }
  Actor& add_client(const std::string& org, const std::string& label);

  std::vector<ledger::Peer*> peers();
  std::vector<const ledger::Peer*> peers() const;
  ledger::Peer& peer(const std::string& node_id);
  ledger::Peer& any_peer_of(const std::string& org);
  identity::CertificateAuthority& ca(const std::string& org);

  // Orgs a client asks for endorsement by default: the private-collection
  // members when the contract writes private data, otherwise the first
  // policy-required orgs.
  std::vector<std::string> default_endorse_orgs(bool private_write) const;

  // Client pipeline: sends endorse requests; the client auto-submits to the
  // orderer once every requested org has answered.
  Digest begin_proposal(const std::string& actor_name, const std::string& contract,
                        const std::string& operation, std::vector<Bytes> args,
                        const std::vector<std::string>& endorse_orgs);

  // Manual path for under-endorsed or hand-crafted flows.
  ledger::Peer::EndorseResult endorse_direct(const std::string& peer_id,
                                             const ledger::Proposal& proposal);
  Digest submit(const std::string& actor_name, const ledger::Proposal& proposal,
                std::vector<ledger::Endorsement> endorsements);

  // Pumps the network until the transaction is committed on every peer or has
  // failed at endorsement; throws the mapped error otherwise.
  ledger::TxFlag run_tx(const Digest& txid);
  std::optional<ledger::TxFlag> tx_flag(const Digest& txid) const;
  bool tx_committed_everywhere(const Digest& txid) const;
  const TxStats* stats(const Digest& txid) const;
  const std::map<std::string, TxStats>& all_stats() const { return stats_; }

  void revoke_cert(std::uint64_t serial);  // searches the issuing org's CA

  std::uint64_t chain_height() const;

 private:
  Simulation() = default;

  void wire_nodes();
  void install_contracts(ledger::Peer& peer);
  Actor& make_actor(const std::string& org, const std::string& label);
  void publish_did(Actor& actor);
  void on_client_message(const std::string& client, const netsim::Delivery& d);
  void on_peer_message(std::size_t peer_index, const netsim::Delivery& d);
  void on_orderer_message(const netsim::Delivery& d);
  void orderer_pump();
  void broadcast_block(const ledger::LedgerBlock& block);

  struct PendingOp {
    ledger::Proposal proposal;
    std::size_t expected = 0;
    std::vector<ledger::Endorsement> endorsements;
  };

  ScenarioConfig config_;
  std::unique_ptr<netsim::Network> net_;
  identity::Msp msp_;
  ledger::ChannelConfig channel_;
  cas::ProviderRegistry providers_;
  std::map<std::string, identity::CertificateAuthority> cas_by_org_;
  std::vector<std::unique_ptr<ledger::Peer>> peers_;
  std::map<std::string, std::size_t> peer_index_;
  std::map<std::string, identity::Certificate> peer_certs_;
  std::map<std::string, crypto::SigningKeyPair> node_keys_;  // peers + orderer
  std::unique_ptr<ledger::SoloOrderer> orderer_;
  identity::Certificate orderer_cert_;
  std::map<std::string, Actor> actors_;
  std::map<std::string, PendingOp> pending_;  // txid hex ->
  std::map<std::string, TxStats> stats_;
  bool orderer_wakeup_scheduled_ = false;
};

}  // namespace threatmesh::sim
