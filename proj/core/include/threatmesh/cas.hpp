#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "threatmesh/crypto.hpp"
#include "threatmesh/identity.hpp"
#include "threatmesh/netsim.hpp"

namespace threatmesh::cas {

enum class Codec : std::uint8_t { raw_leaf = 0, dag_node = 1 };
enum class HashAlgo : std::uint8_t { sha2_256 = 0 };

const char* codec_name(Codec codec);

struct Cid {
  Codec codec = Codec::raw_leaf;
  HashAlgo hash_algo = HashAlgo::sha2_256;
  Digest digest{};

  Bytes encode() const;
  static Cid decode(ByteReader& r);
  static Cid decode(const Bytes& bytes);

  // cid1:<codec>:<lowercase hex digest>
  std::string to_string() const;
  static Cid parse(std::string_view text);

  std::string digest_hex() const { return hex_encode(digest); }
  auto operator<=>(const Cid&) const = default;
};

Cid cid_for_block(Codec codec, const Bytes& bytes);

struct DagLink {
  Cid cid;
  std::uint64_t size = 0;

  friend bool operator==(const DagLink&, const DagLink&) = default;
};

// Canonical form: u32 link count, then per link a length-prefixed cid record
// and the size as 8 big-endian bytes. Bit-exact so node CIDs are stable.
struct DagNode {
  std::vector<DagLink> links;

  std::uint64_t total_size() const;
  Bytes encode() const;
  static DagNode decode(const Bytes& bytes);
};

constexpr std::size_t kChunkSize = 262144;  // 256 KiB

struct CasConfig {
  std::size_t chunk_size = kChunkSize;
  std::uint64_t capacity_bytes = UINT64_MAX;
  bool replicate_on_fetch = true;
  std::uint64_t want_timeout_ticks = 200;
};

struct ProviderRecord {
  Cid cid;
  std::string node_id;
  std::uint64_t registered_at = 0;
};

// Simulation-global provider lookup, standing in for the DHT. Also records
// the content owner fingerprint captured at put time and the set of live CAS
// nodes (the erasure-notice fanout list).
class ProviderRegistry {
 public:
  void register_node(const std::string& node_id);
  const std::set<std::string>& nodes() const { return node_ids_; }

  void register_provider(const Cid& cid, const std::string& node_id, std::uint64_t tick);
  void unregister(const Cid& cid, const std::string& node_id);
  void unregister_all(const Cid& cid);
  std::vector<std::string> providers(const Cid& cid) const;  // registration order
  const std::vector<ProviderRecord>& records(const Cid& cid) const;

  void record_owner(const Cid& cid, const std::string& owner_fingerprint);
  std::optional<std::string> owner(const Cid& cid) const;

  std::string to_json() const;
  static ProviderRegistry from_json(const std::string& text);

 private:
  std::set<std::string> node_ids_;
  std::map<std::string, std::vector<ProviderRecord>> providers_;  // cid text ->
  std::map<std::string, std::string> owners_;                     // cid text -> fp
};

// One node's block storage. Blocks are keyed by digest; each stored DAG root
// holds references on its blocks so shared chunks survive partial erasure.
class BlockStore {
 public:
  explicit BlockStore(CasConfig config = {}) : config_(config) {}

  struct PutResult {
    Cid cid;
    bool already_present = false;
  };
  PutResult put(const Bytes& content);

  Bytes get(const Cid& cid) const;  // verifies every block hash on the way out
  bool has_block(const Digest& digest) const;
  std::optional<Bytes> block(const Digest& digest) const;
  bool has_all(const Cid& cid) const;
  std::vector<Digest> missing_blocks(const Cid& cid) const;

  // Exchange path: store one verified block / adopt a completed root.
  void add_block(const Bytes& bytes);
  void adopt_root(const Cid& cid);
  bool has_root(const Cid& cid) const;

  // Removes the root's references and deletes blocks that drop to zero.
  // Returns the digests actually deleted.
  std::vector<Digest> erase_root(const Cid& cid);

  std::size_t block_count() const { return blocks_.size(); }
  std::uint64_t used_bytes() const { return used_bytes_; }
  std::vector<std::string> root_cids() const;
  const std::map<std::string, Bytes>& raw_blocks() const { return blocks_; }
  const CasConfig& config() const { return config_; }

  // Test hook: flip one byte in a stored block.
  void corrupt_block(const Digest& digest, std::size_t byte_index);
  void restore_block(const Digest& digest, const Bytes& bytes);

  void save(const std::filesystem::path& dir) const;
  static BlockStore load(const std::filesystem::path& dir, CasConfig config = {});

 private:
  std::vector<Digest> dag_blocks(const Cid& cid) const;
  void store_block(const std::string& hex, const Bytes& bytes);

  CasConfig config_;
  std::map<std::string, Bytes> blocks_;          // hex digest -> bytes
  std::map<std::string, int> refs_;              // hex digest -> root refs
  std::map<std::string, std::vector<std::string>> roots_;  // cid text -> block hexes
  std::uint64_t used_bytes_ = 0;
};

Bytes erase_request_bytes(const Cid& cid);

// Owner-signed statement authorizing one delegate to erase one cid.
struct Delegation {
  Cid cid;
  std::string delegate_fingerprint;
  identity::Certificate owner_cert;
  Bytes owner_signature;

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Delegation decode(const Bytes& bytes);
};

Delegation make_delegation(const Cid& cid, const std::string& delegate_fingerprint,
                           const identity::Certificate& owner_cert, const Bytes& owner_sk);

struct ErasureReceipt {
  Cid cid;
  std::string requester_fingerprint;
  std::uint64_t tick = 0;
  std::size_t notices_sent = 0;
};

// A content-addressed storage node: local block store plus the want-list
// exchange and erasure-notice behavior when wired to a network.
class CasNode {
 public:
  CasNode(std::string node_id, ProviderRegistry* registry, netsim::Network* net = nullptr,
          identity::Msp* msp = nullptr, CasConfig config = {});

  const std::string& id() const { return node_id_; }
  BlockStore& store() { return store_; }
  const BlockStore& store() const { return store_; }

  Cid put_bytes(const Bytes& content, const std::string& owner_fingerprint);
  Bytes get_bytes(const Cid& cid);
  std::vector<std::string> find_providers(const Cid& cid) const;

  // Pulls every missing block of cid from its providers. Pumps the network
  // until complete, a hash check fails twice, or the deadline passes.
  void exchange_want(const Cid& cid);

  ErasureReceipt erase(const Cid& cid, const identity::Certificate& requester,
                       const Bytes& proof, const std::optional<Delegation>& delegation = {});

  // Wire this node's message kinds into a netsim handler; the simulation
  // dispatches deliveries here.
  void handle_message(const netsim::Delivery& d);

  struct ExchangeStats {
    std::size_t want_entries_sent = 0;
    std::size_t blocks_received = 0;
    std::size_t integrity_failures = 0;
  };
  const ExchangeStats& last_exchange_stats() const { return exchange_stats_; }

  static constexpr const char* kWantKind = "cas_want";
  static constexpr const char* kBlockKind = "cas_block";
  static constexpr const char* kEraseKind = "cas_erase";

 private:
  struct FetchState {
    Cid root;
    std::set<std::string> pending;           // hex digests still missing
    std::map<std::string, Codec> codecs;     // hex digest -> codec
    std::map<std::string, int> attempts;
    std::vector<std::string> providers;
    std::size_t provider_cursor = 0;
    bool failed = false;
    ErrorCode fail_code = ErrorCode::timeout;
    std::string fail_reason;
    bool done() const { return pending.empty(); }
  };

  void request(FetchState& fetch, const std::vector<Cid>& cids);
  void on_want(const netsim::Delivery& d);
  void on_block(const netsim::Delivery& d);
  void on_erase_notice(const netsim::Delivery& d);
  void verify_erase_authority(const Cid& cid, const identity::Certificate& requester,
                              const Bytes& proof,
                              const std::optional<Delegation>& delegation) const;

  std::string node_id_;
  ProviderRegistry* registry_;
  netsim::Network* net_;
  identity::Msp* msp_;
  CasConfig config_;
  BlockStore store_;
  std::optional<FetchState> fetch_;
  ExchangeStats exchange_stats_;
};

}  // namespace threatmesh::cas
