#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "threatmesh/crypto.hpp"
#include "threatmesh/identity.hpp"

namespace threatmesh::ledger {

// World-state version: strictly increasing per key, exact enough for MVCC
// read-set checks. {0,0} marks a key that has never been written (the genesis
// block writes no state).
struct Version {
  std::uint64_t block = 0;
  std::uint32_t tx = 0;

  auto operator<=>(const Version&) const = default;
};

struct Proposal {
  std::string channel;
  std::string contract;
  std::string operation;
  std::vector<Bytes> args;
  identity::Certificate creator;
  std::array<std::uint8_t, 16> nonce{};
  Bytes creator_signature;

  Bytes signing_bytes() const;
  Bytes encode() const;
  static Proposal decode(const Bytes& bytes);
  Digest txid() const;  // sha256 of the full canonical encoding
};

Proposal make_proposal(const std::string& channel, const std::string& contract,
                       const std::string& operation, std::vector<Bytes> args,
                       const identity::Certificate& creator, const Bytes& creator_sk,
                       crypto::Rng& rng);

struct ReadItem {
  std::string key;
  Version version;

  friend bool operator==(const ReadItem&, const ReadItem&) = default;
};

struct WriteItem {
  std::string key;
  bool is_delete = false;
  Bytes value;

  friend bool operator==(const WriteItem&, const WriteItem&) = default;
};

struct PrivateWrite {
  std::string collection;
  std::string key;
  bool is_delete = false;
  Digest value_hash{};  // zero for deletes

  friend bool operator==(const PrivateWrite&, const PrivateWrite&) = default;
};

struct Endorsement {
  identity::Certificate endorser;
  std::vector<ReadItem> read_set;
  std::vector<WriteItem> write_set;
  std::vector<PrivateWrite> private_writes;
  Bytes signature;

  // The execution result alone; endorsements agree iff these bytes agree.
  Bytes result_bytes() const;
  Bytes signing_bytes(const Digest& txid) const;
  Bytes encode() const;
  static Endorsement decode(const Bytes& bytes);
};

struct EndorsementPolicy {
  std::uint32_t required_orgs = 1;
  std::set<std::string> member_orgs;

  void validate() const;
  bool satisfied_by(const std::set<std::string>& endorsing_orgs) const;
};

enum class TxFlag : std::uint8_t {
  valid = 0,
  bad_endorsement = 1,
  mvcc_conflict = 2,
  bad_identity = 3,
};

const char* tx_flag_name(TxFlag flag);

struct Transaction {
  Proposal proposal;
  std::vector<Endorsement> endorsements;

  Bytes encode() const;
  static Transaction decode(const Bytes& bytes);
};

struct CollectionSpec {
  std::string name;
  std::set<std::string> member_orgs;
};

struct ChannelConfig {
  std::string name = "threatnet";
  std::set<std::string> member_orgs;
  EndorsementPolicy policy;
  std::vector<CollectionSpec> collections;

  const CollectionSpec* collection(const std::string& name) const;
  Bytes encode() const;
  static ChannelConfig decode(const Bytes& bytes);
};

// Block hashes cover header_bytes() only (number, prev/data hash, cut tick,
// revocation snapshot), so peers can record validation flags next to a block
// without perturbing the chain. The revocation snapshot taken at cut time
// keeps identity validation bit-identical on every peer no matter when the
// block lands there.
struct LedgerBlock {
  std::uint64_t number = 0;
  Digest prev_hash{};
  Digest data_hash{};
  std::uint64_t cut_at = 0;
  std::map<std::string, std::set<std::uint64_t>> revoked;  // org -> serials
  std::vector<Transaction> transactions;
  std::optional<ChannelConfig> config;  // genesis only
  std::vector<TxFlag> flags;            // filled at commit

  Bytes header_bytes() const;
  Digest block_hash() const;
  Bytes data_bytes() const;
  Bytes encode() const;  // header + data; what the orderer broadcasts
  static LedgerBlock decode(const Bytes& bytes);
  Bytes encode_file() const;  // encode() + flags; the persisted blk<N> form
  static LedgerBlock decode_file(const Bytes& bytes);
};

LedgerBlock make_genesis(const ChannelConfig& config);

// Full structural audit: per-block data hash, numbering, and hash-chain
// linkage from genesis; when the caller pins the agreed chain head, the tip
// header is covered too. Throws IntegrityMismatch on the first violation.
void verify_chain(const std::vector<LedgerBlock>& chain,
                  const std::optional<Digest>& expected_tip = {});

struct StateValue {
  Bytes value;
  Version version;
};

class WorldState {
 public:
  std::optional<StateValue> get(const std::string& key) const;
  Version version_of(const std::string& key) const;
  void put(const std::string& key, Bytes value, Version version);
  void erase(const std::string& key);

  std::optional<StateValue> get_private(const std::string& collection,
                                        const std::string& key) const;
  std::optional<Digest> get_private_hash(const std::string& collection,
                                         const std::string& key) const;
  void put_private(const std::string& collection, const std::string& key, Bytes value,
                   Version version);
  void put_private_hash(const std::string& collection, const std::string& key,
                        const Digest& hash);
  void erase_private(const std::string& collection, const std::string& key);

  Digest public_state_hash() const;
  const std::map<std::string, StateValue>& public_entries() const { return public_kv_; }
  const std::map<std::string, std::map<std::string, StateValue>>& private_entries() const {
    return private_kv_;
  }
  const std::map<std::string, std::map<std::string, Digest>>& private_hash_entries() const {
    return private_hashes_;
  }

 private:
  std::map<std::string, StateValue> public_kv_;
  std::map<std::string, std::map<std::string, StateValue>> private_kv_;
  std::map<std::string, std::map<std::string, Digest>> private_hashes_;
};

// Endorsement-time contract execution context. Reads come from the peer's
// committed snapshot and are versioned into the read set; writes are staged.
class TxContext {
 public:
  TxContext(const WorldState& snapshot, const identity::Certificate& creator,
            const ChannelConfig& channel, std::string endorsing_org, std::uint64_t now);

  const identity::Certificate& creator() const { return creator_; }
  std::uint64_t now() const { return now_; }

  std::optional<Bytes> get_state(const std::string& key);
  void put_state(const std::string& key, Bytes value);
  void delete_state(const std::string& key);
  void put_private(const std::string& collection, const std::string& key, Bytes value);
  void delete_private(const std::string& collection, const std::string& key);

  const std::vector<ReadItem>& read_set() const { return reads_; }
  const std::vector<WriteItem>& write_set() const { return writes_; }
  const std::vector<PrivateWrite>& private_writes() const { return private_writes_; }

  struct PrivateValue {
    std::string collection;
    std::string key;
    Bytes value;
  };
  const std::vector<PrivateValue>& private_values() const { return private_values_; }

 private:
  void check_collection(const std::string& collection) const;

  const WorldState& snapshot_;
  const identity::Certificate& creator_;
  const ChannelConfig& channel_;
  std::string endorsing_org_;
  std::uint64_t now_;
  std::vector<ReadItem> reads_;
  std::vector<WriteItem> writes_;
  std::vector<PrivateWrite> private_writes_;
  std::vector<PrivateValue> private_values_;
};

// Deterministic contract logic executed at endorsement time (the chaincode
// role). Implementations must be pure functions of (snapshot, proposal).
class Contract {
 public:
  virtual ~Contract() = default;
  virtual std::string name() const = 0;
  virtual void execute(TxContext& ctx, const std::string& operation,
                       const std::vector<Bytes>& args) = 0;
};

class Peer {
 public:
  Peer(std::string name, std::string org, identity::Certificate cert,
       crypto::SigningKeyPair keys, const identity::Msp* msp, ChannelConfig channel,
       LedgerBlock genesis);

  const std::string& name() const { return name_; }
  const std::string& org() const { return org_; }
  const identity::Certificate& cert() const { return cert_; }
  const ChannelConfig& channel() const { return channel_; }

  void install(std::shared_ptr<Contract> contract);

  struct EndorseResult {
    Endorsement endorsement;
    std::vector<TxContext::PrivateValue> private_values;
  };
  EndorseResult endorse(const Proposal& proposal, std::uint64_t now) const;

  void cache_private_value(const Digest& txid, const std::string& collection,
                           const std::string& key, Bytes value);

  std::vector<TxFlag> validate_and_commit(LedgerBlock block);
  // Reload path: trusts the flags recorded in the block.
  void apply_committed(LedgerBlock block);

  std::optional<Bytes> query(const identity::Certificate& caller, const std::string& key,
                             std::uint64_t now) const;
  std::optional<Bytes> query_private(const identity::Certificate& caller,
                                     const std::string& collection, const std::string& key,
                                     std::uint64_t now) const;

  std::uint64_t height() const { return chain_.size(); }
  const std::vector<LedgerBlock>& chain() const { return chain_; }
  WorldState& state() { return state_; }
  const WorldState& state() const { return state_; }
  Digest state_hash() const { return state_.public_state_hash(); }
  Bytes chain_bytes() const;

  struct CommitInfo {
    std::uint64_t block = 0;
    std::uint32_t tx = 0;
    TxFlag flag = TxFlag::valid;
  };
  std::optional<CommitInfo> committed(const Digest& txid) const;

 private:
  TxFlag validate_tx(const Transaction& tx, const LedgerBlock& block) const;
  void apply_tx(const Transaction& tx, std::uint64_t block_number, std::uint32_t tx_index);

  std::string name_;
  std::string org_;
  identity::Certificate cert_;
  crypto::SigningKeyPair keys_;
  const identity::Msp* msp_;
  ChannelConfig channel_;
  std::map<std::string, std::shared_ptr<Contract>> contracts_;
  std::vector<LedgerBlock> chain_;
  WorldState state_;
  std::map<std::string, CommitInfo> committed_;  // txid hex ->
  std::map<std::string, std::map<std::string, Bytes>> transient_;  // txid hex -> coll/key -> value
};

// Single ordering node behind a small interface; batching is by size or age,
// and each cut occupies the orderer for cut_cost_ticks, which is what makes
// batch size matter for throughput.
struct OrdererConfig {
  std::uint32_t batch_size = 10;
  std::uint64_t batch_timeout_ticks = 2;
  std::uint64_t cut_cost_ticks = 3;
};

class OrderingService {
 public:
  virtual ~OrderingService() = default;
  virtual void submit(Transaction tx, std::uint64_t now) = 0;
  virtual std::vector<LedgerBlock> try_cut(std::uint64_t now) = 0;
  virtual std::optional<std::uint64_t> next_wakeup(std::uint64_t now) const = 0;
  virtual std::size_t pending_count() const = 0;
};

class SoloOrderer : public OrderingService {
 public:
  SoloOrderer(OrdererConfig config, const LedgerBlock& genesis, const identity::Msp* msp);

  void submit(Transaction tx, std::uint64_t now) override;
  std::vector<LedgerBlock> try_cut(std::uint64_t now) override;
  std::optional<std::uint64_t> next_wakeup(std::uint64_t now) const override;
  std::size_t pending_count() const override { return pending_.size(); }

  std::uint64_t next_block_number() const { return next_number_; }
  void restore_tail(const LedgerBlock& last_block);

 private:
  LedgerBlock cut_block(std::size_t count, std::uint64_t now);

  OrdererConfig config_;
  const identity::Msp* msp_;
  std::uint64_t next_number_ = 1;
  Digest prev_hash_{};
  std::vector<std::pair<Transaction, std::uint64_t>> pending_;  // tx, arrival tick
  std::uint64_t busy_until_ = 0;
};

}  // namespace threatmesh::ledger
