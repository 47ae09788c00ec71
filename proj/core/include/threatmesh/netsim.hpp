#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "threatmesh/crypto.hpp"

namespace threatmesh::netsim {

struct NetConfig {
  std::uint64_t seed = 1;
  std::uint64_t latency_min = 1;  // ticks
  std::uint64_t latency_max = 3;
  double loss_rate = 0.0;
  std::set<std::pair<std::string, std::string>> partitions;  // severed pairs

  void validate() const;
};

// What an on-path observer sees: routing metadata in the clear, the payload
// signed by the sender's transport key and sealed to the recipient's.
struct Envelope {
  std::uint64_t id = 0;
  std::string from;
  std::string to;
  std::string kind;
  Bytes payload_cipher;
  std::uint64_t sent_at = 0;
  std::uint64_t deliver_at = 0;
  bool dropped = false;
};

struct Delivery {
  std::string from;
  std::string to;
  std::string kind;
  Bytes payload;
  std::uint64_t tick = 0;
};

using Handler = std::function<void(const Delivery&)>;

class Network {
 public:
  explicit Network(NetConfig config);

  crypto::Rng& rng() { return *rng_; }
  void reseat_rng(const Digest& seed, std::uint64_t counter);

  void register_node(const std::string& id, const crypto::SigningKeyPair& transport_keys,
                     Handler handler);
  bool has_node(const std::string& id) const;
  std::vector<std::string> node_ids() const;
  const Bytes& node_public_key(const std::string& id) const;

  std::uint64_t now() const { return tick_; }
  void set_now(std::uint64_t tick) { tick_ = tick; }

  // Queues one envelope; throws UnknownNode / Partitioned. A lossy draw marks
  // the envelope dropped: it shows up in the trace but is never delivered.
  const Envelope& send(const std::string& from, const std::string& to,
                       const std::string& kind, const Bytes& payload);

  // Internal timer, invisible to the trace.
  void schedule(std::uint64_t tick, std::function<void()> fn);

  // Advances one tick; runs due timers, then delivers due envelopes in
  // (deliver_at, enqueue order). Returns messages delivered this tick.
  std::uint64_t step();
  std::uint64_t run_until_idle(std::uint64_t max_ticks = 1'000'000);
  std::uint64_t run_until(const std::function<bool()>& done, std::uint64_t max_ticks);
  void run_for(std::uint64_t ticks);
  bool idle() const;

  void partition(const std::string& a, const std::string& b);
  void heal(const std::string& a, const std::string& b);

  // Full observer tap: every envelope ever sent, ciphertext included.
  const std::vector<Envelope>& trace() const { return trace_; }
  void write_trace_csv(std::ostream& os) const;
  std::uint64_t delivered_count() const { return delivered_; }

 private:
  struct Node {
    crypto::SigningKeyPair keys;
    Handler handler;
  };

  bool severed(const std::string& a, const std::string& b) const;
  void deliver(const Envelope& env);

  NetConfig config_;
  std::unique_ptr<crypto::Rng> rng_;
  std::map<std::string, Node> nodes_;
  std::uint64_t tick_ = 0;
  std::uint64_t next_envelope_id_ = 1;
  std::uint64_t delivered_ = 0;
  // (deliver_at, envelope id) -> index into trace_
  std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> queue_;
  std::multimap<std::uint64_t, std::function<void()>> timers_;
  std::vector<Envelope> trace_;
};

}  // namespace threatmesh::netsim
