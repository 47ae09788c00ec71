#include "threatmesh/netsim.hpp"

#include <algorithm>

namespace threatmesh::netsim {

namespace {

std::pair<std::string, std::string> ordered_pair(const std::string& a, const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

Bytes envelope_signing_bytes(const std::string& from, const std::string& to,
                             const std::string& kind, const Bytes& payload) {
  ByteWriter w;
  w.str("threatmesh.envelope.v1");
  w.str(from);
  w.str(to);
  w.str(kind);
  w.var_bytes(payload);
  return w.take();
}

}  // namespace

void NetConfig::validate() const {
  if (latency_min > latency_max) {
    throw Error(ErrorCode::config_error, "latency_min > latency_max");
  }
  if (loss_rate < 0.0 || loss_rate > 1.0) {
    throw Error(ErrorCode::config_error, "loss_rate outside [0,1]");
  }
}

Network::Network(NetConfig config) : config_(std::move(config)) {
  config_.validate();
  rng_ = std::make_unique<crypto::Rng>(config_.seed);
}

void Network::reseat_rng(const Digest& seed, std::uint64_t counter) {
  rng_ = std::make_unique<crypto::Rng>(seed, counter);
}

void Network::register_node(const std::string& id, const crypto::SigningKeyPair& transport_keys,
                            Handler handler) {
  nodes_[id] = Node{transport_keys, std::move(handler)};
}

bool Network::has_node(const std::string& id) const { return nodes_.count(id) > 0; }

std::vector<std::string> Network::node_ids() const {
  std::vector<std::string> ids;
  ids.reserve(nodes_.size());
  for (const auto& [id, _] : nodes_) ids.push_back(id);
  return ids;
}

const Bytes& Network::node_public_key(const std::string& id) const {
  const auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw Error(ErrorCode::unknown_node, id);
  }
  return it->second.keys.public_key;
}

bool Network::severed(const std::string& a, const std::string& b) const {
  return config_.partitions.count(ordered_pair(a, b)) > 0;
}

const Envelope& Network::send(const std::string& from, const std::string& to,
                              const std::string& kind, const Bytes& payload) {
  const auto from_it = nodes_.find(from);
  const auto to_it = nodes_.find(to);
  if (from_it == nodes_.end() || to_it == nodes_.end()) {
    throw Error(ErrorCode::unknown_node, from_it == nodes_.end() ? from : to);
  }
  if (severed(from, to)) {
    throw Error(ErrorCode::partitioned, from + " <-> " + to);
  }

  const Bytes signing = envelope_signing_bytes(from, to, kind, payload);
  const Bytes sig = crypto::sign(from_it->second.keys.secret_key, signing);
  ByteWriter inner;
  inner.var_bytes(payload);
  inner.var_bytes(sig);

  Envelope env;
  env.id = next_envelope_id_++;
  env.from = from;
  env.to = to;
  env.kind = kind;
  env.payload_cipher = crypto::seal_to(to_it->second.keys.public_key, inner.data(), *rng_);
  env.sent_at = tick_;
  const std::uint64_t latency =
      std::max<std::uint64_t>(1, rng_->uniform(config_.latency_min, config_.latency_max));
  env.deliver_at = tick_ + latency;
  env.dropped = rng_->bernoulli(config_.loss_rate);

  trace_.push_back(env);
  if (!env.dropped) {
    queue_[{env.deliver_at, env.id}] = trace_.size() - 1;
  }
  return trace_.back();
}

void Network::schedule(std::uint64_t tick, std::function<void()> fn) {
  timers_.emplace(std::max(tick, tick_ + 1), std::move(fn));
}

void Network::deliver(const Envelope& env) {
  const auto it = nodes_.find(env.to);
  if (it == nodes_.end() || !it->second.handler) return;

  const Bytes inner = crypto::unseal(it->second.keys.public_key, it->second.keys.secret_key,
                                     env.payload_cipher);
  ByteReader r(inner);
  Bytes payload = r.var_bytes();
  const Bytes sig = r.var_bytes();
  r.expect_end();
  const Bytes signing = envelope_signing_bytes(env.from, env.to, env.kind, payload);
  if (!crypto::verify_signature(node_public_key(env.from), signing, sig)) {
    throw Error(ErrorCode::bad_signature, "transport signature check failed");
  }

  Delivery d;
  d.from = env.from;
  d.to = env.to;
  d.kind = env.kind;
  d.payload = std::move(payload);
  d.tick = tick_;
  ++delivered_;
  it->second.handler(d);
}

std::uint64_t Network::step() {
  ++tick_;
  std::uint64_t count = 0;

  while (true) {
    const auto it = timers_.begin();
    if (it == timers_.end() || it->first > tick_) break;
    auto fn = std::move(it->second);
    timers_.erase(it);
    fn();
  }

  while (true) {
    const auto it = queue_.begin();
    if (it == queue_.end() || it->first.first > tick_) break;
    const std::size_t index = it->second;
    queue_.erase(it);
    deliver(trace_[index]);
    ++count;
  }
  return count;
}

bool Network::idle() const { return queue_.empty() && timers_.empty(); }

std::uint64_t Network::run_until_idle(std::uint64_t max_ticks) {
  std::uint64_t delivered = 0;
  for (std::uint64_t i = 0; i < max_ticks && !idle(); ++i) {
    delivered += step();
  }
  return delivered;
}

std::uint64_t Network::run_until(const std::function<bool()>& done, std::uint64_t max_ticks) {
  std::uint64_t delivered = 0;
  for (std::uint64_t i = 0; i < max_ticks && !done(); ++i) {
    if (idle()) break;
    delivered += step();
  }
  return delivered;
}

void Network::run_for(std::uint64_t ticks) {
  for (std::uint64_t i = 0; i < ticks; ++i) step();
}

void Network::partition(const std::string& a, const std::string& b) {
  config_.partitions.insert(ordered_pair(a, b));
}

void Network::heal(const std::string& a, const std::string& b) {
  config_.partitions.erase(ordered_pair(a, b));
}

void Network::write_trace_csv(std::ostream& os) const {
  os << "tick,from,to,kind,size,dropped\n";
  for (const Envelope& env : trace_) {
    os << env.sent_at << ',' << env.from << ',' << env.to << ',' << env.kind << ','
       << env.payload_cipher.size() << ',' << (env.dropped ? 1 : 0) << '\n';
  }
}

}  // namespace threatmesh::netsim
