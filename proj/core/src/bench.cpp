#include "threatmesh/bench.hpp"

#include <algorithm>
#include <sstream>

#include "threatmesh/protocol.hpp"
#include "threatmesh/threatshare.hpp"

namespace threatmesh::bench {

namespace {

attck::Layer synthetic_layer(std::uint32_t index) {
  attck::Layer layer;
  layer.name = "bench-" + std::to_string(index);
  layer.description = "synthetic bench layer " + std::to_string(index);
  attck::TechniqueEntry entry;
  entry.technique_id = "T" + std::to_string(1000 + index % 9000);
  entry.tactic = "execution";
  entry.score = 1;
  entry.comment = "bench tx " + std::to_string(index);
  layer.techniques.push_back(std::move(entry));
  return layer;
}

}  // namespace

sim::ScenarioConfig bench_config_for_orgs(std::uint32_t org_count) {
  if (org_count < 2) {
    throw Error(ErrorCode::config_error, "bench needs at least 2 orgs");
  }
  sim::ScenarioConfig cfg;
  cfg.orgs.clear();
  for (std::uint32_t i = 1; i <= org_count; ++i) {
    cfg.orgs.push_back({"org" + std::to_string(i), 1});
  }
  cfg.endorsement_required = org_count / 2 + 1;
  cfg.collections = {{threatshare::kGrantsCollection, {}}};
  // The grants collection must satisfy the policy on its own.
  for (std::uint32_t i = 1; i <= std::max<std::uint32_t>(2, cfg.endorsement_required); ++i) {
    cfg.collections.front().member_orgs.insert("org" + std::to_string(i));
  }
  return cfg;
}

BenchResult run_bench(const sim::ScenarioConfig& base, const BenchOptions& options) {
  sim::ScenarioConfig config = options.orgs ? bench_config_for_orgs(*options.orgs) : base;
  if (options.batch_size) config.orderer.batch_size = *options.batch_size;
  if (options.seed) config.net.seed = *options.seed;
  config.net.latency_min = 1;
  config.net.latency_max = 1;
  config.net.loss_rate = 0.0;
  config.validate();

  auto simulation = sim::Simulation::create(config);

  const std::string sender = config.orgs.front().name + ".client";
  const ledger::CollectionSpec* grants =
      simulation->channel().collection(threatshare::kGrantsCollection);
  std::vector<std::string> recipient_dids;
  if (grants) {
    for (const std::string& org : grants->member_orgs) {
      const std::string client = org + ".client";
      if (client == sender) continue;
      recipient_dids.push_back(simulation->actor(client).did);
      if (recipient_dids.size() >= options.recipients) break;
    }
  }

  const std::uint64_t height_before = simulation->chain_height();

  std::vector<Digest> txids;
  txids.reserve(options.txs);
  for (std::uint32_t i = 0; i < options.txs; ++i) {
    const auto outcome =
        protocol::begin_share_threat(*simulation, sender, synthetic_layer(i), recipient_dids);
    txids.push_back(outcome.txid);
  }

  simulation->net().run_until(
      [&] {
        return std::all_of(txids.begin(), txids.end(), [&](const Digest& txid) {
          const auto* stats = simulation->stats(txid);
          if (stats && stats->error) return true;
          return simulation->tx_committed_everywhere(txid);
        });
      },
      config.op_timeout_ticks);

  BenchResult result;
  std::uint64_t first_submit = UINT64_MAX;
  std::uint64_t last_commit = 0;
  double endorse_sum = 0, order_sum = 0, commit_sum = 0;
  std::uint64_t measured = 0;

  for (const Digest& txid : txids) {
    const auto* stats = simulation->stats(txid);
    BenchRow row;
    row.tx_id = hex_encode(txid);
    const auto flag = simulation->tx_flag(txid);
    row.valid_flag = flag ? ledger::tx_flag_name(*flag)
                          : (stats && stats->error ? error_code_name(*stats->error) : "pending");
    if (stats && stats->submitted) {
      row.submit_tick = stats->submit_tick;
      row.commit_tick = stats->commit_tick;
      row.latency_ms = stats->commit_tick - stats->submit_tick;
      first_submit = std::min(first_submit, stats->submit_tick);
      last_commit = std::max(last_commit, stats->commit_tick);
      if (flag && stats->ordered) {
        endorse_sum += static_cast<double>(stats->submit_tick - stats->begin_tick);
        order_sum += static_cast<double>(stats->order_tick - stats->submit_tick);
        commit_sum += static_cast<double>(stats->commit_tick - stats->order_tick);
        ++measured;
      }
    }
    if (flag && *flag == ledger::TxFlag::valid) ++result.valid_count;
    result.rows.push_back(std::move(row));
  }

  result.block_count = simulation->chain_height() - height_before;
  if (last_commit > first_submit) {
    result.span_ticks = last_commit - first_submit;
    result.throughput_per_1000_ticks =
        static_cast<double>(result.valid_count) * 1000.0 /
        static_cast<double>(result.span_ticks);
  }
  if (measured > 0) {
    result.avg_endorse_ticks = endorse_sum / static_cast<double>(measured);
    result.avg_order_ticks = order_sum / static_cast<double>(measured);
    result.avg_commit_ticks = commit_sum / static_cast<double>(measured);
  }
  return result;
}

std::string BenchResult::csv() const {
  std::ostringstream os;
  os << "tx_id,submit_tick,commit_tick,latency_ms,valid_flag\n";
  for (const BenchRow& row : rows) {
    os << row.tx_id << ',' << row.submit_tick << ',' << row.commit_tick << ','
       << row.latency_ms << ',' << row.valid_flag << '\n';
  }
  return os.str();
}

std::string BenchResult::summary() const {
  std::ostringstream os;
  os << "transactions: " << rows.size() << " (" << valid_count << " valid)\n"
     << "blocks: " << block_count << "\n"
     << "span_ticks: " << span_ticks << "\n"
     << "throughput_tx_per_1000_ticks: " << throughput_per_1000_ticks << "\n"
     << "avg_endorse_ticks: " << avg_endorse_ticks << "\n"
     << "avg_order_ticks: " << avg_order_ticks << "\n"
     << "avg_commit_ticks: " << avg_commit_ticks << "\n";
  return os.str();
}

}  // namespace threatmesh::bench
