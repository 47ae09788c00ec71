#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "threatmesh/sim.hpp"

namespace threatmesh::bench {

struct BenchOptions {
  std::uint32_t txs = 100;
  std::optional<std::uint32_t> orgs;        // synthesize a k-org scenario
  std::optional<std::uint32_t> batch_size;  // orderer override
  std::optional<std::uint64_t> seed;
  std::uint32_t recipients = 1;
};

struct BenchRow {
  std::string tx_id;
  std::uint64_t submit_tick = 0;
  std::uint64_t commit_tick = 0;
  std::uint64_t latency_ms = 0;  // 1 tick = 1 ms, reporting convention only
  std::string valid_flag;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::uint64_t block_count = 0;
  std::uint64_t span_ticks = 0;
  double throughput_per_1000_ticks = 0.0;
  double avg_endorse_ticks = 0.0;
  double avg_order_ticks = 0.0;
  double avg_commit_ticks = 0.0;
  std::uint32_t valid_count = 0;

  std::string csv() const;      // header + one row per transaction
  std::string summary() const;  // aggregate view for stdout
};

// Runs `txs` share transactions through a fresh simulation built from the
// given config. The network is pinned to 1-tick latency and zero loss so the
// measurement isolates the pipeline; the persisted state directory is never
// touched, which keeps a fixed seed byte-reproducible.
BenchResult run_bench(const sim::ScenarioConfig& base, const BenchOptions& options);

sim::ScenarioConfig bench_config_for_orgs(std::uint32_t org_count);

}  // namespace threatmesh::bench
