#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support/test_support.hpp"
#include "threatmesh/bench.hpp"
#include "threatmesh/protocol.hpp"
#include "threatmesh/scenario_script.hpp"

using namespace threatmesh;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("scenario config validation") {
  sim::ScenarioConfig config = sim::ScenarioConfig::default_config();
  config.validate();

  sim::ScenarioConfig bad = config;
  bad.endorsement_required = 4;  // only 3 orgs
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = config;
  bad.orgs.clear();
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = config;
  bad.collections[0].member_orgs = {"org1"};  // below the 2-of-3 policy
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = config;
  bad.net.loss_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);

  // JSON round-trip preserves the scenario.
  const auto round = sim::ScenarioConfig::from_json(config.to_json());
  CHECK(round.to_json() == config.to_json());
}

TEST_CASE("save/load: state survives a reload and stays consistent") {
  const fs::path dir = temp_dir("tm_state_roundtrip");
  std::string cid_text;
  std::string org2_did;
  Bytes chain_before;
  Digest state_before;

  {
    auto s = sim::Simulation::create(sim::ScenarioConfig::default_config());
    org2_did = s->actor("org2.client").did;
    const auto outcome = protocol::share_threat(
        *s, "org1.client", attck::parse_layer(tmtest::read_fixture("wicked_panda.json")),
        {org2_did});
    cid_text = outcome.cid.to_string();
    s->net().run_until_idle();
    chain_before = s->peers().front()->chain_bytes();
    state_before = s->peers().front()->state_hash();
    s->save(dir);
  }

  auto s = sim::Simulation::load(dir);
  CHECK(s->peers().front()->chain_bytes() == chain_before);
  for (const auto* peer : std::as_const(*s).peers()) {
    CHECK(peer->state_hash() == state_before);
  }

  // The recipient's grant and the content survive: fetch works post-reload.
  const attck::Layer fetched =
      protocol::fetch_threat(*s, "org2.client", cas::Cid::parse(cid_text));
  CHECK(fetched.name == "Wicked Panda (G0096)");

  // The sender's retained content key survives: grants still possible.
  protocol::grant_access(*s, "org1.client", cas::Cid::parse(cid_text),
                         s->actor("org3.client").did);
  fs::remove_all(dir);
}

TEST_CASE("save/load: deterministic continuation matches an uninterrupted run") {
  const fs::path dir = temp_dir("tm_state_determinism");
  const auto layer = attck::parse_layer(tmtest::read_fixture("fox_kitten.json"));

  // Run A: share twice in one session.
  sim::ScenarioConfig config = sim::ScenarioConfig::default_config();
  auto a = sim::Simulation::create(config);
  protocol::share_threat(*a, "org1.client", layer, {a->actor("org2.client").did});
  attck::Layer second = layer;
  second.name = "second";
  const auto a2 = protocol::share_threat(*a, "org1.client", second, {a->actor("org2.client").did});

  // Run B: identical, but save/load between the two shares.
  auto b1 = sim::Simulation::create(config);
  protocol::share_threat(*b1, "org1.client", layer, {b1->actor("org2.client").did});
  b1->net().run_until_idle();
  b1->save(dir);
  auto b2 = sim::Simulation::load(dir);
  const auto b_outcome =
      protocol::share_threat(*b2, "org1.client", second, {b2->actor("org2.client").did});

  CHECK(b_outcome.cid.to_string() == a2.cid.to_string());
  CHECK(hex_encode(b_outcome.txid) == hex_encode(a2.txid));
  fs::remove_all(dir);
}

TEST_CASE("scenario script: parse and run, failures recorded not thrown") {
  auto s = sim::Simulation::create(sim::ScenarioConfig::default_config());
  const std::string did2 = s->actor("org2.client").did;

  std::ostringstream script;
  script << "# demo scenario\n";
  script << "tick 5: org1.client share " << tmtest::fixture_path("wicked_panda.json") << " "
         << did2 << "\n";
  script << "tick 20: org3.client fetch cid1:raw_leaf:"
         << std::string(64, '0') << "\n";  // unknown cid: must fail, not throw

  std::istringstream in(script.str());
  const auto results = script::run_script(*s, in);

  REQUIRE(results.size() == 2);
  CHECK(results[0].ok);
  CHECK(results[0].command.tick == 5);
  CHECK(results[0].detail.find("cid1:") == 0);
  CHECK_FALSE(results[1].ok);
  CHECK(results[1].detail.find("NotFound") != std::string::npos);

  // Bad grammar is a config error.
  std::istringstream bad("tack 5: a b\n");
  CHECK_THROWS_AS(script::parse_script(bad), Error);
}

TEST_CASE("bench: deterministic CSV, batch arithmetic, throughput trend") {
  const sim::ScenarioConfig config = sim::ScenarioConfig::default_config();

  bench::BenchOptions options;
  options.txs = 40;
  options.seed = 7;
  const auto r1 = bench::run_bench(config, options);
  const auto r2 = bench::run_bench(config, options);
  CHECK(r1.csv() == r2.csv());  // byte-identical under a fixed seed
  CHECK(r1.rows.size() == 40);
  CHECK(r1.valid_count == 40);
  CHECK(r1.block_count == 4);  // 40 txs / batch 10
  CHECK(r1.throughput_per_1000_ticks > 0);

  bench::BenchOptions small_batch = options;
  small_batch.batch_size = 1;
  const auto r3 = bench::run_bench(config, small_batch);
  CHECK(r3.block_count == 40);
  CHECK(r1.throughput_per_1000_ticks > r3.throughput_per_1000_ticks);

  const auto different_seed = [&] {
    bench::BenchOptions o = options;
    o.seed = 8;
    return bench::run_bench(config, o);
  }();
  CHECK(different_seed.csv() != r1.csv());
}

TEST_CASE("unknown channel is rejected at submit") {
  auto s = sim::Simulation::create(sim::ScenarioConfig::default_config());
  auto& sender = s->actor("org1.client");
  const auto proposal =
      ledger::make_proposal("ghost-channel", "threatshare", "record_erasure",
                            {to_bytes("cid1:raw_leaf:" + std::string(64, '0'))}, sender.cert,
                            sender.keys.secret_key, s->rng());
  try {
    s->submit("org1.client", proposal, {});
    FAIL("expected ChannelUnknown");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::channel_unknown);
  }
}

TEST_CASE("bench: synthesized org counts") {
  const auto cfg = bench::bench_config_for_orgs(5);
  CHECK(cfg.orgs.size() == 5);
  CHECK(cfg.endorsement_required == 3);
  cfg.validate();
  CHECK_THROWS_AS(bench::bench_config_for_orgs(1), Error);
}
