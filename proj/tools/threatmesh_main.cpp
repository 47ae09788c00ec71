// threatmesh: desk-scale trusted threat-sharing simulation.
//
// One command is one deterministic simulation step over a persistent state
// directory; see the README for the exit-code table.

#include <sys/file.h>
#include <unistd.h>

#include <fcntl.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "threatmesh/bench.hpp"
#include "threatmesh/protocol.hpp"
#include "threatmesh/scenario_script.hpp"
#include "threatmesh/sim.hpp"

namespace fs = std::filesystem;
using namespace threatmesh;

namespace {

// Advisory lock on <state>/.lock, released when the process exits.
class StateLock {
 public:
  explicit StateLock(const fs::path& state_dir) {
    fs::create_directories(state_dir);
    const fs::path lock_path = state_dir / ".lock";
    fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) {
      throw Error(ErrorCode::state_locked, "cannot open " + lock_path.string());
    }
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      fd_ = -1;
      throw Error(ErrorCode::state_locked,
                  "state directory is in use: " + state_dir.string());
    }
  }
  ~StateLock() {
    if (fd_ >= 0) ::close(fd_);
  }
  StateLock(const StateLock&) = delete;
  StateLock& operator=(const StateLock&) = delete;

 private:
  int fd_ = -1;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::not_found, "cannot read " + path.string());
  }
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::config_error, "cannot write " + path.string());
  }
  out << text;
}

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

bool state_initialized(const fs::path& state_dir) {
  return fs::exists(state_dir / "config.json");
}

std::unique_ptr<sim::Simulation> load_state(const fs::path& state_dir) {
  if (!state_initialized(state_dir)) {
    throw Error(ErrorCode::config_error,
                "no initialized state at " + state_dir.string() + "; run setup first");
  }
  return sim::Simulation::load(state_dir);
}

std::string find_sender_actor(sim::Simulation& s, const std::string& cid_text) {
  const auto record =
      protocol::read_record(s, s.actors().begin()->first, cas::Cid::parse(cid_text));
  for (const auto& [name, actor] : s.actors()) {
    if (actor.did == record.sender_did) return name;
  }
  throw Error(ErrorCode::not_sender, "no local actor controls " + record.sender_did);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"threatmesh: permissioned threat-intelligence sharing simulation"};
  app.require_subcommand(1);

  std::string state_dir_opt = "./tmstate";
  app.add_option("--state", state_dir_opt, "state directory")
      ->envname("THREATMESH_STATE");

  // setup
  auto* setup = app.add_subcommand("setup", "initialize organizations, channel, and DIDs");
  std::string config_path;
  bool force = false;
  setup->add_option("--config", config_path, "scenario config JSON")->required();
  setup->add_flag("--force", force, "replace an existing state directory");

  // share
  auto* share = app.add_subcommand("share", "encrypt, store, and publish a layer");
  std::string share_as, share_layer, share_to;
  share->add_option("--as", share_as, "sending actor, e.g. org1.client")->required();
  share->add_option("--layer", share_layer, "layer JSON file")->required();
  share->add_option("--to", share_to, "comma-separated recipient DIDs");

  // fetch
  auto* fetch = app.add_subcommand("fetch", "fetch and decrypt a shared layer");
  std::string fetch_as, fetch_cid, fetch_out;
  fetch->add_option("--as", fetch_as)->required();
  fetch->add_option("--cid", fetch_cid)->required();
  fetch->add_option("--out", fetch_out, "output layer JSON file")->required();

  // compare
  auto* compare = app.add_subcommand("compare", "fetch two shared layers and emit the overlap");
  std::string compare_as, compare_cids, compare_out;
  compare->add_option("--as", compare_as)->required();
  compare->add_option("--cids", compare_cids, "two CIDs, comma separated")->required();
  compare->add_option("--out", compare_out)->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "latency/throughput measurement, CSV output");
  std::uint32_t bench_txs = 100;
  std::uint32_t bench_orgs = 0;
  std::uint32_t bench_batch = 0;
  std::uint64_t bench_seed = 0;
  bool bench_seed_set = false, bench_orgs_set = false, bench_batch_set = false;
  std::string bench_out;
  bench_cmd->add_option("--txs", bench_txs, "number of share transactions");
  bench_cmd->add_option("--orgs", bench_orgs, "synthesize this many orgs")
      ->each([&](const std::string&) { bench_orgs_set = true; });
  bench_cmd->add_option("--batch-size", bench_batch, "orderer batch size override")
      ->each([&](const std::string&) { bench_batch_set = true; });
  bench_cmd->add_option("--seed", bench_seed, "network seed override")
      ->each([&](const std::string&) { bench_seed_set = true; });
  bench_cmd->add_option("--out", bench_out, "CSV output path")->required();

  // erase
  auto* erase = app.add_subcommand("erase", "erase content (RtbF) and record it on-ledger");
  std::string erase_as, erase_cid;
  erase->add_option("--as", erase_as)->required();
  erase->add_option("--cid", erase_cid)->required();

  // revoke-cert
  auto* revoke_cert = app.add_subcommand("revoke-cert", "revoke a certificate serial");
  std::uint64_t revoke_serial = 0;
  revoke_cert->add_option("--serial", revoke_serial)->required();

  // revoke-access
  auto* revoke_access = app.add_subcommand("revoke-access", "remove a recipient's grant");
  std::string ra_cid, ra_did, ra_as;
  revoke_access->add_option("--cid", ra_cid)->required();
  revoke_access->add_option("--did", ra_did)->required();
  revoke_access->add_option("--as", ra_as, "sender actor (default: detected from the record)");

  // grant
  auto* grant = app.add_subcommand("grant", "grant an additional recipient access");
  std::string grant_as, grant_cid, grant_did;
  grant->add_option("--as", grant_as)->required();
  grant->add_option("--cid", grant_cid)->required();
  grant->add_option("--did", grant_did)->required();

  // run
  auto* run = app.add_subcommand("run", "run a scenario script");
  std::string run_script_path, run_trace;
  run->add_option("--script", run_script_path)->required();
  run->add_option("--trace", run_trace, "write the network trace CSV here");

  // record
  auto* record_cmd = app.add_subcommand("record", "print a share record as JSON (audit)");
  std::string record_cid, record_as;
  record_cmd->add_option("--cid", record_cid)->required();
  record_cmd->add_option("--as", record_as, "querying actor (default: first actor)");

  CLI11_PARSE(app, argc, argv);

  const fs::path state_dir(state_dir_opt);
  try {
    if (*setup) {
      if (state_initialized(state_dir) && !force) {
        throw Error(ErrorCode::config_error,
                    state_dir.string() + " already initialized; use --force to replace it");
      }
      if (force && fs::exists(state_dir)) {
        fs::remove_all(state_dir);
      }
      StateLock lock(state_dir);
      const auto config =
          sim::ScenarioConfig::from_json(nlohmann::json::parse(read_file(config_path)));
      auto s = sim::Simulation::create(config);
      s->save(state_dir);
      std::cout << "initialized " << state_dir.string() << " with " << config.orgs.size()
                << " orgs, channel '" << config.channel_name << "'\n";
      for (const auto& [name, actor] : s->actors()) {
        std::cout << name << " did=" << actor.did << "\n";
      }
      return 0;
    }

    if (*bench_cmd) {
      StateLock lock(state_dir);
      auto s = load_state(state_dir);  // bench reads the config, never writes state
      bench::BenchOptions options;
      options.txs = bench_txs;
      if (bench_orgs_set) options.orgs = bench_orgs;
      if (bench_batch_set) options.batch_size = bench_batch;
      if (bench_seed_set) options.seed = bench_seed;
      const bench::BenchResult result = bench::run_bench(s->config(), options);
      write_file(bench_out, result.csv());
      std::cout << result.summary();
      return 0;
    }

    StateLock lock(state_dir);
    auto s = load_state(state_dir);

    if (*share) {
      const attck::Layer layer = attck::parse_layer(read_file(share_layer));
      const auto outcome =
          protocol::share_threat(*s, share_as, layer, split_commas(share_to));
      s->save(state_dir);
      std::cout << "cid: " << outcome.cid.to_string() << "\n"
                << "tx: " << hex_encode(outcome.txid) << "\n";
    } else if (*fetch) {
      const attck::Layer layer =
          protocol::fetch_threat(*s, fetch_as, cas::Cid::parse(fetch_cid));
      write_file(fetch_out, attck::serialize_layer(layer));
      s->save(state_dir);
      std::cout << "fetched '" << layer.name << "' -> " << fetch_out << "\n";
    } else if (*compare) {
      const auto cids = split_commas(compare_cids);
      if (cids.size() != 2) {
        throw Error(ErrorCode::config_error, "--cids expects exactly two CIDs");
      }
      const attck::Layer layer = protocol::compare_shared(
          *s, compare_as, cas::Cid::parse(cids[0]), cas::Cid::parse(cids[1]));
      write_file(compare_out, attck::serialize_layer(layer));
      s->save(state_dir);
      std::cout << "compared -> " << compare_out << "\n";
    } else if (*erase) {
      const auto outcome = protocol::erase_share(*s, erase_as, cas::Cid::parse(erase_cid));
      s->save(state_dir);
      std::cout << "erased " << erase_cid << " tx: " << hex_encode(outcome.txid)
                << " notices: " << outcome.receipt.notices_sent << "\n";
    } else if (*revoke_cert) {
      s->revoke_cert(revoke_serial);
      s->save(state_dir);
      std::cout << "revoked serial " << revoke_serial << "\n";
    } else if (*revoke_access) {
      const std::string as = ra_as.empty() ? find_sender_actor(*s, ra_cid) : ra_as;
      const Digest txid = protocol::revoke_access(*s, as, cas::Cid::parse(ra_cid), ra_did);
      s->save(state_dir);
      std::cout << "revoked access tx: " << hex_encode(txid) << "\n";
    } else if (*grant) {
      const Digest txid =
          protocol::grant_access(*s, grant_as, cas::Cid::parse(grant_cid), grant_did);
      s->save(state_dir);
      std::cout << "granted tx: " << hex_encode(txid) << "\n";
    } else if (*run) {
      std::ifstream in(run_script_path);
      if (!in) {
        throw Error(ErrorCode::not_found, "cannot read " + run_script_path);
      }
      const auto results = script::run_script(*s, in);
      bool all_ok = true;
      for (const auto& r : results) {
        std::cout << "tick " << r.command.tick << " " << r.command.actor << " "
                  << r.command.name << ": " << (r.ok ? "ok " : "error ") << r.detail << "\n";
        all_ok = all_ok && r.ok;
      }
      if (!run_trace.empty()) {
        std::ofstream trace(run_trace, std::ios::trunc);
        s->net().write_trace_csv(trace);
      }
      s->save(state_dir);
      if (!all_ok) return 1;
    } else if (*record_cmd) {
      const std::string as = record_as.empty() ? s->actors().begin()->first : record_as;
      const auto record = protocol::read_record(*s, as, cas::Cid::parse(record_cid));
      std::cout << record.to_json().dump(2) << "\n";
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return error_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
