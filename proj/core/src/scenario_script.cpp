#include "threatmesh/scenario_script.hpp"

#include <fstream>
#include <sstream>

#include "threatmesh/protocol.hpp"

namespace threatmesh::script {

namespace {

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::not_found, "cannot read " + path);
  }
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::config_error, "cannot write " + path);
  }
  out << text;
}

std::string execute(sim::Simulation& sim, const Command& cmd) {
  if (cmd.name == "share") {
    if (cmd.args.size() != 2) {
      throw Error(ErrorCode::config_error, "share expects <layer-file> <dids|->");
    }
    const attck::Layer layer = attck::parse_layer(read_file(cmd.args[0]));
    const std::vector<std::string> dids =
        cmd.args[1] == "-" ? std::vector<std::string>{} : split_commas(cmd.args[1]);
    const auto outcome = protocol::share_threat(sim, cmd.actor, layer, dids);
    return outcome.cid.to_string() + " tx=" + hex_encode(outcome.txid);
  }
  if (cmd.name == "fetch") {
    if (cmd.args.empty()) {
      throw Error(ErrorCode::config_error, "fetch expects <cid> [<out-file>]");
    }
    const attck::Layer layer =
        protocol::fetch_threat(sim, cmd.actor, cas::Cid::parse(cmd.args[0]));
    const std::string text = attck::serialize_layer(layer);
    if (cmd.args.size() > 1) write_file(cmd.args[1], text + "\n");
    return "fetched " + layer.name;
  }
  if (cmd.name == "compare") {
    if (cmd.args.size() < 2) {
      throw Error(ErrorCode::config_error, "compare expects <cid_a> <cid_b> [<out-file>]");
    }
    const attck::Layer layer =
        protocol::compare_shared(sim, cmd.actor, cas::Cid::parse(cmd.args[0]),
                                 cas::Cid::parse(cmd.args[1]));
    const std::string text = attck::serialize_layer(layer);
    if (cmd.args.size() > 2) write_file(cmd.args[2], text + "\n");
    return "compared into " + layer.name;
  }
  if (cmd.name == "grant") {
    if (cmd.args.size() != 2) {
      throw Error(ErrorCode::config_error, "grant expects <cid> <did>");
    }
    const Digest txid =
        protocol::grant_access(sim, cmd.actor, cas::Cid::parse(cmd.args[0]), cmd.args[1]);
    return "tx=" + hex_encode(txid);
  }
  if (cmd.name == "revoke-access") {
    if (cmd.args.size() != 2) {
      throw Error(ErrorCode::config_error, "revoke-access expects <cid> <did>");
    }
    const Digest txid =
        protocol::revoke_access(sim, cmd.actor, cas::Cid::parse(cmd.args[0]), cmd.args[1]);
    return "tx=" + hex_encode(txid);
  }
  if (cmd.name == "erase") {
    if (cmd.args.size() != 1) {
      throw Error(ErrorCode::config_error, "erase expects <cid>");
    }
    const auto outcome = protocol::erase_share(sim, cmd.actor, cas::Cid::parse(cmd.args[0]));
    return "tx=" + hex_encode(outcome.txid) + " notices=" +
           std::to_string(outcome.receipt.notices_sent);
  }
  if (cmd.name == "revoke-cert") {
    if (cmd.args.size() != 1) {
      throw Error(ErrorCode::config_error, "revoke-cert expects <serial>");
    }
    sim.revoke_cert(std::stoull(cmd.args[0]));
    return "revoked serial " + cmd.args[0];
  }
  throw Error(ErrorCode::config_error, "unknown script command " + cmd.name);
}

}  // namespace

std::vector<Command> parse_script(std::istream& in) {
  std::vector<Command> commands;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    Command cmd;
    cmd.line = line_number;
    std::istringstream ss(line);
    std::string tick_word, tick_value;
    ss >> tick_word >> tick_value;
    if (tick_word != "tick" || tick_value.empty() || tick_value.back() != ':') {
      throw Error(ErrorCode::config_error,
                  "line " + std::to_string(line_number) + ": expected 'tick <n>:'");
    }
    tick_value.pop_back();
    cmd.tick = std::stoull(tick_value);
    if (!(ss >> cmd.actor >> cmd.name)) {
      throw Error(ErrorCode::config_error,
                  "line " + std::to_string(line_number) + ": expected '<actor> <command>'");
    }
    std::string arg;
    while (ss >> arg) cmd.args.push_back(std::move(arg));
    commands.push_back(std::move(cmd));
  }
  return commands;
}

std::vector<CommandResult> run_script(sim::Simulation& sim,
                                      const std::vector<Command>& commands) {
  std::vector<CommandResult> results;
  for (const Command& cmd : commands) {
    if (cmd.tick > sim.now()) {
      sim.net().run_for(cmd.tick - sim.now());
    }
    CommandResult result;
    result.command = cmd;
    try {
      result.detail = execute(sim, cmd);
      result.ok = true;
    } catch (const Error& e) {
      result.ok = false;
      result.detail = e.what();
    }
    results.push_back(std::move(result));
  }
  sim.net().run_until_idle();
  return results;
}

std::vector<CommandResult> run_script(sim::Simulation& sim, std::istream& in) {
  return run_script(sim, parse_script(in));
}

}  // namespace threatmesh::script
