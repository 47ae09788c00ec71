#pragma once

#include <istream>
#include <string>
#include <vector>

#include "threatmesh/sim.hpp"

namespace threatmesh::script {

// Line-oriented scenario scripts:
//
//   tick <n>: <actor> <command> <args...>
//
// Commands: share <layer-file> <did[,did...]|->, fetch <cid> [<out-file>],
// compare <cid_a> <cid_b> [<out-file>], grant <cid> <did>,
// revoke-access <cid> <did>, erase <cid>, revoke-cert <serial>.
// Blank lines and lines starting with '#' are skipped.
struct Command {
  std::uint64_t tick = 0;
  std::string actor;
  std::string name;
  std::vector<std::string> args;
  std::size_t line = 0;
};

struct CommandResult {
  Command command;
  bool ok = false;
  std::string detail;  // cid/txid on success, error text on failure
};

std::vector<Command> parse_script(std::istream& in);

// Advances the simulation to each command's tick and runs it to completion.
// Command failures are recorded, not thrown; scripts exercise error paths.
std::vector<CommandResult> run_script(sim::Simulation& sim, const std::vector<Command>& commands);

std::vector<CommandResult> run_script(sim::Simulation& sim, std::istream& in);

}  // namespace threatmesh::script
