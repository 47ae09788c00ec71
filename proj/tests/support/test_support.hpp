#pragma once

#include <fstream>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "threatmesh/attck_layers.hpp"

#ifndef THREATMESH_FIXTURE_DIR
#define THREATMESH_FIXTURE_DIR "tests/fixtures"
#endif

namespace tmtest {

inline std::string fixture_path(const std::string& name) {
  return std::string(THREATMESH_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

using EntryKey = std::pair<std::string, std::string>;

// Independent overlap oracle: a naive pairwise scan, nothing shared with the
// implementation. A pair matches when ids agree and either tactic is a
// wildcard (empty) or they are equal; every matched entry's own key counts as
// "present in both".
inline std::set<EntryKey> brute_force_both(const threatmesh::attck::Layer& a,
                                           const threatmesh::attck::Layer& b) {
  std::set<EntryKey> both;
  for (const auto& ea : a.techniques) {
    for (const auto& eb : b.techniques) {
      if (ea.technique_id != eb.technique_id) continue;
      if (ea.tactic == eb.tactic || ea.tactic.empty() || eb.tactic.empty()) {
        both.insert({ea.technique_id, ea.tactic});
        both.insert({eb.technique_id, eb.tactic});
      }
    }
  }
  return both;
}

inline std::set<EntryKey> entry_keys(const threatmesh::attck::Layer& layer) {
  std::set<EntryKey> keys;
  for (const auto& e : layer.techniques) keys.insert({e.technique_id, e.tactic});
  return keys;
}

// Seeded random layers drawn from a small id/tactic pool so overlaps are
// frequent. Keys are unique per layer, as the invariants require.
inline threatmesh::attck::Layer random_layer(std::mt19937_64& rng, const std::string& name) {
  static const std::vector<std::string> tactics = {
      "", "execution", "persistence", "discovery", "collection", "command-and-control"};
  threatmesh::attck::Layer layer;
  layer.name = name;
  std::uniform_int_distribution<int> entry_count(0, 14);
  std::uniform_int_distribution<int> id_dist(1000, 1014);
  std::uniform_int_distribution<int> sub_dist(0, 3);
  std::uniform_int_distribution<std::size_t> tactic_dist(0, tactics.size() - 1);
  std::uniform_int_distribution<int> score_dist(0, 10);
  std::set<EntryKey> used;
  const int n = entry_count(rng);
  for (int i = 0; i < n; ++i) {
    threatmesh::attck::TechniqueEntry entry;
    entry.technique_id = "T" + std::to_string(id_dist(rng));
    const int sub = sub_dist(rng);
    if (sub > 0) entry.technique_id += ".00" + std::to_string(sub);
    entry.tactic = tactics[tactic_dist(rng)];
    if (!used.insert({entry.technique_id, entry.tactic}).second) continue;
    if (score_dist(rng) > 2) entry.score = score_dist(rng);
    layer.techniques.push_back(std::move(entry));
  }
  return layer;
}

}  // namespace tmtest
