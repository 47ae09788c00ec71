#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "threatmesh/error.hpp"

namespace threatmesh::attck {

// One scored/colored technique reference. An empty tactic means the entry
// applies to every tactic the technique appears under.
struct TechniqueEntry {
  std::string technique_id;               // T1234 or T1234.001
  std::string tactic;                     // lowercase kebab-case, or ""
  std::optional<std::int64_t> score;
  std::optional<std::string> color;       // "#rrggbb"
  std::optional<std::string> comment;
  bool enabled = true;

  friend bool operator==(const TechniqueEntry&, const TechniqueEntry&) = default;
};

struct VersionInfo {
  std::string layer_format = "4.5";
  std::string attack_version = "14";
  std::string navigator_version = "4.9.1";

  friend bool operator==(const VersionInfo&, const VersionInfo&) = default;
};

struct LegendItem {
  std::string label;
  std::string color;

  friend bool operator==(const LegendItem&, const LegendItem&) = default;
};

struct Layer {
  std::string name;
  std::string domain = "enterprise-attack";
  std::string description;
  VersionInfo version_info;
  std::vector<TechniqueEntry> techniques;
  std::vector<LegendItem> legend;
  // Unrecognized top-level fields, preserved verbatim so round-tripping a
  // Navigator export loses nothing.
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const Layer&, const Layer&) = default;
};

struct OverlapPalette {
  std::string only_a = "#ff0000";
  std::string only_b = "#ffff00";
  std::string both = "#00ff00";
};

inline OverlapPalette swapped(const OverlapPalette& p) {
  return OverlapPalette{p.only_b, p.only_a, p.both};
}

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  int entry_index = -1;  // -1 when the problem is not tied to one entry
  std::string message;
};

bool technique_id_valid(std::string_view id);
bool color_valid(std::string_view color);
bool tactic_valid(std::string_view tactic);

// Navigator layer-format 4.x JSON. Throws SyntaxError on malformed JSON and
// SchemaError on missing name/techniques, a bad technique id, or a duplicate
// (technique_id, tactic) pair.
Layer parse_layer(std::string_view json_text);

// Canonical form: keys sorted, no insignificant whitespace, techniques sorted
// by (technique_id, tactic). Equal layers serialize to identical bytes.
std::string serialize_layer(const Layer& layer);

std::vector<Diagnostic> validate_layer(const Layer& layer);

// One entry per (technique_id, tactic) present in either input. Entries found
// in both take palette.both and the summed score; one-sided entries keep their
// own score and the side's palette color. An empty tactic matches any tactic
// of the same technique id.
Layer overlap(const Layer& a, const Layer& b, const OverlapPalette& palette = {});

}  // namespace threatmesh::attck
