#include "threatmesh/attck_layers.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <utility>

namespace threatmesh::attck {

using nlohmann::json;

namespace {

const std::set<std::string>& recognized_top_level() {
  static const std::set<std::string> fields = {
      "name", "domain", "description", "versions", "techniques", "legendItems"};
  return fields;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::pair<std::string, std::string> entry_key(const TechniqueEntry& e) {
  return {e.technique_id, e.tactic};
}

TechniqueEntry parse_entry(const json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::schema_error, "technique entry must be an object");
  }
  TechniqueEntry e;
  const auto id_it = j.find("techniqueID");
  if (id_it == j.end() || !id_it->is_string()) {
    throw Error(ErrorCode::schema_error, "technique entry missing techniqueID");
  }
  e.technique_id = id_it->get<std::string>();
  if (!technique_id_valid(e.technique_id)) {
    throw Error(ErrorCode::schema_error, "bad technique id: " + e.technique_id);
  }
  if (auto it = j.find("tactic"); it != j.end() && it->is_string()) {
    e.tactic = it->get<std::string>();
  }
  if (auto it = j.find("score"); it != j.end() && it->is_number()) {
    e.score = it->get<std::int64_t>();
  }
  if (auto it = j.find("color"); it != j.end() && it->is_string() && !it->get<std::string>().empty()) {
    std::string c = it->get<std::string>();
    // Normalize uppercase hex; anything else is kept verbatim and surfaced
    // by validate_layer.
    std::string low = lowercase(c);
    e.color = color_valid(low) ? low : c;
  }
  if (auto it = j.find("comment"); it != j.end() && it->is_string() && !it->get<std::string>().empty()) {
    e.comment = it->get<std::string>();
  }
  if (auto it = j.find("enabled"); it != j.end() && it->is_boolean()) {
    e.enabled = it->get<bool>();
  }
  return e;
}

json entry_to_json(const TechniqueEntry& e) {
  json j = json::object();
  j["techniqueID"] = e.technique_id;
  j["tactic"] = e.tactic;
  j["enabled"] = e.enabled;
  if (e.score) j["score"] = *e.score;
  if (e.color) j["color"] = *e.color;
  if (e.comment) j["comment"] = *e.comment;
  return j;
}

std::vector<TechniqueEntry> sorted_entries(std::vector<TechniqueEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const TechniqueEntry& x, const TechniqueEntry& y) {
    return entry_key(x) < entry_key(y);
  });
  return entries;
}

}  // namespace

bool technique_id_valid(std::string_view id) {
  // T\d{4} optionally followed by .\d{3}
  if (id.size() != 5 && id.size() != 9) return false;
  if (id[0] != 'T') return false;
  for (int i = 1; i < 5; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
  }
  if (id.size() == 9) {
    if (id[5] != '.') return false;
    for (int i = 6; i < 9; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(id[i]))) return false;
    }
  }
  return true;
}

bool color_valid(std::string_view color) {
  if (color.size() != 7 || color[0] != '#') return false;
  for (std::size_t i = 1; i < 7; ++i) {
    const char c = color[i];
    const bool ok = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    if (!ok) return false;
  }
  return true;
}

bool tactic_valid(std::string_view tactic) {
  if (tactic.empty()) return true;
  bool prev_dash = true;  // no leading dash
  for (const char c : tactic) {
    if (c == '-') {
      if (prev_dash) return false;
      prev_dash = true;
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      prev_dash = false;
    } else {
      return false;
    }
  }
  return !prev_dash;  // no trailing dash
}

Layer parse_layer(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::syntax_error, e.what());
  }
  if (!j.is_object()) {
    throw Error(ErrorCode::schema_error, "layer must be a JSON object");
  }
  if (!j.contains("name") || !j["name"].is_string()) {
    throw Error(ErrorCode::schema_error, "layer missing name");
  }
  if (!j.contains("techniques") || !j["techniques"].is_array()) {
    throw Error(ErrorCode::schema_error, "layer missing techniques");
  }

  Layer layer;
  layer.name = j["name"].get<std::string>();
  if (j.contains("domain") && j["domain"].is_string()) {
    layer.domain = j["domain"].get<std::string>();
  }
  if (j.contains("description") && j["description"].is_string()) {
    layer.description = j["description"].get<std::string>();
  } else {
    layer.description.clear();
  }
  if (j.contains("versions") && j["versions"].is_object()) {
    const json& v = j["versions"];
    if (v.contains("layer") && v["layer"].is_string()) {
      layer.version_info.layer_format = v["layer"].get<std::string>();
    }
    if (v.contains("attack") && v["attack"].is_string()) {
      layer.version_info.attack_version = v["attack"].get<std::string>();
    }
    if (v.contains("navigator") && v["navigator"].is_string()) {
      layer.version_info.navigator_version = v["navigator"].get<std::string>();
    }
  }

  std::set<std::pair<std::string, std::string>> seen;
  for (const json& ej : j["techniques"]) {
    TechniqueEntry e = parse_entry(ej);
    if (!seen.insert(entry_key(e)).second) {
      throw Error(ErrorCode::schema_error,
                  "duplicate technique entry " + e.technique_id + "/" + e.tactic);
    }
    layer.techniques.push_back(std::move(e));
  }
  // Canonical order on the way in, so value equality is order-insensitive.
  layer.techniques = sorted_entries(std::move(layer.techniques));

  if (j.contains("legendItems") && j["legendItems"].is_array()) {
    for (const json& lj : j["legendItems"]) {
      if (!lj.is_object()) continue;
      LegendItem item;
      if (lj.contains("label") && lj["label"].is_string()) item.label = lj["label"];
      if (lj.contains("color") && lj["color"].is_string()) {
        item.color = lowercase(lj["color"].get<std::string>());
      }
      layer.legend.push_back(std::move(item));
    }
  }

  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!recognized_top_level().count(it.key())) {
      layer.extra[it.key()] = it.value();
    }
  }
  return layer;
}

std::string serialize_layer(const Layer& layer) {
  json j = layer.extra.is_object() ? layer.extra : json::object();
  j["name"] = layer.name;
  j["domain"] = layer.domain;
  j["description"] = layer.description;
  j["versions"] = {{"attack", layer.version_info.attack_version},
                   {"layer", layer.version_info.layer_format},
                   {"navigator", layer.version_info.navigator_version}};
  json techniques = json::array();
  for (const TechniqueEntry& e : sorted_entries(layer.techniques)) {
    techniques.push_back(entry_to_json(e));
  }
  j["techniques"] = std::move(techniques);
  json legend = json::array();
  for (const LegendItem& item : layer.legend) {
    legend.push_back({{"label", item.label}, {"color", item.color}});
  }
  j["legendItems"] = std::move(legend);
  return j.dump();
}

std::vector<Diagnostic> validate_layer(const Layer& layer) {
  std::vector<Diagnostic> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < layer.techniques.size(); ++i) {
    const TechniqueEntry& e = layer.techniques[i];
    const int idx = static_cast<int>(i);
    if (!technique_id_valid(e.technique_id)) {
      out.push_back({Diagnostic::Severity::error, idx,
                     "bad technique id: " + e.technique_id});
    }
    if (e.color && !color_valid(*e.color)) {
      out.push_back({Diagnostic::Severity::error, idx, "bad color: " + *e.color});
    }
    if (!tactic_valid(e.tactic)) {
      out.push_back({Diagnostic::Severity::error, idx, "bad tactic: " + e.tactic});
    }
    if (!seen.insert(entry_key(e)).second) {
      out.push_back({Diagnostic::Severity::error, idx,
                     "duplicate entry " + e.technique_id + "/" + e.tactic});
    }
  }
  for (const LegendItem& item : layer.legend) {
    if (!color_valid(item.color)) {
      out.push_back({Diagnostic::Severity::error, -1,
                     "bad legend color: " + item.color});
    }
  }
  return out;
}

Layer overlap(const Layer& a, const Layer& b, const OverlapPalette& palette) {
  if (a.domain != b.domain) {
    throw Error(ErrorCode::domain_mismatch, a.domain + " vs " + b.domain);
  }
  if (palette.only_a == palette.only_b || palette.only_a == palette.both ||
      palette.only_b == palette.both) {
    throw Error(ErrorCode::config_error, "overlap palette colors must be distinct");
  }

  // An empty tactic stands for every tactic of the technique.
  const auto matches = [](const TechniqueEntry& e, const std::pair<std::string, std::string>& key) {
    if (e.technique_id != key.first) return false;
    return e.tactic == key.second || e.tactic.empty() || key.second.empty();
  };

  std::vector<std::pair<std::string, std::string>> keys;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto* layer : {&a, &b}) {
    for (const TechniqueEntry& e : layer->techniques) {
      if (seen.insert(entry_key(e)).second) keys.push_back(entry_key(e));
    }
  }
  std::sort(keys.begin(), keys.end());

  Layer out;
  out.name = a.name + " ∩ " + b.name;
  out.domain = a.domain;
  out.description = "Overlap of '" + a.name + "' and '" + b.name + "'";
  out.version_info = a.version_info;
  out.legend = {{"only in " + a.name, palette.only_a},
                {"only in " + b.name, palette.only_b},
                {"present in both", palette.both}};

  for (const auto& key : keys) {
    std::int64_t score_a = 0, score_b = 0;
    bool in_a = false, in_b = false;
    for (const TechniqueEntry& e : a.techniques) {
      if (matches(e, key)) {
        in_a = true;
        score_a += e.score.value_or(0);
      }
    }
    for (const TechniqueEntry& e : b.techniques) {
      if (matches(e, key)) {
        in_b = true;
        score_b += e.score.value_or(0);
      }
    }
    TechniqueEntry entry;
    entry.technique_id = key.first;
    entry.tactic = key.second;
    entry.enabled = true;
    if (in_a && in_b) {
      entry.color = palette.both;
      entry.score = score_a + score_b;
    } else if (in_a) {
      entry.color = palette.only_a;
      entry.score = score_a;
    } else {
      entry.color = palette.only_b;
      entry.score = score_b;
    }
    out.techniques.push_back(std::move(entry));
  }
  return out;
}

}  // namespace threatmesh::attck
