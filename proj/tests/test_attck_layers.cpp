#include <random>

#include "doctest.h"
#include "support/test_support.hpp"
#include "threatmesh/attck_layers.hpp"

using namespace threatmesh;
using namespace threatmesh::attck;

TEST_CASE("parse minimal layer") {
  const Layer layer =
      parse_layer(R"({"name":"L","domain":"enterprise-attack","techniques":[]})");
  CHECK(layer.name == "L");
  CHECK(layer.domain == "enterprise-attack");
  CHECK(layer.techniques.empty());
}

TEST_CASE("parse errors: syntax vs schema") {
  CHECK_THROWS_WITH_AS(parse_layer("{not json"), doctest::Contains("SyntaxError"), Error);

  try {
    parse_layer(R"({"techniques":[]})");
    FAIL("missing name accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::schema_error);
  }
  try {
    parse_layer(R"({"name":"X"})");
    FAIL("missing techniques accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::schema_error);
  }
  try {
    parse_layer(R"({"name":"X","techniques":[{"techniqueID":"BAD"}]})");
    FAIL("bad technique id accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::schema_error);
  }
  try {
    parse_layer(R"({"name":"X","techniques":[
      {"techniqueID":"T1105","tactic":"command-and-control"},
      {"techniqueID":"T1105","tactic":"command-and-control"}]})");
    FAIL("duplicate entry accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::schema_error);
  }
}

TEST_CASE("technique id pattern") {
  CHECK(technique_id_valid("T1059"));
  CHECK(technique_id_valid("T1059.001"));
  CHECK_FALSE(technique_id_valid("T105"));
  CHECK_FALSE(technique_id_valid("T10590"));
  CHECK_FALSE(technique_id_valid("X1059"));
  CHECK_FALSE(technique_id_valid("T1059.01"));
  CHECK_FALSE(technique_id_valid("T1059_001"));
}

TEST_CASE("fixtures parse with the published technique sets") {
  const Layer wp = parse_layer(tmtest::read_fixture("wicked_panda.json"));
  CHECK(wp.name == "Wicked Panda (G0096)");
  CHECK(wp.techniques.size() == 41);
  CHECK(validate_layer(wp).empty());

  const Layer fk = parse_layer(tmtest::read_fixture("fox_kitten.json"));
  CHECK(fk.name == "Fox Kitten (G0117)");
  CHECK(fk.techniques.size() == 24);
  CHECK(validate_layer(fk).empty());

  // Unknown Navigator fields survive verbatim.
  CHECK(wp.extra.contains("gradient"));
  CHECK(wp.extra.contains("layout"));
}

TEST_CASE("serialize: empty layer emits one canonical line") {
  const Layer layer = parse_layer(R"({"name":"empty","techniques":[]})");
  const std::string text = serialize_layer(layer);
  CHECK(text.find('\n') == std::string::npos);
  CHECK(text.front() == '{');
  CHECK(parse_layer(text) == layer);
}

TEST_CASE("serialize: canonical, idempotent, order-insensitive") {
  for (const char* name : {"wicked_panda.json", "fox_kitten.json"}) {
    const std::string raw = tmtest::read_fixture(name);
    const Layer once = parse_layer(raw);
    const std::string s1 = serialize_layer(once);
    const Layer twice = parse_layer(s1);
    const std::string s2 = serialize_layer(twice);
    CHECK(s1 == s2);       // canonical-form idempotence
    CHECK(once == twice);  // round-trip identity
  }

  // Equal layers serialize identically regardless of construction order.
  Layer a, b;
  a.name = b.name = "x";
  TechniqueEntry e1{"T1001", "execution", 1, {}, {}, true};
  TechniqueEntry e2{"T1002", "discovery", 2, {}, {}, true};
  a.techniques = {e1, e2};
  b.techniques = {e2, e1};
  CHECK(serialize_layer(a) == serialize_layer(b));
}

TEST_CASE("validate_layer reports bad colors, tactics, duplicates") {
  Layer layer;
  layer.name = "diag";
  layer.techniques.push_back({"T1105", "command-and-control", {}, {}, {}, true});
  CHECK(validate_layer(layer).empty());

  layer.techniques.push_back({"T1105", "command-and-control", {}, {}, {}, true});
  auto diags = validate_layer(layer);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].entry_index == 1);

  layer.techniques.pop_back();
  layer.techniques.push_back({"T1059", "execution", {}, std::string("#GGGGGG"), {}, true});
  diags = validate_layer(layer);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].message.find("#GGGGGG") != std::string::npos);

  layer.techniques.pop_back();
  layer.techniques.push_back({"T1059", "Execution Phase", {}, {}, {}, true});
  CHECK(validate_layer(layer).size() == 1);
}

TEST_CASE("overlap: hand-checked three-technique example") {
  Layer a, b;
  a.name = "A";
  b.name = "B";
  a.techniques = {{"T1059", "execution", 1, {}, {}, true},
                  {"T1105", "command-and-control", 2, {}, {}, true}};
  b.techniques = {{"T1105", "command-and-control", 3, {}, {}, true},
                  {"T1566", "initial-access", 4, {}, {}, true}};

  const OverlapPalette palette;
  const Layer result = overlap(a, b, palette);
  REQUIRE(result.techniques.size() == 3);
  CHECK(result.name == "A ∩ B");
  REQUIRE(result.legend.size() == 3);

  for (const auto& e : result.techniques) {
    if (e.technique_id == "T1059") {
      CHECK(e.color == palette.only_a);
      CHECK(e.score == 1);
    } else if (e.technique_id == "T1105") {
      CHECK(e.color == palette.both);
      CHECK(e.score == 5);  // summed
    } else {
      CHECK(e.technique_id == "T1566");
      CHECK(e.color == palette.only_b);
      CHECK(e.score == 4);
    }
  }
}

TEST_CASE("overlap: empty side yields all only_b") {
  Layer a, b;
  a.name = "empty";
  b.name = "full";
  b.techniques = {{"T1105", "command-and-control", 1, {}, {}, true},
                  {"T1059.001", "execution", 1, {}, {}, true}};
  const OverlapPalette palette;
  const Layer result = overlap(a, b, palette);
  CHECK(result.techniques.size() == 2);
  for (const auto& e : result.techniques) CHECK(e.color == palette.only_b);
}

TEST_CASE("overlap: domain mismatch") {
  Layer a, b;
  a.name = "a";
  b.name = "b";
  b.domain = "mobile-attack";
  CHECK_THROWS_AS(overlap(a, b, {}), Error);
}

TEST_CASE("overlap: palette colors must be distinct") {
  Layer a, b;
  a.name = "a";
  b.name = "b";
  OverlapPalette bad;
  bad.only_b = bad.only_a;
  CHECK_THROWS_AS(overlap(a, b, bad), Error);
}

TEST_CASE("overlap: empty tactic matches any tactic of the technique") {
  Layer a, b;
  a.name = "a";
  b.name = "b";
  a.techniques = {{"T1078", "", 1, {}, {}, true}};
  b.techniques = {{"T1078", "initial-access", 2, {}, {}, true},
                  {"T1078", "persistence", 3, {}, {}, true}};
  const OverlapPalette palette;
  const Layer result = overlap(a, b, palette);
  REQUIRE(result.techniques.size() == 3);
  for (const auto& e : result.techniques) CHECK(e.color == palette.both);
}

TEST_CASE("fixture overlap equals the brute-force oracle") {
  const Layer wp = parse_layer(tmtest::read_fixture("wicked_panda.json"));
  const Layer fk = parse_layer(tmtest::read_fixture("fox_kitten.json"));
  const OverlapPalette palette;
  const Layer result = overlap(wp, fk, palette);

  const auto expected_both = tmtest::brute_force_both(wp, fk);
  std::set<tmtest::EntryKey> actual_both;
  for (const auto& e : result.techniques) {
    if (e.color == palette.both) actual_both.insert({e.technique_id, e.tactic});
  }
  CHECK(actual_both == expected_both);
  CHECK_FALSE(actual_both.empty());  // the two groups genuinely overlap

  // The green set is loadable Navigator output: serialize and re-parse.
  const Layer reparsed = parse_layer(serialize_layer(result));
  CHECK(reparsed == result);
}

TEST_CASE("overlap properties over random layer pairs") {
  std::mt19937_64 rng(20260810);
  const OverlapPalette palette;
  const OverlapPalette swapped_palette = swapped(palette);

  for (int i = 0; i < 300; ++i) {
    const Layer a = tmtest::random_layer(rng, "A");
    const Layer b = tmtest::random_layer(rng, "B");
    const Layer ab = overlap(a, b, palette);
    const Layer ba = overlap(b, a, swapped_palette);

    // Key cardinality: |union of keys|.
    auto union_keys = tmtest::entry_keys(a);
    for (const auto& k : tmtest::entry_keys(b)) union_keys.insert(k);
    CHECK(ab.techniques.size() == union_keys.size());

    // Symmetric up to palette swap: same keys, same colors.
    REQUIRE(ba.techniques.size() == ab.techniques.size());
    std::map<tmtest::EntryKey, std::string> ab_colors, ba_colors;
    for (const auto& e : ab.techniques) ab_colors[{e.technique_id, e.tactic}] = *e.color;
    for (const auto& e : ba.techniques) ba_colors[{e.technique_id, e.tactic}] = *e.color;
    CHECK(ab_colors == ba_colors);

    // The both-colored subset equals the brute-force intersection.
    std::set<tmtest::EntryKey> actual_both;
    for (const auto& e : ab.techniques) {
      if (*e.color == palette.both) actual_both.insert({e.technique_id, e.tactic});
    }
    CHECK(actual_both == tmtest::brute_force_both(a, b));
  }
}
