#include <algorithm>

#include "doctest.h"
#include "support/test_support.hpp"
#include "threatmesh/protocol.hpp"

using namespace threatmesh;

namespace {

std::unique_ptr<sim::Simulation> make_sim(std::uint64_t seed = 42) {
  sim::ScenarioConfig config = sim::ScenarioConfig::default_config();
  config.net.seed = seed;
  return sim::Simulation::create(config);
}

attck::Layer fixture_layer(const std::string& name) {
  return attck::parse_layer(tmtest::read_fixture(name));
}

std::size_t count_trace_kind(const netsim::Network& net, const std::string& kind,
                             std::size_t from_index = 0) {
  std::size_t count = 0;
  for (std::size_t i = from_index; i < net.trace().size(); ++i) {
    if (net.trace()[i].kind == kind) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("setup publishes resolvable, verifying DIDs through the pipeline") {
  auto s = make_sim();
  for (const auto& [name, actor] : s->actors()) {
    const auto doc = protocol::resolve_did(*s, "org1.client", actor.did);
    CHECK(doc.did == actor.did);
    CHECK(doc.verify());
  }
  // Setup transactions all committed valid on identical chains.
  const auto peers = s->peers();
  for (const auto* peer : peers) {
    CHECK(peer->chain_bytes() == peers.front()->chain_bytes());
    for (const auto& block : peer->chain()) {
      for (const auto flag : block.flags) CHECK(flag == ledger::TxFlag::valid);
    }
  }
}

TEST_CASE("share then fetch round-trips the layer across the full stack") {
  auto s = make_sim();
  const attck::Layer original = fixture_layer("wicked_panda.json");
  const std::string recipient_did = s->actor("org2.client").did;

  const auto outcome = protocol::share_threat(*s, "org1.client", original, {recipient_did});
  CHECK(s->tx_flag(outcome.txid) == ledger::TxFlag::valid);

  const auto record = protocol::read_record(*s, "org2.client", outcome.cid);
  CHECK(record.sender_did == s->actor("org1.client").did);
  CHECK(record.threat_name == original.name);
  CHECK(record.recipients == std::vector<std::string>{recipient_did});

  const attck::Layer fetched = protocol::fetch_threat(*s, "org2.client", outcome.cid);
  CHECK(fetched == original);
  CHECK(attck::serialize_layer(fetched) == attck::serialize_layer(original));
}

TEST_CASE("share to two recipients writes two grant rows, both can fetch") {
  auto s = make_sim();
  const std::string did1 = s->actor("org1.client").did;
  const std::string did2 = s->actor("org2.client").did;
  const auto outcome = protocol::share_threat(*s, "org1.client",
                                              fixture_layer("wicked_panda.json"), {did2, did1});

  const auto record = protocol::read_record(*s, "org1.client", outcome.cid);
  CHECK(record.recipients.size() == 2);
  CHECK(protocol::fetch_threat(*s, "org2.client", outcome.cid).name ==
        "Wicked Panda (G0096)");
  CHECK(protocol::fetch_threat(*s, "org1.client", outcome.cid).name ==
        "Wicked Panda (G0096)");

  // Both grant rows are present on a grants-member peer.
  auto& peer = s->any_peer_of("org1");
  const auto& sender = s->actor("org1.client");
  for (const std::string& did : {did1, did2}) {
    CHECK(peer.query_private(sender.cert, threatshare::kGrantsCollection,
                             threatshare::grant_key(outcome.cid.to_string(), did), s->now())
              .has_value());
  }
}

TEST_CASE("republishing an existing cid fails at endorsement as AlreadyShared") {
  auto s = make_sim();
  const auto outcome = protocol::share_threat(*s, "org1.client",
                                              fixture_layer("fox_kitten.json"), {});
  const auto record = protocol::read_record(*s, "org1.client", outcome.cid);

  auto& sender = s->actor("org1.client");
  const auto proposal = ledger::make_proposal(
      s->channel().name, threatshare::kContractName, "publish_share",
      {record.encode(), threatshare::encode_grants({})}, sender.cert,
      sender.keys.secret_key, s->rng());
  try {
    s->endorse_direct("org1.peer0", proposal);
    FAIL("expected AlreadyShared");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::already_shared);
  }
}

TEST_CASE("publish with a foreign sender_did is rejected as BadSignature") {
  auto s = make_sim();
  const auto outcome = protocol::share_threat(*s, "org1.client",
                                              fixture_layer("fox_kitten.json"), {});
  auto record = protocol::read_record(*s, "org1.client", outcome.cid);
  record.cid = "cid1:raw_leaf:" + std::string(64, '1');  // fresh key, same sender_did

  auto& mallory = s->actor("org2.client");
  const auto proposal = ledger::make_proposal(
      s->channel().name, threatshare::kContractName, "publish_share",
      {record.encode(), threatshare::encode_grants({})}, mallory.cert,
      mallory.keys.secret_key, s->rng());
  try {
    s->endorse_direct("org1.peer0", proposal);
    FAIL("expected BadSignature");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::bad_signature);
  }
}

TEST_CASE("tampered stored DID document fails integrity at resolve") {
  auto s = make_sim();
  auto& org3 = s->actor("org3.client");
  // The document lives in the controller's CAS store; flip one stored byte.
  const auto cid_bytes = s->any_peer_of("org3").query(
      org3.cert, threatshare::did_key(org3.did), s->now());
  REQUIRE(cid_bytes.has_value());
  const cas::Cid doc_cid = cas::Cid::parse(to_string(*cid_bytes));
  org3.cas_node->store().corrupt_block(doc_cid.digest, 7);

  try {
    protocol::resolve_did(*s, "org3.client", org3.did);
    FAIL("expected IntegrityMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::integrity_mismatch);
  }
}

TEST_CASE("share with zero recipients commits; sender can grant later") {
  auto s = make_sim();
  const auto outcome =
      protocol::share_threat(*s, "org1.client", fixture_layer("fox_kitten.json"), {});
  const auto record = protocol::read_record(*s, "org1.client", outcome.cid);
  CHECK(record.recipients.empty());

  // Ungranted recipient is denied...
  const std::string org2_did = s->actor("org2.client").did;
  CHECK_THROWS_AS(protocol::fetch_threat(*s, "org2.client", outcome.cid), Error);

  // ...until the sender grants access.
  protocol::grant_access(*s, "org1.client", outcome.cid, org2_did);
  const attck::Layer fetched = protocol::fetch_threat(*s, "org2.client", outcome.cid);
  CHECK(fetched.name == "Fox Kitten (G0117)");
}

TEST_CASE("revoked sender certificate: IdentityRejected, nothing stored") {
  auto s = make_sim();
  const auto& sender = s->actor("org1.client");
  const std::uint64_t chain_before = s->chain_height();
  s->revoke_cert(sender.cert.serial);

  try {
    protocol::share_threat(*s, "org1.client", fixture_layer("wicked_panda.json"),
                           {s->actor("org2.client").did});
    FAIL("expected IdentityRejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::identity_rejected);
  }
  s->net().run_until_idle();
  CHECK(s->chain_height() == chain_before);
}

TEST_CASE("ungranted fetch: AccessDenied with zero content block transfers") {
  auto s = make_sim();
  const auto outcome = protocol::share_threat(*s, "org1.client",
                                              fixture_layer("wicked_panda.json"),
                                              {s->actor("org2.client").did});
  s->net().run_until_idle();

  // org2's second client holds a valid certificate but no grant.
  s->add_client("org2", "analyst");
  const std::size_t blocks_before = count_trace_kind(s->net(), cas::CasNode::kBlockKind);
  try {
    protocol::fetch_threat(*s, "org2.analyst", outcome.cid);
    FAIL("expected AccessDenied");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::access_denied);
  }
  s->net().run_until_idle();
  CHECK(count_trace_kind(s->net(), cas::CasNode::kBlockKind) == blocks_before);
}

TEST_CASE("revoke-access: later fetch is denied") {
  auto s = make_sim();
  const std::string org2_did = s->actor("org2.client").did;
  const auto outcome = protocol::share_threat(*s, "org1.client",
                                              fixture_layer("fox_kitten.json"), {org2_did});
  CHECK(protocol::fetch_threat(*s, "org2.client", outcome.cid).name == "Fox Kitten (G0117)");

  protocol::revoke_access(*s, "org1.client", outcome.cid, org2_did);
  try {
    protocol::fetch_threat(*s, "org2.client", outcome.cid);
    FAIL("expected AccessDenied");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::access_denied);
  }
  const auto record = protocol::read_record(*s, "org1.client", outcome.cid);
  CHECK(record.recipients.empty());
}

TEST_CASE("non-sender cannot grant, revoke, or erase") {
  auto s = make_sim();
  const auto outcome = protocol::share_threat(*s, "org1.client",
                                              fixture_layer("wicked_panda.json"),
                                              {s->actor("org2.client").did});
  CHECK_THROWS_AS(
      protocol::grant_access(*s, "org2.client", outcome.cid, s->actor("org3.client").did),
      Error);
  CHECK_THROWS_AS(protocol::erase_share(*s, "org2.client", outcome.cid), Error);
}

TEST_CASE("erase: content gone everywhere, audit record remains") {
  auto s = make_sim();
  const auto outcome = protocol::share_threat(*s, "org1.client",
                                              fixture_layer("wicked_panda.json"),
                                              {s->actor("org2.client").did});
  // Replicate to the recipient first.
  protocol::fetch_threat(*s, "org2.client", outcome.cid);
  s->net().run_until_idle();

  const auto erase_outcome = protocol::erase_share(*s, "org1.client", outcome.cid);
  CHECK(s->tx_flag(erase_outcome.txid) == ledger::TxFlag::valid);

  // The audit record survives with erased=true.
  const auto record = protocol::read_record(*s, "org1.client", outcome.cid);
  CHECK(record.erased);

  // Fetch is refused; no node still holds the DAG.
  try {
    protocol::fetch_threat(*s, "org2.client", outcome.cid);
    FAIL("expected Erased");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::erased);
  }
  for (const auto& [name, actor] : s->actors()) {
    CHECK_FALSE(actor.cas_node->store().has_all(outcome.cid));
  }
  CHECK(s->providers().providers(outcome.cid).empty());
}

TEST_CASE("compare_shared: fixtures green set equals the brute-force oracle") {
  auto s = make_sim();
  const attck::Layer wp = fixture_layer("wicked_panda.json");
  const attck::Layer fk = fixture_layer("fox_kitten.json");
  const std::string org2_did = s->actor("org2.client").did;

  const auto share_wp = protocol::share_threat(*s, "org1.client", wp, {org2_did});
  const auto share_fk = protocol::share_threat(*s, "org1.client", fk, {org2_did});

  const attck::OverlapPalette palette;
  const attck::Layer result =
      protocol::compare_shared(*s, "org2.client", share_wp.cid, share_fk.cid, palette);

  std::set<tmtest::EntryKey> green;
  for (const auto& e : result.techniques) {
    if (e.color == palette.both) green.insert({e.technique_id, e.tactic});
  }
  CHECK(green == tmtest::brute_force_both(wp, fk));

  // Self-overlap: every entry lands in the both color.
  const attck::Layer self =
      protocol::compare_shared(*s, "org2.client", share_wp.cid, share_wp.cid, palette);
  for (const auto& e : self.techniques) CHECK(e.color == palette.both);

  // One ungranted cid: the whole comparison is denied.
  const auto private_share = protocol::share_threat(*s, "org1.client", fk, {});
  CHECK_THROWS_AS(
      protocol::compare_shared(*s, "org2.client", share_wp.cid, private_share.cid, palette),
      Error);
}

TEST_CASE("end-to-end confidentiality: observers never see plaintext") {
  auto s = make_sim();
  attck::Layer layer = fixture_layer("wicked_panda.json");
  const std::string marker = "TM_PLAINTEXT_MARKER_0123456789AB";
  REQUIRE(marker.size() == 32);
  layer.techniques[0].comment = marker;

  const auto outcome =
      protocol::share_threat(*s, "org1.client", layer, {s->actor("org2.client").did});
  const attck::Layer fetched = protocol::fetch_threat(*s, "org2.client", outcome.cid);
  CHECK(fetched.techniques == layer.techniques);
  s->net().run_until_idle();

  const auto contains_marker = [&](const Bytes& haystack) {
    return std::search(haystack.begin(), haystack.end(), marker.begin(), marker.end()) !=
           haystack.end();
  };
  // Control: the plaintext really carries the marker.
  CHECK(contains_marker(to_bytes(attck::serialize_layer(layer))));

  for (const auto& env : s->net().trace()) {
    CHECK_FALSE(contains_marker(env.payload_cipher));
  }
  for (const auto* peer : std::as_const(*s).peers()) {
    CHECK_FALSE(contains_marker(peer->chain_bytes()));
  }
  for (const auto& [name, actor] : s->actors()) {
    for (const auto& [hex, bytes] : actor.cas_node->store().raw_blocks()) {
      CHECK_FALSE(contains_marker(bytes));
    }
  }
}

TEST_CASE("unresolvable recipient aborts before anything is stored") {
  auto s = make_sim();
  const std::uint64_t chain_before = s->chain_height();
  try {
    protocol::share_threat(*s, "org1.client", fixture_layer("fox_kitten.json"),
                           {"did:mesh:00000000000000000000000000000000"});
    FAIL("expected UnresolvableRecipient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unresolvable_recipient);
  }
  s->net().run_until_idle();
  CHECK(s->chain_height() == chain_before);
}
