#include <algorithm>
#include <memory>

#include "doctest.h"
#include "threatmesh/ledger.hpp"

using namespace threatmesh;
using namespace threatmesh::ledger;

namespace {

// Minimal deterministic contract for pipeline tests: "set" reads then writes
// a public key, "set_private" stages a private value, "noop" touches nothing.
class KvContract : public Contract {
 public:
  std::string name() const override { return "kv"; }
  void execute(TxContext& ctx, const std::string& operation,
               const std::vector<Bytes>& args) override {
    if (operation == "set") {
      ctx.get_state(to_string(args.at(0)));
      ctx.put_state(to_string(args.at(0)), args.at(1));
    } else if (operation == "set_private") {
      ctx.put_private(to_string(args.at(0)), to_string(args.at(1)), args.at(2));
    } else if (operation == "del") {
      ctx.get_state(to_string(args.at(0)));
      ctx.delete_state(to_string(args.at(0)));
    } else if (operation == "noop") {
    } else {
      throw Error(ErrorCode::contract_error, "unknown op " + operation);
    }
  }
};

struct Harness {
  crypto::Rng rng{909};
  std::map<std::string, identity::CertificateAuthority> org_cas;
  identity::Msp msp;
  ChannelConfig channel;
  LedgerBlock genesis;
  std::vector<std::unique_ptr<Peer>> peers;
  std::unique_ptr<SoloOrderer> orderer;
  identity::CertificateAuthority::Issued alice;   // org1 client
  identity::CertificateAuthority::Issued carol;   // org3 client

  Harness() {
    for (const std::string org : {"org1", "org2", "org3"}) {
      auto ca = identity::CertificateAuthority::init(org + "-ca", org, rng, 0, 1'000'000);
      msp.add_org(org, ca.root(), ca.crl());
      org_cas.emplace(org, std::move(ca));
    }
    channel.name = "threatnet";
    channel.member_orgs = {"org1", "org2", "org3"};
    channel.policy.required_orgs = 2;
    channel.policy.member_orgs = channel.member_orgs;
    channel.collections = {{"grants", {"org1", "org2"}}};
    genesis = make_genesis(channel);

    const auto add_peer = [&](const std::string& org, int index) {
      auto issued = org_cas.at(org).issue(org + ".peer" + std::to_string(index), org,
                                          identity::Role::peer, 0, 1'000'000, rng);
      auto peer = std::make_unique<Peer>(org + ".peer" + std::to_string(index), org,
                                         std::move(issued.cert), std::move(issued.keys), &msp,
                                         channel, genesis);
      peer->install(std::make_shared<KvContract>());
      peers.push_back(std::move(peer));
    };
    add_peer("org1", 0);
    add_peer("org1", 1);
    add_peer("org2", 0);
    add_peer("org3", 0);

    orderer = std::make_unique<SoloOrderer>(OrdererConfig{}, genesis, &msp);
    alice = org_cas.at("org1").issue("alice", "org1", identity::Role::client, 0, 1'000'000, rng);
    carol = org_cas.at("org3").issue("carol", "org3", identity::Role::client, 0, 1'000'000, rng);
  }

  Proposal proposal(const identity::CertificateAuthority::Issued& client,
                    const std::string& op, std::vector<Bytes> args) {
    return make_proposal(channel.name, "kv", op, std::move(args), client.cert,
                         client.keys.secret_key, rng);
  }

  Transaction endorse_by(const Proposal& p, std::initializer_list<int> peer_indices) {
    Transaction tx;
    tx.proposal = p;
    for (const int index : peer_indices) {
      auto result = peers[static_cast<std::size_t>(index)]->endorse(p, 10);
      for (const auto& value : result.private_values) {
        const Digest txid = p.txid();
        for (auto& peer : peers) {
          const CollectionSpec* spec = channel.collection(value.collection);
          if (spec && spec->member_orgs.count(peer->org())) {
            peer->cache_private_value(txid, value.collection, value.key, value.value);
          }
        }
      }
      tx.endorsements.push_back(std::move(result.endorsement));
    }
    return tx;
  }

  // Commits on every peer and checks they all agree on the flags.
  std::vector<TxFlag> commit_everywhere(const LedgerBlock& block) {
    std::vector<TxFlag> first;
    for (auto& peer : peers) {
      const auto flags = peer->validate_and_commit(block);
      if (first.empty()) {
        first = flags;
      } else {
        CHECK(flags == first);
      }
    }
    return first;
  }

  std::uint64_t clock = 100;

  LedgerBlock cut_one(std::vector<Transaction> txs, std::uint64_t now = 0) {
    if (now == 0) now = clock;
    clock = std::max(clock, now) + 50;  // keep clear of the previous cut cost
    for (auto& tx : txs) orderer->submit(std::move(tx), now);
    auto blocks = orderer->try_cut(now + 10);
    REQUIRE(blocks.size() == 1);
    return blocks.front();
  }
};

}  // namespace

TEST_CASE("endorsement: deterministic across peers of different orgs") {
  Harness h;
  const Proposal p = h.proposal(h.alice, "set", {to_bytes("k"), to_bytes("v")});
  const auto e1 = h.peers[0]->endorse(p, 10).endorsement;  // org1
  const auto e2 = h.peers[2]->endorse(p, 10).endorsement;  // org2
  CHECK(e1.result_bytes() == e2.result_bytes());
  CHECK(e1.read_set.size() == 1);
  CHECK(e1.read_set[0].version == Version{});
  CHECK(e1.write_set.size() == 1);

  // Endorsement signatures bind to the txid.
  CHECK(crypto::verify_signature(e1.endorser.public_key, e1.signing_bytes(p.txid()),
                                 e1.signature));
}

TEST_CASE("endorsement: revoked creator is rejected with the MSP reason") {
  Harness h;
  h.org_cas.at("org1").revoke(h.alice.cert.serial, 5);
  h.msp.update_crl("org1", h.org_cas.at("org1").crl());
  const Proposal p = h.proposal(h.alice, "set", {to_bytes("k"), to_bytes("v")});
  try {
    h.peers[0]->endorse(p, 10);
    FAIL("expected IdentityRejected");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::identity_rejected);
    CHECK(std::string(e.what()).find("Revoked") != std::string::npos);
  }
}

TEST_CASE("endorsement: unknown contract and non-member private write") {
  Harness h;
  Proposal p = make_proposal(h.channel.name, "nope", "x", {}, h.alice.cert,
                             h.alice.keys.secret_key, h.rng);
  CHECK_THROWS_AS(h.peers[0]->endorse(p, 10), Error);

  // org3's peer is not a grants member, so it cannot endorse a private write.
  const Proposal priv = h.proposal(
      h.alice, "set_private", {to_bytes("grants"), to_bytes("g1"), to_bytes("secret")});
  try {
    h.peers[3]->endorse(priv, 10);
    FAIL("expected AccessDenied");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::access_denied);
  }
}

TEST_CASE("ordering: batch by size and by timeout, never empty") {
  Harness h;
  SoloOrderer solo(OrdererConfig{10, 2, 3}, h.genesis, &h.msp);

  CHECK(solo.try_cut(1).empty());  // nothing pending, no empty block

  // 3 txs, then the timeout passes: one block of 3.
  for (int i = 0; i < 3; ++i) {
    const Proposal p = h.proposal(h.alice, "noop", {});
    solo.submit(h.endorse_by(p, {0, 2}), 100);
  }
  CHECK(solo.try_cut(101).empty());  // not full, not aged
  auto blocks = solo.try_cut(102);   // timeout (100 + 2) reached
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].transactions.size() == 3);
  CHECK(blocks[0].number == 1);

  // 25 txs at once: 10, then (after cut cost) 10, then 5.
  for (int i = 0; i < 25; ++i) {
    const Proposal p = h.proposal(h.alice, "noop", {});
    solo.submit(h.endorse_by(p, {0, 2}), 200);
  }
  blocks = solo.try_cut(200);
  REQUIRE(blocks.size() == 1);  // the cut cost serializes the second batch
  CHECK(blocks[0].transactions.size() == 10);
  blocks = solo.try_cut(203);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].transactions.size() == 10);
  blocks = solo.try_cut(206);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].transactions.size() == 5);
  CHECK(solo.pending_count() == 0);
}

TEST_CASE("validation: endorsement policy counts distinct orgs") {
  Harness h;

  // org1 + org2: satisfies 2-of-3.
  {
    const Proposal p = h.proposal(h.alice, "set", {to_bytes("a"), to_bytes("1")});
    const auto flags = h.commit_everywhere(h.cut_one({h.endorse_by(p, {0, 2})}));
    CHECK(flags == std::vector<TxFlag>{TxFlag::valid});
  }
  // two peers of org1 only: same org twice, rejected.
  {
    const Proposal p = h.proposal(h.alice, "set", {to_bytes("b"), to_bytes("1")});
    const auto flags = h.commit_everywhere(h.cut_one({h.endorse_by(p, {0, 1})}));
    CHECK(flags == std::vector<TxFlag>{TxFlag::bad_endorsement});
  }
  // no endorsements at all.
  {
    const Proposal p = h.proposal(h.alice, "set", {to_bytes("c"), to_bytes("1")});
    Transaction tx;
    tx.proposal = p;
    const auto flags = h.commit_everywhere(h.cut_one({tx}));
    CHECK(flags == std::vector<TxFlag>{TxFlag::bad_endorsement});
  }
  // endorsements that executed at different states disagree bit-for-bit.
  {
    const Proposal p = h.proposal(h.alice, "set", {to_bytes("a"), to_bytes("2")});
    auto e1 = h.peers[0]->endorse(p, 10).endorsement;
    // Tamper with one endorsement's write set to force a mismatch.
    auto e2 = h.peers[2]->endorse(p, 10).endorsement;
    e2.write_set[0].value = to_bytes("different");
    e2.signature = Bytes(64, 0);
    Transaction tx;
    tx.proposal = p;
    tx.endorsements = {e1, e2};
    const auto flags = h.commit_everywhere(h.cut_one({tx}));
    CHECK(flags == std::vector<TxFlag>{TxFlag::bad_endorsement});
  }
}

TEST_CASE("validation: mvcc conflict inside one block, first wins") {
  Harness h;
  const Proposal p1 = h.proposal(h.alice, "set", {to_bytes("k"), to_bytes("v1")});
  const Proposal p2 = h.proposal(h.alice, "set", {to_bytes("k"), to_bytes("v2")});
  // Both endorsed against the same (empty) state.
  const Transaction t1 = h.endorse_by(p1, {0, 2});
  const Transaction t2 = h.endorse_by(p2, {0, 2});
  const auto flags = h.commit_everywhere(h.cut_one({t1, t2}));
  CHECK(flags == std::vector<TxFlag>{TxFlag::valid, TxFlag::mvcc_conflict});
  CHECK(to_string(h.peers[0]->query(h.alice.cert, "k", 50).value()) == "v1");
}

TEST_CASE("validation: replaying the identical proposal commits at most once") {
  Harness h;
  const Proposal p = h.proposal(h.alice, "set", {to_bytes("k"), to_bytes("v")});
  const Transaction tx = h.endorse_by(p, {0, 2});
  CHECK(tx.proposal.txid() == p.txid());  // same bytes, same id

  const auto flags1 = h.commit_everywhere(h.cut_one({tx}));
  CHECK(flags1 == std::vector<TxFlag>{TxFlag::valid});

  const auto flags2 = h.commit_everywhere(h.cut_one({tx}, 200));
  CHECK(flags2 == std::vector<TxFlag>{TxFlag::mvcc_conflict});
}

TEST_CASE("validation: revocation snapshot in the block header is decisive") {
  Harness h;
  const Proposal p = h.proposal(h.alice, "set", {to_bytes("k"), to_bytes("v")});
  const Transaction tx = h.endorse_by(p, {0, 2});

  // Revoke after endorsement, before the cut: every peer flags bad_identity.
  h.org_cas.at("org1").revoke(h.alice.cert.serial, 50);
  h.msp.update_crl("org1", h.org_cas.at("org1").crl());
  const auto flags = h.commit_everywhere(h.cut_one({tx}));
  CHECK(flags == std::vector<TxFlag>{TxFlag::bad_identity});
}

TEST_CASE("queries: identity gate, private membership, NotFound") {
  Harness h;
  const Proposal p = h.proposal(
      h.alice, "set_private", {to_bytes("grants"), to_bytes("g/1"), to_bytes("wrapped")});
  h.commit_everywhere(h.cut_one({h.endorse_by(p, {0, 2})}));

  // Member org reads the value.
  auto& org1_peer = *h.peers[0];
  const auto value = org1_peer.query_private(h.alice.cert, "grants", "g/1", 50);
  CHECK(to_string(value.value()) == "wrapped");

  // Non-member org is denied even on its own peer.
  auto& org3_peer = *h.peers[3];
  CHECK_THROWS_AS(org3_peer.query_private(h.carol.cert, "grants", "g/1", 50), Error);

  // Never-written key reads back empty.
  CHECK_FALSE(org1_peer.query(h.alice.cert, "nothing", 50).has_value());

  // Revoked caller is rejected outright.
  h.org_cas.at("org1").revoke(h.alice.cert.serial, 60);
  h.msp.update_crl("org1", h.org_cas.at("org1").crl());
  CHECK_THROWS_AS(org1_peer.query(h.alice.cert, "k", 70), Error);
}

TEST_CASE("privacy: non-member peers hold only the value hash") {
  Harness h;
  const Bytes secret = to_bytes("wrapped-content-key-bytes");
  const Proposal p =
      h.proposal(h.alice, "set_private", {to_bytes("grants"), to_bytes("g/2"), secret});
  h.commit_everywhere(h.cut_one({h.endorse_by(p, {0, 2})}));

  auto& org3_peer = *h.peers[3];
  CHECK_FALSE(org3_peer.state().get_private("grants", "g/2").has_value());
  const auto hash = org3_peer.state().get_private_hash("grants", "g/2");
  REQUIRE(hash.has_value());
  CHECK(*hash == crypto::sha256(secret));

  auto& org1_peer = *h.peers[0];
  CHECK(org1_peer.state().get_private("grants", "g/2").has_value());
}

TEST_CASE("chain: hash chain verifies, tampering is detected, gaps rejected") {
  Harness h;
  for (int i = 0; i < 3; ++i) {
    const Proposal p =
        h.proposal(h.alice, "set", {to_bytes("k" + std::to_string(i)), to_bytes("v")});
    h.commit_everywhere(h.cut_one({h.endorse_by(p, {0, 2})}, 100 + 10 * i));
  }
  const auto& chain = h.peers[0]->chain();
  CHECK(chain.size() == 4);
  verify_chain(chain);

  // All peers hold byte-identical chains.
  const Bytes reference = h.peers[0]->chain_bytes();
  for (const auto& peer : h.peers) {
    CHECK(peer->chain_bytes() == reference);
    CHECK(peer->state_hash() == h.peers[0]->state_hash());
  }

  // Flip one byte inside a block body: data hash check fails.
  auto tampered = chain;
  tampered[2].transactions[0].proposal.args[1][0] ^= 0x01;
  CHECK_THROWS_AS(verify_chain(tampered), Error);

  // A block arriving out of order is a ChainGap.
  LedgerBlock future;
  future.number = 99;
  try {
    h.peers[0]->validate_and_commit(future);
    FAIL("expected ChainGap");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::chain_gap);
  }
}

TEST_CASE("block file encoding round-trips with flags") {
  Harness h;
  const Proposal p = h.proposal(h.alice, "set", {to_bytes("k"), to_bytes("v")});
  LedgerBlock block = h.cut_one({h.endorse_by(p, {0, 2})});
  h.peers[0]->validate_and_commit(block);
  const LedgerBlock& committed = h.peers[0]->chain().back();

  const Bytes file = committed.encode_file();
  const LedgerBlock decoded = LedgerBlock::decode_file(file);
  CHECK(decoded.encode_file() == file);
  CHECK(decoded.flags == committed.flags);
  CHECK(decoded.block_hash() == committed.block_hash());
}

TEST_CASE("endorsement policy bounds") {
  EndorsementPolicy policy;
  policy.member_orgs = {"a", "b", "c"};
  policy.required_orgs = 0;
  CHECK_THROWS_AS(policy.validate(), Error);
  policy.required_orgs = 4;
  CHECK_THROWS_AS(policy.validate(), Error);
  policy.required_orgs = 2;
  policy.validate();
  CHECK(policy.satisfied_by({"a", "c"}));
  CHECK_FALSE(policy.satisfied_by({"a"}));
  CHECK_FALSE(policy.satisfied_by({"a", "zz"}));
}
