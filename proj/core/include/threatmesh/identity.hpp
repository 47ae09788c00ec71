#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "threatmesh/crypto.hpp"

namespace threatmesh::identity {

enum class Role : std::uint8_t { peer = 0, orderer = 1, client = 2, admin = 3, ca = 4 };

const char* role_name(Role role);
Role role_from_name(const std::string& name);

// Canonical binary certificate. The issuer signature covers canonical_body(),
// so field order and integer widths are fixed.
struct Certificate {
  std::uint64_t serial = 0;
  std::string subject;
  std::string organization;
  Role role = Role::client;
  Bytes public_key;
  std::uint64_t not_before = 0;
  std::uint64_t not_after = 0;
  std::string issuer;
  Bytes issuer_signature;

  Bytes canonical_body() const;
  Bytes encode() const;
  static Certificate decode(const Bytes& bytes);
  static Certificate decode(ByteReader& r);
  void encode_to(ByteWriter& w) const;

  // hex sha256 of the public key; doubles as the DID fingerprint.
  std::string fingerprint() const;

  friend bool operator==(const Certificate&, const Certificate&) = default;
};

struct Crl {
  std::set<std::uint64_t> revoked_serials;
  std::uint64_t issued_at = 0;
  Bytes ca_signature;

  Bytes canonical_body() const;
  Bytes encode() const;
  static Crl decode(const Bytes& bytes);
  bool contains(std::uint64_t serial) const { return revoked_serials.count(serial) > 0; }
};

enum class VerifyStatus : std::uint8_t {
  ok = 0,
  bad_signature,
  expired,
  not_yet_valid,
  revoked,
  unknown_issuer,
};

const char* verify_status_name(VerifyStatus status);

struct VerifyResult {
  VerifyStatus status = VerifyStatus::ok;
  bool accepted() const { return status == VerifyStatus::ok; }
  const char* reason() const { return verify_status_name(status); }
};

VerifyResult verify_cert(const Certificate& cert, const Certificate& ca_root, const Crl& crl,
                         std::uint64_t now);

class CertificateAuthority {
 public:
  // Self-signed root, role=ca, empty CRL. serial_base partitions the serial
  // space between CAs so a bare serial number identifies one certificate
  // across the whole deployment.
  static CertificateAuthority init(const std::string& name, const std::string& organization,
                                   crypto::Rng& rng, std::uint64_t now,
                                   std::uint64_t validity_ticks, std::uint64_t serial_base = 1);

  const Certificate& root() const { return root_; }
  const Crl& crl() const { return crl_; }
  const crypto::SigningKeyPair& keys() const { return keys_; }

  struct Issued {
    Certificate cert;
    crypto::SigningKeyPair keys;
  };

  Issued issue(const std::string& subject, const std::string& organization, Role role,
               std::uint64_t not_before, std::uint64_t not_after, crypto::Rng& rng);

  // Re-signs and returns the grown CRL; idempotent per serial.
  const Crl& revoke(std::uint64_t serial, std::uint64_t now);
  bool has_issued(std::uint64_t serial) const { return issued_.count(serial) > 0; }

  // Persistence (secret material included; the state directory is trusted).
  std::string to_json() const;
  static CertificateAuthority from_json(const std::string& text);

 private:
  CertificateAuthority() = default;
  crypto::SigningKeyPair keys_;
  Certificate root_;
  Crl crl_;
  std::uint64_t next_serial_ = 1;
  std::set<std::uint64_t> issued_;
};

// Membership verification: all org CA roots plus their current CRLs. One
// instance is shared by every node of a simulation, standing in for the MSP
// material distributed at channel creation.
class Msp {
 public:
  void add_org(const std::string& org, const Certificate& root, const Crl& crl);
  void update_crl(const std::string& org, const Crl& crl);
  VerifyResult verify(const Certificate& cert, std::uint64_t now) const;
  const Certificate* root_for(const std::string& org) const;
  const Crl* crl_for(const std::string& org) const;
  std::map<std::string, std::set<std::uint64_t>> revocation_snapshot() const;
  VerifyResult verify_with_revocations(
      const Certificate& cert, std::uint64_t now,
      const std::map<std::string, std::set<std::uint64_t>>& revoked) const;

 private:
  struct OrgMaterial {
    Certificate root;
    Crl crl;
  };
  std::map<std::string, OrgMaterial> orgs_;
};

struct DidDocument {
  std::string did;           // did:mesh:<hex fingerprint>
  std::string controller;    // certificate fingerprint
  std::vector<Bytes> verification_keys;
  std::optional<std::string> service_cid;
  Bytes signature;

  std::string canonical_json(bool include_signature) const;
  static DidDocument from_json(std::string_view text);
  bool verify() const;

  friend bool operator==(const DidDocument&, const DidDocument&) = default;
};

std::string did_for(const Bytes& public_key);

DidDocument make_did_document(const Certificate& cert, const crypto::SigningKeyPair& keys,
                              std::optional<std::string> service_cid = {});

}  // namespace threatmesh::identity
