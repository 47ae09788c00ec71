#include "threatmesh/identity.hpp"

#include <algorithm>

#include "json.hpp"

namespace threatmesh::identity {

using nlohmann::json;

const char* role_name(Role role) {
  switch (role) {
    case Role::peer: return "peer";
    case Role::orderer: return "orderer";
    case Role::client: return "client";
    case Role::admin: return "admin";
    case Role::ca: return "ca";
  }
  return "unknown";
}

Role role_from_name(const std::string& name) {
  if (name == "peer") return Role::peer;
  if (name == "orderer") return Role::orderer;
  if (name == "client") return Role::client;
  if (name == "admin") return Role::admin;
  if (name == "ca") return Role::ca;
  throw Error(ErrorCode::malformed_encoding, "unknown role: " + name);
}

Bytes Certificate::canonical_body() const {
  ByteWriter w;
  w.str("threatmesh.cert.v1");
  w.u64(serial);
  w.str(subject);
  w.str(organization);
  w.u8(static_cast<std::uint8_t>(role));
  w.var_bytes(public_key);
  w.u64(not_before);
  w.u64(not_after);
  w.str(issuer);
  return w.take();
}

void Certificate::encode_to(ByteWriter& w) const {
  w.var_bytes(canonical_body());
  w.var_bytes(issuer_signature);
}

Bytes Certificate::encode() const {
  ByteWriter w;
  encode_to(w);
  return w.take();
}

Certificate Certificate::decode(ByteReader& r) {
  const Bytes body = r.var_bytes();
  const Bytes sig = r.var_bytes();
  ByteReader br(body);
  Certificate cert;
  if (br.str() != "threatmesh.cert.v1") {
    throw Error(ErrorCode::malformed_encoding, "bad certificate tag");
  }
  cert.serial = br.u64();
  cert.subject = br.str();
  cert.organization = br.str();
  cert.role = static_cast<Role>(br.u8());
  cert.public_key = br.var_bytes();
  cert.not_before = br.u64();
  cert.not_after = br.u64();
  cert.issuer = br.str();
  br.expect_end();
  cert.issuer_signature = sig;
  return cert;
}

Certificate Certificate::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  Certificate cert = decode(r);
  r.expect_end();
  return cert;
}

std::string Certificate::fingerprint() const {
  return hex_encode(crypto::sha256(public_key));
}

Bytes Crl::canonical_body() const {
  ByteWriter w;
  w.str("threatmesh.crl.v1");
  w.u32(static_cast<std::uint32_t>(revoked_serials.size()));
  for (const std::uint64_t s : revoked_serials) w.u64(s);
  w.u64(issued_at);
  return w.take();
}

Bytes Crl::encode() const {
  ByteWriter w;
  w.var_bytes(canonical_body());
  w.var_bytes(ca_signature);
  return w.take();
}

Crl Crl::decode(const Bytes& bytes) {
  ByteReader r(bytes);
  const Bytes body = r.var_bytes();
  const Bytes sig = r.var_bytes();
  r.expect_end();
  ByteReader br(body);
  Crl crl;
  if (br.str() != "threatmesh.crl.v1") {
    throw Error(ErrorCode::malformed_encoding, "bad crl tag");
  }
  const std::uint32_t n = br.u32();
  for (std::uint32_t i = 0; i < n; ++i) crl.revoked_serials.insert(br.u64());
  crl.issued_at = br.u64();
  br.expect_end();
  crl.ca_signature = sig;
  return crl;
}

const char* verify_status_name(VerifyStatus status) {
  switch (status) {
    case VerifyStatus::ok: return "Ok";
    case VerifyStatus::bad_signature: return "BadSignature";
    case VerifyStatus::expired: return "Expired";
    case VerifyStatus::not_yet_valid: return "NotYetValid";
    case VerifyStatus::revoked: return "Revoked";
    case VerifyStatus::unknown_issuer: return "UnknownIssuer";
  }
  return "Unknown";
}

VerifyResult verify_cert(const Certificate& cert, const Certificate& ca_root, const Crl& crl,
                         std::uint64_t now) {
  if (cert.issuer != ca_root.subject) {
    return {VerifyStatus::unknown_issuer};
  }
  if (!crypto::verify_signature(ca_root.public_key, cert.canonical_body(),
                                cert.issuer_signature)) {
    return {VerifyStatus::bad_signature};
  }
  if (now < cert.not_before) {
    return {VerifyStatus::not_yet_valid};
  }
  if (now > cert.not_after) {
    return {VerifyStatus::expired};
  }
  if (crl.contains(cert.serial)) {
    return {VerifyStatus::revoked};
  }
  return {VerifyStatus::ok};
}

CertificateAuthority CertificateAuthority::init(const std::string& name,
                                                const std::string& organization,
                                                crypto::Rng& rng, std::uint64_t now,
                                                std::uint64_t validity_ticks,
                                                std::uint64_t serial_base) {
  CertificateAuthority ca;
  ca.next_serial_ = std::max<std::uint64_t>(serial_base, 1);
  ca.keys_ = crypto::generate_signing_keypair(rng);
  ca.root_.serial = 0;
  ca.root_.subject = name;
  ca.root_.organization = organization;
  ca.root_.role = Role::ca;
  ca.root_.public_key = ca.keys_.public_key;
  ca.root_.not_before = now;
  ca.root_.not_after = now + validity_ticks;
  ca.root_.issuer = name;  // self-signed
  ca.root_.issuer_signature = crypto::sign(ca.keys_.secret_key, ca.root_.canonical_body());
  ca.crl_.issued_at = now;
  ca.crl_.ca_signature = crypto::sign(ca.keys_.secret_key, ca.crl_.canonical_body());
  return ca;
}

CertificateAuthority::Issued CertificateAuthority::issue(const std::string& subject,
                                                         const std::string& organization,
                                                         Role role, std::uint64_t not_before,
                                                         std::uint64_t not_after,
                                                         crypto::Rng& rng) {
  if (not_before >= not_after) {
    throw Error(ErrorCode::invalid_validity, "not_before must precede not_after");
  }
  Issued issued;
  issued.keys = crypto::generate_signing_keypair(rng);
  issued.cert.serial = next_serial_++;
  issued.cert.subject = subject;
  issued.cert.organization = organization;
  issued.cert.role = role;
  issued.cert.public_key = issued.keys.public_key;
  issued.cert.not_before = not_before;
  issued.cert.not_after = not_after;
  issued.cert.issuer = root_.subject;
  issued.cert.issuer_signature = crypto::sign(keys_.secret_key, issued.cert.canonical_body());
  issued_.insert(issued.cert.serial);
  return issued;
}

const Crl& CertificateAuthority::revoke(std::uint64_t serial, std::uint64_t now) {
  if (!issued_.count(serial)) {
    throw Error(ErrorCode::unknown_serial, "serial " + std::to_string(serial));
  }
  crl_.revoked_serials.insert(serial);
  crl_.issued_at = now;
  crl_.ca_signature = crypto::sign(keys_.secret_key, crl_.canonical_body());
  return crl_;
}

std::string CertificateAuthority::to_json() const {
  json j;
  j["root"] = hex_encode(root_.encode());
  j["public_key"] = hex_encode(keys_.public_key);
  j["secret_key"] = hex_encode(keys_.secret_key);
  j["crl"] = hex_encode(crl_.encode());
  j["next_serial"] = next_serial_;
  j["issued"] = json::array();
  for (const std::uint64_t s : issued_) j["issued"].push_back(s);
  return j.dump(2);
}

CertificateAuthority CertificateAuthority::from_json(const std::string& text) {
  const json j = json::parse(text);
  CertificateAuthority ca;
  ca.root_ = Certificate::decode(hex_decode(j.at("root").get<std::string>()));
  ca.keys_.public_key = hex_decode(j.at("public_key").get<std::string>());
  ca.keys_.secret_key = hex_decode(j.at("secret_key").get<std::string>());
  ca.crl_ = Crl::decode(hex_decode(j.at("crl").get<std::string>()));
  ca.next_serial_ = j.at("next_serial").get<std::uint64_t>();
  for (const auto& s : j.at("issued")) ca.issued_.insert(s.get<std::uint64_t>());
  return ca;
}

void Msp::add_org(const std::string& org, const Certificate& root, const Crl& crl) {
  orgs_[org] = OrgMaterial{root, crl};
}

void Msp::update_crl(const std::string& org, const Crl& crl) {
  const auto it = orgs_.find(org);
  if (it == orgs_.end()) {
    throw Error(ErrorCode::unknown_node, "org not in MSP: " + org);
  }
  it->second.crl = crl;
}

VerifyResult Msp::verify(const Certificate& cert, std::uint64_t now) const {
  const auto it = orgs_.find(cert.organization);
  if (it == orgs_.end()) {
    return {VerifyStatus::unknown_issuer};
  }
  return verify_cert(cert, it->second.root, it->second.crl, now);
}

const Certificate* Msp::root_for(const std::string& org) const {
  const auto it = orgs_.find(org);
  return it == orgs_.end() ? nullptr : &it->second.root;
}

const Crl* Msp::crl_for(const std::string& org) const {
  const auto it = orgs_.find(org);
  return it == orgs_.end() ? nullptr : &it->second.crl;
}

std::map<std::string, std::set<std::uint64_t>> Msp::revocation_snapshot() const {
  std::map<std::string, std::set<std::uint64_t>> out;
  for (const auto& [org, material] : orgs_) {
    out[org] = material.crl.revoked_serials;
  }
  return out;
}

VerifyResult Msp::verify_with_revocations(
    const Certificate& cert, std::uint64_t now,
    const std::map<std::string, std::set<std::uint64_t>>& revoked) const {
  const auto it = orgs_.find(cert.organization);
  if (it == orgs_.end()) {
    return {VerifyStatus::unknown_issuer};
  }
  Crl snapshot;
  if (const auto rit = revoked.find(cert.organization); rit != revoked.end()) {
    snapshot.revoked_serials = rit->second;
  }
  return verify_cert(cert, it->second.root, snapshot, now);
}

std::string did_for(const Bytes& public_key) {
  return "did:mesh:" + hex_encode(crypto::sha256(public_key));
}

std::string DidDocument::canonical_json(bool include_signature) const {
  json j;
  j["did"] = did;
  j["controller"] = controller;
  json keys = json::array();
  for (const Bytes& k : verification_keys) keys.push_back(hex_encode(k));
  j["verification_keys"] = std::move(keys);
  if (service_cid) {
    j["service_cid"] = *service_cid;
  }
  if (include_signature) {
    j["signature"] = hex_encode(signature);
  }
  return j.dump();
}

DidDocument DidDocument::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed_encoding, e.what());
  }
  DidDocument doc;
  doc.did = j.at("did").get<std::string>();
  doc.controller = j.at("controller").get<std::string>();
  for (const auto& k : j.at("verification_keys")) {
    doc.verification_keys.push_back(hex_decode(k.get<std::string>()));
  }
  if (j.contains("service_cid")) {
    doc.service_cid = j["service_cid"].get<std::string>();
  }
  if (j.contains("signature")) {
    doc.signature = hex_decode(j["signature"].get<std::string>());
  }
  return doc;
}

bool DidDocument::verify() const {
  if (verification_keys.empty()) return false;
  const Bytes& key = verification_keys.front();
  if (did != did_for(key)) return false;
  if (controller != hex_encode(crypto::sha256(key))) return false;
  const std::string body = canonical_json(false);
  return crypto::verify_signature(key, to_bytes(body), signature);
}

DidDocument make_did_document(const Certificate& cert, const crypto::SigningKeyPair& keys,
                              std::optional<std::string> service_cid) {
  DidDocument doc;
  doc.did = did_for(cert.public_key);
  doc.controller = cert.fingerprint();
  doc.verification_keys.push_back(cert.public_key);
  doc.service_cid = std::move(service_cid);
  doc.signature = crypto::sign(keys.secret_key, to_bytes(doc.canonical_json(false)));
  return doc;
}

}  // namespace threatmesh::identity
