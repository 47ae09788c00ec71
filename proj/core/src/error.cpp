#include "threatmesh/error.hpp"

namespace threatmesh {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::schema_error: return "SchemaError";
    case ErrorCode::domain_mismatch: return "DomainMismatch";
    case ErrorCode::storage_full: return "StorageFull";
    case ErrorCode::not_found: return "NotFound";
    case ErrorCode::integrity_mismatch: return "IntegrityMismatch";
    case ErrorCode::timeout: return "Timeout";
    case ErrorCode::not_owner: return "NotOwner";
    case ErrorCode::invalid_validity: return "InvalidValidity";
    case ErrorCode::unknown_serial: return "UnknownSerial";
    case ErrorCode::identity_rejected: return "IdentityRejected";
    case ErrorCode::contract_error: return "ContractError";
    case ErrorCode::access_denied: return "AccessDenied";
    case ErrorCode::channel_unknown: return "ChannelUnknown";
    case ErrorCode::chain_gap: return "ChainGap";
    case ErrorCode::already_shared: return "AlreadyShared";
    case ErrorCode::bad_signature: return "BadSignature";
    case ErrorCode::not_sender: return "NotSender";
    case ErrorCode::no_such_share: return "NoSuchShare";
    case ErrorCode::unknown_node: return "UnknownNode";
    case ErrorCode::partitioned: return "Partitioned";
    case ErrorCode::unresolvable_recipient: return "UnresolvableRecipient";
    case ErrorCode::signature_mismatch: return "SignatureMismatch";
    case ErrorCode::erased: return "Erased";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::state_locked: return "StateLocked";
    case ErrorCode::malformed_encoding: return "MalformedEncoding";
  }
  return "UnknownError";
}

int error_exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_error: return 2;
    case ErrorCode::syntax_error: return 3;
    case ErrorCode::schema_error: return 4;
    case ErrorCode::domain_mismatch: return 5;
    case ErrorCode::not_found: return 6;
    case ErrorCode::integrity_mismatch: return 7;
    case ErrorCode::storage_full: return 8;
    case ErrorCode::timeout: return 9;
    case ErrorCode::not_owner: return 10;
    case ErrorCode::invalid_validity: return 11;
    case ErrorCode::unknown_serial: return 12;
    case ErrorCode::identity_rejected: return 13;
    case ErrorCode::access_denied: return 14;
    case ErrorCode::channel_unknown: return 15;
    case ErrorCode::chain_gap: return 16;
    case ErrorCode::already_shared: return 17;
    case ErrorCode::bad_signature: return 18;
    case ErrorCode::not_sender: return 19;
    case ErrorCode::no_such_share: return 20;
    case ErrorCode::unknown_node: return 21;
    case ErrorCode::partitioned: return 22;
    case ErrorCode::unresolvable_recipient: return 23;
    case ErrorCode::signature_mismatch: return 24;
    case ErrorCode::erased: return 25;
    case ErrorCode::contract_error: return 26;
    case ErrorCode::state_locked: return 27;
    case ErrorCode::malformed_encoding: return 28;
  }
  return 1;
}

}  // namespace threatmesh
