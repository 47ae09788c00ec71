#pragma once

#include <stdexcept>
#include <string>

namespace threatmesh {

enum class ErrorCode {
  // attck_layers
  syntax_error,
  schema_error,
  domain_mismatch,
  // cas
  storage_full,
  not_found,
  integrity_mismatch,
  timeout,
  not_owner,
  // identity
  invalid_validity,
  unknown_serial,
  // ledger
  identity_rejected,
  contract_error,
  access_denied,
  channel_unknown,
  chain_gap,
  already_shared,
  bad_signature,
  not_sender,
  no_such_share,
  // netsim
  unknown_node,
  partitioned,
  // protocol
  unresolvable_recipient,
  signature_mismatch,
  erased,
  // cli / state
  config_error,
  state_locked,
  // encoding
  malformed_encoding,
};

const char* error_code_name(ErrorCode code);

// Stable CLI exit code for each failure class (documented in the README).
int error_exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace threatmesh
