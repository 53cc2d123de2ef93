#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace des {

enum class ErrorCode {
  syntax_error,
  null_forbidden,
  format_error,
  enum_violation,
  canonicalization_error,
  seal_precondition,
  already_sealed,
  unsupported_algorithm,
  signature_missing,
  rejected_invalid,
  stream_mismatch,
  batch_gap,
  index_out_of_range,
  target_unsealed,
  stale_enrichment,
  conversion_error,
  reject_unsealed,
  duplicate_sequence,
  duplicate_decision,
  io_error,
  crypto_error,
  usage_error,
  not_found,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a stable code and, where it
// applies, the dotted field path that caused it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string path = {});

  ErrorCode code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }

 private:
  ErrorCode code_;
  std::string path_;
};

// Syntax errors additionally report the byte offset reported by the parser.
class SyntaxError : public Error {
 public:
  SyntaxError(std::string message, std::size_t byte_offset);

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

}  // namespace des
