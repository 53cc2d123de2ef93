#include "des/json.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "des/error.hpp"

namespace des {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::syntax_error: return "SyntaxError";
    case ErrorCode::null_forbidden: return "NullForbidden";
    case ErrorCode::format_error: return "FormatError";
    case ErrorCode::enum_violation: return "EnumViolation";
    case ErrorCode::canonicalization_error: return "CanonicalizationError";
    case ErrorCode::seal_precondition: return "SealPreconditionError";
    case ErrorCode::already_sealed: return "AlreadySealed";
    case ErrorCode::unsupported_algorithm: return "UnsupportedAlgorithm";
    case ErrorCode::signature_missing: return "SignatureMissing";
    case ErrorCode::rejected_invalid: return "RejectedInvalid";
    case ErrorCode::stream_mismatch: return "StreamMismatch";
    case ErrorCode::batch_gap: return "BatchGapError";
    case ErrorCode::index_out_of_range: return "IndexError";
    case ErrorCode::target_unsealed: return "TargetUnsealed";
    case ErrorCode::stale_enrichment: return "StaleEnrichment";
    case ErrorCode::conversion_error: return "ConversionError";
    case ErrorCode::reject_unsealed: return "RejectUnsealed";
    case ErrorCode::duplicate_sequence: return "DuplicateSequence";
    case ErrorCode::duplicate_decision: return "DuplicateDecision";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::crypto_error: return "CryptoError";
    case ErrorCode::usage_error: return "UsageError";
    case ErrorCode::not_found: return "NotFound";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string message, std::string path)
    : std::runtime_error(path.empty() ? std::move(message) : message + " at '" + path + "'"),
      code_(code),
      path_(std::move(path)) {}

SyntaxError::SyntaxError(std::string message, std::size_t byte_offset)
    : Error(ErrorCode::syntax_error, std::move(message)), byte_offset_(byte_offset) {}

std::string join_path(std::string_view prefix, std::string_view key) {
  if (prefix.empty()) return std::string(key);
  std::string out(prefix);
  out += '.';
  out += key;
  return out;
}

std::string index_path(std::string_view prefix, std::size_t index) {
  return std::string(prefix) + "[" + std::to_string(index) + "]";
}

std::string find_null(const Json& value, const std::string& prefix) {
  if (value.is_null()) return prefix.empty() ? "$" : prefix;
  if (value.is_object()) {
    for (const auto& [key, child] : value.items()) {
      if (auto p = find_null(child, join_path(prefix, key)); !p.empty()) return p;
    }
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (auto p = find_null(value[i], index_path(prefix, i)); !p.empty()) return p;
    }
  }
  return {};
}

namespace {

// DOM builder that also notes the first repeated key within any object.
class StrictSax : public nlohmann::detail::json_sax_dom_parser<Json> {
 public:
  StrictSax(Json& root, bool track_keys) : json_sax_dom_parser(root, true), track_keys_(track_keys) {}

  bool start_object(std::size_t n) {
    if (track_keys_) keys_.emplace_back();
    return json_sax_dom_parser::start_object(n);
  }
  bool end_object() {
    if (track_keys_) keys_.pop_back();
    return json_sax_dom_parser::end_object();
  }
  bool key(std::string& k) {
    if (track_keys_) {
      auto& seen = keys_.back();
      if (duplicate_.empty() && std::find(seen.begin(), seen.end(), k) != seen.end()) duplicate_ = k;
      seen.push_back(k);
    }
    return json_sax_dom_parser::key(k);
  }
  bool parse_error(std::size_t position, const std::string&, const nlohmann::detail::exception& ex) {
    throw SyntaxError(ex.what(), position);
  }

  const std::string& duplicate() const { return duplicate_; }

 private:
  bool track_keys_;
  std::vector<std::vector<std::string>> keys_;
  std::string duplicate_;
};

}  // namespace

Json parse_json(std::string_view text, const ParseOptions& options) {
  Json doc;
  StrictSax sax(doc, options.reject_duplicate_keys);
  Json::sax_parse(text.begin(), text.end(), &sax);
  if (!sax.duplicate().empty()) {
    throw Error(ErrorCode::format_error, "duplicate object key '" + sax.duplicate() + "'");
  }
  if (options.reject_nulls) {
    if (auto p = find_null(doc); !p.empty()) {
      throw Error(ErrorCode::null_forbidden, "explicit null is not permitted", p);
    }
  }
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace des
