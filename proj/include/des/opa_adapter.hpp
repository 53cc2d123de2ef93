#pragma once

// OPA decision-log entries -> policy_evaluation drafts.
//
//   decision_id         -> decision_context.decision_id
//   timestamp           -> temporal_metadata.event_timestamp (UTC, ms)
//   path                -> decision_logic.policy_evaluation.policy_id
//   result              -> policy_evaluation.evaluation_result and decision_logic.output
//   input.<key>         -> decision_context.inputs[] (input_id = key)
//   labels / bundles    -> policy_version (see below)
//   everything else     -> top-level "opa:<field>" extensions

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "des/error.hpp"
#include "des/event_model.hpp"
#include "des/json.hpp"
#include "des/sealing.hpp"
#include "des/validator.hpp"

namespace des {

struct OpaConversionConfig {
  EvidenceTier tier = EvidenceTier::sampled;
  std::string decision_type = "policy_enforcement";
  std::string decision_risk_level = "low";
  std::string system_id = "opa";
  // Top-level input keys whose values are replaced by a digest.
  std::set<std::string> sensitive_input_keys;
  std::string deployment_key;
  SensitiveHashMode hash_mode = SensitiveHashMode::keyed;
  // Used when the entry has no parseable timestamp; empty means now.
  std::string fallback_timestamp;
};

class ConversionError : public Error {
 public:
  ConversionError(std::string message, std::string path = {},
                  std::optional<ValidationReport> report = std::nullopt)
      : Error(ErrorCode::conversion_error, std::move(message), std::move(path)),
        report_(std::move(report)) {}
  const std::optional<ValidationReport>& report() const noexcept { return report_; }

 private:
  std::optional<ValidationReport> report_;
};

// policy_version comes from labels.policy_version, else from the revision of
// the only bundle listed. The draft is validated (draft stage) at the
// configured tier; any violation raises ConversionError carrying the report.
DecisionEvent convert_opa_decision(const Json& entry, const OpaConversionConfig& config = {});

// Accepts a JSON array of entries or NDJSON (blank lines skipped). Nulls are
// allowed here; a null inside a mapped field fails that entry's conversion.
std::vector<Json> parse_opa_log(std::string_view text);

struct OpaConversionOutcome {
  std::size_t index = 0;
  std::optional<DecisionEvent> draft;
  std::string error;  // set when draft is empty
};

std::vector<OpaConversionOutcome> convert_opa_log(std::string_view text, const OpaConversionConfig& config = {});

}  // namespace des
