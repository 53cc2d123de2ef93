#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "des/event_model.hpp"
#include "des/json.hpp"

namespace des {

struct Finding {
  std::string rule_id;
  std::string path;
  std::string message;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Finding> violations;
  std::vector<Finding> warnings;
  std::size_t rules_evaluated = 0;
  std::optional<EvidenceTier> evaluated_tier;

  bool has_violation(std::string_view rule_id) const;
  Json to_json() const;

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

// Drafts have not been through sealing yet: sequence_number and the hash
// chain digests are assigned by the chain and must be absent. Sealed events
// must carry all ten required paths.
enum class Stage { draft, sealed };

struct ValidateOptions {
  std::optional<EvidenceTier> tier_override;
  Stage stage = Stage::sealed;
};

enum class TierApplicability { all, tier2_plus };

struct RuleInfo {
  std::string rule_id;
  TierApplicability applicability;
  std::string description;
  std::string source;  // which family of schema constraints the rule belongs to
};

const std::vector<RuleInfo>& rule_catalog();

// Evaluates every applicable rule (no short-circuit). At the lightweight
// tier the logic-type and quality requirements are suspended and the number
// of rules evaluated does not depend on the payload.
ValidationReport validate(const DecisionEvent& event, const ValidateOptions& options = {});

std::vector<ValidationReport> validate_batch(std::span<const DecisionEvent> events,
                                             const ValidateOptions& options = {});

}  // namespace des
