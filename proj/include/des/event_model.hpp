#pragma once

// Decision event record types and their lossless JSON wire mapping.
//
// Every object level carries an `extra` member holding keys the schema does
// not name, in their original order. They are serialized back after the
// known fields and therefore participate in canonical hashing. Optional
// fields are std::optional; an absent optional is an omitted key on the
// wire. Explicit JSON null is rejected on parse.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "des/json.hpp"

namespace des {

inline constexpr std::string_view kSchemaVersion = "0.3.0";
inline constexpr std::string_view kDefaultHashAlgorithm = "sha-256";

enum class EvidenceTier { lightweight = 1, sampled = 2, full = 3 };

std::string_view to_string(EvidenceTier tier);
std::optional<EvidenceTier> parse_tier(std::string_view token);

namespace tokens {

inline constexpr std::string_view logic_types[] = {"rule_based", "ml_inference", "hybrid",
                                                   "policy_evaluation", "human_decision"};
inline constexpr std::string_view input_types[] = {"feature", "model_output", "policy",
                                                   "external_data", "human_input"};
inline constexpr std::string_view rule_results[] = {"match", "no_match", "error"};
inline constexpr std::string_view policy_engines[] = {"OPA", "Cedar", "custom"};
inline constexpr std::string_view combination_methods[] = {"voting", "cascading", "overriding",
                                                           "weighted"};
inline constexpr std::string_view coupling_types[] = {"input", "constraint", "override", "context"};
inline constexpr std::string_view failure_modes[] = {"fail_open", "fail_closed", "degrade", "retry"};
inline constexpr std::string_view risk_levels[] = {"low", "medium", "high", "critical"};
inline constexpr std::string_view override_types[] = {"approval", "rejection", "modification",
                                                      "escalation", "deferral"};
inline constexpr std::string_view evidence_tiers[] = {"full", "sampled", "lightweight"};
inline constexpr std::string_view hash_algorithms[] = {"sha-256"};
inline constexpr std::string_view signature_algorithms[] = {"ed25519", "ecdsa-p256"};

}  // namespace tokens

// `^[a-z][a-z0-9_]*:[a-z][a-z0-9_.-]*$`
bool is_namespaced_token(std::string_view token);

// The namespace prefix of a namespaced token ("fintech" for "fintech:x").
std::string_view namespace_prefix(std::string_view token);

bool is_uuid(std::string_view text);
bool is_lower_hex(std::string_view text, std::size_t length = 0);

struct BoundaryContract {
  std::optional<std::string> protocol;
  std::optional<std::string> schema_version;
  std::optional<Json> sla;
  std::optional<Json> data_contract;
  std::optional<std::string> failure_mode;
  Json extra = Json::object();

  friend bool operator==(const BoundaryContract&, const BoundaryContract&) = default;
};

struct InputRecord {
  std::optional<std::string> input_id;
  std::optional<std::string> input_type;
  std::optional<Json> input_value;
  std::optional<std::string> input_source;
  std::optional<std::string> input_version;
  Json extra = Json::object();

  friend bool operator==(const InputRecord&, const InputRecord&) = default;
};

struct Environment {
  std::optional<std::string> system_id;
  std::optional<std::string> system_version;
  std::optional<std::string> configuration_hash;
  std::optional<std::string> deployment_id;
  Json extra = Json::object();

  friend bool operator==(const Environment&, const Environment&) = default;
};

struct DecisionContext {
  std::optional<std::string> decision_id;
  std::optional<std::string> decision_type;
  std::optional<std::string> trigger;
  std::optional<std::vector<InputRecord>> inputs;
  std::optional<Environment> environment;
  Json extra = Json::object();

  friend bool operator==(const DecisionContext&, const DecisionContext&) = default;
};

struct RulePathEntry {
  std::optional<std::string> rule_id;
  std::optional<std::string> rule_version;
  std::optional<std::string> rule_result;
  Json extra = Json::object();

  friend bool operator==(const RulePathEntry&, const RulePathEntry&) = default;
};

struct ModelInference {
  std::optional<std::string> model_id;
  std::optional<std::string> model_version;
  std::optional<std::string> feature_vector_hash;
  std::optional<Json> prediction;
  std::optional<double> confidence;
  Json extra = Json::object();

  friend bool operator==(const ModelInference&, const ModelInference&) = default;
};

struct PolicyEvaluation {
  std::optional<std::string> policy_id;
  std::optional<std::string> policy_version;
  std::optional<std::string> policy_engine;
  std::optional<Json> evaluation_result;
  Json extra = Json::object();

  friend bool operator==(const PolicyEvaluation&, const PolicyEvaluation&) = default;
};

struct DecisionLogic {
  std::optional<std::string> logic_type;
  std::optional<std::vector<RulePathEntry>> rule_path;
  std::optional<ModelInference> model_inference;
  std::optional<PolicyEvaluation> policy_evaluation;
  std::optional<std::string> combination_method;
  std::optional<Json> output;
  std::optional<Json> output_alternatives;  // array
  Json extra = Json::object();

  friend bool operator==(const DecisionLogic&, const DecisionLogic&) = default;
};

struct UpstreamRef {
  std::optional<std::string> decision_id;
  std::optional<std::string> system_id;
  std::optional<std::string> coupling_type;
  std::optional<BoundaryContract> boundary_contract;
  Json extra = Json::object();

  friend bool operator==(const UpstreamRef&, const UpstreamRef&) = default;
};

struct DownstreamRef {
  std::optional<std::string> system_id;
  std::optional<std::string> contract_version;
  std::optional<BoundaryContract> boundary_contract;
  Json extra = Json::object();

  friend bool operator==(const DownstreamRef&, const DownstreamRef&) = default;
};

struct DecisionBoundary {
  std::optional<std::vector<UpstreamRef>> upstream_decisions;
  std::optional<std::vector<DownstreamRef>> downstream_consumers;
  Json extra = Json::object();

  friend bool operator==(const DecisionBoundary&, const DecisionBoundary&) = default;
};

struct ConfidenceComponent {
  std::optional<std::string> component;
  std::optional<double> score;
  std::optional<std::string> calibration_date;
  Json extra = Json::object();

  friend bool operator==(const ConfidenceComponent&, const ConfidenceComponent&) = default;
};

struct DataQuality {
  std::optional<double> completeness;
  std::optional<std::uint64_t> freshness_seconds;  // wire: "freshness"
  std::optional<std::vector<std::string>> known_issues;
  Json extra = Json::object();

  friend bool operator==(const DataQuality&, const DataQuality&) = default;
};

struct ThresholdAlert {
  std::optional<std::string> alert_id;
  std::optional<Json> threshold;
  std::optional<Json> observed;
  Json extra = Json::object();

  friend bool operator==(const ThresholdAlert&, const ThresholdAlert&) = default;
};

struct QualityIndicators {
  std::optional<double> confidence_score;
  std::optional<std::vector<ConfidenceComponent>> confidence_components;
  std::optional<DataQuality> data_quality;
  std::optional<std::string> decision_risk_level;
  std::optional<std::vector<ThresholdAlert>> threshold_alerts;
  Json extra = Json::object();

  friend bool operator==(const QualityIndicators&, const QualityIndicators&) = default;
};

struct OverrideActor {
  std::optional<std::string> actor_id;
  std::optional<std::string> actor_role;
  std::optional<std::string> authorization_level;
  Json extra = Json::object();

  friend bool operator==(const OverrideActor&, const OverrideActor&) = default;
};

struct HumanOverrideRecord {
  std::optional<bool> override_occurred;
  std::optional<std::string> override_type;
  std::optional<OverrideActor> override_actor;
  std::optional<Json> original_output;
  std::optional<Json> overridden_output;
  std::optional<Json> override_rationale;  // text or structured map
  std::optional<std::string> override_timestamp;
  std::optional<std::uint64_t> time_to_override_ms;  // wire: "time_to_override"
  Json extra = Json::object();

  friend bool operator==(const HumanOverrideRecord&, const HumanOverrideRecord&) = default;
};

struct HashChain {
  std::optional<std::string> previous_hash;
  std::optional<std::string> current_hash;
  std::optional<std::string> algorithm;
  Json extra = Json::object();

  friend bool operator==(const HashChain&, const HashChain&) = default;
};

struct DigitalSignature {
  std::optional<std::string> signer_id;
  std::optional<std::string> signature_value;  // base64, padded
  std::optional<std::string> algorithm;
  std::optional<std::string> certificate_ref;
  Json extra = Json::object();

  friend bool operator==(const DigitalSignature&, const DigitalSignature&) = default;
};

struct RetentionPolicy {
  std::optional<std::string> minimum_retention;  // ISO 8601 duration
  std::optional<std::string> classification;
  Json extra = Json::object();

  friend bool operator==(const RetentionPolicy&, const RetentionPolicy&) = default;
};

struct TemporalMetadata {
  std::optional<std::string> event_timestamp;
  std::optional<std::uint64_t> processing_duration_ms;
  std::optional<std::uint64_t> sequence_number;
  std::optional<HashChain> hash_chain;
  std::optional<std::string> evidence_tier;
  std::optional<DigitalSignature> digital_signature;
  std::optional<RetentionPolicy> retention_policy;
  Json extra = Json::object();

  friend bool operator==(const TemporalMetadata&, const TemporalMetadata&) = default;
};

struct DecisionEvent {
  std::optional<std::string> schema_version;
  std::optional<DecisionContext> decision_context;
  std::optional<DecisionLogic> decision_logic;
  std::optional<DecisionBoundary> decision_boundary;
  std::optional<QualityIndicators> decision_quality_indicators;
  std::optional<HumanOverrideRecord> human_override_record;
  std::optional<TemporalMetadata> temporal_metadata;
  // Top-level keys outside the six groups, normally namespaced extensions.
  Json extensions = Json::object();

  friend bool operator==(const DecisionEvent&, const DecisionEvent&) = default;

  // Convenience accessors; return nullptr/nullopt when the path is absent.
  const std::string* decision_id() const;
  const std::string* logic_type() const;
  const std::string* system_id() const;
  std::optional<EvidenceTier> tier() const;
  std::optional<std::uint64_t> sequence_number() const;
  const std::string* current_hash() const;
  const std::string* previous_hash() const;
  bool override_occurred() const;
  bool is_sealed() const { return current_hash() != nullptr; }
};

// Typed view <-> JSON document.
DecisionEvent event_from_json(const Json& doc);
Json event_to_json(const DecisionEvent& event);

// parse_event throws SyntaxError, Error{null_forbidden} or Error{format_error}
// (wrong JSON type, malformed decision_id or timestamp).
DecisionEvent parse_event(std::string_view wire);
std::string serialize_event(const DecisionEvent& event);

// Structural identity: equal JSON values irrespective of key order.
bool structurally_equal(const DecisionEvent& a, const DecisionEvent& b);

// Builds an unsealed Tier 1 draft containing only the caller-supplied
// required fields. Throws Error{enum_violation} on an unknown tier or a
// non-core, non-namespaced logic type and Error{format_error} on a malformed
// id or timestamp.
DecisionEvent new_minimal_event(std::string decision_id, std::string decision_type,
                                std::string logic_type, Json output, bool override_occurred,
                                std::string event_timestamp,
                                EvidenceTier evidence_tier = EvidenceTier::lightweight);

template <std::size_t N>
bool contains_token(const std::string_view (&set)[N], std::string_view token) {
  for (auto t : set) {
    if (t == token) return true;
  }
  return false;
}

}  // namespace des
