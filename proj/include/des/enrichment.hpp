#pragma once

// Post-hoc additions to sealed events. An enrichment never touches its
// target; it is bound to one exact sealed form through
//
//   link_hash = SHA-256(target current_hash (hex ASCII) || canonical(payload))
//
// Enrichments may carry their own signature, computed over the canonical
// record without digital_signature.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "des/crypto.hpp"
#include "des/event_model.hpp"
#include "des/json.hpp"

namespace des {

inline constexpr std::string_view kEnrichmentKinds[] = {"ground_truth", "quality_update"};

struct EnrichmentRecord {
  std::string enrichment_id;
  std::string decision_id;
  std::string kind;
  Json payload = Json::object();
  std::string created_at;
  std::string link_hash;
  std::optional<DigitalSignature> digital_signature;

  Json to_json() const;
  // Throws Error{format_error} on a missing or mistyped field.
  static EnrichmentRecord from_json(const Json& j);

  friend bool operator==(const EnrichmentRecord&, const EnrichmentRecord&) = default;
};

std::string compute_link_hash(std::string_view target_current_hash, const Json& payload);

// Throws Error{target_unsealed} for a draft target, Error{enum_violation} for
// a kind that is neither built-in nor namespaced, Error{format_error} for a
// malformed created_at or a non-object payload. A random enrichment_id is
// generated when none is given.
EnrichmentRecord create_enrichment(const DecisionEvent& target, std::string kind, Json payload,
                                   std::string created_at,
                                   std::optional<std::string> enrichment_id = std::nullopt);

// True when the record names the target and its link_hash matches the
// target's current_hash.
bool verify_link(const EnrichmentRecord& record, const DecisionEvent& target);

void sign_enrichment(EnrichmentRecord& record, const SigningKey& key, std::string signer_id);
// Throws Error{signature_missing} when unsigned.
bool verify_enrichment_signature(const EnrichmentRecord& record, const PublicKey& key);

struct EnrichedView {
  DecisionEvent base;
  std::vector<EnrichmentRecord> enrichments;  // ordered by created_at

  Json to_json() const;
};

// Throws Error{stale_enrichment} when any record targets another decision
// or fails its link_hash check.
EnrichedView resolve_view(const DecisionEvent& target, std::span<const EnrichmentRecord> enrichments);

}  // namespace des
