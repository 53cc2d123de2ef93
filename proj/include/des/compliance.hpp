#pragma once

// Data-driven compliance profiles evaluated per stream over a store.
//
// A profile is a list of requirements, each one of a few check kinds:
//   hash_chain     the stream verifies clean
//   retention      every event's minimum_retention spans at least `minimum`
//   tier_coverage  events at `min_tier` or above: "any" or "all" of them
//   signatures     every event carries a digital_signature
// A failed requirement degrades the stream verdict to its `on_fail` level
// ("partial" or "insufficient") or adds a warning ("warning").

#include <optional>
#include <string>
#include <vector>

#include "des/crypto.hpp"
#include "des/event_store.hpp"
#include "des/json.hpp"

namespace des {

enum class Verdict { satisfied, partial, insufficient };
std::string_view to_string(Verdict v);

struct ProfileRequirement {
  std::string id;
  std::string check;
  std::string on_fail = "insufficient";
  std::string description;
  std::optional<std::string> minimum;   // retention
  std::optional<EvidenceTier> min_tier;  // tier_coverage
  std::string mode = "any";             // tier_coverage
  std::string pass_note;
  std::string fail_note;
};

struct ComplianceProfile {
  std::string profile_id;
  std::string name;
  std::vector<ProfileRequirement> requirements;
  std::vector<std::string> notes;

  // Throws Error{usage_error} on an unknown check kind, on_fail level or a
  // profile_id that is neither built-in nor namespaced.
  static ComplianceProfile from_json(const Json& j);
};

std::vector<std::string> builtin_profile_ids();
// Throws Error{usage_error} for an unknown id.
ComplianceProfile builtin_profile(std::string_view profile_id);
// A built-in id (DES_PROFILE_DIR/<id>.json overrides the bundled copy), or
// a path to a profile JSON file.
ComplianceProfile load_profile(std::string_view id_or_path);

struct RequirementResult {
  std::string id;
  std::string check;
  bool pass = false;
  std::string on_fail;
  std::string detail;
};

struct StreamCompliance {
  std::string system_id;
  std::size_t events = 0;
  std::size_t tier_counts[3] = {0, 0, 0};  // lightweight, sampled, full
  bool chain_clean = false;
  std::size_t chain_findings = 0;
  std::size_t signed_events = 0;
  std::size_t hashed_inputs = 0;
  std::size_t total_inputs = 0;
  std::vector<RequirementResult> requirements;
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
  Verdict verdict = Verdict::satisfied;

  const RequirementResult* requirement(std::string_view id) const;
  Json to_json() const;
};

struct ComplianceReport {
  std::string profile_id;
  std::vector<StreamCompliance> streams;
  std::vector<std::string> notes;
  Verdict overall = Verdict::satisfied;

  const StreamCompliance* stream(std::string_view system_id) const;
  Json to_json() const;
  std::string to_text() const;
};

// Read-only over the store. When `verify_key` is given, signatures must
// also verify under it to count.
ComplianceReport compliance_report(const EventStore& store, const ComplianceProfile& profile,
                                   const PublicKey* verify_key = nullptr);

}  // namespace des
