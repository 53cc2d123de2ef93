#pragma once

// Deployment-time tier selection, projection of full drafts to lower tiers,
// and payload-size accounting against the per-tier size bands.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "des/event_model.hpp"
#include "des/json.hpp"

namespace des {

struct TierPolicy {
  EvidenceTier default_tier = EvidenceTier::lightweight;
  bool force_tier3_on_override = true;
  bool force_tier3_on_alerts = true;
  // Indexed by risk level: low, medium, high, critical.
  std::array<EvidenceTier, 4> min_tier_for_risk{EvidenceTier::lightweight, EvidenceTier::lightweight,
                                                EvidenceTier::sampled, EvidenceTier::full};
  double tier2_sample_rate = 0.0;
  std::uint64_t seed = 0;

  EvidenceTier min_tier(std::string_view risk_level) const;

  // Missing keys keep their defaults. Throws Error{usage_error} for an
  // unknown key, a sample rate outside [0, 1], an unknown tier or risk
  // token, or a risk map that does not name all four levels.
  static TierPolicy from_json(const Json& j);
  Json to_json() const;
};

TierPolicy load_tier_policy(const std::filesystem::path& path);

// Deterministic for (draft, policy). Override or human_decision forces full
// when the override flag is set; threshold alerts force full (or at least
// sampled without the flag); the risk map raises the floor; otherwise the
// draft is sampled with probability tier2_sample_rate, keyed on
// SHA-256(seed ":" decision_id), else gets default_tier.
EvidenceTier select_tier(const DecisionEvent& draft, const TierPolicy& policy);

// Reduces a full-tier draft to the content of `tier` and stamps
// temporal_metadata.evidence_tier. See the implementation for the exact
// field sets.
DecisionEvent project_to_tier(const DecisionEvent& full_draft, EvidenceTier tier);

// Input values whose canonical form exceeds this are replaced by their
// SHA-256 hex digest at the sampled tier.
inline constexpr std::size_t kSampledInputValueLimit = 256;

enum class BandAssessment { below, within, above };
std::string_view to_string(BandAssessment a);

struct SizeBand {
  std::size_t min_bytes;
  std::size_t max_bytes;
};

// 200-500 B, 2-5 KiB, 5-20 KiB.
SizeBand size_band(EvidenceTier tier);

struct PayloadEstimate {
  std::size_t bytes = 0;
  EvidenceTier tier = EvidenceTier::lightweight;
  SizeBand band{};
  BandAssessment assessment = BandAssessment::within;

  Json to_json() const;
};

// Size is the canonical byte length of the event as given. The band is that
// of the draft's declared tier (lightweight when absent or unknown).
PayloadEstimate estimate_payload_size(const DecisionEvent& draft);
PayloadEstimate estimate_payload_size(const Json& doc);

}  // namespace des
