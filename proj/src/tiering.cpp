#include "des/tiering.hpp"

#include <algorithm>

#include "des/canonical.hpp"
#include "des/crypto.hpp"
#include "des/error.hpp"

namespace des {

namespace {

int risk_index(std::string_view level) {
  for (std::size_t i = 0; i < std::size(tokens::risk_levels); ++i) {
    if (tokens::risk_levels[i] == level) return static_cast<int>(i);
  }
  return -1;
}

EvidenceTier tier_from(const Json& v, const char* what) {
  if (!v.is_string()) throw Error(ErrorCode::usage_error, std::string(what) + " must be a tier token");
  auto t = parse_tier(v.get<std::string>());
  if (!t) throw Error(ErrorCode::usage_error, std::string(what) + ": unknown tier '" + v.get<std::string>() + "'");
  return *t;
}

EvidenceTier max_tier(EvidenceTier a, EvidenceTier b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

// Uniform in [0, 1) from the first 8 digest bytes.
double sample_point(std::uint64_t seed, std::string_view decision_id) {
  std::string key = std::to_string(seed);
  key += ':';
  key += decision_id;
  Digest d = sha256(key);
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x = (x << 8) | d[i];
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace

EvidenceTier TierPolicy::min_tier(std::string_view risk_level) const {
  int i = risk_index(risk_level);
  return i < 0 ? EvidenceTier::lightweight : min_tier_for_risk[i];
}

TierPolicy TierPolicy::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::usage_error, "tier policy must be a JSON object");
  static constexpr std::string_view kKeys[] = {"default_tier",      "force_tier3_on_override", "force_tier3_on_alerts",
                                               "tier2_sample_rate", "seed",                    "min_tier_for_risk"};
  for (const auto& [key, value] : j.items()) {
    if (!contains_token(kKeys, key)) throw Error(ErrorCode::usage_error, "unknown tier policy key '" + key + "'");
  }
  TierPolicy p;
  try {
    if (j.contains("default_tier")) p.default_tier = tier_from(j["default_tier"], "default_tier");
    if (j.contains("force_tier3_on_override")) p.force_tier3_on_override = j["force_tier3_on_override"].get<bool>();
    if (j.contains("force_tier3_on_alerts")) p.force_tier3_on_alerts = j["force_tier3_on_alerts"].get<bool>();
    if (j.contains("tier2_sample_rate")) p.tier2_sample_rate = j["tier2_sample_rate"].get<double>();
    if (j.contains("seed")) p.seed = j["seed"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::usage_error, std::string("malformed tier policy: ") + e.what());
  }
  if (!(p.tier2_sample_rate >= 0.0 && p.tier2_sample_rate <= 1.0)) {
    throw Error(ErrorCode::usage_error, "tier2_sample_rate must lie in [0, 1]");
  }
  if (j.contains("min_tier_for_risk")) {
    const Json& m = j["min_tier_for_risk"];
    if (!m.is_object()) throw Error(ErrorCode::usage_error, "min_tier_for_risk must be an object");
    for (const auto& [level, tier] : m.items()) {
      int i = risk_index(level);
      if (i < 0) throw Error(ErrorCode::usage_error, "min_tier_for_risk: unknown risk level '" + level + "'");
      p.min_tier_for_risk[i] = tier_from(tier, "min_tier_for_risk");
    }
    for (auto level : tokens::risk_levels) {
      if (!m.contains(std::string(level))) {
        throw Error(ErrorCode::usage_error, "min_tier_for_risk must cover '" + std::string(level) + "'");
      }
    }
  }
  return p;
}

Json TierPolicy::to_json() const {
  Json risk = Json::object();
  for (std::size_t i = 0; i < min_tier_for_risk.size(); ++i) {
    risk[std::string(tokens::risk_levels[i])] = to_string(min_tier_for_risk[i]);
  }
  return {{"default_tier", to_string(default_tier)},
          {"force_tier3_on_override", force_tier3_on_override},
          {"force_tier3_on_alerts", force_tier3_on_alerts},
          {"min_tier_for_risk", std::move(risk)},
          {"tier2_sample_rate", tier2_sample_rate},
          {"seed", seed}};
}

TierPolicy load_tier_policy(const std::filesystem::path& path) {
  return TierPolicy::from_json(parse_json(read_file(path)));
}

EvidenceTier select_tier(const DecisionEvent& draft, const TierPolicy& policy) {
  const bool human = draft.logic_type() && *draft.logic_type() == "human_decision";
  if (policy.force_tier3_on_override && (draft.override_occurred() || human)) return EvidenceTier::full;

  EvidenceTier tier = policy.default_tier;
  const auto& q = draft.decision_quality_indicators;
  if (q && q->threshold_alerts && !q->threshold_alerts->empty()) {
    if (policy.force_tier3_on_alerts) return EvidenceTier::full;
    tier = max_tier(tier, EvidenceTier::sampled);
  }
  if (q && q->decision_risk_level) tier = max_tier(tier, policy.min_tier(*q->decision_risk_level));

  if (static_cast<int>(tier) < static_cast<int>(EvidenceTier::sampled) && policy.tier2_sample_rate > 0.0) {
    const std::string* id = draft.decision_id();
    if (sample_point(policy.seed, id ? *id : std::string_view{}) < policy.tier2_sample_rate) {
      tier = EvidenceTier::sampled;
    }
  }
  return tier;
}

namespace {

// Override-coupled upstream references survive every tier: a human override
// of a human decision is only valid while it points at the original.
std::optional<DecisionBoundary> override_refs(const DecisionEvent& d) {
  if (!d.decision_boundary || !d.decision_boundary->upstream_decisions) return std::nullopt;
  std::vector<UpstreamRef> refs;
  for (const auto& up : *d.decision_boundary->upstream_decisions) {
    if (up.coupling_type == "override") {
      UpstreamRef r;
      r.decision_id = up.decision_id;
      r.system_id = up.system_id;
      r.coupling_type = up.coupling_type;
      refs.push_back(std::move(r));
    }
  }
  if (refs.empty()) return std::nullopt;
  DecisionBoundary b;
  b.upstream_decisions = std::move(refs);
  return b;
}

HumanOverrideRecord lightweight_human(const DecisionEvent& d) {
  HumanOverrideRecord out;
  if (!d.human_override_record) return out;
  const auto& h = *d.human_override_record;
  out.override_occurred = h.override_occurred;
  const bool human = d.logic_type() && *d.logic_type() == "human_decision";
  const bool overridden = h.override_occurred.value_or(false);
  if (human || overridden) {
    out.override_actor = h.override_actor;
    out.override_rationale = h.override_rationale;
  }
  if (overridden) {
    out.override_type = h.override_type;
    out.original_output = h.original_output;
    out.overridden_output = h.overridden_output;
    out.override_timestamp = h.override_timestamp;
  }
  return out;
}

DecisionContext lightweight_context(const DecisionContext& c) {
  DecisionContext out;
  out.decision_id = c.decision_id;
  out.decision_type = c.decision_type;
  // The stream key; without it the event cannot be routed to its chain.
  if (c.environment && c.environment->system_id) {
    Environment env;
    env.system_id = c.environment->system_id;
    out.environment = std::move(env);
  }
  return out;
}

DecisionContext sampled_context(const DecisionContext& c) {
  DecisionContext out = c;
  if (out.inputs) {
    for (auto& in : *out.inputs) {
      if (in.input_value && canonicalize(*in.input_value).size() > kSampledInputValueLimit) {
        in.input_value = Json(sha256_hex(canonicalize(*in.input_value)));
      }
    }
  }
  return out;
}

DecisionLogic sampled_logic(const DecisionLogic& l) {
  DecisionLogic out;
  out.logic_type = l.logic_type;
  out.output = l.output;
  const std::string type = l.logic_type.value_or("");
  const bool hybrid = type == "hybrid";
  if (type == "ml_inference" || hybrid) out.model_inference = l.model_inference;
  if (type == "rule_based" || hybrid) out.rule_path = l.rule_path;
  if (type == "policy_evaluation" || hybrid) out.policy_evaluation = l.policy_evaluation;
  if (hybrid) out.combination_method = l.combination_method;
  return out;
}

}  // namespace

// lightweight: schema_version, temporal_metadata, decision_id, decision_type,
//   system_id, logic_type, output, override_occurred, plus the attribution
//   and override fields that are mandatory at every tier.
// sampled: lightweight + full decision_context (large input values hashed),
//   decision_logic with the sub-objects its logic_type requires, the risk
//   level and threshold alerts, and the complete human_override_record.
// full: unchanged.
DecisionEvent project_to_tier(const DecisionEvent& full_draft, EvidenceTier tier) {
  DecisionEvent out;
  if (tier == EvidenceTier::full) {
    out = full_draft;
  } else {
    out.schema_version = full_draft.schema_version;
    out.temporal_metadata = full_draft.temporal_metadata;
    out.decision_boundary = override_refs(full_draft);

    if (full_draft.decision_logic) {
      DecisionLogic logic;
      if (tier == EvidenceTier::sampled) {
        logic = sampled_logic(*full_draft.decision_logic);
      } else {
        logic.logic_type = full_draft.decision_logic->logic_type;
        logic.output = full_draft.decision_logic->output;
      }
      out.decision_logic = std::move(logic);
    }

    if (full_draft.decision_context) {
      out.decision_context = tier == EvidenceTier::sampled ? sampled_context(*full_draft.decision_context)
                                                           : lightweight_context(*full_draft.decision_context);
    }

    if (full_draft.human_override_record) {
      out.human_override_record =
          tier == EvidenceTier::sampled ? *full_draft.human_override_record : lightweight_human(full_draft);
    }

    if (tier == EvidenceTier::sampled && full_draft.decision_quality_indicators) {
      QualityIndicators q;
      q.decision_risk_level = full_draft.decision_quality_indicators->decision_risk_level;
      q.threshold_alerts = full_draft.decision_quality_indicators->threshold_alerts;
      out.decision_quality_indicators = std::move(q);
    }
  }
  if (!out.temporal_metadata) out.temporal_metadata.emplace();
  out.temporal_metadata->evidence_tier = std::string(to_string(tier));
  return out;
}

std::string_view to_string(BandAssessment a) {
  switch (a) {
    case BandAssessment::below: return "below";
    case BandAssessment::within: return "within";
    case BandAssessment::above: return "above";
  }
  return "within";
}

SizeBand size_band(EvidenceTier tier) {
  switch (tier) {
    case EvidenceTier::lightweight: return {200, 500};
    case EvidenceTier::sampled: return {2 * 1024, 5 * 1024};
    case EvidenceTier::full: return {5 * 1024, 20 * 1024};
  }
  return {200, 500};
}

Json PayloadEstimate::to_json() const {
  return {{"bytes", bytes},
          {"tier", to_string(tier)},
          {"band", {{"min_bytes", band.min_bytes}, {"max_bytes", band.max_bytes}}},
          {"assessment", to_string(assessment)}};
}

PayloadEstimate estimate_payload_size(const Json& doc) {
  PayloadEstimate est;
  est.bytes = canonicalize(doc).size();
  if (doc.is_object()) {
    auto tm = doc.find("temporal_metadata");
    if (tm != doc.end() && tm->is_object()) {
      auto t = tm->find("evidence_tier");
      if (t != tm->end() && t->is_string()) est.tier = parse_tier(t->get<std::string>()).value_or(EvidenceTier::lightweight);
    }
  }
  est.band = size_band(est.tier);
  if (est.bytes < est.band.min_bytes) {
    est.assessment = BandAssessment::below;
  } else if (est.bytes > est.band.max_bytes) {
    est.assessment = BandAssessment::above;
  } else {
    est.assessment = BandAssessment::within;
  }
  return est;
}

PayloadEstimate estimate_payload_size(const DecisionEvent& draft) {
  return estimate_payload_size(event_to_json(draft));
}

}  // namespace des
