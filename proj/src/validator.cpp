#include "des/validator.hpp"

#include <cctype>
#include <regex>

#include "des/time.hpp"

namespace des {

bool ValidationReport::has_violation(std::string_view rule_id) const {
  for (const auto& v : violations) {
    if (v.rule_id == rule_id) return true;
  }
  return false;
}

Json ValidationReport::to_json() const {
  auto list = [](const std::vector<Finding>& findings) {
    Json arr = Json::array();
    for (const auto& f : findings) {
      arr.push_back({{"rule_id", f.rule_id}, {"path", f.path}, {"message", f.message}});
    }
    return arr;
  };
  Json out = {{"valid", valid},
              {"violations", list(violations)},
              {"warnings", list(warnings)},
              {"rules_evaluated", rules_evaluated}};
  if (evaluated_tier) out["evaluated_tier"] = std::string(to_string(*evaluated_tier));
  return out;
}

const std::vector<RuleInfo>& rule_catalog() {
  static const std::vector<RuleInfo> catalog = {
      {"R1", TierApplicability::all,
       "the ten minimum governance paths are present (drafts: seal-assigned paths absent)",
       "required fields"},
      {"R2a", TierApplicability::tier2_plus, "ml_inference requires decision_logic.model_inference",
       "conditional requirements"},
      {"R2b", TierApplicability::tier2_plus, "rule_based requires a non-empty decision_logic.rule_path",
       "conditional requirements"},
      {"R2c", TierApplicability::tier2_plus,
       "policy_evaluation requires decision_logic.policy_evaluation", "conditional requirements"},
      {"R2d", TierApplicability::tier2_plus,
       "hybrid requires two of model_inference/rule_path/policy_evaluation plus combination_method",
       "conditional requirements"},
      {"R2e", TierApplicability::tier2_plus,
       "sampled and full tiers require decision_quality_indicators.decision_risk_level",
       "conditional requirements"},
      {"R3", TierApplicability::all, "human_decision requires override_actor and override_rationale",
       "tier-independent requirements"},
      {"R4", TierApplicability::all,
       "override_occurred=true requires original_output, overridden_output and override_timestamp; "
       "false requires all three absent",
       "override-triggered requirements"},
      {"R4a", TierApplicability::all,
       "an override of non-human logic requires override_actor and override_rationale",
       "override-triggered requirements"},
      {"R5", TierApplicability::all,
       "a human overriding a human decision must be a separate event linked through an upstream "
       "decision with coupling_type=override",
       "override-triggered requirements"},
      {"R6", TierApplicability::all,
       "enumerated tokens are core members or namespaced extensions that do not reuse a core token; "
       "value domains (scores, digests, durations) hold",
       "extension points"},
  };
  return catalog;
}

namespace {

constexpr const char* kSeqPath = "temporal_metadata.sequence_number";
constexpr const char* kChainPath = "temporal_metadata.hash_chain";

class Checker {
 public:
  Checker(const DecisionEvent& e, const ValidateOptions& opts) : e_(e), opts_(opts) {}

  ValidationReport run() {
    tier_ = opts_.tier_override ? opts_.tier_override : e_.tier();
    report_.evaluated_tier = tier_;
    const bool gated = tier_ && *tier_ != EvidenceTier::lightweight;

    required_fields();
    if (gated) {
      logic_sub_objects();
      risk_level();
    }
    human_attribution();
    override_triple();
    override_accountability();
    human_over_human();
    enumerations();
    warnings();

    report_.valid = report_.violations.empty();
    return std::move(report_);
  }

 private:
  void violation(const char* rule, std::string path, std::string message) {
    report_.violations.push_back({rule, std::move(path), std::move(message)});
  }
  void warning(const char* rule, std::string path, std::string message) {
    report_.warnings.push_back({rule, std::move(path), std::move(message)});
  }
  void evaluated() { ++report_.rules_evaluated; }

  const DecisionLogic* logic() const { return e_.decision_logic ? &*e_.decision_logic : nullptr; }
  const HumanOverrideRecord* human() const {
    return e_.human_override_record ? &*e_.human_override_record : nullptr;
  }
  const TemporalMetadata* temporal() const {
    return e_.temporal_metadata ? &*e_.temporal_metadata : nullptr;
  }
  bool logic_is(std::string_view t) const { return e_.logic_type() && *e_.logic_type() == t; }

  // R1
  void required_fields() {
    evaluated();
    auto need = [&](bool present, const char* path) {
      if (!present) violation("R1", path, "required field is missing");
    };
    const auto* ctx = e_.decision_context ? &*e_.decision_context : nullptr;
    const auto* tm = temporal();
    need(e_.schema_version.has_value(), "schema_version");
    need(ctx && ctx->decision_id, "decision_context.decision_id");
    need(ctx && ctx->decision_type, "decision_context.decision_type");
    need(logic() && logic()->logic_type, "decision_logic.logic_type");
    need(logic() && logic()->output, "decision_logic.output");
    need(human() && human()->override_occurred, "human_override_record.override_occurred");
    need(tm && tm->event_timestamp, "temporal_metadata.event_timestamp");
    need(tm && tm->evidence_tier, "temporal_metadata.evidence_tier");

    if (opts_.stage == Stage::sealed) {
      need(tm && tm->sequence_number, kSeqPath);
      need(tm && tm->hash_chain, kChainPath);
      if (tm && tm->hash_chain) {
        need(tm->hash_chain->previous_hash.has_value(), "temporal_metadata.hash_chain.previous_hash");
        need(tm->hash_chain->current_hash.has_value(), "temporal_metadata.hash_chain.current_hash");
      }
    } else if (tm) {
      auto seal_assigned = [&](bool present, const char* path) {
        if (present) violation("R1", path, "field is assigned at sealing and must be absent in a draft");
      };
      seal_assigned(tm->sequence_number.has_value(), kSeqPath);
      if (tm->hash_chain) {
        seal_assigned(tm->hash_chain->previous_hash.has_value(),
                      "temporal_metadata.hash_chain.previous_hash");
        seal_assigned(tm->hash_chain->current_hash.has_value(),
                      "temporal_metadata.hash_chain.current_hash");
      }
    }
  }

  // R2a-R2d
  void logic_sub_objects() {
    const auto* l = logic();
    const bool has_model = l && l->model_inference;
    const bool has_rules = l && l->rule_path && !l->rule_path->empty();
    const bool has_policy = l && l->policy_evaluation;

    evaluated();
    if (logic_is("ml_inference") && !has_model) {
      violation("R2a", "decision_logic.model_inference",
                "ml_inference at sampled/full tier requires model_inference");
    }
    evaluated();
    if (logic_is("rule_based") && !has_rules) {
      violation("R2b", "decision_logic.rule_path",
                "rule_based at sampled/full tier requires a non-empty rule_path");
    }
    evaluated();
    if (logic_is("policy_evaluation") && !has_policy) {
      violation("R2c", "decision_logic.policy_evaluation",
                "policy_evaluation at sampled/full tier requires policy_evaluation");
    }
    evaluated();
    if (logic_is("hybrid")) {
      int present = int{has_model} + int{has_rules} + int{has_policy};
      if (present < 2) {
        violation("R2d", "decision_logic",
                  "hybrid requires at least two of model_inference, rule_path, policy_evaluation");
      }
      if (!l->combination_method) {
        violation("R2d", "decision_logic.combination_method", "hybrid requires combination_method");
      }
    }
  }

  // R2e
  void risk_level() {
    evaluated();
    const auto& q = e_.decision_quality_indicators;
    if (!q || !q->decision_risk_level) {
      violation("R2e", "decision_quality_indicators.decision_risk_level",
                "sampled/full tier requires decision_risk_level");
    }
  }

  bool has_actor() const { return human() && human()->override_actor; }
  bool has_rationale() const { return human() && human()->override_rationale; }

  // R3
  void human_attribution() {
    evaluated();
    if (!logic_is("human_decision")) return;
    if (!has_actor()) {
      violation("R3", "human_override_record.override_actor",
                "human_decision requires override_actor at every tier");
    }
    if (!has_rationale()) {
      violation("R3", "human_override_record.override_rationale",
                "human_decision requires override_rationale at every tier");
    }
  }

  // R4
  void override_triple() {
    evaluated();
    const auto* h = human();
    if (!h || !h->override_occurred) return;
    struct Field {
      bool present;
      const char* path;
    };
    const Field triple[] = {
        {h->original_output.has_value(), "human_override_record.original_output"},
        {h->overridden_output.has_value(), "human_override_record.overridden_output"},
        {h->override_timestamp.has_value(), "human_override_record.override_timestamp"},
    };
    for (const auto& f : triple) {
      if (*h->override_occurred && !f.present) {
        violation("R4", f.path, "required when override_occurred is true");
      } else if (!*h->override_occurred && f.present) {
        violation("R4", f.path, "must be absent when override_occurred is false");
      }
    }
  }

  // R4a
  void override_accountability() {
    evaluated();
    if (!e_.override_occurred() || logic_is("human_decision")) return;
    if (!has_actor()) {
      violation("R4a", "human_override_record.override_actor",
                "an override of an automated decision requires override_actor");
    }
    if (!has_rationale()) {
      violation("R4a", "human_override_record.override_rationale",
                "an override of an automated decision requires override_rationale");
    }
  }

  // R5
  void human_over_human() {
    evaluated();
    if (!logic_is("human_decision") || !e_.override_occurred()) return;
    bool linked = false;
    if (e_.decision_boundary && e_.decision_boundary->upstream_decisions) {
      for (const auto& up : *e_.decision_boundary->upstream_decisions) {
        if (up.coupling_type == "override" && up.decision_id) linked = true;
      }
    }
    if (!linked) {
      violation("R5", "decision_boundary.upstream_decisions",
                "a human override of a human decision must be logged as a separate event that "
                "references the original through coupling_type=override");
    }
  }

  // ---- R6 -----------------------------------------------------------------

  template <std::size_t N>
  void open_token(const std::optional<std::string>& value, const std::string_view (&core)[N],
                  const std::string& path) {
    if (!value) return;
    const std::string& t = *value;
    if (contains_token(core, t)) return;
    if (!is_namespaced_token(t)) {
      violation("R6", path, "'" + t + "' is neither a core token nor a namespaced extension");
    } else if (contains_token(core, namespace_prefix(t))) {
      violation("R6", path, "namespace prefix of '" + t + "' must not be a core token");
    }
  }

  template <std::size_t N>
  void closed_token(const std::optional<std::string>& value, const std::string_view (&core)[N],
                    const std::string& path) {
    if (value && !contains_token(core, *value)) {
      violation("R6", path, "'" + *value + "' is not an allowed value");
    }
  }

  void unit_interval(const std::optional<double>& v, const std::string& path) {
    if (v && !(*v >= 0.0 && *v <= 1.0)) violation("R6", path, "must lie in [0, 1]");
  }

  void hex(const std::optional<std::string>& v, const std::string& path, std::size_t len = 0) {
    if (v && !is_lower_hex(*v, len)) {
      violation("R6", path,
                len ? "must be " + std::to_string(len) + " lowercase hex characters"
                    : std::string("must be lowercase hex"));
    }
  }

  void contract(const std::optional<BoundaryContract>& c, const std::string& path) {
    if (c) open_token(c->failure_mode, tokens::failure_modes, join_path(path, "failure_mode"));
  }

  void enumerations() {
    evaluated();
    static const std::regex semver(R"(^\d+\.\d+\.\d+(-[0-9A-Za-z.-]+)?(\+[0-9A-Za-z.-]+)?$)");
    static const std::regex date(R"(^\d{4}-\d{2}-\d{2}$)");

    if (e_.schema_version && !std::regex_match(*e_.schema_version, semver)) {
      violation("R6", "schema_version", "must be a semantic version");
    }

    if (const auto& ctx = e_.decision_context) {
      if (ctx->decision_type && ctx->decision_type->find(':') != std::string::npos &&
          !is_namespaced_token(*ctx->decision_type)) {
        violation("R6", "decision_context.decision_type", "malformed namespaced token");
      }
      if (ctx->inputs) {
        for (std::size_t i = 0; i < ctx->inputs->size(); ++i) {
          const auto& in = (*ctx->inputs)[i];
          auto p = index_path("decision_context.inputs", i);
          if (!in.input_id) violation("R6", join_path(p, "input_id"), "input record requires input_id");
          if (!in.input_type) {
            violation("R6", join_path(p, "input_type"), "input record requires input_type");
          }
          open_token(in.input_type, tokens::input_types, join_path(p, "input_type"));
        }
      }
      if (ctx->environment) {
        const auto& env = *ctx->environment;
        if (env.system_id && env.system_id->empty()) {
          violation("R6", "decision_context.environment.system_id", "must not be empty");
        }
        hex(env.configuration_hash, "decision_context.environment.configuration_hash");
      }
    }

    if (const auto* l = logic()) {
      open_token(l->logic_type, tokens::logic_types, "decision_logic.logic_type");
      if (l->rule_path) {
        for (std::size_t i = 0; i < l->rule_path->size(); ++i) {
          closed_token((*l->rule_path)[i].rule_result, tokens::rule_results,
                       join_path(index_path("decision_logic.rule_path", i), "rule_result"));
        }
      }
      if (l->model_inference) {
        unit_interval(l->model_inference->confidence, "decision_logic.model_inference.confidence");
        hex(l->model_inference->feature_vector_hash,
            "decision_logic.model_inference.feature_vector_hash");
      }
      if (l->policy_evaluation) {
        open_token(l->policy_evaluation->policy_engine, tokens::policy_engines,
                   "decision_logic.policy_evaluation.policy_engine");
      }
      open_token(l->combination_method, tokens::combination_methods,
                 "decision_logic.combination_method");
    }

    if (const auto& b = e_.decision_boundary) {
      if (b->upstream_decisions) {
        for (std::size_t i = 0; i < b->upstream_decisions->size(); ++i) {
          const auto& up = (*b->upstream_decisions)[i];
          auto p = index_path("decision_boundary.upstream_decisions", i);
          open_token(up.coupling_type, tokens::coupling_types, join_path(p, "coupling_type"));
          contract(up.boundary_contract, join_path(p, "boundary_contract"));
        }
      }
      if (b->downstream_consumers) {
        for (std::size_t i = 0; i < b->downstream_consumers->size(); ++i) {
          contract((*b->downstream_consumers)[i].boundary_contract,
                   join_path(index_path("decision_boundary.downstream_consumers", i),
                             "boundary_contract"));
        }
      }
    }

    if (const auto& q = e_.decision_quality_indicators) {
      unit_interval(q->confidence_score, "decision_quality_indicators.confidence_score");
      if (q->confidence_components) {
        for (std::size_t i = 0; i < q->confidence_components->size(); ++i) {
          const auto& c = (*q->confidence_components)[i];
          auto p = index_path("decision_quality_indicators.confidence_components", i);
          unit_interval(c.score, join_path(p, "score"));
          if (c.calibration_date && !std::regex_match(*c.calibration_date, date)) {
            violation("R6", join_path(p, "calibration_date"), "must be a YYYY-MM-DD date");
          }
        }
      }
      if (q->data_quality) {
        unit_interval(q->data_quality->completeness,
                      "decision_quality_indicators.data_quality.completeness");
      }
      closed_token(q->decision_risk_level, tokens::risk_levels,
                   "decision_quality_indicators.decision_risk_level");
    }

    if (const auto* h = human()) {
      open_token(h->override_type, tokens::override_types, "human_override_record.override_type");
    }

    if (const auto* tm = temporal()) {
      closed_token(tm->evidence_tier, tokens::evidence_tiers, "temporal_metadata.evidence_tier");
      if (tm->sequence_number && *tm->sequence_number == 0) {
        violation("R6", kSeqPath, "sequence numbers start at 1");
      }
      if (tm->hash_chain) {
        hex(tm->hash_chain->previous_hash, "temporal_metadata.hash_chain.previous_hash", 64);
        hex(tm->hash_chain->current_hash, "temporal_metadata.hash_chain.current_hash", 64);
        closed_token(tm->hash_chain->algorithm, tokens::hash_algorithms,
                     "temporal_metadata.hash_chain.algorithm");
      }
      if (tm->digital_signature) {
        closed_token(tm->digital_signature->algorithm, tokens::signature_algorithms,
                     "temporal_metadata.digital_signature.algorithm");
      }
      if (tm->retention_policy && tm->retention_policy->minimum_retention &&
          !parse_iso_duration(*tm->retention_policy->minimum_retention)) {
        violation("R6", "temporal_metadata.retention_policy.minimum_retention",
                  "must be an ISO 8601 duration");
      }
    }
  }

  void warnings() {
    if (const auto* h = human(); h && h->override_occurred.value_or(false) && h->overridden_output &&
                                 logic() && logic()->output &&
                                 *logic()->output != *h->overridden_output) {
      warning("W1", "decision_logic.output",
              "output differs from human_override_record.overridden_output");
    }
    for (auto it = e_.extensions.begin(); it != e_.extensions.end(); ++it) {
      if (!is_namespaced_token(it.key())) {
        warning("W2", it.key(), "unknown top-level key is not namespaced");
      }
    }
  }

  const DecisionEvent& e_;
  const ValidateOptions& opts_;
  std::optional<EvidenceTier> tier_;
  ValidationReport report_;
};

}  // namespace

ValidationReport validate(const DecisionEvent& event, const ValidateOptions& options) {
  return Checker(event, options).run();
}

std::vector<ValidationReport> validate_batch(std::span<const DecisionEvent> events,
                                             const ValidateOptions& options) {
  std::vector<ValidationReport> reports;
  reports.reserve(events.size());
  for (const auto& e : events) reports.push_back(validate(e, options));
  return reports;
}

}  // namespace des
