#include "des/event_model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "des/error.hpp"
#include "des/time.hpp"

namespace des {

std::string_view to_string(EvidenceTier tier) {
  switch (tier) {
    case EvidenceTier::lightweight: return "lightweight";
    case EvidenceTier::sampled: return "sampled";
    case EvidenceTier::full: return "full";
  }
  return "lightweight";
}

std::optional<EvidenceTier> parse_tier(std::string_view token) {
  if (token == "lightweight") return EvidenceTier::lightweight;
  if (token == "sampled") return EvidenceTier::sampled;
  if (token == "full") return EvidenceTier::full;
  return std::nullopt;
}

namespace {

bool is_lower_alpha(char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

bool is_namespaced_token(std::string_view token) {
  auto colon = token.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 >= token.size()) return false;
  auto ns = token.substr(0, colon);
  auto name = token.substr(colon + 1);
  if (!is_lower_alpha(ns[0])) return false;
  for (char c : ns) {
    if (!is_lower_alpha(c) && !is_digit(c) && c != '_') return false;
  }
  if (!is_lower_alpha(name[0])) return false;
  for (char c : name) {
    if (!is_lower_alpha(c) && !is_digit(c) && c != '_' && c != '.' && c != '-') return false;
  }
  return true;
}

std::string_view namespace_prefix(std::string_view token) {
  auto colon = token.find(':');
  return colon == std::string_view::npos ? std::string_view{} : token.substr(0, colon);
}

bool is_uuid(std::string_view text) {
  if (text.size() != 36) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (text[i] != '-') return false;
    } else if (!std::isxdigit(static_cast<unsigned char>(text[i]))) {
      return false;
    }
  }
  return true;
}

bool is_lower_hex(std::string_view text, std::size_t length) {
  if (text.empty() || (length != 0 && text.size() != length)) return false;
  for (char c : text) {
    if (!is_digit(c) && !(c >= 'a' && c <= 'f')) return false;
  }
  return true;
}

namespace {

[[noreturn]] void type_error(const std::string& path, std::string_view expected) {
  throw Error(ErrorCode::format_error, "expected " + std::string(expected), path);
}

// Consumes known keys from a JSON object; whatever remains is `extra`.
class Reader {
 public:
  Reader(const Json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) type_error(path_, "object");
  }

  const std::string& path() const { return path_; }

  // Keys are string literals at every call site.
  const Json* take(std::string_view key) {
    consumed_.push_back(key);
    auto it = obj_.find(std::string(key));
    return it == obj_.end() ? nullptr : &*it;
  }

  void str(std::string_view key, std::optional<std::string>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_string()) type_error(join_path(path_, key), "string");
      out = v->get<std::string>();
    }
  }

  void any(std::string_view key, std::optional<Json>& out) {
    if (const Json* v = take(key)) out = *v;
  }

  void array(std::string_view key, std::optional<Json>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_array()) type_error(join_path(path_, key), "array");
      out = *v;
    }
  }

  void object_or_text(std::string_view key, std::optional<Json>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_object() && !v->is_string()) type_error(join_path(path_, key), "object or string");
      out = *v;
    }
  }

  void number(std::string_view key, std::optional<double>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number()) type_error(join_path(path_, key), "number");
      out = v->get<double>();
    }
  }

  void unsigned_int(std::string_view key, std::optional<std::uint64_t>& out) {
    if (const Json* v = take(key)) {
      if (v->is_number_unsigned()) {
        out = v->get<std::uint64_t>();
      } else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) {
        out = static_cast<std::uint64_t>(v->get<std::int64_t>());
      } else {
        type_error(join_path(path_, key), "non-negative integer");
      }
    }
  }

  void boolean(std::string_view key, std::optional<bool>& out) {
    if (const Json* v = take(key)) {
      if (!v->is_boolean()) type_error(join_path(path_, key), "boolean");
      out = v->get<bool>();
    }
  }

  void timestamp(std::string_view key, std::optional<std::string>& out) {
    str(key, out);
    if (out && !is_wire_timestamp(*out)) {
      throw Error(ErrorCode::format_error,
                  "timestamp must be RFC 3339 UTC with millisecond precision", join_path(path_, key));
    }
  }

  void uuid(std::string_view key, std::optional<std::string>& out) {
    str(key, out);
    if (out && !is_uuid(*out)) {
      throw Error(ErrorCode::format_error, "not an RFC 4122 UUID", join_path(path_, key));
    }
  }

  template <typename T, typename Fn>
  void object(std::string_view key, std::optional<T>& out, Fn parse) {
    if (const Json* v = take(key)) out = parse(*v, join_path(path_, key));
  }

  template <typename T, typename Fn>
  void list(std::string_view key, std::optional<std::vector<T>>& out, Fn parse) {
    if (const Json* v = take(key)) {
      auto p = join_path(path_, key);
      if (!v->is_array()) type_error(p, "array");
      std::vector<T> items;
      items.reserve(v->size());
      for (std::size_t i = 0; i < v->size(); ++i) items.push_back(parse((*v)[i], index_path(p, i)));
      out = std::move(items);
    }
  }

  Json rest() const {
    Json extra = Json::object();
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (std::find(consumed_.begin(), consumed_.end(), it.key()) == consumed_.end()) extra[it.key()] = it.value();
    }
    return extra;
  }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string_view> consumed_;
};

class Writer {
 public:
  void put(std::string_view key, const std::optional<std::string>& v) {
    if (v) out_[std::string(key)] = *v;
  }
  void put(std::string_view key, const std::optional<Json>& v) {
    if (v) out_[std::string(key)] = *v;
  }
  void put(std::string_view key, const std::optional<double>& v) {
    if (v) out_[std::string(key)] = *v;
  }
  void put(std::string_view key, const std::optional<std::uint64_t>& v) {
    if (v) out_[std::string(key)] = *v;
  }
  void put(std::string_view key, const std::optional<bool>& v) {
    if (v) out_[std::string(key)] = *v;
  }
  template <typename T, typename Fn>
  void put(std::string_view key, const std::optional<T>& v, Fn write) {
    if (v) out_[std::string(key)] = write(*v);
  }
  template <typename T, typename Fn>
  void put(std::string_view key, const std::optional<std::vector<T>>& v, Fn write) {
    if (!v) return;
    Json arr = Json::array();
    for (const auto& item : *v) arr.push_back(write(item));
    out_[std::string(key)] = std::move(arr);
  }
  Json finish(const Json& extra) {
    for (auto it = extra.begin(); it != extra.end(); ++it) out_[it.key()] = it.value();
    return std::move(out_);
  }

 private:
  Json out_ = Json::object();
};

// ---- readers ---------------------------------------------------------------

BoundaryContract read_contract(const Json& j, const std::string& path) {
  Reader r(j, path);
  BoundaryContract c;
  r.str("protocol", c.protocol);
  r.str("schema_version", c.schema_version);
  r.any("sla", c.sla);
  r.any("data_contract", c.data_contract);
  r.str("failure_mode", c.failure_mode);
  c.extra = r.rest();
  return c;
}

InputRecord read_input(const Json& j, const std::string& path) {
  Reader r(j, path);
  InputRecord in;
  r.str("input_id", in.input_id);
  r.str("input_type", in.input_type);
  r.any("input_value", in.input_value);
  r.str("input_source", in.input_source);
  r.str("input_version", in.input_version);
  in.extra = r.rest();
  return in;
}

Environment read_environment(const Json& j, const std::string& path) {
  Reader r(j, path);
  Environment e;
  r.str("system_id", e.system_id);
  r.str("system_version", e.system_version);
  r.str("configuration_hash", e.configuration_hash);
  r.str("deployment_id", e.deployment_id);
  e.extra = r.rest();
  return e;
}

DecisionContext read_context(const Json& j, const std::string& path) {
  Reader r(j, path);
  DecisionContext c;
  r.uuid("decision_id", c.decision_id);
  r.str("decision_type", c.decision_type);
  r.str("trigger", c.trigger);
  r.list("inputs", c.inputs, read_input);
  r.object("environment", c.environment, read_environment);
  c.extra = r.rest();
  return c;
}

RulePathEntry read_rule(const Json& j, const std::string& path) {
  Reader r(j, path);
  RulePathEntry e;
  r.str("rule_id", e.rule_id);
  r.str("rule_version", e.rule_version);
  r.str("rule_result", e.rule_result);
  e.extra = r.rest();
  return e;
}

ModelInference read_model(const Json& j, const std::string& path) {
  Reader r(j, path);
  ModelInference m;
  r.str("model_id", m.model_id);
  r.str("model_version", m.model_version);
  r.str("feature_vector_hash", m.feature_vector_hash);
  r.any("prediction", m.prediction);
  r.number("confidence", m.confidence);
  m.extra = r.rest();
  return m;
}

PolicyEvaluation read_policy(const Json& j, const std::string& path) {
  Reader r(j, path);
  PolicyEvaluation p;
  r.str("policy_id", p.policy_id);
  r.str("policy_version", p.policy_version);
  r.str("policy_engine", p.policy_engine);
  r.any("evaluation_result", p.evaluation_result);
  p.extra = r.rest();
  return p;
}

DecisionLogic read_logic(const Json& j, const std::string& path) {
  Reader r(j, path);
  DecisionLogic l;
  r.str("logic_type", l.logic_type);
  r.list("rule_path", l.rule_path, read_rule);
  r.object("model_inference", l.model_inference, read_model);
  r.object("policy_evaluation", l.policy_evaluation, read_policy);
  r.str("combination_method", l.combination_method);
  r.any("output", l.output);
  r.array("output_alternatives", l.output_alternatives);
  l.extra = r.rest();
  return l;
}

UpstreamRef read_upstream(const Json& j, const std::string& path) {
  Reader r(j, path);
  UpstreamRef u;
  r.uuid("decision_id", u.decision_id);
  r.str("system_id", u.system_id);
  r.str("coupling_type", u.coupling_type);
  r.object("boundary_contract", u.boundary_contract, read_contract);
  u.extra = r.rest();
  return u;
}

DownstreamRef read_downstream(const Json& j, const std::string& path) {
  Reader r(j, path);
  DownstreamRef d;
  r.str("system_id", d.system_id);
  r.str("contract_version", d.contract_version);
  r.object("boundary_contract", d.boundary_contract, read_contract);
  d.extra = r.rest();
  return d;
}

DecisionBoundary read_boundary(const Json& j, const std::string& path) {
  Reader r(j, path);
  DecisionBoundary b;
  r.list("upstream_decisions", b.upstream_decisions, read_upstream);
  r.list("downstream_consumers", b.downstream_consumers, read_downstream);
  b.extra = r.rest();
  return b;
}

ConfidenceComponent read_component(const Json& j, const std::string& path) {
  Reader r(j, path);
  ConfidenceComponent c;
  r.str("component", c.component);
  r.number("score", c.score);
  r.str("calibration_date", c.calibration_date);
  c.extra = r.rest();
  return c;
}

std::string read_issue(const Json& j, const std::string& path) {
  if (!j.is_string()) type_error(path, "string");
  return j.get<std::string>();
}

DataQuality read_data_quality(const Json& j, const std::string& path) {
  Reader r(j, path);
  DataQuality d;
  r.number("completeness", d.completeness);
  r.unsigned_int("freshness", d.freshness_seconds);
  r.list("known_issues", d.known_issues, read_issue);
  d.extra = r.rest();
  return d;
}

ThresholdAlert read_alert(const Json& j, const std::string& path) {
  Reader r(j, path);
  ThresholdAlert a;
  r.str("alert_id", a.alert_id);
  r.any("threshold", a.threshold);
  r.any("observed", a.observed);
  a.extra = r.rest();
  return a;
}

QualityIndicators read_quality(const Json& j, const std::string& path) {
  Reader r(j, path);
  QualityIndicators q;
  r.number("confidence_score", q.confidence_score);
  r.list("confidence_components", q.confidence_components, read_component);
  r.object("data_quality", q.data_quality, read_data_quality);
  r.str("decision_risk_level", q.decision_risk_level);
  r.list("threshold_alerts", q.threshold_alerts, read_alert);
  q.extra = r.rest();
  return q;
}

OverrideActor read_actor(const Json& j, const std::string& path) {
  Reader r(j, path);
  OverrideActor a;
  r.str("actor_id", a.actor_id);
  r.str("actor_role", a.actor_role);
  r.str("authorization_level", a.authorization_level);
  a.extra = r.rest();
  return a;
}

HumanOverrideRecord read_override(const Json& j, const std::string& path) {
  Reader r(j, path);
  HumanOverrideRecord h;
  r.boolean("override_occurred", h.override_occurred);
  r.str("override_type", h.override_type);
  r.object("override_actor", h.override_actor, read_actor);
  r.any("original_output", h.original_output);
  r.any("overridden_output", h.overridden_output);
  r.object_or_text("override_rationale", h.override_rationale);
  r.timestamp("override_timestamp", h.override_timestamp);
  r.unsigned_int("time_to_override", h.time_to_override_ms);
  h.extra = r.rest();
  return h;
}

HashChain read_hash_chain(const Json& j, const std::string& path) {
  Reader r(j, path);
  HashChain h;
  r.str("previous_hash", h.previous_hash);
  r.str("current_hash", h.current_hash);
  r.str("algorithm", h.algorithm);
  h.extra = r.rest();
  return h;
}

DigitalSignature read_signature(const Json& j, const std::string& path) {
  Reader r(j, path);
  DigitalSignature s;
  r.str("signer_id", s.signer_id);
  r.str("signature_value", s.signature_value);
  r.str("algorithm", s.algorithm);
  r.str("certificate_ref", s.certificate_ref);
  s.extra = r.rest();
  return s;
}

RetentionPolicy read_retention(const Json& j, const std::string& path) {
  Reader r(j, path);
  RetentionPolicy p;
  r.str("minimum_retention", p.minimum_retention);
  r.str("classification", p.classification);
  p.extra = r.rest();
  return p;
}

TemporalMetadata read_temporal(const Json& j, const std::string& path) {
  Reader r(j, path);
  TemporalMetadata t;
  r.timestamp("event_timestamp", t.event_timestamp);
  r.unsigned_int("processing_duration_ms", t.processing_duration_ms);
  r.unsigned_int("sequence_number", t.sequence_number);
  r.object("hash_chain", t.hash_chain, read_hash_chain);
  r.str("evidence_tier", t.evidence_tier);
  r.object("digital_signature", t.digital_signature, read_signature);
  r.object("retention_policy", t.retention_policy, read_retention);
  t.extra = r.rest();
  return t;
}

// ---- writers ---------------------------------------------------------------

Json write_contract(const BoundaryContract& c) {
  Writer w;
  w.put("protocol", c.protocol);
  w.put("schema_version", c.schema_version);
  w.put("sla", c.sla);
  w.put("data_contract", c.data_contract);
  w.put("failure_mode", c.failure_mode);
  return w.finish(c.extra);
}

Json write_input(const InputRecord& in) {
  Writer w;
  w.put("input_id", in.input_id);
  w.put("input_type", in.input_type);
  w.put("input_value", in.input_value);
  w.put("input_source", in.input_source);
  w.put("input_version", in.input_version);
  return w.finish(in.extra);
}

Json write_environment(const Environment& e) {
  Writer w;
  w.put("system_id", e.system_id);
  w.put("system_version", e.system_version);
  w.put("configuration_hash", e.configuration_hash);
  w.put("deployment_id", e.deployment_id);
  return w.finish(e.extra);
}

Json write_context(const DecisionContext& c) {
  Writer w;
  w.put("decision_id", c.decision_id);
  w.put("decision_type", c.decision_type);
  w.put("trigger", c.trigger);
  w.put("inputs", c.inputs, write_input);
  w.put("environment", c.environment, write_environment);
  return w.finish(c.extra);
}

Json write_rule(const RulePathEntry& e) {
  Writer w;
  w.put("rule_id", e.rule_id);
  w.put("rule_version", e.rule_version);
  w.put("rule_result", e.rule_result);
  return w.finish(e.extra);
}

Json write_model(const ModelInference& m) {
  Writer w;
  w.put("model_id", m.model_id);
  w.put("model_version", m.model_version);
  w.put("feature_vector_hash", m.feature_vector_hash);
  w.put("prediction", m.prediction);
  w.put("confidence", m.confidence);
  return w.finish(m.extra);
}

Json write_policy(const PolicyEvaluation& p) {
  Writer w;
  w.put("policy_id", p.policy_id);
  w.put("policy_version", p.policy_version);
  w.put("policy_engine", p.policy_engine);
  w.put("evaluation_result", p.evaluation_result);
  return w.finish(p.extra);
}

Json write_logic(const DecisionLogic& l) {
  Writer w;
  w.put("logic_type", l.logic_type);
  w.put("rule_path", l.rule_path, write_rule);
  w.put("model_inference", l.model_inference, write_model);
  w.put("policy_evaluation", l.policy_evaluation, write_policy);
  w.put("combination_method", l.combination_method);
  w.put("output", l.output);
  w.put("output_alternatives", l.output_alternatives);
  return w.finish(l.extra);
}

Json write_upstream(const UpstreamRef& u) {
  Writer w;
  w.put("decision_id", u.decision_id);
  w.put("system_id", u.system_id);
  w.put("coupling_type", u.coupling_type);
  w.put("boundary_contract", u.boundary_contract, write_contract);
  return w.finish(u.extra);
}

Json write_downstream(const DownstreamRef& d) {
  Writer w;
  w.put("system_id", d.system_id);
  w.put("contract_version", d.contract_version);
  w.put("boundary_contract", d.boundary_contract, write_contract);
  return w.finish(d.extra);
}

Json write_boundary(const DecisionBoundary& b) {
  Writer w;
  w.put("upstream_decisions", b.upstream_decisions, write_upstream);
  w.put("downstream_consumers", b.downstream_consumers, write_downstream);
  return w.finish(b.extra);
}

Json write_component(const ConfidenceComponent& c) {
  Writer w;
  w.put("component", c.component);
  w.put("score", c.score);
  w.put("calibration_date", c.calibration_date);
  return w.finish(c.extra);
}

Json write_data_quality(const DataQuality& d) {
  Writer w;
  w.put("completeness", d.completeness);
  w.put("freshness", d.freshness_seconds);
  w.put("known_issues", d.known_issues, [](const std::string& s) { return Json(s); });
  return w.finish(d.extra);
}

Json write_alert(const ThresholdAlert& a) {
  Writer w;
  w.put("alert_id", a.alert_id);
  w.put("threshold", a.threshold);
  w.put("observed", a.observed);
  return w.finish(a.extra);
}

Json write_quality(const QualityIndicators& q) {
  Writer w;
  w.put("confidence_score", q.confidence_score);
  w.put("confidence_components", q.confidence_components, write_component);
  w.put("data_quality", q.data_quality, write_data_quality);
  w.put("decision_risk_level", q.decision_risk_level);
  w.put("threshold_alerts", q.threshold_alerts, write_alert);
  return w.finish(q.extra);
}

Json write_actor(const OverrideActor& a) {
  Writer w;
  w.put("actor_id", a.actor_id);
  w.put("actor_role", a.actor_role);
  w.put("authorization_level", a.authorization_level);
  return w.finish(a.extra);
}

Json write_override(const HumanOverrideRecord& h) {
  Writer w;
  w.put("override_occurred", h.override_occurred);
  w.put("override_type", h.override_type);
  w.put("override_actor", h.override_actor, write_actor);
  w.put("original_output", h.original_output);
  w.put("overridden_output", h.overridden_output);
  w.put("override_rationale", h.override_rationale);
  w.put("override_timestamp", h.override_timestamp);
  w.put("time_to_override", h.time_to_override_ms);
  return w.finish(h.extra);
}

Json write_hash_chain(const HashChain& h) {
  Writer w;
  w.put("previous_hash", h.previous_hash);
  w.put("current_hash", h.current_hash);
  w.put("algorithm", h.algorithm);
  return w.finish(h.extra);
}

Json write_signature(const DigitalSignature& s) {
  Writer w;
  w.put("signer_id", s.signer_id);
  w.put("signature_value", s.signature_value);
  w.put("algorithm", s.algorithm);
  w.put("certificate_ref", s.certificate_ref);
  return w.finish(s.extra);
}

Json write_retention(const RetentionPolicy& p) {
  Writer w;
  w.put("minimum_retention", p.minimum_retention);
  w.put("classification", p.classification);
  return w.finish(p.extra);
}

Json write_temporal(const TemporalMetadata& t) {
  Writer w;
  w.put("event_timestamp", t.event_timestamp);
  w.put("processing_duration_ms", t.processing_duration_ms);
  w.put("sequence_number", t.sequence_number);
  w.put("hash_chain", t.hash_chain, write_hash_chain);
  w.put("evidence_tier", t.evidence_tier);
  w.put("digital_signature", t.digital_signature, write_signature);
  w.put("retention_policy", t.retention_policy, write_retention);
  return w.finish(t.extra);
}

}  // namespace

DecisionEvent event_from_json(const Json& doc) {
  if (auto p = find_null(doc); !p.empty()) {
    throw Error(ErrorCode::null_forbidden, "explicit null is not permitted", p);
  }
  Reader r(doc, "");
  DecisionEvent e;
  r.str("schema_version", e.schema_version);
  r.object("decision_context", e.decision_context, read_context);
  r.object("decision_logic", e.decision_logic, read_logic);
  r.object("decision_boundary", e.decision_boundary, read_boundary);
  r.object("decision_quality_indicators", e.decision_quality_indicators, read_quality);
  r.object("human_override_record", e.human_override_record, read_override);
  r.object("temporal_metadata", e.temporal_metadata, read_temporal);
  e.extensions = r.rest();
  return e;
}

Json event_to_json(const DecisionEvent& e) {
  Writer w;
  w.put("schema_version", e.schema_version);
  w.put("decision_context", e.decision_context, write_context);
  w.put("decision_logic", e.decision_logic, write_logic);
  w.put("decision_boundary", e.decision_boundary, write_boundary);
  w.put("decision_quality_indicators", e.decision_quality_indicators, write_quality);
  w.put("human_override_record", e.human_override_record, write_override);
  w.put("temporal_metadata", e.temporal_metadata, write_temporal);
  return w.finish(e.extensions);
}

DecisionEvent parse_event(std::string_view wire) { return event_from_json(parse_json(wire)); }

std::string serialize_event(const DecisionEvent& event) { return event_to_json(event).dump(); }

bool structurally_equal(const DecisionEvent& a, const DecisionEvent& b) {
  // nlohmann::json (unordered map) compares objects by key set, not order.
  return nlohmann::json::parse(serialize_event(a)) == nlohmann::json::parse(serialize_event(b));
}

const std::string* DecisionEvent::decision_id() const {
  return decision_context && decision_context->decision_id ? &*decision_context->decision_id
                                                           : nullptr;
}

const std::string* DecisionEvent::logic_type() const {
  return decision_logic && decision_logic->logic_type ? &*decision_logic->logic_type : nullptr;
}

const std::string* DecisionEvent::system_id() const {
  if (!decision_context || !decision_context->environment) return nullptr;
  const auto& env = *decision_context->environment;
  return env.system_id ? &*env.system_id : nullptr;
}

std::optional<EvidenceTier> DecisionEvent::tier() const {
  if (!temporal_metadata || !temporal_metadata->evidence_tier) return std::nullopt;
  return parse_tier(*temporal_metadata->evidence_tier);
}

std::optional<std::uint64_t> DecisionEvent::sequence_number() const {
  return temporal_metadata ? temporal_metadata->sequence_number : std::nullopt;
}

const std::string* DecisionEvent::current_hash() const {
  if (!temporal_metadata || !temporal_metadata->hash_chain) return nullptr;
  const auto& hc = *temporal_metadata->hash_chain;
  return hc.current_hash ? &*hc.current_hash : nullptr;
}

const std::string* DecisionEvent::previous_hash() const {
  if (!temporal_metadata || !temporal_metadata->hash_chain) return nullptr;
  const auto& hc = *temporal_metadata->hash_chain;
  return hc.previous_hash ? &*hc.previous_hash : nullptr;
}

bool DecisionEvent::override_occurred() const {
  return human_override_record && human_override_record->override_occurred.value_or(false);
}

DecisionEvent new_minimal_event(std::string decision_id, std::string decision_type,
                                std::string logic_type, Json output, bool override_occurred,
                                std::string event_timestamp, EvidenceTier evidence_tier) {
  if (!is_uuid(decision_id)) {
    throw Error(ErrorCode::format_error, "not an RFC 4122 UUID", "decision_context.decision_id");
  }
  if (!is_wire_timestamp(event_timestamp)) {
    throw Error(ErrorCode::format_error, "timestamp must be RFC 3339 UTC with millisecond precision",
                "temporal_metadata.event_timestamp");
  }
  bool core = contains_token(tokens::logic_types, logic_type);
  if (!core && (!is_namespaced_token(logic_type) ||
                contains_token(tokens::logic_types, namespace_prefix(logic_type)))) {
    throw Error(ErrorCode::enum_violation, "unknown logic_type '" + logic_type + "'",
                "decision_logic.logic_type");
  }
  if (decision_type.find(':') != std::string::npos && !is_namespaced_token(decision_type)) {
    throw Error(ErrorCode::enum_violation, "malformed namespaced decision_type",
                "decision_context.decision_type");
  }
  if (auto p = find_null(output, "decision_logic.output"); !p.empty()) {
    throw Error(ErrorCode::null_forbidden, "explicit null is not permitted", p);
  }

  DecisionEvent e;
  e.schema_version = std::string(kSchemaVersion);
  e.decision_context.emplace();
  e.decision_context->decision_id = std::move(decision_id);
  e.decision_context->decision_type = std::move(decision_type);
  e.decision_logic.emplace();
  e.decision_logic->logic_type = std::move(logic_type);
  e.decision_logic->output = std::move(output);
  e.human_override_record.emplace();
  e.human_override_record->override_occurred = override_occurred;
  e.temporal_metadata.emplace();
  e.temporal_metadata->event_timestamp = std::move(event_timestamp);
  e.temporal_metadata->evidence_tier = std::string(to_string(evidence_tier));
  return e;
}

}  // namespace des
