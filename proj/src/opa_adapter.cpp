#include "des/opa_adapter.hpp"

#include <sstream>

#include "des/time.hpp"

namespace des {

namespace {

constexpr std::string_view kMapped[] = {"decision_id", "timestamp", "path", "result", "input"};

void reject_null(const Json& value, const std::string& path) {
  if (auto p = find_null(value, path); !p.empty()) {
    throw ConversionError("null value in mapped OPA field", p);
  }
}

std::optional<std::string> policy_version(const Json& entry) {
  if (auto labels = entry.find("labels"); labels != entry.end() && labels->is_object()) {
    if (auto v = labels->find("policy_version"); v != labels->end() && v->is_string()) {
      return v->get<std::string>();
    }
  }
  if (auto bundles = entry.find("bundles"); bundles != entry.end() && bundles->is_object() && bundles->size() == 1) {
    const Json& only = bundles->begin().value();
    if (auto rev = only.find("revision"); only.is_object() && rev != only.end() && rev->is_string()) {
      return rev->get<std::string>();
    }
  }
  return std::nullopt;
}

std::string event_timestamp(const Json& entry, const OpaConversionConfig& config) {
  if (auto ts = entry.find("timestamp"); ts != entry.end() && ts->is_string()) {
    if (auto tp = parse_rfc3339_lenient(ts->get<std::string>())) return format_timestamp(*tp);
  }
  if (!config.fallback_timestamp.empty()) return config.fallback_timestamp;
  return format_timestamp(now_ms());
}

InputRecord make_input(const std::string& key, const Json& value, const OpaConversionConfig& config) {
  InputRecord in;
  in.input_id = key;
  in.input_type = "external_data";
  in.input_source = "opa:input";
  if (config.sensitive_input_keys.count(key)) {
    in.input_value = Json(hash_sensitive_value(value, config.deployment_key, config.hash_mode));
  } else {
    in.input_value = value;
  }
  return in;
}

}  // namespace

DecisionEvent convert_opa_decision(const Json& entry, const OpaConversionConfig& config) {
  if (!entry.is_object()) throw ConversionError("OPA decision-log entry must be an object");

  auto id = entry.find("decision_id");
  if (id == entry.end() || !id->is_string()) throw ConversionError("OPA entry lacks decision_id", "decision_id");
  auto path = entry.find("path");
  if (path == entry.end() || !path->is_string()) throw ConversionError("OPA entry lacks path", "path");
  const std::string decision_id = id->get<std::string>();
  if (!is_uuid(decision_id)) throw ConversionError("OPA decision_id is not a UUID", "decision_id");

  DecisionEvent e;
  e.schema_version = std::string(kSchemaVersion);

  DecisionContext ctx;
  ctx.decision_id = decision_id;
  ctx.decision_type = config.decision_type;
  Environment env;
  env.system_id = config.system_id;
  ctx.environment = std::move(env);
  if (auto input = entry.find("input"); input != entry.end()) {
    reject_null(*input, "input");
    std::vector<InputRecord> inputs;
    if (input->is_object()) {
      for (const auto& [key, value] : input->items()) inputs.push_back(make_input(key, value, config));
    } else {
      inputs.push_back(make_input("input", *input, config));
    }
    if (!inputs.empty()) ctx.inputs = std::move(inputs);
  }
  e.decision_context = std::move(ctx);

  DecisionLogic logic;
  logic.logic_type = "policy_evaluation";
  PolicyEvaluation pe;
  pe.policy_id = path->get<std::string>();
  pe.policy_engine = "OPA";
  pe.policy_version = policy_version(entry);
  if (auto result = entry.find("result"); result != entry.end()) {
    reject_null(*result, "result");
    pe.evaluation_result = *result;
    logic.output = *result;
  }
  logic.policy_evaluation = std::move(pe);
  e.decision_logic = std::move(logic);

  QualityIndicators q;
  q.decision_risk_level = config.decision_risk_level;
  e.decision_quality_indicators = std::move(q);

  HumanOverrideRecord h;
  h.override_occurred = false;
  e.human_override_record = std::move(h);

  TemporalMetadata tm;
  tm.event_timestamp = event_timestamp(entry, config);
  tm.evidence_tier = std::string(to_string(config.tier));
  e.temporal_metadata = std::move(tm);

  for (const auto& [key, value] : entry.items()) {
    if (contains_token(kMapped, key)) continue;
    std::string ext = "opa:" + key;
    reject_null(value, ext);
    e.extensions[ext] = value;
  }

  ValidateOptions opts;
  opts.stage = Stage::draft;
  auto report = validate(e, opts);
  if (!report.valid) {
    const auto& v = report.violations.front();
    throw ConversionError("converted draft fails " + v.rule_id + " at " + v.path + ": " + v.message, v.path,
                          std::move(report));
  }
  return e;
}

std::vector<Json> parse_opa_log(std::string_view text) {
  ParseOptions opts;
  opts.reject_nulls = false;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  std::vector<Json> entries;
  if (text[first] == '[') {
    Json doc = parse_json(text, opts);
    for (auto& item : doc) entries.push_back(std::move(item));
    return entries;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    entries.push_back(parse_json(line, opts));
  }
  return entries;
}

std::vector<OpaConversionOutcome> convert_opa_log(std::string_view text, const OpaConversionConfig& config) {
  std::vector<OpaConversionOutcome> out;
  auto entries = parse_opa_log(text);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    OpaConversionOutcome o;
    o.index = i;
    try {
      o.draft = convert_opa_decision(entries[i], config);
    } catch (const Error& err) {
      o.error = err.what();
    }
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace des
