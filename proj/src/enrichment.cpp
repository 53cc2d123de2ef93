#include "des/enrichment.hpp"

#include <algorithm>

#include "des/canonical.hpp"
#include "des/error.hpp"
#include "des/time.hpp"

namespace des {

namespace {

Json signature_to_json(const DigitalSignature& s) {
  Json j = Json::object();
  if (s.signer_id) j["signer_id"] = *s.signer_id;
  if (s.signature_value) j["signature_value"] = *s.signature_value;
  if (s.algorithm) j["algorithm"] = *s.algorithm;
  if (s.certificate_ref) j["certificate_ref"] = *s.certificate_ref;
  return j;
}

DigitalSignature signature_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::format_error, "digital_signature must be an object", "digital_signature");
  DigitalSignature s;
  auto opt = [&](const char* key, std::optional<std::string>& out) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_string()) throw Error(ErrorCode::format_error, "must be a string", join_path("digital_signature", key));
      out = it->get<std::string>();
    }
  };
  opt("signer_id", s.signer_id);
  opt("signature_value", s.signature_value);
  opt("algorithm", s.algorithm);
  opt("certificate_ref", s.certificate_ref);
  return s;
}

std::string signing_bytes(const EnrichmentRecord& r) {
  EnrichmentRecord view = r;
  view.digital_signature.reset();
  return canonicalize(view.to_json());
}

}  // namespace

Json EnrichmentRecord::to_json() const {
  Json j = {{"enrichment_id", enrichment_id}, {"decision_id", decision_id}, {"kind", kind},
            {"payload", payload},             {"created_at", created_at},   {"link_hash", link_hash}};
  if (digital_signature) j["digital_signature"] = signature_to_json(*digital_signature);
  return j;
}

EnrichmentRecord EnrichmentRecord::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::format_error, "enrichment record must be an object");
  EnrichmentRecord r;
  auto str = [&](const char* key, std::string& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) {
      throw Error(ErrorCode::format_error, std::string("enrichment requires string '") + key + "'", key);
    }
    out = it->get<std::string>();
  };
  str("enrichment_id", r.enrichment_id);
  str("decision_id", r.decision_id);
  str("kind", r.kind);
  str("created_at", r.created_at);
  str("link_hash", r.link_hash);
  auto p = j.find("payload");
  if (p == j.end() || !p->is_object()) throw Error(ErrorCode::format_error, "enrichment payload must be an object", "payload");
  r.payload = *p;
  if (auto s = j.find("digital_signature"); s != j.end()) r.digital_signature = signature_from_json(*s);
  return r;
}

std::string compute_link_hash(std::string_view target_current_hash, const Json& payload) {
  std::string input(target_current_hash);
  canonicalize_to(payload, input);
  return sha256_hex(input);
}

EnrichmentRecord create_enrichment(const DecisionEvent& target, std::string kind, Json payload,
                                   std::string created_at, std::optional<std::string> enrichment_id) {
  if (!target.is_sealed()) {
    throw Error(ErrorCode::target_unsealed, "enrichment target is not sealed",
                "temporal_metadata.hash_chain.current_hash");
  }
  if (!contains_token(kEnrichmentKinds, kind) && !is_namespaced_token(kind)) {
    throw Error(ErrorCode::enum_violation, "enrichment kind '" + kind + "' is neither built-in nor namespaced", "kind");
  }
  if (!is_wire_timestamp(created_at)) {
    throw Error(ErrorCode::format_error, "created_at must be YYYY-MM-DDTHH:MM:SS.mmmZ", "created_at");
  }
  if (!payload.is_object()) throw Error(ErrorCode::format_error, "enrichment payload must be an object", "payload");
  if (auto p = find_null(payload, "payload"); !p.empty()) {
    throw Error(ErrorCode::null_forbidden, "null is not allowed", p);
  }
  if (enrichment_id && !is_uuid(*enrichment_id)) {
    throw Error(ErrorCode::format_error, "enrichment_id must be a UUID", "enrichment_id");
  }

  EnrichmentRecord r;
  r.enrichment_id = enrichment_id ? std::move(*enrichment_id) : random_uuid();
  r.decision_id = target.decision_id() ? *target.decision_id() : std::string();
  r.kind = std::move(kind);
  r.created_at = std::move(created_at);
  r.link_hash = compute_link_hash(*target.current_hash(), payload);
  r.payload = std::move(payload);
  return r;
}

bool verify_link(const EnrichmentRecord& record, const DecisionEvent& target) {
  if (!target.current_hash() || !target.decision_id()) return false;
  if (record.decision_id != *target.decision_id()) return false;
  return record.link_hash == compute_link_hash(*target.current_hash(), record.payload);
}

void sign_enrichment(EnrichmentRecord& record, const SigningKey& key, std::string signer_id) {
  record.digital_signature.reset();
  DigitalSignature sig;
  sig.signer_id = std::move(signer_id);
  sig.algorithm = std::string(to_string(key.algorithm()));
  sig.signature_value = base64_encode(key.sign(signing_bytes(record)));
  record.digital_signature = std::move(sig);
}

bool verify_enrichment_signature(const EnrichmentRecord& record, const PublicKey& key) {
  if (!record.digital_signature || !record.digital_signature->signature_value) {
    throw Error(ErrorCode::signature_missing, "enrichment carries no digital_signature", "digital_signature");
  }
  auto alg = parse_signature_algorithm(record.digital_signature->algorithm.value_or(""));
  if (!alg) {
    throw Error(ErrorCode::unsupported_algorithm, "unsupported signature algorithm", "digital_signature.algorithm");
  }
  if (*alg != key.algorithm()) return false;
  auto raw = base64_decode(*record.digital_signature->signature_value);
  return raw && key.verify(signing_bytes(record), *raw);
}

Json EnrichedView::to_json() const {
  Json list = Json::array();
  for (const auto& e : enrichments) list.push_back(e.to_json());
  return {{"event", event_to_json(base)}, {"enrichments", std::move(list)}};
}

EnrichedView resolve_view(const DecisionEvent& target, std::span<const EnrichmentRecord> enrichments) {
  EnrichedView view{target, {}};
  for (const auto& e : enrichments) {
    if (!verify_link(e, target)) {
      throw Error(ErrorCode::stale_enrichment,
                  "enrichment " + e.enrichment_id + " is not bound to this sealed event", "link_hash");
    }
    view.enrichments.push_back(e);
  }
  // Fixed-width timestamps order lexically.
  std::stable_sort(view.enrichments.begin(), view.enrichments.end(),
                   [](const EnrichmentRecord& a, const EnrichmentRecord& b) { return a.created_at < b.created_at; });
  return view;
}

}  // namespace des
