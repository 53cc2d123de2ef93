#include "des/sealing.hpp"

#include "des/canonical.hpp"
#include "des/error.hpp"

namespace des {

namespace {

Json without_current_hash(const DecisionEvent& event) {
  Json doc = event_to_json(event);
  if (doc.contains("temporal_metadata") && doc["temporal_metadata"].contains("hash_chain")) {
    doc["temporal_metadata"]["hash_chain"].erase("current_hash");
  }
  return doc;
}

}  // namespace

std::string hash_input_bytes(const DecisionEvent& event) {
  return canonicalize(without_current_hash(event));
}

std::string signature_input_bytes(const DecisionEvent& event) {
  Json doc = without_current_hash(event);
  if (doc.contains("temporal_metadata") && doc["temporal_metadata"].contains("digital_signature")) {
    doc["temporal_metadata"]["digital_signature"].erase("signature_value");
  }
  return canonicalize(doc);
}

SealedDigest compute_event_hash(const DecisionEvent& event) {
  if (!event.previous_hash()) {
    throw Error(ErrorCode::seal_precondition, "previous_hash must be set before hashing",
                "temporal_metadata.hash_chain.previous_hash");
  }
  if (!event.sequence_number()) {
    throw Error(ErrorCode::seal_precondition, "sequence_number must be set before hashing",
                "temporal_metadata.sequence_number");
  }
  const auto& chain = *event.temporal_metadata->hash_chain;
  std::string algorithm = chain.algorithm.value_or(std::string(kDefaultHashAlgorithm));
  if (algorithm != kDefaultHashAlgorithm) {
    throw Error(ErrorCode::unsupported_algorithm, "unsupported hash algorithm '" + algorithm + "'",
                "temporal_metadata.hash_chain.algorithm");
  }
  return {std::move(algorithm), sha256_hex(hash_input_bytes(event))};
}

bool hash_matches(const DecisionEvent& event) {
  const std::string* stored = event.current_hash();
  if (!stored) return false;
  try {
    return compute_event_hash(event).hex == *stored;
  } catch (const Error&) {
    return false;
  }
}

DigitalSignature sign_event(const DecisionEvent& event, const SigningKey& key,
                            std::string signer_id, std::string certificate_ref) {
  if (event.is_sealed()) {
    throw Error(ErrorCode::already_sealed, "cannot sign a sealed event",
                "temporal_metadata.hash_chain.current_hash");
  }
  DigitalSignature sig;
  sig.signer_id = std::move(signer_id);
  sig.algorithm = std::string(to_string(key.algorithm()));
  sig.certificate_ref = std::move(certificate_ref);

  DecisionEvent view = event;
  if (!view.temporal_metadata) view.temporal_metadata.emplace();
  view.temporal_metadata->digital_signature = sig;
  sig.signature_value = base64_encode(key.sign(signature_input_bytes(view)));
  return sig;
}

bool verify_signature(const DecisionEvent& event, const PublicKey& key) {
  if (!event.temporal_metadata || !event.temporal_metadata->digital_signature) {
    throw Error(ErrorCode::signature_missing, "event carries no digital_signature",
                "temporal_metadata.digital_signature");
  }
  const auto& sig = *event.temporal_metadata->digital_signature;
  auto alg = parse_signature_algorithm(sig.algorithm.value_or(""));
  if (!alg) {
    throw Error(ErrorCode::unsupported_algorithm,
                "unsupported signature algorithm '" + sig.algorithm.value_or("") + "'",
                "temporal_metadata.digital_signature.algorithm");
  }
  if (*alg != key.algorithm() || !sig.signature_value) return false;
  auto raw = base64_decode(*sig.signature_value);
  if (!raw) return false;
  return key.verify(signature_input_bytes(event), *raw);
}

std::string hash_sensitive_value(const Json& value, std::string_view deployment_key,
                                 SensitiveHashMode mode) {
  std::string canonical = canonicalize(value);
  if (mode == SensitiveHashMode::plain) return sha256_hex(canonical);
  if (deployment_key.empty()) {
    throw Error(ErrorCode::usage_error, "keyed sensitive-value hashing requires a deployment key");
  }
  return to_hex(hmac_sha256(deployment_key, canonical));
}

}  // namespace des
