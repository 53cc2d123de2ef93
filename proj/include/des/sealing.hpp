#pragma once

// Event hashing and signing.
//
// Compute order for a sealed, signed event:
//   1. signature over canonical(event - signature_value - current_hash)
//   2. attach digital_signature (with signature_value)
//   3. current_hash = SHA-256(canonical(event - current_hash))
// so the hash covers the signature and the signature never covers the hash.

#include <string>

#include "des/crypto.hpp"
#include "des/event_model.hpp"

namespace des {

struct SealedDigest {
  std::string algorithm;
  std::string hex;

  friend bool operator==(const SealedDigest&, const SealedDigest&) = default;
};

// Canonical bytes hashed to produce current_hash.
std::string hash_input_bytes(const DecisionEvent& event);

// Canonical bytes covered by the digital signature.
std::string signature_input_bytes(const DecisionEvent& event);

// Throws Error{seal_precondition} when previous_hash or sequence_number is
// missing and Error{unsupported_algorithm} for a hash token other than
// sha-256.
SealedDigest compute_event_hash(const DecisionEvent& event);

// True when the stored current_hash equals the recomputed digest.
bool hash_matches(const DecisionEvent& event);

// Throws Error{already_sealed} when current_hash is present.
DigitalSignature sign_event(const DecisionEvent& event, const SigningKey& key,
                            std::string signer_id, std::string certificate_ref);

// Throws Error{signature_missing} when the event carries no signature and
// Error{unsupported_algorithm} for an unknown signature algorithm token.
bool verify_signature(const DecisionEvent& event, const PublicKey& key);

enum class SensitiveHashMode { keyed, plain };

// Keyed digest (HMAC-SHA-256) of the canonicalized value. `plain` mode is an
// explicit opt-out producing an unkeyed SHA-256 and ignores the key.
// Throws Error{usage_error} for an empty key in keyed mode.
std::string hash_sensitive_value(const Json& value, std::string_view deployment_key,
                                 SensitiveHashMode mode = SensitiveHashMode::keyed);

}  // namespace des
