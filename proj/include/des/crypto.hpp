#pragma once

// Thin RAII wrappers over OpenSSL for the primitives the ledger needs:
// SHA-256, HMAC-SHA-256, base64 and Ed25519 / ECDSA-P256 signatures.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

struct evp_pkey_st;

namespace des {

using Digest = std::array<std::uint8_t, 32>;
using Bytes = std::vector<std::uint8_t>;

Digest sha256(std::string_view data);
Digest sha256(std::span<const std::uint8_t> data);
std::string sha256_hex(std::string_view data);
Digest hmac_sha256(std::string_view key, std::string_view data);

std::string to_hex(std::span<const std::uint8_t> bytes);
std::optional<Bytes> from_hex(std::string_view hex);

// Random (version 4) UUID from the OpenSSL CSPRNG, lowercase.
std::string random_uuid();

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::optional<Bytes> base64_decode(std::string_view text);

enum class SignatureAlgorithm { ed25519, ecdsa_p256 };

std::string_view to_string(SignatureAlgorithm alg);
std::optional<SignatureAlgorithm> parse_signature_algorithm(std::string_view token);

struct PkeyDeleter {
  void operator()(evp_pkey_st* key) const noexcept;
};
using PkeyPtr = std::unique_ptr<evp_pkey_st, PkeyDeleter>;

class PublicKey {
 public:
  static PublicKey from_pem(std::string_view pem);

  SignatureAlgorithm algorithm() const { return algorithm_; }
  std::string to_pem() const;
  bool verify(std::string_view message, std::span<const std::uint8_t> signature) const;

 private:
  friend class SigningKey;
  PublicKey(PkeyPtr key, SignatureAlgorithm alg) : key_(std::move(key)), algorithm_(alg) {}

  std::shared_ptr<evp_pkey_st> key_;
  SignatureAlgorithm algorithm_;
};

class SigningKey {
 public:
  static SigningKey generate(SignatureAlgorithm alg = SignatureAlgorithm::ed25519);
  static SigningKey from_pem(std::string_view pem);

  SignatureAlgorithm algorithm() const { return algorithm_; }
  std::string to_pem() const;
  PublicKey public_key() const;
  Bytes sign(std::string_view message) const;

 private:
  SigningKey(PkeyPtr key, SignatureAlgorithm alg) : key_(std::move(key)), algorithm_(alg) {}

  std::shared_ptr<evp_pkey_st> key_;
  SignatureAlgorithm algorithm_;
};

}  // namespace des
