#include "des/merkle.hpp"

#include <cstring>

#include "des/crypto.hpp"
#include "des/error.hpp"
#include "des/event_model.hpp"

namespace des {

namespace {

Digest decode_digest(std::string_view hex) {
  auto raw = from_hex(hex);
  if (!raw || raw->size() != 32) {
    throw Error(ErrorCode::format_error, "merkle node is not a 64-char hex digest");
  }
  Digest d;
  std::memcpy(d.data(), raw->data(), d.size());
  return d;
}

Digest parent(const Digest& left, const Digest& right) {
  std::array<std::uint8_t, 64> buf;
  std::memcpy(buf.data(), left.data(), 32);
  std::memcpy(buf.data() + 32, right.data(), 32);
  return sha256(std::span<const std::uint8_t>(buf));
}

std::vector<Digest> next_level(const std::vector<Digest>& level) {
  std::vector<Digest> up;
  up.reserve((level.size() + 1) / 2);
  for (std::size_t i = 0; i < level.size(); i += 2) {
    const Digest& right = i + 1 < level.size() ? level[i + 1] : level[i];
    up.push_back(parent(level[i], right));
  }
  return up;
}

}  // namespace

std::string merkle_parent(std::string_view left_hex, std::string_view right_hex) {
  return to_hex(parent(decode_digest(left_hex), decode_digest(right_hex)));
}

std::string merkle_root(std::span<const std::string> leaves) {
  if (leaves.empty()) throw Error(ErrorCode::index_out_of_range, "merkle tree needs at least one leaf");
  std::vector<Digest> level;
  level.reserve(leaves.size());
  for (const auto& leaf : leaves) level.push_back(decode_digest(leaf));
  while (level.size() > 1) level = next_level(level);
  return to_hex(level.front());
}

InclusionProof inclusion_proof(std::span<const std::string> leaves, std::size_t index) {
  if (index >= leaves.size()) {
    throw Error(ErrorCode::index_out_of_range,
                "leaf index " + std::to_string(index) + " outside checkpoint of " +
                    std::to_string(leaves.size()) + " leaves");
  }
  InclusionProof proof;
  proof.leaf_index = index;
  proof.leaf_count = leaves.size();
  proof.leaf_hash = leaves[index];

  std::vector<Digest> level;
  level.reserve(leaves.size());
  for (const auto& leaf : leaves) level.push_back(decode_digest(leaf));
  std::size_t pos = index;
  while (level.size() > 1) {
    std::size_t sibling = pos ^ 1U;
    if (sibling >= level.size()) sibling = pos;
    proof.siblings.push_back({pos % 2 == 0 ? Side::right : Side::left, to_hex(level[sibling])});
    level = next_level(level);
    pos /= 2;
  }
  return proof;
}

bool verify_inclusion(const InclusionProof& proof, std::string_view merkle_root_hex) {
  if (!is_lower_hex(proof.leaf_hash, 64) || !is_lower_hex(merkle_root_hex, 64)) return false;
  // The index and count fix the path: its length and the side of every
  // sibling. A proof disagreeing with them is rejected before hashing.
  if (proof.leaf_count > 0) {
    if (proof.leaf_index >= proof.leaf_count) return false;
    std::size_t depth = 0;
    while ((std::uint64_t{1} << depth) < proof.leaf_count) ++depth;
    if (proof.siblings.size() != depth) return false;
    std::uint64_t idx = proof.leaf_index;
    for (const auto& step : proof.siblings) {
      if (step.side != (idx % 2 == 0 ? Side::right : Side::left)) return false;
      idx >>= 1;
    }
  }
  Digest running = decode_digest(proof.leaf_hash);
  for (const auto& step : proof.siblings) {
    if (!is_lower_hex(step.hash, 64)) return false;
    Digest sibling = decode_digest(step.hash);
    running = step.side == Side::right ? parent(running, sibling) : parent(sibling, running);
  }
  return to_hex(running) == merkle_root_hex;
}

Json InclusionProof::to_json() const {
  Json steps = Json::array();
  for (const auto& s : siblings) {
    steps.push_back({{"side", s.side == Side::left ? "left" : "right"}, {"hash", s.hash}});
  }
  return {{"leaf_index", leaf_index},
          {"leaf_count", leaf_count},
          {"leaf_hash", leaf_hash},
          {"siblings", std::move(steps)}};
}

InclusionProof InclusionProof::from_json(const Json& j) {
  InclusionProof p;
  try {
    p.leaf_index = j.at("leaf_index").get<std::uint64_t>();
    p.leaf_count = j.value("leaf_count", std::uint64_t{0});
    p.leaf_hash = j.at("leaf_hash").get<std::string>();
    for (const auto& s : j.at("siblings")) {
      auto side = s.at("side").get<std::string>();
      if (side != "left" && side != "right") {
        throw Error(ErrorCode::format_error, "proof side must be left or right");
      }
      p.siblings.push_back({side == "left" ? Side::left : Side::right, s.at("hash").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("malformed inclusion proof: ") + e.what());
  }
  return p;
}

}  // namespace des
