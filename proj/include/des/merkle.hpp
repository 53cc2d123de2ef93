#pragma once

// Binary Merkle tree over 32-byte leaf digests (hex on the wire).
//
//   node = SHA-256(left || right)   (raw 32-byte digests, no prefix)
//
// A level with an odd node count pairs its last node with itself, so every
// leaf's audit path has exactly ceil(log2 n) steps. Checkpoints record the
// leaf count (end - start + 1), which pins the tree shape.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "des/json.hpp"

namespace des {

enum class Side { left, right };

struct ProofStep {
  Side side;         // where the sibling sits relative to the running hash
  std::string hash;  // hex

  friend bool operator==(const ProofStep&, const ProofStep&) = default;
};

struct InclusionProof {
  std::uint64_t leaf_index = 0;
  std::uint64_t leaf_count = 0;
  std::string leaf_hash;
  std::vector<ProofStep> siblings;

  Json to_json() const;
  static InclusionProof from_json(const Json& j);

  friend bool operator==(const InclusionProof&, const InclusionProof&) = default;
};

// SHA-256(left || right) over the raw bytes of two 64-char hex digests.
std::string merkle_parent(std::string_view left_hex, std::string_view right_hex);

// Throws Error{index_out_of_range} for an empty leaf set.
std::string merkle_root(std::span<const std::string> leaves);

// Throws Error{index_out_of_range} when index >= leaves.size().
InclusionProof inclusion_proof(std::span<const std::string> leaves, std::size_t index);

// With a nonzero leaf_count the path length and sibling sides must also
// agree with leaf_index.
bool verify_inclusion(const InclusionProof& proof, std::string_view merkle_root_hex);

}  // namespace des
