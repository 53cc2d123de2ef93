#pragma once

// Per-stream hash chains and Merkle checkpoints.
//
// One chain exists per system_id. Appends to a stream must be serialized by
// the caller (single writer per ChainStreamState); distinct streams may be
// appended concurrently and verification is read-only.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "des/crypto.hpp"
#include "des/error.hpp"
#include "des/event_model.hpp"
#include "des/json.hpp"
#include "des/validator.hpp"

namespace des {

// previous_hash of the first event in every stream.
inline const std::string kGenesisHash(64, '0');
inline constexpr std::uint64_t kDefaultCheckpointInterval = 1024;

struct ChainStreamState {
  std::string system_id;
  std::uint64_t last_sequence = 0;
  std::string last_hash = kGenesisHash;

  friend bool operator==(const ChainStreamState&, const ChainStreamState&) = default;
};

// Raised by seal_and_append when the draft fails validation. Carries the
// full report so callers can surface every violation.
class RejectedInvalid : public Error {
 public:
  explicit RejectedInvalid(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

struct SigningRequest {
  const SigningKey* key = nullptr;
  std::string signer_id;
  std::string certificate_ref;
};

struct SealResult {
  DecisionEvent event;
  ChainStreamState state;
};

// Validates the draft at its declared tier, assigns sequence_number and
// previous_hash, optionally signs, then computes current_hash. `state` is
// never modified; the advanced state is returned. Throws RejectedInvalid or
// Error{stream_mismatch} (draft names a different system_id).
SealResult seal_and_append(const ChainStreamState& state, const DecisionEvent& draft,
                           const std::optional<SigningRequest>& signing = std::nullopt);

enum class FindingKind {
  hash_mismatch,
  link_mismatch,
  sequence_gap,
  sequence_duplicate,
  sequence_regression,
  unsealed,
  timestamp_regression,  // warning only
  parse_error,
  non_canonical,
  truncated_line,
  checkpoint_root_mismatch,
  checkpoint_link_mismatch,
  checkpoint_range_mismatch,
};

std::string_view to_string(FindingKind kind);
bool is_warning(FindingKind kind);

struct ChainFinding {
  std::size_t index = 0;  // position in the verified sequence
  std::optional<std::uint64_t> sequence_number;
  FindingKind kind;
  std::string message;
};

struct ChainVerificationReport {
  std::string system_id;
  std::size_t events_checked = 0;
  std::size_t checkpoints_checked = 0;
  std::vector<ChainFinding> findings;

  // No findings other than warnings.
  bool clean() const;
  std::size_t error_count() const;
  Json to_json() const;
};

// Expected predecessor of the first event in a verified range.
struct ChainAnchor {
  std::uint64_t last_sequence = 0;
  std::string last_hash = kGenesisHash;
};

// Recomputes every hash, checks previous_hash links and sequence continuity.
// Without an anchor the range must start at sequence 1 from the genesis hash.
ChainVerificationReport verify_chain(std::span<const DecisionEvent> events,
                                     const ChainAnchor& anchor = {});

// Same checks over stored NDJSON lines; adds parse_error and non_canonical
// findings (stored bytes must equal their own canonical form).
ChainVerificationReport verify_stored_lines(std::span<const std::string> lines,
                                            const ChainAnchor& anchor = {});

struct Checkpoint {
  std::uint64_t checkpoint_id = 0;  // 1-based per stream
  std::string system_id;
  std::uint64_t start_sequence = 0;
  std::uint64_t end_sequence = 0;
  std::string merkle_root;
  std::string previous_checkpoint_hash = kGenesisHash;
  std::string algorithm{kDefaultHashAlgorithm};

  std::uint64_t leaf_count() const { return end_sequence - start_sequence + 1; }
  Json to_json() const;
  static Checkpoint from_json(const Json& j);

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// SHA-256 of the checkpoint's canonical JSON form.
std::string checkpoint_hash(const Checkpoint& checkpoint);

// Leaves are the batch's current_hash values in sequence order. Throws
// Error{batch_gap} for an empty or non-contiguous batch, a range that does
// not follow `previous`, or an unsealed member.
Checkpoint build_checkpoint(std::string system_id, std::span<const DecisionEvent> batch,
                            const Checkpoint* previous = nullptr);

std::vector<std::string> checkpoint_leaves(std::span<const DecisionEvent> batch);

// Checks previous_checkpoint_hash links and range continuity.
std::vector<ChainFinding> verify_checkpoint_chain(std::span<const Checkpoint> checkpoints);

}  // namespace des
