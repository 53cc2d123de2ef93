#pragma once

// Append-only NDJSON segment storage.
//
// Layout under the store root, one directory per stream (system_id,
// percent-encoded where it is not filename-safe):
//
//   <stream>/00000001.events.ndjson   canonical sealed events, LF-terminated
//   <stream>/00000001.events.idx      "<sequence> <offset> <length> <decision_id>" per event
//   <stream>/00000001.enrich.ndjson   enrichment records
//   <stream>/checkpoints.ndjson       Merkle checkpoints
//   <stream>/pruned.json              chain anchor left by retention pruning
//
// Segment files are the source of truth; index sidecars are rebuilt when
// they disagree with their segment. On open a partially written trailing
// line is truncated (read-only opens leave it in place for verify to
// report).
//
// Writes to one stream are serialized by a per-stream mutex; readers may
// run concurrently and only observe records whose write has completed.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "des/chain.hpp"
#include "des/enrichment.hpp"
#include "des/event_model.hpp"
#include "des/time.hpp"

namespace des {

enum class Durability {
  none,   // write(2) only; survives process crashes, not power loss
  fsync,  // fsync after every append
};

struct StoreOptions {
  std::size_t max_segment_bytes = 64u << 20;
  Durability durability = Durability::none;
  bool read_only = false;
  // Test hook: the next event append writes only this many bytes of its
  // line and then fails as if the process had died mid-write.
  std::optional<std::size_t> fault_after_bytes;
};

struct RecordLocation {
  std::string system_id;
  std::uint32_t segment = 0;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;  // excluding the LF

  friend bool operator==(const RecordLocation&, const RecordLocation&) = default;
};

// Raw content of one stream as it sits on disk, for verification.
struct StoredStream {
  std::string system_id;
  ChainAnchor anchor;              // from pruned.json, genesis otherwise
  std::vector<std::string> lines;  // complete lines in order, without LF
  std::vector<std::uint64_t> truncated_segments;  // segments ending mid-line
  std::vector<std::string> checkpoint_lines;
};

struct RetentionReport {
  std::vector<std::filesystem::path> deleted;
  std::vector<std::filesystem::path> retained;
  Json to_json() const;
};

// Stream directory name for a system_id and back.
std::string encode_stream_name(std::string_view system_id);
std::string decode_stream_name(std::string_view name);

class EventStore {
 public:
  // Creates the root unless read_only. Throws Error{io_error}.
  explicit EventStore(std::filesystem::path root, StoreOptions options = {});
  ~EventStore();
  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;

  const std::filesystem::path& root() const { return root_; }

  // Stores the canonical form of a sealed event in `stream` (default: the
  // event's system_id, else "default"). Throws Error{reject_unsealed},
  // Error{duplicate_sequence} or Error{duplicate_decision}.
  RecordLocation append_record(const DecisionEvent& sealed, std::string_view stream = {});

  // Events with sequence_number >= from_sequence, in sequence order.
  // Unknown stream yields nothing.
  std::vector<DecisionEvent> scan_stream(std::string_view system_id, std::uint64_t from_sequence = 1) const;
  // Streaming form; returning false from the callback stops the scan.
  void for_each_line(std::string_view system_id, std::uint64_t from_sequence,
                     const std::function<bool(std::uint64_t sequence, const std::string& line)>& fn) const;

  std::optional<DecisionEvent> lookup(std::string_view decision_id) const;
  std::optional<std::string> lookup_bytes(std::string_view decision_id) const;
  std::optional<RecordLocation> locate(std::string_view decision_id) const;

  std::vector<std::string> streams() const;
  bool has_stream(std::string_view system_id) const;
  // Chain tip of a stream, for sealing the next event.
  ChainStreamState stream_state(std::string_view system_id) const;
  std::size_t event_count(std::string_view system_id) const;

  // Appends next to the target's stream. Throws Error{not_found} for an
  // unknown decision_id and Error{stale_enrichment} when the link does not
  // verify against the stored event.
  void append_enrichment(const EnrichmentRecord& record);
  std::vector<EnrichmentRecord> enrichments_for(std::string_view decision_id) const;

  void append_checkpoint(const Checkpoint& checkpoint);
  std::vector<Checkpoint> checkpoints(std::string_view system_id) const;

  // Reads segment files directly, without consulting the in-memory index.
  StoredStream read_stored(std::string_view system_id) const;

  // Deletes closed event segments whose every event is past
  // event_timestamp + minimum_retention at `now`. Events without a
  // retention policy keep their segment. The active segment is never
  // deleted.
  RetentionReport enforce_retention(TimePoint now, bool dry_run = false);

 private:
  struct Segment;
  struct Stream;

  Stream& stream_for_write(const std::string& system_id);
  const Stream* find_stream(std::string_view system_id) const;
  void load_stream(const std::filesystem::path& dir);
  std::string read_at(const Stream& s, std::uint32_t segment, std::uint64_t offset, std::uint64_t length) const;

  std::filesystem::path root_;
  StoreOptions options_;
  mutable std::shared_mutex mu_;  // guards the maps below
  std::map<std::string, std::unique_ptr<Stream>, std::less<>> streams_;
  std::map<std::string, RecordLocation, std::less<>> by_decision_;
  std::map<std::string, std::vector<EnrichmentRecord>, std::less<>> enrichments_;
};

// Full stream verification over the stored bytes: chain checks, canonical
// form, truncated tails and checkpoints (links, ranges and Merkle roots
// recomputed from the stored current_hash values).
ChainVerificationReport verify_store_stream(const EventStore& store, std::string_view system_id);

struct LedgerOptions {
  // Emit a checkpoint every N events per stream; 0 disables.
  std::uint64_t checkpoint_interval = kDefaultCheckpointInterval;
  std::optional<SigningRequest> signing;
};

struct AppendResult {
  DecisionEvent event;
  RecordLocation location;
  std::optional<Checkpoint> checkpoint;  // emitted by this append
};

// Seal-and-append pipeline over a store: per-stream serialization, sealing
// against the stored chain tip, optional checkpointing.
class Ledger {
 public:
  explicit Ledger(EventStore& store, LedgerOptions options = {});

  // Stream defaults to the draft's system_id, else "default". Throws
  // RejectedInvalid, Error{stream_mismatch} and store errors; nothing is
  // written unless sealing succeeded.
  AppendResult append(const DecisionEvent& draft, std::string_view stream = {});

  EventStore& store() { return store_; }

 private:
  std::mutex& stream_mutex(const std::string& system_id);

  EventStore& store_;
  LedgerOptions options_;
  std::mutex map_mu_;
  std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> stream_mu_;
};

std::string default_stream_for(const DecisionEvent& event, std::string_view requested = {});

}  // namespace des
