#include "des/chain.hpp"

#include "des/canonical.hpp"
#include "des/merkle.hpp"
#include "des/sealing.hpp"
#include "des/time.hpp"

namespace des {

RejectedInvalid::RejectedInvalid(ValidationReport report)
    : Error(ErrorCode::rejected_invalid,
            report.violations.empty()
                ? std::string("draft rejected")
                : "draft rejected: " + report.violations.front().rule_id + " " +
                      report.violations.front().path + ": " + report.violations.front().message),
      report_(std::move(report)) {}

SealResult seal_and_append(const ChainStreamState& state, const DecisionEvent& draft,
                           const std::optional<SigningRequest>& signing) {
  if (const std::string* sid = draft.system_id(); sid && *sid != state.system_id) {
    throw Error(ErrorCode::stream_mismatch,
                "draft belongs to stream '" + *sid + "', not '" + state.system_id + "'",
                "decision_context.environment.system_id");
  }
  ValidateOptions opts;
  opts.stage = Stage::draft;
  auto report = validate(draft, opts);
  if (!report.valid) throw RejectedInvalid(std::move(report));

  SealResult result{draft, state};
  DecisionEvent& e = result.event;
  auto& tm = *e.temporal_metadata;  // R1 guarantees presence
  tm.sequence_number = state.last_sequence + 1;
  if (!tm.hash_chain) tm.hash_chain.emplace();
  tm.hash_chain->previous_hash = state.last_hash;
  if (!tm.hash_chain->algorithm) tm.hash_chain->algorithm = std::string(kDefaultHashAlgorithm);

  if (signing && signing->key) {
    tm.digital_signature = sign_event(e, *signing->key, signing->signer_id, signing->certificate_ref);
  }
  tm.hash_chain->current_hash = compute_event_hash(e).hex;

  result.state.last_sequence = *tm.sequence_number;
  result.state.last_hash = *tm.hash_chain->current_hash;
  return result;
}

std::string_view to_string(FindingKind kind) {
  switch (kind) {
    case FindingKind::hash_mismatch: return "hash_mismatch";
    case FindingKind::link_mismatch: return "link_mismatch";
    case FindingKind::sequence_gap: return "sequence_gap";
    case FindingKind::sequence_duplicate: return "sequence_duplicate";
    case FindingKind::sequence_regression: return "sequence_regression";
    case FindingKind::unsealed: return "unsealed";
    case FindingKind::timestamp_regression: return "timestamp_regression";
    case FindingKind::parse_error: return "parse_error";
    case FindingKind::non_canonical: return "non_canonical";
    case FindingKind::truncated_line: return "truncated_line";
    case FindingKind::checkpoint_root_mismatch: return "checkpoint_root_mismatch";
    case FindingKind::checkpoint_link_mismatch: return "checkpoint_link_mismatch";
    case FindingKind::checkpoint_range_mismatch: return "checkpoint_range_mismatch";
  }
  return "unknown";
}

bool is_warning(FindingKind kind) { return kind == FindingKind::timestamp_regression; }

bool ChainVerificationReport::clean() const { return error_count() == 0; }

std::size_t ChainVerificationReport::error_count() const {
  std::size_t n = 0;
  for (const auto& f : findings) n += is_warning(f.kind) ? 0 : 1;
  return n;
}

Json ChainVerificationReport::to_json() const {
  Json list = Json::array();
  for (const auto& f : findings) {
    Json j = {{"index", f.index},
              {"kind", std::string(to_string(f.kind))},
              {"severity", is_warning(f.kind) ? "warning" : "error"},
              {"message", f.message}};
    if (f.sequence_number) j["sequence_number"] = *f.sequence_number;
    list.push_back(std::move(j));
  }
  return {{"system_id", system_id},
          {"events_checked", events_checked},
          {"checkpoints_checked", checkpoints_checked},
          {"clean", clean()},
          {"findings", std::move(list)}};
}

namespace {

// Walks a sequence of (possibly unreadable) events, tracking the expected
// predecessor. An unreadable entry breaks the link expectations for its
// successor, which is then only checked for sequence continuity.
class ChainWalker {
 public:
  ChainWalker(ChainVerificationReport& report, const ChainAnchor& anchor)
      : report_(report), prev_seq_(anchor.last_sequence), prev_hash_(anchor.last_hash) {}

  void unreadable(std::size_t index) {
    prev_hash_.reset();
    prev_seq_known_ = false;
    prev_ts_.reset();
    ++report_.events_checked;
    (void)index;
  }

  // `hash_ok` carries a check already made against the stored bytes.
  void visit(std::size_t index, const DecisionEvent& e, std::optional<bool> hash_ok = std::nullopt) {
    ++report_.events_checked;
    auto seq = e.sequence_number();
    auto add = [&](FindingKind kind, std::string msg) {
      report_.findings.push_back({index, seq, kind, std::move(msg)});
    };

    if (!e.is_sealed()) {
      add(FindingKind::unsealed, "event has no current_hash");
    } else if (!(hash_ok ? *hash_ok : hash_matches(e))) {
      add(FindingKind::hash_mismatch, "recomputed hash differs from stored current_hash");
    }

    bool contiguous = false;
    if (!seq) {
      add(FindingKind::unsealed, "event has no sequence_number");
    } else if (prev_seq_known_) {
      if (*seq == prev_seq_ + 1) {
        contiguous = true;
      } else if (*seq == prev_seq_) {
        add(FindingKind::sequence_duplicate, "sequence " + std::to_string(*seq) + " repeated");
      } else if (*seq < prev_seq_) {
        add(FindingKind::sequence_regression, "sequence " + std::to_string(*seq) + " follows " +
                                                  std::to_string(prev_seq_));
      } else {
        add(FindingKind::sequence_gap, "sequence gap between " + std::to_string(prev_seq_) +
                                           " and " + std::to_string(*seq));
      }
    }

    if (contiguous && prev_hash_) {
      const std::string* link = e.previous_hash();
      if (!link || *link != *prev_hash_) {
        add(FindingKind::link_mismatch, "previous_hash does not match predecessor's current_hash");
      }
    }

    std::optional<TimePoint> ts;
    if (e.temporal_metadata && e.temporal_metadata->event_timestamp) {
      ts = parse_timestamp(*e.temporal_metadata->event_timestamp);
    }
    if (ts && prev_ts_ && *ts < *prev_ts_) {
      add(FindingKind::timestamp_regression, "event_timestamp earlier than predecessor's");
    }

    if (seq) {
      prev_seq_ = *seq;
      prev_seq_known_ = true;
    } else {
      prev_seq_known_ = false;
    }
    if (const std::string* h = e.current_hash()) {
      prev_hash_ = *h;
    } else {
      prev_hash_.reset();
    }
    if (ts) prev_ts_ = ts;
  }

 private:
  ChainVerificationReport& report_;
  std::uint64_t prev_seq_;
  bool prev_seq_known_ = true;
  std::optional<std::string> prev_hash_;
  std::optional<TimePoint> prev_ts_;
};

// Hash check over a parsed stored line, consumed in the process. Same
// preconditions as compute_event_hash, without re-serialising the event.
bool stored_hash_matches(const DecisionEvent& e, Json& doc) {
  const std::string* stored = e.current_hash();
  if (!stored || !e.previous_hash() || !e.sequence_number()) return false;
  const auto& chain = *e.temporal_metadata->hash_chain;
  if (chain.algorithm && *chain.algorithm != kDefaultHashAlgorithm) return false;
  doc["temporal_metadata"]["hash_chain"].erase("current_hash");
  try {
    return sha256_hex(canonicalize(doc)) == *stored;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

ChainVerificationReport verify_chain(std::span<const DecisionEvent> events, const ChainAnchor& anchor) {
  ChainVerificationReport report;
  if (!events.empty() && events.front().system_id()) report.system_id = *events.front().system_id();
  ChainWalker walker(report, anchor);
  for (std::size_t i = 0; i < events.size(); ++i) walker.visit(i, events[i]);
  return report;
}

ChainVerificationReport verify_stored_lines(std::span<const std::string> lines,
                                            const ChainAnchor& anchor) {
  ChainVerificationReport report;
  ChainWalker walker(report, anchor);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    Json doc;
    try {
      // Nulls are rejected by event_from_json. Duplicate keys need no
      // separate pass: such a line never equals its canonical form and is
      // reported as non_canonical below.
      doc = parse_json(line, ParseOptions{false, false});
    } catch (const Error& e) {
      report.findings.push_back({i, std::nullopt, FindingKind::parse_error, e.what()});
      walker.unreadable(i);
      continue;
    }
    DecisionEvent event;
    try {
      event = event_from_json(doc);
    } catch (const Error& e) {
      report.findings.push_back({i, std::nullopt, FindingKind::parse_error, e.what()});
      walker.unreadable(i);
      continue;
    }
    std::string canonical;
    try {
      canonical = canonicalize(doc);
    } catch (const Error& e) {
      canonical.clear();
    }
    if (canonical != line) {
      report.findings.push_back({i, event.sequence_number(), FindingKind::non_canonical,
                                 "stored bytes are not the canonical form of the event"});
    }
    const bool hash_ok = event.is_sealed() && stored_hash_matches(event, doc);
    walker.visit(i, event, hash_ok);
  }
  return report;
}

// ---- checkpoints ----------------------------------------------------------

Json Checkpoint::to_json() const {
  return {{"checkpoint_id", checkpoint_id},
          {"system_id", system_id},
          {"start_sequence", start_sequence},
          {"end_sequence", end_sequence},
          {"merkle_root", merkle_root},
          {"previous_checkpoint_hash", previous_checkpoint_hash},
          {"algorithm", algorithm}};
}

Checkpoint Checkpoint::from_json(const Json& j) {
  Checkpoint c;
  try {
    c.checkpoint_id = j.at("checkpoint_id").get<std::uint64_t>();
    c.system_id = j.at("system_id").get<std::string>();
    c.start_sequence = j.at("start_sequence").get<std::uint64_t>();
    c.end_sequence = j.at("end_sequence").get<std::uint64_t>();
    c.merkle_root = j.at("merkle_root").get<std::string>();
    c.previous_checkpoint_hash = j.at("previous_checkpoint_hash").get<std::string>();
    c.algorithm = j.at("algorithm").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::format_error, std::string("malformed checkpoint: ") + e.what());
  }
  return c;
}

std::string checkpoint_hash(const Checkpoint& checkpoint) {
  return sha256_hex(canonicalize(checkpoint.to_json()));
}

std::vector<std::string> checkpoint_leaves(std::span<const DecisionEvent> batch) {
  std::vector<std::string> leaves;
  leaves.reserve(batch.size());
  for (const auto& e : batch) {
    if (!e.current_hash()) throw Error(ErrorCode::batch_gap, "checkpoint batch contains an unsealed event");
    leaves.push_back(*e.current_hash());
  }
  return leaves;
}

Checkpoint build_checkpoint(std::string system_id, std::span<const DecisionEvent> batch,
                            const Checkpoint* previous) {
  if (batch.empty()) throw Error(ErrorCode::batch_gap, "checkpoint batch is empty");
  std::uint64_t expected = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto seq = batch[i].sequence_number();
    if (!seq) throw Error(ErrorCode::batch_gap, "checkpoint batch contains an unsealed event");
    if (i > 0 && *seq != expected) {
      throw Error(ErrorCode::batch_gap, "checkpoint batch is not contiguous at sequence " +
                                            std::to_string(expected));
    }
    expected = *seq + 1;
  }

  Checkpoint cp;
  cp.system_id = std::move(system_id);
  cp.start_sequence = *batch.front().sequence_number();
  cp.end_sequence = *batch.back().sequence_number();
  if (previous) {
    if (cp.start_sequence != previous->end_sequence + 1) {
      throw Error(ErrorCode::batch_gap, "checkpoint batch does not follow the previous checkpoint");
    }
    cp.checkpoint_id = previous->checkpoint_id + 1;
    cp.previous_checkpoint_hash = checkpoint_hash(*previous);
  } else {
    cp.checkpoint_id = 1;
  }
  auto leaves = checkpoint_leaves(batch);
  cp.merkle_root = merkle_root(leaves);
  return cp;
}

std::vector<ChainFinding> verify_checkpoint_chain(std::span<const Checkpoint> checkpoints) {
  std::vector<ChainFinding> findings;
  std::string prev_hash = kGenesisHash;
  std::uint64_t prev_end = 0;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    const auto& cp = checkpoints[i];
    if (cp.previous_checkpoint_hash != prev_hash) {
      findings.push_back({i, cp.start_sequence, FindingKind::checkpoint_link_mismatch,
                          "checkpoint " + std::to_string(cp.checkpoint_id) +
                              " does not link to its predecessor"});
    }
    if (cp.end_sequence < cp.start_sequence || (i == 0 ? cp.start_sequence < 1
                                                       : cp.start_sequence != prev_end + 1)) {
      findings.push_back({i, cp.start_sequence, FindingKind::checkpoint_range_mismatch,
                          "checkpoint " + std::to_string(cp.checkpoint_id) +
                              " range is not contiguous with its predecessor"});
    }
    prev_hash = checkpoint_hash(cp);
    prev_end = cp.end_sequence;
  }
  return findings;
}

}  // namespace des
