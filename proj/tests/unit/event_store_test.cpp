#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <thread>

#include "des/canonical.hpp"
#include "des/enrichment.hpp"
#include "des/event_store.hpp"
#include "support/test_support.hpp"

namespace fs = std::filesystem;
using namespace des;
using testing_support::lightweight_draft;
using testing_support::TempDir;

namespace {

std::vector<fs::path> segment_files(const fs::path& stream_dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(stream_dir)) {
    if (e.path().filename().string().ends_with(".events.ndjson")) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<AppendResult> append_n(Ledger& ledger, const std::string& sid, std::size_t n, std::size_t from = 0) {
  std::vector<AppendResult> out;
  for (std::size_t i = from; i < from + n; ++i) out.push_back(ledger.append(lightweight_draft(sid, i)));
  return out;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return ErrorCode::usage_error;
}

}  // namespace

TEST(EventStore, AppendStoresCanonicalBytes) {
  TempDir dir;
  EventStore store(dir.path());
  Ledger ledger(store);
  auto results = append_n(ledger, "svc", 3);
  for (const auto& r : results) {
    auto bytes = store.lookup_bytes(*r.event.decision_id());
    ASSERT_TRUE(bytes);
    EXPECT_EQ(*bytes, canonicalize(event_to_json(r.event)));
    EXPECT_EQ(store.locate(*r.event.decision_id()), r.location);
    EXPECT_EQ(*store.lookup(*r.event.decision_id()), r.event);
  }
  EXPECT_EQ(store.event_count("svc"), 3u);
  EXPECT_EQ(store.stream_state("svc").last_hash, *results.back().event.current_hash());
  EXPECT_EQ(store.streams(), std::vector<std::string>{"svc"});
  EXPECT_FALSE(store.lookup("00000000-0000-4000-8000-000000000000"));
  EXPECT_TRUE(verify_store_stream(store, "svc").clean());
}

TEST(EventStore, ReopenRestoresState) {
  TempDir dir;
  std::string last;
  {
    EventStore store(dir.path());
    Ledger ledger(store);
    last = *append_n(ledger, "svc", 5).back().event.current_hash();
  }
  EventStore store(dir.path());
  EXPECT_EQ(store.stream_state("svc").last_sequence, 5u);
  EXPECT_EQ(store.stream_state("svc").last_hash, last);
  Ledger ledger(store);
  auto r = ledger.append(lightweight_draft("svc", 99));
  EXPECT_EQ(*r.event.sequence_number(), 6u);
  EXPECT_EQ(store.scan_stream("svc", 5).size(), 2u);
}

TEST(EventStore, AppendRecordGuards) {
  TempDir dir;
  EventStore store(dir.path());
  Ledger ledger(store);
  auto r = append_n(ledger, "svc", 2);
  EXPECT_EQ(code_of([&] { store.append_record(lightweight_draft("svc", 5)); }), ErrorCode::reject_unsealed);
  EXPECT_EQ(code_of([&] { store.append_record(r[1].event); }), ErrorCode::duplicate_sequence);
  auto again = testing_support::seal_all("svc", {lightweight_draft("svc", 0)});
  EXPECT_EQ(code_of([&] { store.append_record(again[0], "other"); }), ErrorCode::duplicate_decision);
}

TEST(EventStore, PartialTailIsTruncatedOnOpen) {
  TempDir dir;
  fs::path seg;
  std::uintmax_t good_size = 0;
  {
    EventStore store(dir.path());
    Ledger ledger(store);
    append_n(ledger, "svc", 3);
    seg = segment_files(dir / "svc").back();
    good_size = fs::file_size(seg);
  }
  std::ofstream(seg, std::ios::app | std::ios::binary) << R"({"decision_context":{"decis)";
  {
    StoreOptions ro;
    ro.read_only = true;
    EventStore store(dir.path(), ro);
    auto report = verify_store_stream(store, "svc");
    EXPECT_FALSE(report.clean());
    EXPECT_EQ(report.findings[0].kind, FindingKind::truncated_line);
    EXPECT_GT(fs::file_size(seg), good_size);
  }
  EventStore store(dir.path());
  EXPECT_EQ(fs::file_size(seg), good_size);
  EXPECT_EQ(store.event_count("svc"), 3u);
  EXPECT_TRUE(verify_store_stream(store, "svc").clean());
}

TEST(EventStore, FailedWriteLeavesNoPartialRecord) {
  TempDir dir;
  StoreOptions opts;
  opts.fault_after_bytes = 40;
  EventStore store(dir.path(), opts);
  Ledger ledger(store, LedgerOptions{0, std::nullopt});
  EXPECT_EQ(code_of([&] { ledger.append(lightweight_draft("svc", 0)); }), ErrorCode::io_error);
  EXPECT_FALSE(store.locate(*lightweight_draft("svc", 0).decision_id()));
  EXPECT_EQ(store.event_count("svc"), 0u);
  EXPECT_EQ(store.stream_state("svc").last_sequence, 0u);
  auto r = ledger.append(lightweight_draft("svc", 1));
  EXPECT_EQ(*r.event.sequence_number(), 1u);
  EXPECT_TRUE(verify_store_stream(store, "svc").clean());
  EventStore reopened(dir.path());
  EXPECT_EQ(reopened.event_count("svc"), 1u);
}

TEST(EventStore, MissingIndexIsRebuilt) {
  TempDir dir;
  std::string id;
  {
    EventStore store(dir.path());
    Ledger ledger(store);
    id = *append_n(ledger, "svc", 4)[2].event.decision_id();
  }
  for (const auto& e : fs::directory_iterator(dir / "svc")) {
    if (e.path().extension() == ".idx") fs::remove(e.path());
  }
  EventStore store(dir.path());
  EXPECT_TRUE(store.lookup(id));
  EXPECT_EQ(store.event_count("svc"), 4u);
}

TEST(EventStore, SegmentsRollOver) {
  TempDir dir;
  StoreOptions opts;
  opts.max_segment_bytes = 1500;
  std::vector<AppendResult> results;
  {
    EventStore store(dir.path(), opts);
    Ledger ledger(store);
    results = append_n(ledger, "svc", 20);
    EXPECT_GT(segment_files(dir / "svc").size(), 3u);
  }
  EventStore store(dir.path(), opts);
  for (const auto& r : results) EXPECT_EQ(*store.lookup(*r.event.decision_id()), r.event);
  EXPECT_TRUE(verify_store_stream(store, "svc").clean());
  EXPECT_EQ(store.scan_stream("svc").size(), 20u);
}

TEST(EventStore, StreamNamesAreEncoded) {
  for (std::string id : {"plain", "a/b", "50%", ".hidden", "ünï", ""}) {
    std::string enc = encode_stream_name(id);
    EXPECT_EQ(enc.find('/'), std::string::npos);
    EXPECT_NE(enc.front(), '.');
    EXPECT_EQ(decode_stream_name(enc), id);
  }
  TempDir dir;
  EventStore store(dir.path());
  Ledger ledger(store);
  ledger.append(lightweight_draft("team/a", 1));
  EXPECT_TRUE(fs::is_directory(dir / "team%2Fa"));
  EventStore reopened(dir.path());
  EXPECT_TRUE(reopened.has_stream("team/a"));
}

TEST(EventStore, ByteFlipIsDetected) {
  TempDir dir;
  {
    EventStore store(dir.path());
    Ledger ledger(store);
    append_n(ledger, "svc", 10);
  }
  auto seg = segment_files(dir / "svc").front();
  std::string content = read_file(seg);
  auto pos = content.find("rank_");
  content[pos + 5] = content[pos + 5] == '9' ? '8' : '9';
  std::ofstream(seg, std::ios::binary | std::ios::trunc) << content;
  EventStore store(dir.path());
  auto report = verify_store_stream(store, "svc");
  ASSERT_FALSE(report.clean());
  EXPECT_EQ(report.findings[0].kind, FindingKind::hash_mismatch);
  EXPECT_EQ(report.findings[0].index, 0u);
}

TEST(EventStore, CheckpointsAreStoredAndVerified) {
  TempDir dir;
  {
    EventStore store(dir.path());
    Ledger ledger(store, LedgerOptions{4, std::nullopt});
    auto results = append_n(ledger, "svc", 10);
    EXPECT_TRUE(results[3].checkpoint);
    EXPECT_FALSE(results[4].checkpoint);
    EXPECT_EQ(results[7].checkpoint->checkpoint_id, 2u);
    EXPECT_EQ(store.checkpoints("svc").size(), 2u);
    auto report = verify_store_stream(store, "svc");
    EXPECT_TRUE(report.clean());
    EXPECT_EQ(report.checkpoints_checked, 2u);
  }
  fs::path cp_file = dir / "svc" / "checkpoints.ndjson";
  std::string content = read_file(cp_file);
  auto pos = content.find("\"merkle_root\":\"") + 15;
  content[pos] = content[pos] == 'a' ? 'b' : 'a';
  std::ofstream(cp_file, std::ios::binary | std::ios::trunc) << content;
  EventStore store(dir.path());
  std::set<FindingKind> kinds;
  for (const auto& f : verify_store_stream(store, "svc").findings) kinds.insert(f.kind);
  EXPECT_TRUE(kinds.count(FindingKind::checkpoint_root_mismatch));
}

TEST(EventStore, EnrichmentsPersistBesideEvents) {
  TempDir dir;
  std::string id;
  std::string before;
  {
    EventStore store(dir.path());
    Ledger ledger(store);
    auto r = append_n(ledger, "svc", 3)[1];
    id = *r.event.decision_id();
    before = *store.lookup_bytes(id);
    store.append_enrichment(create_enrichment(r.event, "ground_truth", {{"label", "fraud"}}, "2026-06-01T00:00:00.000Z"));
    auto stale = create_enrichment(r.event, "ground_truth", {{"label", "ok"}}, "2026-06-01T00:00:00.000Z");
    stale.link_hash = std::string(64, 'f');
    EXPECT_EQ(code_of([&] { store.append_enrichment(stale); }), ErrorCode::stale_enrichment);
    auto orphan = create_enrichment(r.event, "ground_truth", Json::object(), "2026-06-01T00:00:00.000Z");
    orphan.decision_id = "00000000-0000-4000-8000-000000000000";
    EXPECT_EQ(code_of([&] { store.append_enrichment(orphan); }), ErrorCode::not_found);
  }
  EventStore store(dir.path());
  auto recs = store.enrichments_for(id);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].payload["label"], "fraud");
  EXPECT_EQ(*store.lookup_bytes(id), before);
  EXPECT_TRUE(verify_store_stream(store, "svc").clean());
}

TEST(EventStore, RetentionDropsLeadingExpiredSegments) {
  TempDir dir;
  StoreOptions opts;
  opts.max_segment_bytes = 1500;
  EventStore store(dir.path(), opts);
  Ledger ledger(store);
  std::vector<AppendResult> results;
  for (std::size_t i = 0; i < 12; ++i) results.push_back(ledger.append(lightweight_draft("svc", i, "P1D")));
  auto segments_before = segment_files(dir / "svc").size();
  ASSERT_GT(segments_before, 2u);

  TimePoint now = *parse_timestamp("2030-01-01T00:00:00.000Z");
  auto dry = store.enforce_retention(now, true);
  EXPECT_EQ(dry.deleted.size(), segments_before - 1);
  EXPECT_EQ(segment_files(dir / "svc").size(), segments_before);

  auto early = store.enforce_retention(*parse_timestamp("2026-01-01T00:00:00.000Z"));
  EXPECT_TRUE(early.deleted.empty());

  auto report = store.enforce_retention(now);
  EXPECT_EQ(report.deleted.size(), segments_before - 1);
  EXPECT_EQ(segment_files(dir / "svc").size(), 1u);
  EXPECT_FALSE(store.lookup(*results[0].event.decision_id()));
  EXPECT_TRUE(verify_store_stream(store, "svc").clean());
  auto r = ledger.append(lightweight_draft("svc", 50, "P1D"));
  EXPECT_EQ(*r.event.sequence_number(), 13u);

  EventStore reopened(dir.path(), opts);
  EXPECT_TRUE(verify_store_stream(reopened, "svc").clean());
}

TEST(EventStore, ReadOnlyRefusesWrites) {
  TempDir dir;
  {
    EventStore store(dir.path());
    Ledger ledger(store);
    append_n(ledger, "svc", 1);
  }
  StoreOptions ro;
  ro.read_only = true;
  EventStore store(dir.path(), ro);
  Ledger ledger(store);
  EXPECT_EQ(code_of([&] { ledger.append(lightweight_draft("svc", 5)); }), ErrorCode::io_error);
}

TEST(EventStore, ConcurrentWritersKeepChainsIntact) {
  TempDir dir;
  EventStore store(dir.path());
  Ledger ledger(store, LedgerOptions{16, std::nullopt});
  std::vector<std::thread> threads;
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&, t] {
      std::string sid = t < 4 ? "s" + std::to_string(t) : "shared";
      for (std::size_t i = 0; i < 40; ++i) ledger.append(lightweight_draft(sid, t * 1000 + i));
    });
  }
  for (auto& th : threads) th.join();
  for (int t = 0; t < 4; ++t) {
    EXPECT_EQ(store.event_count("s" + std::to_string(t)), 40u);
    EXPECT_TRUE(verify_store_stream(store, "s" + std::to_string(t)).clean());
  }
  EXPECT_EQ(store.event_count("shared"), 80u);
  auto report = verify_store_stream(store, "shared");
  EXPECT_TRUE(report.clean());
  EXPECT_EQ(report.checkpoints_checked, 5u);
}
