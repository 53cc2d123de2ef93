#include <gtest/gtest.h>

#include <fstream>

#include "des/canonical.hpp"
#include "des/event_store.hpp"
#include "support/test_support.hpp"

using namespace des;
using testing_support::fixture;
using testing_support::lightweight_draft;
using testing_support::run_cli;
using testing_support::TempDir;

namespace {

std::string write_drafts(const TempDir& dir, const std::string& sid, std::size_t n) {
  auto path = dir / (sid + "-drafts.ndjson");
  std::ofstream out(path);
  for (std::size_t i = 0; i < n; ++i) out << canonicalize(event_to_json(lightweight_draft(sid, i))) << "\n";
  return path.string();
}

std::filesystem::path only_segment(const std::filesystem::path& root) {
  std::filesystem::path seg;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.path().filename().string().ends_with(".events.ndjson")) seg = e.path();
  }
  return seg;
}

}  // namespace

TEST(Cli, ValidateExitCodes) {
  auto ok = run_cli({"validate", fixture("validation/pass-R4-override-complete.json").string()});
  EXPECT_EQ(ok.exit_code, 0) << ok.output;

  auto bad = run_cli({"validate", "--stage", "draft", fixture("validation/fail-R6-confidence-out-of-range.json").string()});
  EXPECT_EQ(bad.exit_code, 1) << bad.output;
  EXPECT_NE(bad.output.find("R6"), std::string::npos) << bad.output;

  auto usage = run_cli({"validate", "--stage", "sometimes", "x.json"});
  EXPECT_EQ(usage.exit_code, 2) << usage.output;
  EXPECT_EQ(run_cli({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(run_cli({"--help"}).exit_code, 0);
}

TEST(Cli, ValidateJsonReportsRuleIds) {
  auto r = run_cli({"validate", "--json", fixture("validation/fail-R3-human-decision-without-actor.json").string()});
  EXPECT_EQ(r.exit_code, 1);
  Json j = parse_json(r.output);
  EXPECT_EQ(j["invalid"], 1);
  EXPECT_EQ(j["results"][0]["report"]["violations"][0]["rule_id"], "R3") << r.output;
}

TEST(Cli, SealThenVerifyThenTamper) {
  TempDir dir;
  auto store = (dir / "store").string();
  auto drafts = write_drafts(dir, "cli-svc", 6);

  auto seal = run_cli({"seal", drafts, "--store", store, "--checkpoint-interval", "4"});
  ASSERT_EQ(seal.exit_code, 0) << seal.output;
  {
    EventStore es(store);
    EXPECT_EQ(es.event_count("cli-svc"), 6u);
    EXPECT_EQ(es.checkpoints("cli-svc").size(), 1u);
  }

  auto verify = run_cli({"verify", "--store", store});
  EXPECT_EQ(verify.exit_code, 0) << verify.output;

  auto again = run_cli({"seal", drafts, "--store", store});
  EXPECT_EQ(again.exit_code, 1) << again.output;

  auto seg = only_segment(store);
  ASSERT_FALSE(seg.empty());
  std::string bytes = read_file(seg);
  auto pos = bytes.find("rank_2");
  ASSERT_NE(pos, std::string::npos);
  bytes[pos + 5] = '9';
  std::ofstream(seg, std::ios::binary | std::ios::trunc) << bytes;

  auto tampered = run_cli({"verify", "--store", store, "--json"});
  EXPECT_EQ(tampered.exit_code, 1) << tampered.output;
  EXPECT_NE(tampered.output.find("hash_mismatch"), std::string::npos) << tampered.output;

  auto standalone = run_cli({"verify", seg.string()});
  EXPECT_EQ(standalone.exit_code, 1) << standalone.output;
}

TEST(Cli, SignedSealAndReport) {
  TempDir dir;
  auto store = (dir / "store").string();
  auto key = (dir / "key.pem").string();
  auto pub = (dir / "pub.pem").string();
  auto keygen = run_cli({"keygen", "--out", key, "--public-out", pub});
  ASSERT_EQ(keygen.exit_code, 0) << keygen.output;
  EXPECT_NE(read_file(key).find("PRIVATE KEY"), std::string::npos);

  auto seal = run_cli({"seal", write_drafts(dir, "signed", 3), "--store", store, "--key", key});
  ASSERT_EQ(seal.exit_code, 0) << seal.output;

  auto report = run_cli({"report", "--profile", "nist-au", "--store", store, "--verify-key", pub, "--json"});
  EXPECT_EQ(report.exit_code, 0) << report.output;
  auto j = parse_json(report.output);
  EXPECT_EQ(j["overall"], "satisfied");
  EXPECT_EQ(j["streams"][0]["signed_events"], 3);

  auto gdpr = run_cli({"report", "--profile", "gdpr-logic", "--store", store});
  EXPECT_EQ(gdpr.exit_code, 1) << gdpr.output;
  EXPECT_NE(gdpr.output.find("insufficient"), std::string::npos);

  EXPECT_EQ(run_cli({"report", "--profile", "sox-404", "--store", store}).exit_code, 2);
}

TEST(Cli, EnrichAndList) {
  TempDir dir;
  auto store = (dir / "store").string();
  ASSERT_EQ(run_cli({"seal", write_drafts(dir, "svc", 2), "--store", store}).exit_code, 0);
  std::string id = *lightweight_draft("svc", 1).decision_id();
  auto before = read_file(only_segment(store));

  auto enrich = run_cli({"enrich", id, "--kind", "ground_truth", "--payload", R"({"label":"relevant"})",
                         "--created-at", "2026-05-04T10:15:31.000Z", "--store", store});
  ASSERT_EQ(enrich.exit_code, 0) << enrich.output;
  EXPECT_EQ(read_file(only_segment(store)), before);

  auto list = run_cli({"enrich", id, "--list", "--store", store, "--json"});
  EXPECT_EQ(list.exit_code, 0) << list.output;
  EXPECT_NE(list.output.find("relevant"), std::string::npos);

  auto missing = run_cli({"enrich", "00000000-0000-4000-8000-000000000000", "--kind", "ground_truth", "--payload",
                          "{}", "--store", store});
  EXPECT_EQ(missing.exit_code, 1) << missing.output;
}

TEST(Cli, ConvertOpaToDraftsAndSeal) {
  TempDir dir;
  auto log = fixture("opa/decision_log.ndjson").string();
  auto drafts = run_cli({"convert-opa", log, "--out", (dir / "drafts.ndjson").string()});
  ASSERT_EQ(drafts.exit_code, 0) << drafts.output;
  std::size_t lines = 0;
  std::ifstream in(dir / "drafts.ndjson");
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) ++lines;
  }
  EXPECT_EQ(lines, 5u);

  auto store = (dir / "store").string();
  auto sealed = run_cli({"convert-opa", log, "--seal", "--store", store, "--system-id", "opa-gw"});
  ASSERT_EQ(sealed.exit_code, 0) << sealed.output;
  EXPECT_EQ(run_cli({"verify", "--store", store, "--stream", "opa-gw"}).exit_code, 0);
}

TEST(Cli, RetentionDryRunKeepsFiles) {
  TempDir dir;
  auto store = (dir / "store").string();
  ASSERT_EQ(run_cli({"seal", write_drafts(dir, "svc", 2), "--store", store}).exit_code, 0);
  auto seg = only_segment(store);
  auto r = run_cli({"retention", "--store", store, "--now", "2030-01-01T00:00:00.000Z", "--dry-run"});
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_TRUE(std::filesystem::exists(seg));
}
