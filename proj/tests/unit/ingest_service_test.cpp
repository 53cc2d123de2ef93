#include <gtest/gtest.h>

#include <httplib.h>

#include <fstream>
#include <set>

#include "des/canonical.hpp"
#include "des/ingest_service.hpp"
#include "support/test_support.hpp"

using namespace des;
using testing_support::lightweight_draft;
using testing_support::TempDir;

namespace {

IngestConfig config_for(const TempDir& dir) {
  IngestConfig c;
  c.store_path = dir / "store";
  c.port = 0;
  return c;
}

std::string body_of(const DecisionEvent& e) { return canonicalize(event_to_json(e)); }

std::set<std::string> violated_rules(const HttpResult& r) {
  std::set<std::string> out;
  const Json body = parse_json(r.body);
  for (const auto& v : body.at("violations")) out.insert(v.at("rule_id").get<std::string>());
  return out;
}

}  // namespace

TEST(IngestService, AcceptedEventIsSealedAndStored) {
  TempDir dir;
  IngestService svc(config_for(dir));
  auto r = svc.handle_ingest(body_of(lightweight_draft("svc", 0)));
  ASSERT_EQ(r.status, 201) << r.body;
  Json out = parse_json(r.body);
  EXPECT_EQ(out["sequence_number"], 1);
  EXPECT_EQ(out["system_id"], "svc");
  EXPECT_EQ(out["evidence_tier"], "lightweight");

  auto got = svc.handle_get_event(out["decision_id"].get<std::string>());
  ASSERT_EQ(got.status, 200);
  EXPECT_EQ(got.body, *svc.store().lookup_bytes(out["decision_id"].get<std::string>()));
  EXPECT_EQ(parse_json(got.body)["temporal_metadata"]["hash_chain"]["current_hash"], out["current_hash"]);

  auto second = svc.handle_ingest(body_of(lightweight_draft("svc", 1)));
  ASSERT_EQ(second.status, 201);
  EXPECT_EQ(parse_json(second.body)["sequence_number"], 2);

  auto verify = svc.handle_verify("svc");
  ASSERT_EQ(verify.status, 200);
  EXPECT_TRUE(parse_json(verify.body)["clean"].get<bool>()) << verify.body;
}

TEST(IngestService, InvalidDraftIsRejectedWithRuleIds) {
  TempDir dir;
  IngestService svc(config_for(dir));
  auto draft = testing_support::load_fixture_json("validation/fail-R4-override-missing-timestamp.json");
  auto r = svc.handle_ingest(draft.dump());
  ASSERT_EQ(r.status, 422) << r.body;
  EXPECT_TRUE(violated_rules(r).count("R4")) << r.body;
  EXPECT_FALSE(svc.store().has_stream("credit-engine"));
}

TEST(IngestService, ReplayedDecisionConflicts) {
  TempDir dir;
  IngestService svc(config_for(dir));
  std::string body = body_of(lightweight_draft("svc", 0));
  ASSERT_EQ(svc.handle_ingest(body).status, 201);
  auto again = svc.handle_ingest(body);
  EXPECT_EQ(again.status, 409) << again.body;
  EXPECT_EQ(svc.store().event_count("svc"), 1u);
}

TEST(IngestService, ClientCannotSupplySealFields) {
  TempDir dir;
  IngestService svc(config_for(dir));
  Json doc = event_to_json(lightweight_draft("svc", 0));
  doc["temporal_metadata"]["sequence_number"] = 7;
  auto r = svc.handle_ingest(doc.dump());
  EXPECT_EQ(r.status, 422) << r.body;
  EXPECT_FALSE(svc.store().has_stream("svc"));
}

TEST(IngestService, MalformedBodyIs400WithOffset) {
  TempDir dir;
  IngestService svc(config_for(dir));
  auto r = svc.handle_ingest(R"({"schema_version": "0.3.0",)");
  ASSERT_EQ(r.status, 400);
  Json err = parse_json(r.body);
  EXPECT_EQ(err["error"], "SyntaxError");
  EXPECT_TRUE(err.contains("byte_offset"));

  auto dup = svc.handle_ingest(R"({"a":1,"a":2})");
  EXPECT_EQ(dup.status, 400);
}

TEST(IngestService, StreamOverrideMustMatchEnvironment) {
  TempDir dir;
  IngestService svc(config_for(dir));
  auto r = svc.handle_ingest(body_of(lightweight_draft("svc", 0)), "elsewhere");
  EXPECT_EQ(r.status, 422) << r.body;
  EXPECT_EQ(parse_json(r.body)["error"], "StreamMismatch");
}

TEST(IngestService, UnknownIdsAre404) {
  TempDir dir;
  IngestService svc(config_for(dir));
  EXPECT_EQ(svc.handle_get_event("00000000-0000-4000-8000-000000000000").status, 404);
  EXPECT_EQ(svc.handle_get_enrichments("00000000-0000-4000-8000-000000000000").status, 404);
  EXPECT_EQ(svc.handle_verify("nope").status, 404);
  auto enr = svc.handle_post_enrichment(
      R"({"decision_id":"00000000-0000-4000-8000-000000000000","kind":"ground_truth","payload":{}})");
  EXPECT_EQ(enr.status, 404);
}

TEST(IngestService, EnrichmentLeavesEventBytesAlone) {
  TempDir dir;
  IngestService svc(config_for(dir));
  auto r = parse_json(svc.handle_ingest(body_of(lightweight_draft("svc", 0))).body);
  std::string id = r["decision_id"].get<std::string>();
  std::string before = svc.handle_get_event(id).body;

  Json req = {{"decision_id", id},
              {"kind", "ground_truth"},
              {"payload", {{"observed", "clicked"}}},
              {"created_at", "2026-05-04T10:15:31.000Z"}};
  auto enr = svc.handle_post_enrichment(req.dump());
  ASSERT_EQ(enr.status, 201) << enr.body;
  Json rec = parse_json(enr.body);
  EXPECT_EQ(rec["decision_id"], id);
  EXPECT_EQ(rec["link_hash"].get<std::string>().size(), 64u);

  EXPECT_EQ(svc.handle_get_event(id).body, before);
  auto list = parse_json(svc.handle_get_enrichments(id).body);
  ASSERT_TRUE(list.is_array());
  EXPECT_EQ(list.size(), 1u);
  EXPECT_TRUE(parse_json(svc.handle_verify("svc").body)["clean"].get<bool>());

  EXPECT_EQ(svc.handle_post_enrichment(R"({"kind":"ground_truth"})").status, 400);
}

TEST(IngestService, WriteFaultLeavesNoPartialRecord) {
  TempDir dir;
  StoreOptions so;
  so.fault_after_bytes = 40;
  IngestService svc(config_for(dir), so);
  auto draft = lightweight_draft("svc", 0);
  auto failed = svc.handle_ingest(body_of(draft));
  EXPECT_EQ(failed.status, 500) << failed.body;
  EXPECT_EQ(svc.handle_get_event(*draft.decision_id()).status, 404);
  EXPECT_EQ(svc.store().event_count("svc"), 0u);

  auto retry = svc.handle_ingest(body_of(draft));
  ASSERT_EQ(retry.status, 201) << retry.body;
  EXPECT_EQ(parse_json(retry.body)["sequence_number"], 1);
  EXPECT_TRUE(parse_json(svc.handle_verify("svc").body)["clean"].get<bool>());
}

TEST(IngestService, TierPolicyFillsUndeclaredTier) {
  TempDir dir;
  auto policy = dir / "policy.json";
  {
    std::ofstream(policy) << R"({"default_tier":"lightweight"})";
  }
  IngestConfig c = config_for(dir);
  c.tier_policy_path = policy;
  IngestService svc(c);
  Json doc = event_to_json(lightweight_draft("svc", 0));
  doc["temporal_metadata"].erase("evidence_tier");
  auto r = svc.handle_ingest(doc.dump());
  ASSERT_EQ(r.status, 201) << r.body;
  EXPECT_EQ(parse_json(r.body)["evidence_tier"], "lightweight");
}

TEST(IngestService, HttpRoundTrip) {
  TempDir dir;
  IngestService svc(config_for(dir));
  int port = svc.start();
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);

  auto draft = lightweight_draft("svc", 3);
  auto post = client.Post("/v1/events", body_of(draft), "application/json");
  ASSERT_TRUE(post);
  ASSERT_EQ(post->status, 201) << post->body;

  auto get = client.Get("/v1/events/" + *draft.decision_id());
  ASSERT_TRUE(get);
  EXPECT_EQ(get->status, 200);
  EXPECT_EQ(get->body, *svc.store().lookup_bytes(*draft.decision_id()));

  auto verify = client.Get("/v1/streams/svc/verify");
  ASSERT_TRUE(verify);
  EXPECT_EQ(verify->status, 200);
  EXPECT_TRUE(parse_json(verify->body)["clean"].get<bool>());

  auto bad = client.Post("/v1/events", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  svc.stop();
}
