#include <gtest/gtest.h>

#include "des/canonical.hpp"
#include "des/enrichment.hpp"
#include "support/test_support.hpp"

using namespace des;

namespace {

DecisionEvent sealed_target() {
  return testing_support::seal_all("svc", {testing_support::lightweight_draft("svc", 1)})[0];
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

TEST(Enrichment, LinksToSealedHash) {
  auto target = sealed_target();
  Json payload = {{"actual_outcome", "default"}, {"observed_at", "2026-09-01"}};
  auto rec = create_enrichment(target, "ground_truth", payload, "2026-09-02T00:00:00.000Z");
  EXPECT_EQ(rec.decision_id, *target.decision_id());
  EXPECT_EQ(rec.link_hash, sha256_hex(*target.current_hash() + canonicalize(payload)));
  EXPECT_EQ(rec.link_hash, compute_link_hash(*target.current_hash(), payload));
  EXPECT_TRUE(is_uuid(rec.enrichment_id));
  EXPECT_TRUE(verify_link(rec, target));
  EXPECT_EQ(EnrichmentRecord::from_json(rec.to_json()), rec);
}

TEST(Enrichment, DoesNotTouchTarget) {
  auto target = sealed_target();
  auto before = canonicalize(event_to_json(target));
  create_enrichment(target, "quality_update", {{"confidence_recalibrated", 0.7}}, "2026-09-02T00:00:00.000Z");
  EXPECT_EQ(canonicalize(event_to_json(target)), before);
}

TEST(Enrichment, Errors) {
  auto target = sealed_target();
  const std::string ts = "2026-09-02T00:00:00.000Z";
  EXPECT_EQ(code_of([&] { create_enrichment(testing_support::lightweight_draft("svc", 2), "ground_truth", Json::object(), ts); }),
            ErrorCode::target_unsealed);
  EXPECT_EQ(code_of([&] { create_enrichment(target, "opinion", Json::object(), ts); }), ErrorCode::enum_violation);
  EXPECT_NO_THROW(create_enrichment(target, "acme:audit_note", Json::object(), ts));
  EXPECT_EQ(code_of([&] { create_enrichment(target, "ground_truth", Json::object(), "yesterday"); }),
            ErrorCode::format_error);
  EXPECT_EQ(code_of([&] { create_enrichment(target, "ground_truth", Json::array(), ts); }), ErrorCode::format_error);
  EXPECT_EQ(code_of([&] { create_enrichment(target, "ground_truth", Json::object(), ts, "not-a-uuid"); }),
            ErrorCode::format_error);
}

TEST(Enrichment, IndependentSignature) {
  auto target = sealed_target();
  auto rec = create_enrichment(target, "ground_truth", {{"label", 1}}, "2026-09-02T00:00:00.000Z");
  EXPECT_EQ(code_of([&] { verify_enrichment_signature(rec, SigningKey::generate().public_key()); }),
            ErrorCode::signature_missing);
  SigningKey key = SigningKey::generate(SignatureAlgorithm::ecdsa_p256);
  sign_enrichment(rec, key, "labeler");
  EXPECT_TRUE(verify_enrichment_signature(rec, key.public_key()));
  rec.payload["label"] = 0;
  EXPECT_FALSE(verify_enrichment_signature(rec, key.public_key()));
}

TEST(Enrichment, ViewOrdersByCreationAndRejectsStale) {
  auto target = sealed_target();
  auto late = create_enrichment(target, "ground_truth", {{"n", 2}}, "2026-09-03T00:00:00.000Z");
  auto early = create_enrichment(target, "quality_update", {{"n", 1}}, "2026-09-01T00:00:00.000Z");
  std::vector<EnrichmentRecord> recs{late, early};
  auto view = resolve_view(target, recs);
  ASSERT_EQ(view.enrichments.size(), 2u);
  EXPECT_EQ(view.enrichments[0].kind, "quality_update");
  EXPECT_EQ(view.to_json()["enrichments"].size(), 2u);

  recs[0].payload["n"] = 3;
  EXPECT_EQ(code_of([&] { resolve_view(target, recs); }), ErrorCode::stale_enrichment);
  auto other = testing_support::seal_all("svc", {testing_support::lightweight_draft("svc", 7)})[0];
  std::vector<EnrichmentRecord> foreign{create_enrichment(other, "ground_truth", Json::object(), "2026-09-03T00:00:00.000Z")};
  EXPECT_EQ(code_of([&] { resolve_view(target, foreign); }), ErrorCode::stale_enrichment);
}
