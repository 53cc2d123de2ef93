#include <gtest/gtest.h>

#include "des/chain.hpp"
#include "des/crypto.hpp"
#include "des/opa_adapter.hpp"
#include "des/validator.hpp"
#include "support/test_support.hpp"

using namespace des;

namespace {

std::string sample_log() { return read_file(testing_support::fixture("opa/decision_log.ndjson")); }

Json first_entry() { return parse_opa_log(sample_log()).at(0); }

}  // namespace

TEST(Opa, ConvertsEverySampleEntry) {
  auto outcomes = convert_opa_log(sample_log());
  ASSERT_EQ(outcomes.size(), 5u);
  for (const auto& o : outcomes) {
    ASSERT_TRUE(o.draft) << o.error;
    EXPECT_EQ(o.draft->tier(), EvidenceTier::sampled);
    EXPECT_EQ(*o.draft->logic_type(), "policy_evaluation");
  }
}

TEST(Opa, MapsCoreFields) {
  Json entry = first_entry();
  DecisionEvent e = convert_opa_decision(entry);
  EXPECT_EQ(*e.decision_id(), entry["decision_id"]);
  const auto& pe = *e.decision_logic->policy_evaluation;
  EXPECT_EQ(pe.policy_id, "http/payments/authz/allow");
  EXPECT_EQ(pe.policy_engine, "OPA");
  EXPECT_EQ(pe.policy_version, "rev-2026-05-01.3");
  EXPECT_EQ(*pe.evaluation_result, Json(true));
  EXPECT_EQ(*e.decision_logic->output, Json(true));
  EXPECT_EQ(e.temporal_metadata->event_timestamp, "2026-05-04T09:12:44.123Z");
  EXPECT_EQ(*e.system_id(), "opa");
  ASSERT_EQ(e.decision_context->inputs->size(), 5u);
  EXPECT_EQ((*e.decision_context->inputs)[2].input_id, "user");
  EXPECT_EQ(*(*e.decision_context->inputs)[2].input_value, Json("alice"));
  EXPECT_TRUE(e.extensions.contains("opa:labels"));
  EXPECT_TRUE(e.extensions.contains("opa:metrics"));
}

TEST(Opa, PolicyVersionFromLabels) {
  auto entries = parse_opa_log(sample_log());
  DecisionEvent e = convert_opa_decision(entries.at(2));
  EXPECT_EQ(e.decision_logic->policy_evaluation->policy_version, "3.4.0");
  EXPECT_EQ(*e.decision_logic->output, entries.at(2)["result"]);
}

TEST(Opa, SensitiveInputsAreDigested) {
  OpaConversionConfig cfg;
  cfg.sensitive_input_keys = {"user"};
  cfg.deployment_key = "k-2026";
  DecisionEvent e = convert_opa_decision(first_entry(), cfg);
  EXPECT_EQ(*(*e.decision_context->inputs)[2].input_value, Json(hash_sensitive_value(Json("alice"), "k-2026")));
  EXPECT_EQ(*(*e.decision_context->inputs)[0].input_value, Json("POST"));
}

TEST(Opa, RejectsNullsAndBadIds) {
  Json entry = first_entry();
  entry["input"]["user"] = nullptr;
  try {
    convert_opa_decision(entry);
    FAIL();
  } catch (const ConversionError& e) {
    EXPECT_EQ(e.code(), ErrorCode::conversion_error);
    EXPECT_EQ(e.path(), "input.user");
  }
  entry = first_entry();
  entry["decision_id"] = "42";
  EXPECT_THROW(convert_opa_decision(entry), ConversionError);
  entry = first_entry();
  entry.erase("path");
  EXPECT_THROW(convert_opa_decision(entry), ConversionError);
}

TEST(Opa, ConversionFailsOnInvalidDraft) {
  OpaConversionConfig cfg;
  cfg.decision_risk_level = "severe";
  try {
    convert_opa_decision(first_entry(), cfg);
    FAIL();
  } catch (const ConversionError& e) {
    ASSERT_TRUE(e.report());
    EXPECT_TRUE(e.report()->has_violation("R6"));
  }
}

TEST(Opa, TimestampFallbacks) {
  Json entry = first_entry();
  entry.erase("timestamp");
  OpaConversionConfig cfg;
  cfg.fallback_timestamp = "2026-01-01T00:00:00.000Z";
  EXPECT_EQ(convert_opa_decision(entry, cfg).temporal_metadata->event_timestamp, "2026-01-01T00:00:00.000Z");
  entry["timestamp"] = "2026-05-04T11:12:44.5+02:00";
  EXPECT_EQ(convert_opa_decision(entry, cfg).temporal_metadata->event_timestamp, "2026-05-04T09:12:44.500Z");
}

TEST(Opa, ArrayLogAndPerEntryErrors) {
  auto entries = parse_opa_log(sample_log());
  Json arr = Json::array({entries[0], Json{{"decision_id", "x"}}, entries[1]});
  auto out = convert_opa_log(arr.dump());
  ASSERT_EQ(out.size(), 3u);
  EXPECT_TRUE(out[0].draft);
  EXPECT_FALSE(out[1].draft);
  EXPECT_FALSE(out[1].error.empty());
  EXPECT_EQ(out[2].index, 2u);
}

TEST(Opa, SealedStreamValidatesAndRoundTrips) {
  std::vector<DecisionEvent> drafts;
  for (auto& o : convert_opa_log(sample_log())) drafts.push_back(*o.draft);
  auto sealed = testing_support::seal_all("opa", drafts);
  EXPECT_TRUE(verify_chain(sealed).clean());
  for (const auto& e : sealed) EXPECT_TRUE(validate(e).valid);
}
