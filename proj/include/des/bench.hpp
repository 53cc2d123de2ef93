#pragma once

// Synthetic workload generation and per-tier throughput measurement.
//
// Only relative properties are judged (tier ratios, size bands, constant
// validation work at the lightweight tier); absolute throughput depends on
// the machine and is reported, never asserted.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "des/event_model.hpp"
#include "des/event_store.hpp"
#include "des/json.hpp"
#include "des/tiering.hpp"

namespace des {

// n unsealed drafts valid at `tier` (draft stage), each with a canonical
// size inside the tier's band. Deterministic per seed.
std::vector<DecisionEvent> generate_synthetic(EvidenceTier tier, std::uint64_t seed, std::size_t n,
                                              const std::string& system_id = "bench");

enum class BenchStage { canonicalize_hash, validate, seal_append, seal_append_checkpoint };
std::string_view to_string(BenchStage stage);
std::optional<BenchStage> parse_bench_stage(std::string_view token);

struct BenchConfig {
  std::vector<EvidenceTier> tiers{EvidenceTier::lightweight, EvidenceTier::sampled, EvidenceTier::full};
  std::vector<BenchStage> stages{BenchStage::canonicalize_hash, BenchStage::validate, BenchStage::seal_append,
                                 BenchStage::seal_append_checkpoint};
  std::chrono::milliseconds duration{500};  // timed budget per (tier, stage, run)
  std::size_t runs = 3;
  std::size_t warmup = 64;
  std::size_t pool = 512;  // distinct synthetic drafts per tier
  std::size_t max_events_per_run = 200000;
  std::uint64_t seed = 7;
  std::size_t streams = 1;  // parallel writer streams for the append stages
  std::filesystem::path scratch;  // empty: a directory under the system temp dir
  Durability durability = Durability::none;
};

struct StageResult {
  EvidenceTier tier;
  BenchStage stage;
  std::string backend;
  double events_per_sec = 0;  // median over runs
  double median_latency_us = 0;
  double p99_latency_us = 0;
  std::size_t median_payload_bytes = 0;
  BandAssessment payload_band = BandAssessment::within;
  std::size_t rules_evaluated = 0;  // validate stage only
  std::vector<double> run_throughputs;
  std::size_t events = 0;
};

struct BenchReport {
  Json machine;
  std::vector<StageResult> results;
  std::size_t streams = 1;
  // Validation work for a ~300 B and a ~5 KB lightweight event.
  std::size_t lightweight_rules_small = 0;
  std::size_t lightweight_rules_large = 0;

  const StageResult* find(EvidenceTier tier, BenchStage stage) const;
  // Tier 1 / Tier 3 seal+append throughput; 0 when either is missing.
  double tier1_tier3_ratio() const;
  Json to_json() const;
  std::string to_table() const;
};

BenchReport run_benchmark(const BenchConfig& config);

struct EnvelopeCheck {
  std::string property;
  bool pass = false;
  bool measured = true;  // false when the report lacks the inputs
  std::string detail;
};

struct EnvelopeAssessment {
  std::vector<EnvelopeCheck> checks;
  bool all_pass = false;
  std::string verdict;
  Json to_json() const;
};

EnvelopeAssessment compare_to_envelope(const BenchReport& report);

}  // namespace des
