#include "des/bench.hpp"

#include <sys/utsname.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "des/canonical.hpp"
#include "des/crypto.hpp"
#include "des/sealing.hpp"
#include "des/time.hpp"
#include "des/validator.hpp"

namespace des {

namespace {

// ---- synthetic drafts ---------------------------------------------------------

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t u64() { return rng_(); }
  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  bool chance(double p) { return unit() < p; }
  // Two decimals keep canonical numbers short and stable.
  double score() { return static_cast<double>(between(5, 99)) / 100.0; }
  template <typename T, std::size_t N>
  const T& pick(const T (&items)[N]) {
    return items[static_cast<std::size_t>(between(0, static_cast<int>(N) - 1))];
  }

  std::string uuid() {
    std::array<std::uint8_t, 16> b;
    for (std::size_t i = 0; i < 16; i += 8) {
      std::uint64_t x = rng_();
      for (std::size_t k = 0; k < 8; ++k) b[i + k] = static_cast<std::uint8_t>(x >> (8 * k));
    }
    b[6] = static_cast<std::uint8_t>((b[6] & 0x0f) | 0x40);
    b[8] = static_cast<std::uint8_t>((b[8] & 0x3f) | 0x80);
    std::string h = to_hex(b);
    return h.substr(0, 8) + "-" + h.substr(8, 4) + "-" + h.substr(12, 4) + "-" + h.substr(16, 4) + "-" + h.substr(20);
  }

  std::string hex64() { return sha256_hex(std::to_string(rng_())); }

  std::string word() {
    static const char* words[] = {"income", "tenure", "region", "segment", "balance", "velocity", "device",
                                  "channel", "history", "exposure", "limit", "merchant", "country", "age_band"};
    return pick(words);
  }

 private:
  std::mt19937_64 rng_;
};

const char* kDecisionTypes[] = {"credit_approval", "fraud_screening", "claims_triage", "access_control",
                                "content_moderation"};
const char* kRiskLevels[] = {"low", "medium", "high", "critical"};
const char* kOutcomes[] = {"approve", "decline", "refer", "allow", "deny"};

InputRecord make_input(Gen& g, std::size_t k, int value_bytes) {
  InputRecord in;
  in.input_id = "in_" + std::to_string(k) + "_" + g.word();
  static const char* types[] = {"feature", "model_output", "external_data", "policy"};
  in.input_type = g.pick(types);
  Json v = Json::object();
  v["name"] = g.word();
  v["value"] = g.between(0, 100000);
  v["unit"] = "count";
  std::string note;
  while (static_cast<int>(note.size()) < value_bytes) note += g.word() + " ";
  v["observation"] = note;
  in.input_value = std::move(v);
  in.input_source = "feature-store/" + g.word();
  in.input_version = std::to_string(g.between(1, 9)) + "." + std::to_string(g.between(0, 20)) + ".0";
  return in;
}

BoundaryContract make_contract(Gen& g) {
  BoundaryContract c;
  static const char* protocols[] = {"grpc", "https", "kafka"};
  c.protocol = g.pick(protocols);
  c.schema_version = "1." + std::to_string(g.between(0, 9)) + ".0";
  c.sla = Json{{"p99_latency_ms", g.between(10, 250)}, {"availability", 0.999}};
  c.data_contract = Json{{"fields", g.between(5, 40)}, {"owner", "team-" + g.word()}};
  static const char* modes[] = {"fail_open", "fail_closed", "degrade", "retry"};
  c.failure_mode = g.pick(modes);
  return c;
}

// A complete full-tier draft; sizes are tuned afterwards.
// Overrides and human decisions are only generated for the full tier: the
// default tier policy routes them there.
DecisionEvent make_full(Gen& g, std::size_t index, const std::string& system_id, double override_rate,
                        bool compact, bool allow_human) {
  DecisionEvent e;
  e.schema_version = std::string(kSchemaVersion);

  static const char* logic_types[] = {"ml_inference", "ml_inference", "rule_based", "rule_based", "policy_evaluation",
                                      "hybrid",       "hybrid",       "ml_inference", "rule_based", "human_decision"};
  std::string logic_type = g.pick(logic_types);
  if (!allow_human && logic_type == "human_decision") logic_type = "ml_inference";
  const bool human = logic_type == "human_decision";
  // A human override of a human decision needs its own linked event; the
  // generator keeps human decisions un-overridden.
  const bool overridden = !human && g.chance(override_rate);

  DecisionContext ctx;
  ctx.decision_id = g.uuid();
  ctx.decision_type = g.pick(kDecisionTypes);
  Environment env;
  env.system_id = system_id;
  if (!compact) {
    static const char* triggers[] = {"api_request", "batch_job", "event_stream"};
    ctx.trigger = g.pick(triggers);
    env.system_version = "2." + std::to_string(g.between(0, 9)) + ".1";
    env.configuration_hash = g.hex64();
    env.deployment_id = "prod-eu-" + std::to_string(g.between(1, 3));
    std::vector<InputRecord> inputs;
    for (std::size_t k = 0; k < 2; ++k) inputs.push_back(make_input(g, k, 60));
    ctx.inputs = std::move(inputs);
  }
  ctx.environment = std::move(env);
  e.decision_context = std::move(ctx);

  DecisionLogic logic;
  logic.logic_type = logic_type;
  const std::string outcome = g.pick(kOutcomes);
  logic.output = compact ? Json(outcome) : Json{{"decision", outcome}, {"score", g.score()}};
  bool model = logic_type == "ml_inference", rules = logic_type == "rule_based",
       policy = logic_type == "policy_evaluation";
  if (logic_type == "hybrid") {
    int drop = g.between(0, 3);  // 3 keeps all three
    model = drop != 0;
    rules = drop != 1;
    policy = drop != 2;
    static const char* methods[] = {"voting", "cascading", "overriding", "weighted"};
    logic.combination_method = g.pick(methods);
  }
  if (model) {
    ModelInference m;
    m.model_id = "risk-model-" + g.word();
    m.model_version = "4." + std::to_string(g.between(0, 30)) + ".2";
    m.feature_vector_hash = g.hex64();
    m.prediction = Json{{"label", outcome}, {"probability", g.score()}};
    m.confidence = g.score();
    logic.model_inference = std::move(m);
  }
  if (rules) {
    std::vector<RulePathEntry> path;
    int count = g.between(3, 6);
    for (int k = 0; k < count; ++k) {
      RulePathEntry r;
      r.rule_id = "R-" + std::to_string(g.between(100, 999));
      r.rule_version = std::to_string(g.between(1, 12));
      r.rule_result = g.chance(0.7) ? "match" : "no_match";
      path.push_back(std::move(r));
    }
    logic.rule_path = std::move(path);
  }
  if (policy) {
    PolicyEvaluation p;
    p.policy_id = "authz/" + g.word() + "/allow";
    p.policy_version = "bundle-" + std::to_string(g.between(100, 999));
    p.policy_engine = "OPA";
    p.evaluation_result = Json{{"allow", outcome != "deny"}};
    logic.policy_evaluation = std::move(p);
  }
  if (!compact) {
    Json alts = Json::array();
    for (int k = 0; k < 2; ++k) alts.push_back({{"decision", g.pick(kOutcomes)}, {"score", g.score()}});
    logic.output_alternatives = std::move(alts);
  }
  e.decision_logic = std::move(logic);

  if (!compact) {
    DecisionBoundary b;
    UpstreamRef up;
    up.decision_id = g.uuid();
    up.system_id = "upstream-" + g.word();
    up.coupling_type = "input";
    up.boundary_contract = make_contract(g);
    b.upstream_decisions = std::vector<UpstreamRef>{up};
    DownstreamRef down;
    down.system_id = "downstream-" + g.word();
    down.contract_version = "3.1.0";
    down.boundary_contract = make_contract(g);
    b.downstream_consumers = std::vector<DownstreamRef>{down};
    e.decision_boundary = std::move(b);
  }

  QualityIndicators q;
  q.decision_risk_level = g.pick(kRiskLevels);
  if (!compact) {
    q.confidence_score = g.score();
    std::vector<ConfidenceComponent> comps;
    for (const char* c : {"model", "data", "rules"}) {
      ConfidenceComponent cc;
      cc.component = c;
      cc.score = g.score();
      cc.calibration_date = "2026-0" + std::to_string(g.between(1, 9)) + "-1" + std::to_string(g.between(0, 9));
      comps.push_back(std::move(cc));
    }
    q.confidence_components = std::move(comps);
    DataQuality dq;
    dq.completeness = g.score();
    dq.freshness_seconds = static_cast<std::uint64_t>(g.between(1, 3600));
    dq.known_issues = std::vector<std::string>{"late_feed:" + g.word()};
    q.data_quality = std::move(dq);
    if (g.chance(0.3)) {
      ThresholdAlert a;
      a.alert_id = "ALERT-" + std::to_string(g.between(1, 99));
      a.threshold = 0.8;
      a.observed = 0.93;
      q.threshold_alerts = std::vector<ThresholdAlert>{a};
    }
  }
  e.decision_quality_indicators = std::move(q);

  const TimePoint ts = *parse_timestamp("2026-03-01T08:00:00.000Z") + std::chrono::milliseconds(250 * index);
  HumanOverrideRecord h;
  h.override_occurred = overridden;
  if (human || overridden) {
    OverrideActor a;
    a.actor_id = "u" + std::to_string(g.between(100, 999));
    a.actor_role = compact ? "analyst" : "senior_credit_analyst";
    if (!compact) a.authorization_level = "L" + std::to_string(g.between(1, 4));
    h.override_actor = std::move(a);
    h.override_rationale = compact ? Json("policy exception") : Json("documented exception after manual review of " + g.word());
  }
  if (overridden) {
    h.override_type = "modification";
    h.original_output = e.decision_logic->output;
    const std::string replaced = outcome == "approve" ? "refer" : "approve";
    h.overridden_output = compact ? Json(replaced) : Json{{"decision", replaced}};
    h.override_timestamp = format_timestamp(ts + std::chrono::milliseconds(90000));
    if (!compact) h.time_to_override_ms = 90000;
  }
  e.human_override_record = std::move(h);

  TemporalMetadata tm;
  tm.event_timestamp = format_timestamp(ts);
  tm.evidence_tier = "full";
  if (!compact) {
    tm.processing_duration_ms = static_cast<std::uint64_t>(g.between(1, 40));
    RetentionPolicy rp;
    rp.minimum_retention = "P6M";
    rp.classification = "regulated";
    tm.retention_policy = std::move(rp);
  }
  e.temporal_metadata = std::move(tm);
  return e;
}

std::size_t canonical_size(const DecisionEvent& e) { return canonicalize(event_to_json(e)).size(); }

// Grows `e` with `add` until its canonical size reaches `target`.
template <typename AddFn>
void grow_to(DecisionEvent& e, std::size_t target, AddFn add) {
  for (int guard = 0; guard < 512 && canonical_size(e) < target; ++guard) add(e);
}

DecisionEvent synthesize(Gen& g, EvidenceTier tier, std::size_t index, const std::string& system_id) {
  const SizeBand band = size_band(tier);
  // Aim inside the band with margin so one growth step cannot overshoot.
  switch (tier) {
    case EvidenceTier::full: {
      DecisionEvent e = make_full(g, index, system_id, 0.2, false, true);
      std::size_t target = static_cast<std::size_t>(g.between(static_cast<int>(band.min_bytes) + 800,
                                                              static_cast<int>(band.max_bytes) - 3000));
      std::size_t k = 2;
      grow_to(e, target, [&](DecisionEvent& d) { d.decision_context->inputs->push_back(make_input(g, k++, 120)); });
      return e;
    }
    case EvidenceTier::sampled: {
      DecisionEvent e = project_to_tier(make_full(g, index, system_id, 0.0, false, false), EvidenceTier::sampled);
      std::size_t target = static_cast<std::size_t>(g.between(static_cast<int>(band.min_bytes) + 300,
                                                              static_cast<int>(band.max_bytes) - 800));
      std::size_t k = 2;
      grow_to(e, target, [&](DecisionEvent& d) { d.decision_context->inputs->push_back(make_input(g, k++, 120)); });
      return e;
    }
    case EvidenceTier::lightweight:
    default: {
      DecisionEvent e = project_to_tier(make_full(g, index, system_id, 0.0, true, false), EvidenceTier::lightweight);
      std::size_t target = static_cast<std::size_t>(g.between(static_cast<int>(band.min_bytes) + 60,
                                                              static_cast<int>(band.max_bytes) - 60));
      auto& logic = *e.decision_logic;
      if (canonical_size(e) < target) {
        // Structured output with reason codes.
        logic.output = Json{{"decision", *logic.output}, {"reason_codes", Json::array()}};
        grow_to(e, target, [&](DecisionEvent& d) {
          (*d.decision_logic->output)["reason_codes"].push_back("RC" + std::to_string(g.between(100, 999)));
        });
      }
      return e;
    }
  }
}

// ---- measurement ----------------------------------------------------------------

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  std::size_t idx = static_cast<std::size_t>(p * static_cast<double>(v.size() - 1) + 0.5);
  return v[std::min(idx, v.size() - 1)];
}

// Fresh, deterministic decision ids so append runs never collide.
std::string counter_uuid(std::uint64_t run, std::uint64_t n) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%08llx-0000-4000-8000-%012llx", static_cast<unsigned long long>(run & 0xffffffffULL),
                static_cast<unsigned long long>(n & 0xffffffffffffULL));
  return buf;
}

struct RunSample {
  std::vector<double> latencies_us;
  double throughput = 0;
};

RunSample time_loop(const BenchConfig& cfg, const std::function<void(std::size_t)>& prepare,
                    const std::function<void(std::size_t)>& body) {
  RunSample s;
  for (std::size_t i = 0; i < cfg.warmup; ++i) {
    prepare(i);
    body(i);
  }
  double total_us = 0;
  const double budget_us = static_cast<double>(std::chrono::duration_cast<std::chrono::microseconds>(cfg.duration).count());
  for (std::size_t i = cfg.warmup; total_us < budget_us && s.latencies_us.size() < cfg.max_events_per_run; ++i) {
    prepare(i);
    auto t0 = Clock::now();
    body(i);
    auto t1 = Clock::now();
    double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
    s.latencies_us.push_back(us);
    total_us += us;
  }
  s.throughput = total_us > 0 ? static_cast<double>(s.latencies_us.size()) * 1e6 / total_us : 0;
  return s;
}

std::filesystem::path scratch_root(const BenchConfig& cfg) {
  if (!cfg.scratch.empty()) return cfg.scratch;
  return std::filesystem::temp_directory_path() / ("des-bench-" + std::to_string(::getpid()));
}

RunSample run_append(const BenchConfig& cfg, const std::vector<DecisionEvent>& pool, bool checkpoints,
                     const std::filesystem::path& dir, std::uint64_t run_id) {
  std::filesystem::remove_all(dir);
  StoreOptions so;
  so.durability = cfg.durability;
  EventStore store(dir, so);
  LedgerOptions lo;
  lo.checkpoint_interval = checkpoints ? kDefaultCheckpointInterval : 0;
  Ledger ledger(store, lo);

  if (cfg.streams <= 1) {
    DecisionEvent draft;
    auto sample = time_loop(
        cfg,
        [&](std::size_t i) {
          draft = pool[i % pool.size()];
          draft.decision_context->decision_id = counter_uuid(run_id, i);
        },
        [&](std::size_t) { ledger.append(draft); });
    std::filesystem::remove_all(dir);
    return sample;
  }

  std::vector<RunSample> per(cfg.streams);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < cfg.streams; ++w) {
    threads.emplace_back([&, w] {
      const std::string stream = "bench-" + std::to_string(w);
      DecisionEvent draft;
      per[w] = time_loop(
          cfg,
          [&](std::size_t i) {
            draft = pool[i % pool.size()];
            draft.decision_context->decision_id = counter_uuid((run_id << 8) | w, i);
            draft.decision_context->environment->system_id = stream;
          },
          [&](std::size_t) { ledger.append(draft, stream); });
    });
  }
  for (auto& t : threads) t.join();
  RunSample merged;
  for (auto& p : per) {
    merged.throughput += p.throughput;
    merged.latencies_us.insert(merged.latencies_us.end(), p.latencies_us.begin(), p.latencies_us.end());
  }
  std::filesystem::remove_all(dir);
  return merged;
}

Json machine_descriptor() {
  Json m = Json::object();
  struct utsname u;
  if (::uname(&u) == 0) {
    m["system"] = std::string(u.sysname) + " " + u.release;
    m["arch"] = u.machine;
  }
  m["hardware_threads"] = std::thread::hardware_concurrency();
#ifdef __VERSION__
  m["compiler"] = __VERSION__;
#endif
#ifdef NDEBUG
  m["build"] = "optimized";
#else
  m["build"] = "debug";
#endif
  return m;
}

}  // namespace

std::vector<DecisionEvent> generate_synthetic(EvidenceTier tier, std::uint64_t seed, std::size_t n,
                                              const std::string& system_id) {
  Gen g(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(tier));
  std::vector<DecisionEvent> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(synthesize(g, tier, i, system_id));
  return out;
}

std::string_view to_string(BenchStage stage) {
  switch (stage) {
    case BenchStage::canonicalize_hash: return "canonicalize_hash";
    case BenchStage::validate: return "validate";
    case BenchStage::seal_append: return "seal_append";
    case BenchStage::seal_append_checkpoint: return "seal_append_checkpoint";
  }
  return "unknown";
}

std::optional<BenchStage> parse_bench_stage(std::string_view token) {
  for (auto s : {BenchStage::canonicalize_hash, BenchStage::validate, BenchStage::seal_append,
                 BenchStage::seal_append_checkpoint}) {
    if (to_string(s) == token) return s;
  }
  return std::nullopt;
}

const StageResult* BenchReport::find(EvidenceTier tier, BenchStage stage) const {
  for (const auto& r : results) {
    if (r.tier == tier && r.stage == stage) return &r;
  }
  return nullptr;
}

double BenchReport::tier1_tier3_ratio() const {
  const auto* t1 = find(EvidenceTier::lightweight, BenchStage::seal_append);
  const auto* t3 = find(EvidenceTier::full, BenchStage::seal_append);
  if (!t1 || !t3 || t3->events_per_sec <= 0) return 0;
  return t1->events_per_sec / t3->events_per_sec;
}

Json BenchReport::to_json() const {
  Json rows = Json::array();
  for (const auto& r : results) {
    Json runs = Json::array();
    for (double t : r.run_throughputs) runs.push_back(t);
    Json row = {{"tier", to_string(r.tier)},
                {"stage", to_string(r.stage)},
                {"backend", r.backend},
                {"events_per_sec", r.events_per_sec},
                {"median_latency_us", r.median_latency_us},
                {"p99_latency_us", r.p99_latency_us},
                {"median_payload_bytes", r.median_payload_bytes},
                {"payload_band", to_string(r.payload_band)},
                {"events", r.events},
                {"run_throughputs", runs}};
    if (r.stage == BenchStage::validate) row["rules_evaluated"] = r.rules_evaluated;
    rows.push_back(std::move(row));
  }
  return {{"machine", machine},
          {"streams", streams},
          {"results", rows},
          {"derived",
           {{"tier1_tier3_seal_append_ratio", tier1_tier3_ratio()},
            {"lightweight_rules_small_payload", lightweight_rules_small},
            {"lightweight_rules_large_payload", lightweight_rules_large}}}};
}

std::string BenchReport::to_table() const {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof line, "%-12s %-24s %14s %12s %12s %10s %-7s\n", "tier", "stage", "events/s",
                "median_us", "p99_us", "bytes", "band");
  out << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-12s %-24s %14.0f %12.2f %12.2f %10zu %-7s\n",
                  std::string(to_string(r.tier)).c_str(), std::string(to_string(r.stage)).c_str(), r.events_per_sec,
                  r.median_latency_us, r.p99_latency_us, r.median_payload_bytes,
                  std::string(to_string(r.payload_band)).c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "tier1/tier3 seal+append throughput ratio: %.2f\n", tier1_tier3_ratio());
  out << line;
  return out.str();
}

BenchReport run_benchmark(const BenchConfig& cfg) {
  BenchReport report;
  report.machine = machine_descriptor();
  report.streams = std::max<std::size_t>(1, cfg.streams);
  const auto root = scratch_root(cfg);
  ValidateOptions draft_stage;
  draft_stage.stage = Stage::draft;
  std::uint64_t run_id = 0;

  for (EvidenceTier tier : cfg.tiers) {
    const auto pool = generate_synthetic(tier, cfg.seed, std::max<std::size_t>(1, cfg.pool));
    std::vector<double> sizes;
    for (const auto& d : pool) sizes.push_back(static_cast<double>(estimate_payload_size(d).bytes));
    const auto median_size = static_cast<std::size_t>(median(sizes));
    const SizeBand band = size_band(tier);
    const BandAssessment assessment = median_size < band.min_bytes   ? BandAssessment::below
                                      : median_size > band.max_bytes ? BandAssessment::above
                                                                     : BandAssessment::within;

    // Pre-converted documents for the hashing stage.
    std::vector<Json> docs;
    docs.reserve(pool.size());
    for (const auto& d : pool) docs.push_back(event_to_json(d));

    for (BenchStage stage : cfg.stages) {
      StageResult res;
      res.tier = tier;
      res.stage = stage;
      res.median_payload_bytes = median_size;
      res.payload_band = assessment;
      std::vector<double> all_latencies;
      for (std::size_t run = 0; run < std::max<std::size_t>(1, cfg.runs); ++run, ++run_id) {
        RunSample s;
        volatile std::size_t sink = 0;
        switch (stage) {
          case BenchStage::canonicalize_hash:
            res.backend = "rfc8785+openssl-sha256";
            s = time_loop(cfg, [](std::size_t) {},
                          [&](std::size_t i) { sink = sink + sha256(canonicalize(docs[i % docs.size()]))[0]; });
            break;
          case BenchStage::validate:
            res.backend = "typed-rules";
            s = time_loop(cfg, [](std::size_t) {}, [&](std::size_t i) {
              auto r = validate(pool[i % pool.size()], draft_stage);
              res.rules_evaluated = r.rules_evaluated;
            });
            break;
          case BenchStage::seal_append:
          case BenchStage::seal_append_checkpoint:
            res.backend = cfg.durability == Durability::fsync ? "ndjson-store+fsync" : "ndjson-store";
            s = run_append(cfg, pool, stage == BenchStage::seal_append_checkpoint,
                           root / ("run-" + std::to_string(run_id)), run_id);
            break;
        }
        res.run_throughputs.push_back(s.throughput);
        res.events += s.latencies_us.size();
        all_latencies.insert(all_latencies.end(), s.latencies_us.begin(), s.latencies_us.end());
      }
      res.events_per_sec = median(res.run_throughputs);
      res.median_latency_us = median(all_latencies);
      res.p99_latency_us = percentile(all_latencies, 0.99);
      report.results.push_back(std::move(res));
    }
  }
  std::filesystem::remove_all(root);

  // Same lightweight event at ~300 B and padded past 5 KB.
  DecisionEvent small = generate_synthetic(EvidenceTier::lightweight, cfg.seed, 1).front();
  DecisionEvent large = small;
  large.decision_logic->output = Json{{"decision", "approve"}, {"note", std::string(5200, 'x')}};
  report.lightweight_rules_small = validate(small, draft_stage).rules_evaluated;
  report.lightweight_rules_large = validate(large, draft_stage).rules_evaluated;
  return report;
}

Json EnvelopeAssessment::to_json() const {
  Json list = Json::array();
  for (const auto& c : checks) {
    list.push_back({{"property", c.property}, {"pass", c.pass}, {"measured", c.measured}, {"detail", c.detail}});
  }
  return {{"checks", list}, {"all_pass", all_pass}, {"verdict", verdict}};
}

EnvelopeAssessment compare_to_envelope(const BenchReport& report) {
  EnvelopeAssessment a;
  char buf[200];

  {
    EnvelopeCheck c{"tier1_hash_sub_millisecond", false, false, "Tier 1 canonicalize+hash not measured"};
    if (const auto* r = report.find(EvidenceTier::lightweight, BenchStage::canonicalize_hash)) {
      c.measured = true;
      c.pass = r->median_latency_us < 1000.0;
      std::snprintf(buf, sizeof buf, "median %.2f us (limit 1000 us)", r->median_latency_us);
      c.detail = buf;
    }
    a.checks.push_back(std::move(c));
  }
  {
    EnvelopeCheck c{"tier1_tier3_throughput_ratio", false, false, "seal+append not measured for Tier 1 and Tier 3"};
    double ratio = report.tier1_tier3_ratio();
    if (ratio > 0) {
      c.measured = true;
      c.pass = ratio >= 2.0;
      std::snprintf(buf, sizeof buf, "ratio %.2f (required >= 2)", ratio);
      c.detail = buf;
    }
    a.checks.push_back(std::move(c));
  }
  {
    EnvelopeCheck c{"tier1_validation_constant", false, false, "not measured"};
    if (report.lightweight_rules_small > 0) {
      c.measured = true;
      c.pass = report.lightweight_rules_small == report.lightweight_rules_large;
      c.detail = std::to_string(report.lightweight_rules_small) + " rules at ~300 B vs " +
                 std::to_string(report.lightweight_rules_large) + " at ~5 KB";
    }
    a.checks.push_back(std::move(c));
  }
  for (EvidenceTier tier : {EvidenceTier::lightweight, EvidenceTier::sampled, EvidenceTier::full}) {
    const StageResult* r = nullptr;
    for (const auto& res : report.results) {
      if (res.tier == tier) {
        r = &res;
        break;
      }
    }
    if (!r) continue;
    const SizeBand band = size_band(tier);
    EnvelopeCheck c;
    c.property = std::string(to_string(tier)) + "_payload_band";
    c.pass = r->payload_band == BandAssessment::within;
    std::snprintf(buf, sizeof buf, "median %zu B, band %zu-%zu B (%s)", r->median_payload_bytes, band.min_bytes,
                  band.max_bytes, std::string(to_string(r->payload_band)).c_str());
    c.detail = buf;
    a.checks.push_back(std::move(c));
  }

  a.all_pass = true;
  bool any_measured = false;
  for (const auto& c : a.checks) {
    if (c.measured) {
      any_measured = true;
      a.all_pass = a.all_pass && c.pass;
    }
  }
  a.all_pass = a.all_pass && any_measured;
  if (a.all_pass) {
    a.verdict = "consistent with the tiered feasibility envelope (relative properties only)";
  } else {
    std::string failed;
    for (const auto& c : a.checks) {
      if (c.measured && !c.pass) failed += (failed.empty() ? "" : ", ") + c.property;
    }
    a.verdict = failed.empty() ? "insufficient measurements" : "outside the envelope: " + failed;
  }
  return a;
}

}  // namespace des
