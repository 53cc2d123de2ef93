// des: operator entry point over the ledger library.
//
// Exit codes: 0 ok / compliant, 1 findings, 2 usage error.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include "des/bench.hpp"
#include "des/canonical.hpp"
#include "des/chain.hpp"
#include "des/compliance.hpp"
#include "des/enrichment.hpp"
#include "des/event_store.hpp"
#include "des/ingest_service.hpp"
#include "des/opa_adapter.hpp"
#include "des/tiering.hpp"
#include "des/time.hpp"
#include "des/validator.hpp"

namespace fs = std::filesystem;
using namespace des;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kUsage = 2;

struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One event-shaped input: a whole .json file, an array element or an NDJSON line.
struct InputItem {
  std::string source;
  std::optional<DecisionEvent> event;
  std::string error;
};

std::string slurp(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  if (!fs::exists(path)) throw UsageFailure("no such file: " + path);
  return read_file(path);
}

void parse_into(const std::string& label, std::string_view text, bool ndjson, std::vector<InputItem>& out) {
  auto describe = [](const Error& e) {
    std::string msg = std::string(to_string(e.code())) + ": " + e.what();
    if (!e.path().empty()) msg += " at " + e.path();
    return msg;
  };
  if (ndjson) {
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
      auto nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
      ++line_no;
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
      InputItem item{label + ":" + std::to_string(line_no), std::nullopt, {}};
      try {
        item.event = parse_event(line);
      } catch (const Error& e) {
        item.error = describe(e);
      }
      out.push_back(std::move(item));
    }
    return;
  }
  try {
    Json doc = parse_json(text);
    if (doc.is_array()) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        InputItem item{label + "[" + std::to_string(i) + "]", std::nullopt, {}};
        try {
          item.event = event_from_json(doc[i]);
        } catch (const Error& e) {
          item.error = describe(e);
        }
        out.push_back(std::move(item));
      }
    } else {
      out.push_back({label, event_from_json(doc), {}});
    }
  } catch (const Error& e) {
    out.push_back({label, std::nullopt, describe(e)});
  }
}

bool is_ndjson(const fs::path& p) { return p.extension() == ".ndjson" || p.extension() == ".jsonl"; }

std::vector<InputItem> read_inputs(const std::vector<std::string>& paths) {
  std::vector<InputItem> items;
  for (const auto& path : paths) {
    if (path == "-") {
      parse_into("<stdin>", slurp(path), true, items);
      continue;
    }
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::recursive_directory_iterator(path)) {
        auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".json" || is_ndjson(entry.path()))) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) parse_into(f.string(), read_file(f), is_ndjson(f), items);
      continue;
    }
    parse_into(path, slurp(path), is_ndjson(path), items);
  }
  return items;
}

std::optional<EvidenceTier> tier_arg(const std::string& token) {
  if (token.empty()) return std::nullopt;
  auto t = parse_tier(token);
  if (!t) throw UsageFailure("unknown tier '" + token + "'");
  return t;
}

std::chrono::milliseconds parse_duration_arg(const std::string& text) {
  static const std::regex re(R"((\d+(?:\.\d+)?)(ms|s|m)?)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw UsageFailure("bad duration '" + text + "' (e.g. 500ms, 10s, 2m)");
  double v = std::stod(m[1].str());
  std::string unit = m[2].matched ? m[2].str() : "s";
  double ms = unit == "ms" ? v : unit == "s" ? v * 1000 : v * 60000;
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

std::optional<TierPolicy> policy_arg(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_tier_policy(path);
}

std::optional<SigningKey> key_arg(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return SigningKey::from_pem(read_file(path));
}

// Same tier handling as the ingest service: an undeclared tier is chosen by
// the policy, a declared full tier may be reduced to what the policy selects.
DecisionEvent apply_policy(DecisionEvent draft, const std::optional<TierPolicy>& policy) {
  bool has_tier = draft.temporal_metadata && draft.temporal_metadata->evidence_tier;
  if (!has_tier) {
    if (!draft.temporal_metadata) draft.temporal_metadata.emplace();
    draft.temporal_metadata->evidence_tier = std::string(to_string(select_tier(draft, policy.value_or(TierPolicy{}))));
  } else if (policy && draft.tier() == EvidenceTier::full) {
    EvidenceTier selected = select_tier(draft, *policy);
    if (selected != EvidenceTier::full) draft = project_to_tier(draft, selected);
  }
  return draft;
}

void print_findings(const ChainVerificationReport& r) {
  for (const auto& f : r.findings) {
    std::cout << "  " << (is_warning(f.kind) ? "warning" : "finding") << " #" << f.index;
    if (f.sequence_number) std::cout << " seq " << *f.sequence_number;
    std::cout << " " << to_string(f.kind) << ": " << f.message << "\n";
  }
}

// ---- commands ----

struct ValidateArgs {
  std::vector<std::string> paths;
  std::string tier_override;
  std::string stage = "auto";
  bool json = false;
};

int cmd_validate(const ValidateArgs& a) {
  auto items = read_inputs(a.paths);
  if (items.empty()) throw UsageFailure("no events found");
  ValidateOptions base;
  base.tier_override = tier_arg(a.tier_override);
  std::size_t valid = 0;
  Json out = Json::array();
  for (const auto& item : items) {
    Json entry = {{"source", item.source}};
    bool ok = false;
    if (!item.event) {
      entry["valid"] = false;
      entry["error"] = item.error;
      if (!a.json) std::cout << "INVALID " << item.source << "\n  " << item.error << "\n";
    } else {
      ValidateOptions opts = base;
      if (a.stage == "draft" || (a.stage == "auto" && !item.event->current_hash())) opts.stage = Stage::draft;
      ValidationReport r = validate(*item.event, opts);
      ok = r.valid;
      entry["stage"] = opts.stage == Stage::draft ? "draft" : "sealed";
      entry["report"] = r.to_json();
      if (!a.json) {
        std::cout << (ok ? "valid   " : "INVALID ") << item.source << " (" << entry["stage"].get<std::string>()
                  << ", " << (r.evaluated_tier ? to_string(*r.evaluated_tier) : "?") << ", " << r.rules_evaluated
                  << " rules)\n";
        for (const auto& f : r.violations) std::cout << "  " << f.rule_id << " " << f.path << ": " << f.message << "\n";
        for (const auto& f : r.warnings) std::cout << "  warning " << f.rule_id << " " << f.path << ": " << f.message << "\n";
      }
    }
    valid += ok;
    out.push_back(entry);
  }
  if (a.json) {
    std::cout << Json{{"results", out}, {"total", items.size()}, {"valid", valid}, {"invalid", items.size() - valid}}.dump(2)
              << "\n";
  } else if (items.size() > 1) {
    std::cout << "\n" << items.size() << " events: " << valid << " valid, " << items.size() - valid << " invalid\n";
  }
  return valid == items.size() ? kOk : kFindings;
}

struct StoreArgs {
  std::string store;
  std::string tier_policy;
  bool json = false;
};

struct SealArgs {
  std::vector<std::string> paths;
  std::string stream;
  std::string key;
  std::string signer_id = "des-cli";
  std::uint64_t checkpoint_interval = kDefaultCheckpointInterval;
  bool fsync = false;
};

int seal_items(const StoreArgs& s, const SealArgs& a, std::vector<InputItem> items) {
  if (s.store.empty()) throw UsageFailure("--store (or DES_STORE) is required");
  auto policy = policy_arg(s.tier_policy);
  auto key = key_arg(a.key);
  StoreOptions so;
  so.durability = a.fsync ? Durability::fsync : Durability::none;
  EventStore store(s.store, so);
  LedgerOptions lo;
  lo.checkpoint_interval = a.checkpoint_interval;
  if (key) lo.signing = SigningRequest{&*key, a.signer_id, ""};
  Ledger ledger(store, lo);

  std::size_t sealed = 0;
  Json out = Json::array();
  for (auto& item : items) {
    Json entry = {{"source", item.source}};
    try {
      if (!item.event) throw Error(ErrorCode::format_error, item.error);
      AppendResult r = ledger.append(apply_policy(std::move(*item.event), policy), a.stream);
      ++sealed;
      entry["system_id"] = r.location.system_id;
      entry["sequence_number"] = *r.event.sequence_number();
      entry["current_hash"] = *r.event.current_hash();
      entry["evidence_tier"] = r.event.temporal_metadata->evidence_tier.value_or("");
      if (r.checkpoint) entry["checkpoint_id"] = r.checkpoint->checkpoint_id;
      if (!s.json) {
        std::cout << "sealed " << item.source << " -> " << r.location.system_id << " #" << *r.event.sequence_number()
                  << " " << *r.event.current_hash() << "\n";
        if (r.checkpoint) std::cout << "  checkpoint " << r.checkpoint->checkpoint_id << "\n";
      }
    } catch (const RejectedInvalid& e) {
      entry["rejected"] = e.report().to_json();
      if (!s.json) {
        std::cout << "REJECTED " << item.source << "\n";
        for (const auto& f : e.report().violations) std::cout << "  " << f.rule_id << " " << f.path << ": " << f.message << "\n";
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::io_error) throw;
      entry["error"] = std::string(to_string(e.code())) + ": " + e.what();
      if (!s.json) std::cout << "REJECTED " << item.source << "\n  " << entry["error"].get<std::string>() << "\n";
    }
    out.push_back(entry);
  }
  if (s.json) {
    std::cout << Json{{"results", out}, {"sealed", sealed}, {"rejected", items.size() - sealed}}.dump(2) << "\n";
  } else {
    std::cout << sealed << " of " << items.size() << " sealed into " << s.store << "\n";
  }
  return sealed == items.size() ? kOk : kFindings;
}

struct VerifyArgs {
  std::vector<std::string> streams;
  std::vector<std::string> files;
};

int cmd_verify(const StoreArgs& s, const VerifyArgs& a) {
  std::vector<ChainVerificationReport> reports;
  for (const auto& f : a.files) {
    std::string text = slurp(f);
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto nl = text.find('\n', pos);
      if (nl == std::string::npos) nl = text.size();
      if (nl > pos) lines.push_back(text.substr(pos, nl - pos));
      pos = nl + 1;
    }
    auto r = verify_stored_lines(lines);
    r.system_id = f;
    reports.push_back(std::move(r));
  }
  if (!s.store.empty()) {
    StoreOptions so;
    so.read_only = true;
    EventStore store(s.store, so);
    auto ids = a.streams.empty() ? store.streams() : a.streams;
    for (const auto& id : ids) {
      if (!store.has_stream(id)) throw UsageFailure("unknown stream '" + id + "'");
      reports.push_back(verify_store_stream(store, id));
    }
  } else if (a.files.empty()) {
    throw UsageFailure("give --store (or DES_STORE) or one or more NDJSON files");
  }
  bool clean = true;
  Json out = Json::array();
  for (const auto& r : reports) {
    clean = clean && r.clean();
    if (s.json) {
      out.push_back(r.to_json());
      continue;
    }
    std::cout << (r.clean() ? "clean  " : "BROKEN ") << r.system_id << ": " << r.events_checked << " events, "
              << r.checkpoints_checked << " checkpoints, " << r.error_count() << " findings\n";
    print_findings(r);
  }
  if (s.json) std::cout << Json{{"streams", out}, {"clean", clean}}.dump(2) << "\n";
  return clean ? kOk : kFindings;
}

struct EnrichArgs {
  std::string decision_id;
  std::string kind;
  std::string payload = "{}";
  std::string created_at;
  std::string key;
  std::string signer_id = "des-cli";
  bool list = false;
};

int cmd_enrich(const StoreArgs& s, const EnrichArgs& a) {
  if (s.store.empty()) throw UsageFailure("--store (or DES_STORE) is required");
  EventStore store(s.store);
  auto target = store.lookup(a.decision_id);
  if (!target) {
    std::cerr << "des: unknown decision_id " << a.decision_id << "\n";
    return kFindings;
  }
  if (a.list) {
    auto records = store.enrichments_for(a.decision_id);
    Json view = resolve_view(*target, records).to_json();
    std::cout << view.dump(2) << "\n";
    return kOk;
  }
  if (a.kind.empty()) throw UsageFailure("--kind is required");
  std::string payload_text = a.payload;
  if (!payload_text.empty() && payload_text[0] == '@') payload_text = slurp(payload_text.substr(1));
  Json payload = parse_json(payload_text);
  std::string created = a.created_at.empty() ? format_timestamp(now_ms()) : a.created_at;
  EnrichmentRecord rec = create_enrichment(*target, a.kind, std::move(payload), created);
  if (auto key = key_arg(a.key)) sign_enrichment(rec, *key, a.signer_id);
  store.append_enrichment(rec);
  if (s.json) {
    std::cout << rec.to_json().dump(2) << "\n";
  } else {
    std::cout << "enrichment " << rec.enrichment_id << " (" << rec.kind << ") linked to " << rec.decision_id << "\n";
  }
  return kOk;
}

struct ConvertArgs {
  std::string log;
  std::string out;
  std::string system_id = "opa";
  std::string tier = "sampled";
  std::string risk_level = "low";
  std::string decision_type = "policy_enforcement";
  std::vector<std::string> sensitive_keys;
  std::string deployment_key;
  bool seal = false;
};

int cmd_convert_opa(const StoreArgs& s, const ConvertArgs& a, SealArgs seal_args) {
  OpaConversionConfig cfg;
  cfg.tier = *tier_arg(a.tier);
  cfg.system_id = a.system_id;
  cfg.decision_risk_level = a.risk_level;
  cfg.decision_type = a.decision_type;
  cfg.sensitive_input_keys = {a.sensitive_keys.begin(), a.sensitive_keys.end()};
  cfg.deployment_key = a.deployment_key;
  if (!cfg.sensitive_input_keys.empty() && cfg.deployment_key.empty()) {
    throw UsageFailure("--sensitive-key needs --deployment-key (or DES_DEPLOYMENT_KEY)");
  }
  auto outcomes = convert_opa_log(slurp(a.log), cfg);

  std::vector<InputItem> drafts;
  std::size_t failed = 0;
  for (auto& o : outcomes) {
    std::string label = a.log + "[" + std::to_string(o.index) + "]";
    if (!o.draft) {
      ++failed;
      std::cerr << "skipped " << label << ": " << o.error << "\n";
      continue;
    }
    drafts.push_back({label, std::move(o.draft), {}});
  }
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + a.out);
    for (const auto& d : drafts) f << canonicalize(event_to_json(*d.event)) << "\n";
  }
  int rc = failed ? kFindings : kOk;
  if (a.seal || !s.store.empty()) {
    int sealed = seal_items(s, seal_args, std::move(drafts));
    return std::max(rc, sealed);
  }
  if (a.out.empty()) {
    for (const auto& d : drafts) std::cout << canonicalize(event_to_json(*d.event)) << "\n";
  } else {
    std::cerr << drafts.size() << " drafts written to " << a.out << ", " << failed << " entries skipped\n";
  }
  return rc;
}

struct BenchArgs {
  std::string tiers = "all";
  std::string stages = "all";
  std::string duration = "500ms";
  std::size_t runs = 3;
  std::size_t streams = 1;
  std::uint64_t seed = 7;
  std::string out;
  bool fsync = false;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ',');) {
    if (!p.empty()) parts.push_back(p);
  }
  return parts;
}

int cmd_bench(const StoreArgs& s, const BenchArgs& a) {
  BenchConfig cfg;
  if (a.tiers != "all") {
    cfg.tiers.clear();
    for (const auto& t : split_csv(a.tiers)) cfg.tiers.push_back(*tier_arg(t));
  }
  if (a.stages != "all") {
    cfg.stages.clear();
    for (const auto& t : split_csv(a.stages)) {
      auto st = parse_bench_stage(t);
      if (!st) throw UsageFailure("unknown stage '" + t + "'");
      cfg.stages.push_back(*st);
    }
  }
  cfg.duration = parse_duration_arg(a.duration);
  if (a.runs == 0 || a.streams == 0) throw UsageFailure("--runs and --streams must be positive");
  cfg.runs = a.runs;
  cfg.streams = a.streams;
  cfg.seed = a.seed;
  cfg.durability = a.fsync ? Durability::fsync : Durability::none;

  BenchReport report = run_benchmark(cfg);
  EnvelopeAssessment env = compare_to_envelope(report);
  Json doc = report.to_json();
  doc["envelope"] = env.to_json();
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::trunc);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + a.out);
    f << doc.dump(2) << "\n";
  }
  if (s.json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << report.to_table() << "\n";
    for (const auto& c : env.checks) {
      std::cout << (c.pass ? "  pass " : c.measured ? "  FAIL " : "  n/a  ") << c.property << ": " << c.detail << "\n";
    }
    std::cout << env.verdict << "\n";
  }
  return env.all_pass ? kOk : kFindings;
}

struct ReportArgs {
  std::string profile;
  std::string verify_key;
};

int cmd_report(const StoreArgs& s, const ReportArgs& a) {
  if (s.store.empty()) throw UsageFailure("--store (or DES_STORE) is required");
  if (!fs::is_directory(s.store)) throw UsageFailure("no store at " + s.store);
  ComplianceProfile profile = load_profile(a.profile);
  StoreOptions so;
  so.read_only = true;
  EventStore store(s.store, so);
  std::optional<PublicKey> key;
  if (!a.verify_key.empty()) key = PublicKey::from_pem(read_file(a.verify_key));
  ComplianceReport report = compliance_report(store, profile, key ? &*key : nullptr);
  if (s.json) {
    std::cout << report.to_json().dump(2) << "\n";
  } else {
    std::cout << report.to_text();
  }
  return report.overall == Verdict::satisfied ? kOk : kFindings;
}

struct KeygenArgs {
  std::string out;
  std::string public_out;
  std::string algorithm = "Ed25519";
};

int cmd_keygen(const KeygenArgs& a) {
  auto alg = parse_signature_algorithm(a.algorithm);
  if (!alg) throw UsageFailure("unknown algorithm '" + a.algorithm + "'");
  SigningKey key = SigningKey::generate(*alg);
  auto write = [](const std::string& path, const std::string& pem) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw Error(ErrorCode::io_error, "cannot write " + path);
    f << pem;
  };
  write(a.out, key.to_pem());
  fs::permissions(a.out, fs::perms::owner_read | fs::perms::owner_write, fs::perm_options::replace);
  if (!a.public_out.empty()) write(a.public_out, key.public_key().to_pem());
  std::cout << to_string(*alg) << " key written to " << a.out << "\n";
  return kOk;
}

struct RetentionArgs {
  std::string now;
  bool dry_run = false;
};

int cmd_retention(const StoreArgs& s, const RetentionArgs& a) {
  if (s.store.empty()) throw UsageFailure("--store (or DES_STORE) is required");
  TimePoint now = now_ms();
  if (!a.now.empty()) {
    auto t = parse_timestamp(a.now);
    if (!t) throw UsageFailure("bad --now timestamp");
    now = *t;
  }
  EventStore store(s.store);
  RetentionReport r = store.enforce_retention(now, a.dry_run);
  if (s.json) {
    std::cout << r.to_json().dump(2) << "\n";
  } else {
    for (const auto& p : r.deleted) std::cout << (a.dry_run ? "would delete " : "deleted ") << p.string() << "\n";
    std::cout << r.deleted.size() << " segments " << (a.dry_run ? "expired" : "deleted") << ", " << r.retained.size()
              << " retained\n";
  }
  return kOk;
}

struct ServeArgs {
  std::string config;
  std::string listen;
  std::string key;
};

IngestService* g_service = nullptr;

int cmd_serve(const StoreArgs& s, const ServeArgs& a) {
  IngestConfig cfg;
  if (!a.config.empty()) cfg = IngestConfig::from_json(parse_json(read_file(a.config)));
  cfg.apply_env();
  if (!s.store.empty()) cfg.store_path = s.store;
  if (!s.tier_policy.empty()) cfg.tier_policy_path = s.tier_policy;
  if (!a.key.empty()) cfg.signing_key_path = a.key;
  if (!a.listen.empty()) {
    auto colon = a.listen.rfind(':');
    if (colon == std::string::npos) throw UsageFailure("--listen must be host:port");
    cfg.host = a.listen.substr(0, colon);
    cfg.port = std::stoi(a.listen.substr(colon + 1));
  }
  IngestService service(cfg);
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "listening on " << cfg.host << ":" << cfg.port << ", store " << cfg.store_path.string() << "\n";
  service.run();
  g_service = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision event ledger: validate, seal, verify, enrich, convert and report"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "des 0.1.0");

  StoreArgs store_args;
  auto add_store = [&](CLI::App* sub) {
    sub->add_option("--store", store_args.store, "event store directory")->envname("DES_STORE");
  };
  auto add_policy = [&](CLI::App* sub) {
    sub->add_option("--tier-policy", store_args.tier_policy, "tier policy JSON")->envname("DES_TIER_POLICY");
  };
  auto add_json = [&](CLI::App* sub) { sub->add_flag("--json", store_args.json, "machine-readable output"); };

  ValidateArgs va;
  auto* validate_cmd = app.add_subcommand("validate", "validate event files, NDJSON streams or directories");
  validate_cmd->add_option("paths", va.paths, "files, directories or - for stdin")->required();
  validate_cmd->add_option("--tier-override", va.tier_override, "evaluate at this tier");
  validate_cmd->add_option("--stage", va.stage, "draft, sealed or auto (sealed when current_hash is present)")
      ->check(CLI::IsMember({"auto", "draft", "sealed"}));
  validate_cmd->add_flag("--json", va.json, "machine-readable output");

  SealArgs sa;
  auto add_seal_opts = [&](CLI::App* sub) {
    sub->add_option("--stream", sa.stream, "target stream (default: the draft's system_id)");
    sub->add_option("--key", sa.key, "PEM private key to sign with")->envname("DES_SIGNING_KEY");
    sub->add_option("--signer-id", sa.signer_id, "signer_id recorded in signatures");
    sub->add_option("--checkpoint-interval", sa.checkpoint_interval, "events per Merkle checkpoint")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--fsync", sa.fsync, "fsync every append");
  };
  auto* seal_cmd = app.add_subcommand("seal", "validate, seal and append drafts to a store");
  seal_cmd->add_option("paths", sa.paths, "draft files, directories or - for stdin")->required();
  add_store(seal_cmd);
  add_policy(seal_cmd);
  add_json(seal_cmd);
  add_seal_opts(seal_cmd);

  VerifyArgs vfa;
  auto* verify_cmd = app.add_subcommand("verify", "verify hash chains and checkpoints");
  verify_cmd->add_option("files", vfa.files, "stored NDJSON files to verify standalone");
  verify_cmd->add_option("--stream", vfa.streams, "streams to verify (default: all)");
  add_store(verify_cmd);
  add_json(verify_cmd);

  EnrichArgs ea;
  auto* enrich_cmd = app.add_subcommand("enrich", "attach or list enrichments for a sealed event");
  enrich_cmd->add_option("decision_id", ea.decision_id)->required();
  enrich_cmd->add_option("--kind", ea.kind, "ground_truth, quality_update or a namespaced kind");
  enrich_cmd->add_option("--payload", ea.payload, "JSON object, or @file");
  enrich_cmd->add_option("--created-at", ea.created_at, "RFC 3339 timestamp (default: now)");
  enrich_cmd->add_option("--key", ea.key, "PEM private key to sign with")->envname("DES_SIGNING_KEY");
  enrich_cmd->add_option("--signer-id", ea.signer_id);
  enrich_cmd->add_flag("--list", ea.list, "print the event with its enrichments");
  add_store(enrich_cmd);
  add_json(enrich_cmd);

  ConvertArgs ca;
  auto* convert_cmd = app.add_subcommand("convert-opa", "convert an OPA decision log into drafts");
  convert_cmd->add_option("log", ca.log, "decision log (JSON array or NDJSON), - for stdin")->required();
  convert_cmd->add_option("--out", ca.out, "write drafts as NDJSON");
  convert_cmd->add_option("--system-id", ca.system_id);
  convert_cmd->add_option("--tier", ca.tier)->check(CLI::IsMember({"lightweight", "sampled", "full"}));
  convert_cmd->add_option("--risk-level", ca.risk_level)->check(CLI::IsMember({"low", "medium", "high", "critical"}));
  convert_cmd->add_option("--decision-type", ca.decision_type);
  convert_cmd->add_option("--sensitive-key", ca.sensitive_keys, "input key whose value is stored as a digest");
  convert_cmd->add_option("--deployment-key", ca.deployment_key)->envname("DES_DEPLOYMENT_KEY");
  convert_cmd->add_flag("--seal", ca.seal, "seal the drafts into --store");
  add_store(convert_cmd);
  add_policy(convert_cmd);
  add_json(convert_cmd);
  add_seal_opts(convert_cmd);

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "measure per-tier throughput");
  bench_cmd->add_option("--tiers", ba.tiers, "all or a comma list of tiers");
  bench_cmd->add_option("--stages", ba.stages,
                        "all or a comma list of canonicalize_hash, validate, seal_append, seal_append_checkpoint");
  bench_cmd->add_option("--duration", ba.duration, "timed budget per run (500ms, 10s, 2m)");
  bench_cmd->add_option("--runs", ba.runs);
  bench_cmd->add_option("--streams", ba.streams, "parallel writer streams");
  bench_cmd->add_option("--seed", ba.seed);
  bench_cmd->add_option("--out", ba.out, "write the JSON report here");
  bench_cmd->add_flag("--fsync", ba.fsync);
  add_json(bench_cmd);

  ReportArgs ra;
  auto* report_cmd = app.add_subcommand("report", "evaluate a compliance profile over a store");
  report_cmd->add_option("--profile", ra.profile, "eu-ai-act, gdpr-logic, nist-au or a profile file")->required();
  report_cmd->add_option("--verify-key", ra.verify_key, "PEM public key; signatures must verify to count");
  add_store(report_cmd);
  add_json(report_cmd);

  KeygenArgs ka;
  auto* keygen_cmd = app.add_subcommand("keygen", "generate a signing key");
  keygen_cmd->add_option("--out", ka.out, "private key PEM")->required();
  keygen_cmd->add_option("--public-out", ka.public_out, "public key PEM");
  keygen_cmd->add_option("--algorithm", ka.algorithm)->check(CLI::IsMember({"Ed25519", "ECDSA-P256"}));

  RetentionArgs rta;
  auto* retention_cmd = app.add_subcommand("retention", "delete segments past every event's retention period");
  retention_cmd->add_option("--now", rta.now, "evaluate as of this timestamp");
  retention_cmd->add_flag("--dry-run", rta.dry_run);
  add_store(retention_cmd);
  add_json(retention_cmd);

  ServeArgs sva;
  auto* serve_cmd = app.add_subcommand("serve", "run the HTTP ingest service");
  serve_cmd->add_option("--config", sva.config, "ingest config JSON");
  serve_cmd->add_option("--listen", sva.listen, "host:port");
  serve_cmd->add_option("--key", sva.key, "PEM private key to sign with");
  add_store(serve_cmd);
  add_policy(serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(va);
    if (*seal_cmd) return seal_items(store_args, sa, read_inputs(sa.paths));
    if (*verify_cmd) return cmd_verify(store_args, vfa);
    if (*enrich_cmd) return cmd_enrich(store_args, ea);
    if (*convert_cmd) return cmd_convert_opa(store_args, ca, sa);
    if (*bench_cmd) return cmd_bench(store_args, ba);
    if (*report_cmd) return cmd_report(store_args, ra);
    if (*keygen_cmd) return cmd_keygen(ka);
    if (*retention_cmd) return cmd_retention(store_args, rta);
    if (*serve_cmd) return cmd_serve(store_args, sva);
  } catch (const UsageFailure& e) {
    std::cerr << "des: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "des: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::usage_error ? kUsage : kFindings;
  } catch (const std::exception& e) {
    std::cerr << "des: " << e.what() << "\n";
    return kFindings;
  }
  return kUsage;
}
