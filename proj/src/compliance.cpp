#include "des/compliance.hpp"

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "des/sealing.hpp"
#include "des/time.hpp"

namespace des {

namespace detail {
extern const std::pair<const char*, const char*> kBuiltinProfiles[];
extern const std::size_t kBuiltinProfileCount;
}  // namespace detail

namespace {

constexpr std::string_view kChecks[] = {"hash_chain", "retention", "tier_coverage", "signatures"};
constexpr std::string_view kOnFail[] = {"warning", "partial", "insufficient"};

Verdict worse(Verdict a, Verdict b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

Verdict verdict_for(std::string_view on_fail) {
  if (on_fail == "insufficient") return Verdict::insufficient;
  if (on_fail == "partial") return Verdict::partial;
  return Verdict::satisfied;
}

std::size_t tier_slot(EvidenceTier t) { return static_cast<std::size_t>(t) - 1; }

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::satisfied: return "satisfied";
    case Verdict::partial: return "partial";
    case Verdict::insufficient: return "insufficient";
  }
  return "insufficient";
}

ComplianceProfile ComplianceProfile::from_json(const Json& j) {
  ComplianceProfile p;
  try {
    p.profile_id = j.at("profile_id").get<std::string>();
    p.name = j.value("name", p.profile_id);
    for (const auto& r : j.at("requirements")) {
      ProfileRequirement req;
      req.id = r.at("id").get<std::string>();
      req.check = r.at("check").get<std::string>();
      req.on_fail = r.value("on_fail", std::string("insufficient"));
      req.description = r.value("description", std::string());
      req.pass_note = r.value("pass_note", std::string());
      req.fail_note = r.value("fail_note", std::string());
      if (!contains_token(kChecks, req.check)) {
        throw Error(ErrorCode::usage_error, "profile requirement '" + req.id + "': unknown check '" + req.check + "'");
      }
      if (!contains_token(kOnFail, req.on_fail)) {
        throw Error(ErrorCode::usage_error, "profile requirement '" + req.id + "': unknown on_fail '" + req.on_fail + "'");
      }
      if (req.check == "retention") {
        req.minimum = r.at("minimum").get<std::string>();
        if (!parse_iso_duration(*req.minimum)) {
          throw Error(ErrorCode::usage_error, "profile requirement '" + req.id + "': bad duration " + *req.minimum);
        }
      }
      if (req.check == "tier_coverage") {
        req.min_tier = parse_tier(r.at("min_tier").get<std::string>());
        if (!req.min_tier) throw Error(ErrorCode::usage_error, "profile requirement '" + req.id + "': unknown tier");
        req.mode = r.value("mode", std::string("any"));
        if (req.mode != "any" && req.mode != "all") {
          throw Error(ErrorCode::usage_error, "profile requirement '" + req.id + "': mode must be any or all");
        }
      }
      p.requirements.push_back(std::move(req));
    }
    if (j.contains("notes")) {
      for (const auto& n : j["notes"]) p.notes.push_back(n.get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::usage_error, std::string("malformed compliance profile: ") + e.what());
  }
  bool builtin = false;
  for (const auto& id : builtin_profile_ids()) builtin = builtin || id == p.profile_id;
  if (!builtin && !is_namespaced_token(p.profile_id)) {
    throw Error(ErrorCode::usage_error,
                "profile_id '" + p.profile_id + "' is neither built-in nor a namespaced extension");
  }
  return p;
}

std::vector<std::string> builtin_profile_ids() {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < detail::kBuiltinProfileCount; ++i) ids.emplace_back(detail::kBuiltinProfiles[i].first);
  return ids;
}

ComplianceProfile builtin_profile(std::string_view profile_id) {
  for (std::size_t i = 0; i < detail::kBuiltinProfileCount; ++i) {
    if (profile_id == detail::kBuiltinProfiles[i].first) {
      return ComplianceProfile::from_json(parse_json(detail::kBuiltinProfiles[i].second));
    }
  }
  throw Error(ErrorCode::usage_error, "unknown compliance profile '" + std::string(profile_id) + "'");
}

ComplianceProfile load_profile(std::string_view id_or_path) {
  for (const auto& id : builtin_profile_ids()) {
    if (id != id_or_path) continue;
    // An edited copy under DES_PROFILE_DIR wins over the compiled-in one.
    if (const char* dir = std::getenv("DES_PROFILE_DIR"); dir && *dir) {
      auto file = std::filesystem::path(dir) / (id + ".json");
      if (std::filesystem::is_regular_file(file)) return ComplianceProfile::from_json(parse_json(read_file(file)));
    }
    return builtin_profile(id_or_path);
  }
  std::filesystem::path path(id_or_path);
  if (std::filesystem::is_regular_file(path)) return ComplianceProfile::from_json(parse_json(read_file(path)));
  throw Error(ErrorCode::usage_error, "unknown compliance profile '" + std::string(id_or_path) + "'");
}

const RequirementResult* StreamCompliance::requirement(std::string_view id) const {
  for (const auto& r : requirements) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

Json StreamCompliance::to_json() const {
  Json reqs = Json::array();
  for (const auto& r : requirements) {
    reqs.push_back({{"id", r.id}, {"check", r.check}, {"status", r.pass ? "pass" : "fail"},
                    {"on_fail", r.on_fail}, {"detail", r.detail}});
  }
  return {{"system_id", system_id},
          {"events", events},
          {"tier_counts", {{"lightweight", tier_counts[0]}, {"sampled", tier_counts[1]}, {"full", tier_counts[2]}}},
          {"chain", {{"clean", chain_clean}, {"findings", chain_findings}}},
          {"signed_events", signed_events},
          {"inputs", {{"total", total_inputs}, {"hashed", hashed_inputs}}},
          {"requirements", reqs},
          {"warnings", warnings},
          {"notes", notes},
          {"verdict", to_string(verdict)}};
}

const StreamCompliance* ComplianceReport::stream(std::string_view system_id) const {
  for (const auto& s : streams) {
    if (s.system_id == system_id) return &s;
  }
  return nullptr;
}

Json ComplianceReport::to_json() const {
  Json list = Json::array();
  for (const auto& s : streams) list.push_back(s.to_json());
  return {{"profile", profile_id}, {"streams", list}, {"notes", notes}, {"overall", to_string(overall)}};
}

std::string ComplianceReport::to_text() const {
  std::ostringstream out;
  out << "profile " << profile_id << ": " << to_string(overall) << "\n";
  for (const auto& s : streams) {
    out << "\nstream " << s.system_id << " (" << s.events << " events; lightweight " << s.tier_counts[0]
        << ", sampled " << s.tier_counts[1] << ", full " << s.tier_counts[2] << "): " << to_string(s.verdict) << "\n";
    for (const auto& r : s.requirements) {
      out << "  [" << (r.pass ? "pass" : "FAIL") << "] " << r.id << ": " << r.detail << "\n";
    }
    for (const auto& w : s.warnings) out << "  warning: " << w << "\n";
    for (const auto& n : s.notes) out << "  note: " << n << "\n";
  }
  for (const auto& n : notes) out << "\nnote: " << n << "\n";
  return out.str();
}

ComplianceReport compliance_report(const EventStore& store, const ComplianceProfile& profile,
                                   const PublicKey* verify_key) {
  ComplianceReport report;
  report.profile_id = profile.profile_id;
  report.notes = profile.notes;

  for (const auto& system_id : store.streams()) {
    StreamCompliance sc;
    sc.system_id = system_id;
    auto chain = verify_store_stream(store, system_id);
    sc.chain_clean = chain.clean();
    sc.chain_findings = chain.error_count();

    std::vector<DecisionEvent> events;
    store.for_each_line(system_id, 0, [&](std::uint64_t, const std::string& line) {
      try {
        events.push_back(event_from_json(parse_json(line)));
      } catch (const Error&) {
        // unreadable lines already count as chain findings
      }
      return true;
    });
    sc.events = events.size();

    for (const auto& e : events) {
      if (auto t = e.tier()) ++sc.tier_counts[tier_slot(*t)];
      const auto& tm = e.temporal_metadata;
      if (tm && tm->digital_signature) {
        bool ok = true;
        if (verify_key) {
          try {
            ok = verify_signature(e, *verify_key);
          } catch (const Error&) {
            ok = false;
          }
        }
        if (ok) ++sc.signed_events;
      }
      if (e.decision_context && e.decision_context->inputs) {
        for (const auto& in : *e.decision_context->inputs) {
          ++sc.total_inputs;
          if (in.input_value && in.input_value->is_string() && is_lower_hex(in.input_value->get<std::string>(), 64)) {
            ++sc.hashed_inputs;
          }
        }
      }
    }

    for (const auto& req : profile.requirements) {
      RequirementResult rr{req.id, req.check, false, req.on_fail, {}};
      if (req.check == "hash_chain") {
        rr.pass = sc.chain_clean && sc.events > 0;
        rr.detail = rr.pass ? "hash chain verified over " + std::to_string(sc.events) + " events"
                            : std::to_string(sc.chain_findings) + " chain findings";
      } else if (req.check == "retention") {
        const IsoDuration minimum = *parse_iso_duration(*req.minimum);
        std::size_t short_or_missing = 0;
        for (const auto& e : events) {
          const auto& tm = e.temporal_metadata;
          std::optional<IsoDuration> d;
          if (tm && tm->retention_policy && tm->retention_policy->minimum_retention) {
            d = parse_iso_duration(*tm->retention_policy->minimum_retention);
          }
          std::optional<TimePoint> anchor = tm && tm->event_timestamp ? parse_timestamp(*tm->event_timestamp) : std::nullopt;
          if (!d || !anchor || !duration_at_least(*d, minimum, *anchor)) ++short_or_missing;
        }
        rr.pass = sc.events > 0 && short_or_missing == 0;
        rr.detail = rr.pass ? "every event retains for at least " + *req.minimum
                            : std::to_string(short_or_missing) + " events lack minimum_retention >= " + *req.minimum;
      } else if (req.check == "tier_coverage") {
        std::size_t covered = 0;
        for (std::size_t t = tier_slot(*req.min_tier); t < 3; ++t) covered += sc.tier_counts[t];
        rr.pass = req.mode == "all" ? (sc.events > 0 && covered == sc.events) : covered > 0;
        rr.detail = std::to_string(covered) + " of " + std::to_string(sc.events) + " events at " +
                    std::string(to_string(*req.min_tier)) + " tier or above";
      } else if (req.check == "signatures") {
        rr.pass = sc.events > 0 && sc.signed_events == sc.events;
        rr.detail = std::to_string(sc.signed_events) + " of " + std::to_string(sc.events) + " events signed" +
                    (verify_key ? " (verified)" : "");
      }
      if (rr.pass && !req.pass_note.empty()) sc.notes.push_back(req.pass_note);
      if (!rr.pass && !req.fail_note.empty()) sc.notes.push_back(req.fail_note);
      if (!rr.pass) {
        if (req.on_fail == "warning") {
          sc.warnings.push_back(req.id + ": " + req.description);
        } else {
          sc.verdict = worse(sc.verdict, verdict_for(req.on_fail));
        }
      }
      sc.requirements.push_back(std::move(rr));
    }
    if (sc.total_inputs > 0) {
      sc.notes.push_back(std::to_string(sc.hashed_inputs) + " of " + std::to_string(sc.total_inputs) +
                         " input values are digests");
    }
    report.overall = worse(report.overall, sc.verdict);
    report.streams.push_back(std::move(sc));
  }
  if (report.streams.empty()) report.overall = Verdict::insufficient;
  return report;
}

}  // namespace des
