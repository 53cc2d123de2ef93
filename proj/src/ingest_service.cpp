#include "des/ingest_service.hpp"

#include <httplib.h>

#include <cstdlib>

#include "des/enrichment.hpp"
#include "des/time.hpp"

namespace des {

namespace {

HttpResult json_result(int status, const Json& body) { return {status, body.dump(), "application/json"}; }

HttpResult error_result(int status, const Error& e) {
  Json body = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (!e.path().empty()) body["path"] = e.path();
  if (const auto* se = dynamic_cast<const SyntaxError*>(&e)) body["byte_offset"] = se->byte_offset();
  return json_result(status, body);
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::syntax_error:
    case ErrorCode::null_forbidden:
    case ErrorCode::format_error:
      return 400;
    case ErrorCode::duplicate_sequence:
    case ErrorCode::duplicate_decision:
      return 409;
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::io_error:
    case ErrorCode::crypto_error:
      return 500;
    default:
      return 422;
  }
}

const char* env(const char* name) {
  const char* v = std::getenv(name);
  return v && *v ? v : nullptr;
}

}  // namespace

IngestConfig IngestConfig::from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::usage_error, "ingest config must be a JSON object");
  IngestConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "host") c.host = value.get<std::string>();
      else if (key == "port") c.port = value.get<int>();
      else if (key == "store_path") c.store_path = value.get<std::string>();
      else if (key == "tier_policy_path") c.tier_policy_path = value.get<std::string>();
      else if (key == "signing_key_path") c.signing_key_path = value.get<std::string>();
      else if (key == "signer_id") c.signer_id = value.get<std::string>();
      else if (key == "deployment_key") c.deployment_key = value.get<std::string>();
      else if (key == "checkpoint_interval") c.checkpoint_interval = value.get<std::uint64_t>();
      else throw Error(ErrorCode::usage_error, "unknown ingest config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::usage_error, std::string("malformed ingest config: ") + e.what());
  }
  return c;
}

void IngestConfig::apply_env() {
  if (const char* v = env("DES_LISTEN")) {
    std::string s = v;
    auto colon = s.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::usage_error, "DES_LISTEN must be host:port");
    host = s.substr(0, colon);
    try {
      port = std::stoi(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::usage_error, "DES_LISTEN port is not a number");
    }
  }
  if (const char* v = env("DES_STORE")) store_path = v;
  if (const char* v = env("DES_TIER_POLICY")) tier_policy_path = v;
  if (const char* v = env("DES_SIGNING_KEY")) signing_key_path = v;
  if (const char* v = env("DES_DEPLOYMENT_KEY")) deployment_key = v;
}

IngestService::IngestService(IngestConfig config, StoreOptions store_options) : config_(std::move(config)) {
  if (config_.tier_policy_path) policy_ = load_tier_policy(*config_.tier_policy_path);
  if (config_.signing_key_path) key_ = SigningKey::from_pem(read_file(*config_.signing_key_path));
  store_ = std::make_unique<EventStore>(config_.store_path, store_options);
  LedgerOptions lo;
  lo.checkpoint_interval = config_.checkpoint_interval;
  if (key_) lo.signing = SigningRequest{&*key_, config_.signer_id, ""};
  ledger_ = std::make_unique<Ledger>(*store_, lo);
}

IngestService::~IngestService() { stop(); }

HttpResult IngestService::handle_ingest(std::string_view body, std::string_view system_id) {
  DecisionEvent draft;
  try {
    draft = parse_event(body);
  } catch (const Error& e) {
    return error_result(400, e);
  }

  // An undeclared tier comes from the policy; a full draft may be reduced
  // to the tier the policy selects. Explicit lower tiers are kept.
  const TierPolicy policy = policy_.value_or(TierPolicy{});
  auto declared = draft.tier();
  bool has_tier = draft.temporal_metadata && draft.temporal_metadata->evidence_tier;
  if (!has_tier) {
    if (!draft.temporal_metadata) draft.temporal_metadata.emplace();
    draft.temporal_metadata->evidence_tier = std::string(to_string(select_tier(draft, policy)));
  } else if (policy_ && declared == EvidenceTier::full) {
    EvidenceTier selected = select_tier(draft, *policy_);
    if (selected != EvidenceTier::full) draft = project_to_tier(draft, selected);
  }

  try {
    AppendResult r = ledger_->append(draft, system_id);
    Json out = {{"decision_id", r.event.decision_id() ? *r.event.decision_id() : std::string()},
                {"system_id", r.location.system_id},
                {"sequence_number", *r.event.sequence_number()},
                {"current_hash", *r.event.current_hash()},
                {"evidence_tier", r.event.temporal_metadata->evidence_tier.value_or("")}};
    if (r.checkpoint) out["checkpoint_id"] = r.checkpoint->checkpoint_id;
    return json_result(201, out);
  } catch (const RejectedInvalid& e) {
    return json_result(422, e.report().to_json());
  } catch (const Error& e) {
    return error_result(status_for(e.code()), e);
  }
}

HttpResult IngestService::handle_get_event(std::string_view decision_id) const {
  auto bytes = store_->lookup_bytes(decision_id);
  if (!bytes) return json_result(404, {{"error", "NotFound"}, {"message", "unknown decision_id"}});
  return {200, std::move(*bytes), "application/json"};
}

HttpResult IngestService::handle_get_enrichments(std::string_view decision_id) const {
  if (!store_->locate(decision_id)) {
    return json_result(404, {{"error", "NotFound"}, {"message", "unknown decision_id"}});
  }
  Json list = Json::array();
  for (const auto& r : store_->enrichments_for(decision_id)) list.push_back(r.to_json());
  return json_result(200, list);
}

HttpResult IngestService::handle_post_enrichment(std::string_view body) {
  try {
    Json req = parse_json(body);
    if (!req.is_object()) throw Error(ErrorCode::format_error, "request body must be an object");
    auto str = [&](const char* key) -> std::optional<std::string> {
      auto it = req.find(key);
      if (it == req.end()) return std::nullopt;
      if (!it->is_string()) throw Error(ErrorCode::format_error, std::string(key) + " must be a string", key);
      return it->get<std::string>();
    };
    auto decision_id = str("decision_id");
    auto kind = str("kind");
    if (!decision_id || !kind) throw Error(ErrorCode::format_error, "decision_id and kind are required");
    auto target = store_->lookup(*decision_id);
    if (!target) return json_result(404, {{"error", "NotFound"}, {"message", "unknown decision_id"}});
    Json payload = req.contains("payload") ? req["payload"] : Json::object();
    std::string created_at = str("created_at").value_or(format_timestamp(now_ms()));
    EnrichmentRecord rec = create_enrichment(*target, *kind, std::move(payload), created_at, str("enrichment_id"));
    if (key_) sign_enrichment(rec, *key_, config_.signer_id);
    store_->append_enrichment(rec);
    return json_result(201, rec.to_json());
  } catch (const Error& e) {
    return error_result(status_for(e.code()), e);
  }
}

HttpResult IngestService::handle_verify(std::string_view system_id) const {
  if (!store_->has_stream(system_id)) {
    return json_result(404, {{"error", "NotFound"}, {"message", "unknown stream"}});
  }
  return json_result(200, verify_store_stream(*store_, system_id).to_json());
}

void IngestService::install_routes() {
  server_ = std::make_unique<httplib::Server>();
  auto reply = [](httplib::Response& res, const HttpResult& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server_->Post("/v1/events", [this, reply](const httplib::Request& req, httplib::Response& res) {
    std::string sid = req.has_param("system_id") ? req.get_param_value("system_id") : std::string();
    reply(res, handle_ingest(req.body, sid));
  });
  server_->Get(R"(/v1/events/([^/]+)/enrichments)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_get_enrichments(req.matches[1].str()));
  });
  server_->Get(R"(/v1/events/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_get_event(req.matches[1].str()));
  });
  server_->Post("/v1/enrichments", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_post_enrichment(req.body));
  });
  server_->Get(R"(/v1/streams/([^/]+)/verify)", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, handle_verify(req.matches[1].str()));
  });
  server_->set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(Json{{"error", "Internal"}, {"message", msg}}.dump(), "application/json");
  });
}

int IngestService::start() {
  install_routes();
  int port = config_.port;
  if (port == 0) {
    port = server_->bind_to_any_port(config_.host);
  } else if (!server_->bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) throw Error(ErrorCode::io_error, "cannot bind " + config_.host + ":" + std::to_string(config_.port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void IngestService::run() {
  install_routes();
  if (!server_->listen(config_.host, config_.port)) {
    throw Error(ErrorCode::io_error, "cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
}

void IngestService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace des
