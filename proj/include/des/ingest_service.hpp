#pragma once

// HTTP facade over parse -> tier -> validate/seal -> append.
//
//   POST /v1/events[?system_id=S]          201 | 400 | 409 | 422 | 500
//   GET  /v1/events/{decision_id}           stored bytes | 404
//   GET  /v1/events/{decision_id}/enrichments
//   POST /v1/enrichments                    201 | 400 | 404 | 422
//   GET  /v1/streams/{system_id}/verify     report | 404
//
// The handlers are plain methods so they can be exercised without sockets.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "des/event_store.hpp"
#include "des/tiering.hpp"

namespace httplib {
class Server;
}

namespace des {

struct IngestConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path store_path = "des-store";
  std::optional<std::filesystem::path> tier_policy_path;
  std::optional<std::filesystem::path> signing_key_path;  // PEM private key
  std::string signer_id = "ingest";
  std::string deployment_key;
  std::uint64_t checkpoint_interval = kDefaultCheckpointInterval;

  // Keys as above (paths as strings); unknown keys are rejected.
  static IngestConfig from_json(const Json& j);
  // DES_LISTEN (host:port), DES_STORE, DES_TIER_POLICY, DES_SIGNING_KEY,
  // DES_DEPLOYMENT_KEY override the corresponding fields.
  void apply_env();
};

struct HttpResult {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class IngestService {
 public:
  explicit IngestService(IngestConfig config, StoreOptions store_options = {});
  ~IngestService();

  HttpResult handle_ingest(std::string_view body, std::string_view system_id = {});
  HttpResult handle_get_event(std::string_view decision_id) const;
  HttpResult handle_get_enrichments(std::string_view decision_id) const;
  HttpResult handle_post_enrichment(std::string_view body);
  HttpResult handle_verify(std::string_view system_id) const;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  // Serves on the calling thread until stop().
  void run();
  void stop();

  EventStore& store() { return *store_; }

 private:
  void install_routes();

  IngestConfig config_;
  std::optional<TierPolicy> policy_;
  std::optional<SigningKey> key_;
  std::unique_ptr<EventStore> store_;
  std::unique_ptr<Ledger> ledger_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace des
