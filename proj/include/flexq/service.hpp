#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "flexq/aggregator.hpp"
#include "flexq/knowledge_base.hpp"
#include "flexq/label_catalog.hpp"
#include "flexq/relation.hpp"

namespace httplib {
class Server;
}

namespace flexq {

struct ServiceConfig {
  // Pause after each streamed batch; 0 runs queries flat out.
  std::chrono::milliseconds batch_delay{0};
  std::uint64_t default_seed = 0;
};

// HTTP front end:
//   POST /datasets                    CSV body (?table=, ?id_column=) -> {id}
//   POST /datasets/{id}/labels        label catalog body -> {labels}
//   POST /datasets/{id}/kb            {threshold} -> KB summary
//   POST /datasets/{id}/queries       {text, confidence?, sample_pct?, seed?} -> 202 {id}
//   GET  /queries/{id}/events         SSE: `progress` per batch, then `terminal`
//   POST /queries/{id}/cancel         -> {state}
//   GET  /queries/{id}/result         (?exact=true) -> latest event [+ exact answer]
// Errors are JSON {code, message, details}.
class Service {
 public:
  explicit Service(ServiceConfig config = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void register_routes(httplib::Server& server);

  // Stops every running session and waits for its worker.
  void shutdown();

 private:
  struct Dataset {
    std::string id;
    std::shared_ptr<const Relation> relation;
    std::shared_ptr<const LabelCatalog> catalog;
    std::shared_ptr<const KnowledgeBase> kb;
  };

  struct Session {
    std::string id;
    std::shared_ptr<const Relation> relation;
    std::shared_ptr<const LabelCatalog> catalog;
    std::shared_ptr<const KnowledgeBase> kb;
    ApproximateQuery query;
    std::uint64_t seed = 0;
    std::chrono::system_clock::time_point created_at;

    std::mutex mutex;
    std::condition_variable changed;
    RunState state = RunState::running;
    std::vector<ProgressEvent> events;
    std::string error;
    std::jthread worker;
  };

  std::shared_ptr<Session> find_session(const std::string& id) const;
  void start(const std::shared_ptr<Session>& session);

  ServiceConfig config_;
  mutable std::mutex mutex_;
  std::map<std::string, Dataset> datasets_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_dataset_ = 1;
  std::uint64_t next_session_ = 1;
};

}  // namespace flexq
