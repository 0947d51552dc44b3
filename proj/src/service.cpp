#include "flexq/service.hpp"

#include <httplib.h>

#include <cmath>

#include <json.hpp>

#include "flexq/error.hpp"
#include "flexq/event_json.hpp"
#include "flexq/query.hpp"
#include "flexq/text.hpp"

namespace flexq {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                json details = nullptr) {
  send_json(res, status, {{"code", code}, {"message", message}, {"details", std::move(details)}});
}

// Maps engine exceptions onto status codes.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", std::string("malformed JSON body: ") + e.what());
  } catch (const SyntaxError& e) {
    send_error(res, 422, "syntax_error", e.what(), {{"position", e.position()}});
  } catch (const ParseError& e) {
    send_error(res, 422, "parse_error", e.what(), {{"line", e.line()}, {"field", e.field()}});
  } catch (const Error& e) {
    send_error(res, 422, "invalid", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal", e.what());
  }
}

std::string sse_frame(std::string_view event, std::size_t id, const json& data) {
  return "event: " + std::string(event) + "\nid: " + std::to_string(id) + "\ndata: " + data.dump() + "\n\n";
}

json terminal_json(RunState state, const std::vector<ProgressEvent>& events, const std::string& error) {
  json out = {{"state", to_string(state)},
              {"event", events.empty() ? json(nullptr) : to_json(events.back())}};
  if (state == RunState::failed) out["error"] = {{"code", "failed"}, {"message", error}, {"details", nullptr}};
  return out;
}

}  // namespace

Service::Service(ServiceConfig config) : config_(config) {}

Service::~Service() { shutdown(); }

void Service::shutdown() {
  std::vector<std::shared_ptr<Session>> sessions;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, s] : sessions_) sessions.push_back(s);
  }
  for (auto& s : sessions) {
    s->worker.request_stop();
    if (s->worker.joinable()) s->worker.join();
  }
}

std::shared_ptr<Service::Session> Service::find_session(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void Service::start(const std::shared_ptr<Session>& session) {
  auto delay = config_.batch_delay;
  // sessions_ keeps the session alive until shutdown() has joined this worker.
  Session* raw = session.get();
  raw->worker = std::jthread([session = raw, delay](std::stop_token stop) {
    Sampler sampler(session->kb->row_ids(), session->query.sample_pct, session->seed);
    std::mutex sleep_mutex;
    std::condition_variable_any sleeper;
    auto outcome = run_query(*session->kb, session->query, std::move(sampler), *session->relation, stop,
                             [&](const ProgressEvent& e) {
                               {
                                 std::lock_guard lock(session->mutex);
                                 session->events.push_back(e);
                               }
                               session->changed.notify_all();
                               if (delay.count() > 0 && !e.done) {
                                 std::unique_lock lock(sleep_mutex);
                                 sleeper.wait_for(lock, stop, delay, [] { return false; });
                               }
                             });
    {
      std::lock_guard lock(session->mutex);
      session->state = outcome.state;
      session->error = outcome.error;
    }
    session->changed.notify_all();
  });
}

void Service::register_routes(httplib::Server& server) {
  server.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (trim(req.body).empty()) {
        send_error(res, 400, "bad_request", "empty CSV body");
        return;
      }
      std::string id;
      {
        std::lock_guard lock(mutex_);
        id = "ds" + std::to_string(next_dataset_++);
      }
      std::string table = req.has_param("table") ? req.get_param_value("table") : id;
      std::optional<std::string> id_column;
      if (req.has_param("id_column")) id_column = req.get_param_value("id_column");
      std::shared_ptr<const Relation> rel;
      try {
        rel = std::make_shared<const Relation>(read_csv(req.body, table, id_column));
      } catch (const ParseError& e) {
        send_error(res, 400, "parse_error", e.what(), {{"line", e.line()}, {"field", e.field()}});
        return;
      } catch (const Error& e) {
        send_error(res, 400, "invalid_csv", e.what());
        return;
      }
      json columns = json::array();
      for (const auto& c : rel->columns()) columns.push_back({{"name", c.name}, {"numeric", c.numeric}});
      {
        std::lock_guard lock(mutex_);
        datasets_[id] = Dataset{id, rel, nullptr, nullptr};
      }
      send_json(res, 201, {{"id", id}, {"table", table}, {"rows", rel->size()}, {"columns", columns}});
    });
  });

  server.Post(R"(/datasets/([^/]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string id = req.matches[1];
      std::shared_ptr<const Relation> rel;
      {
        std::lock_guard lock(mutex_);
        auto it = datasets_.find(id);
        if (it == datasets_.end()) {
          send_error(res, 404, "not_found", "unknown dataset '" + id + "'");
          return;
        }
        rel = it->second.relation;
      }
      auto catalog = std::make_shared<const LabelCatalog>(parse_catalog(req.body));
      catalog->check_against(*rel);
      json labels = json::array();
      for (const auto& l : catalog->labels()) labels.push_back(l.key());
      {
        std::lock_guard lock(mutex_);
        datasets_[id].catalog = catalog;
        datasets_[id].kb = nullptr;  // built from the previous catalog
      }
      send_json(res, 200, {{"labels", labels}, {"count", catalog->size()}});
    });
  });

  server.Post(R"(/datasets/([^/]+)/kb)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string id = req.matches[1];
      Dataset ds;
      {
        std::lock_guard lock(mutex_);
        auto it = datasets_.find(id);
        if (it == datasets_.end()) {
          send_error(res, 404, "not_found", "unknown dataset '" + id + "'");
          return;
        }
        ds = it->second;
      }
      if (!ds.catalog) {
        send_error(res, 422, "invalid", "dataset has no label catalog; POST /datasets/" + id + "/labels first");
        return;
      }
      json body = req.body.empty() ? json::object() : json::parse(req.body);
      double threshold = body.value("threshold", 0.0);
      auto kb = std::make_shared<const KnowledgeBase>(build_kb(*ds.relation, *ds.catalog, threshold));
      {
        std::lock_guard lock(mutex_);
        datasets_[id].kb = kb;
      }
      send_json(res, 200, kb_summary(*kb));
    });
  });

  server.Post(R"(/datasets/([^/]+)/queries)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string id = req.matches[1];
      Dataset ds;
      {
        std::lock_guard lock(mutex_);
        auto it = datasets_.find(id);
        if (it == datasets_.end()) {
          send_error(res, 404, "not_found", "unknown dataset '" + id + "'");
          return;
        }
        ds = it->second;
      }
      if (!ds.kb) {
        send_error(res, 409, "no_kb", "knowledge base not built; POST /datasets/" + id + "/kb first");
        return;
      }
      json body = json::parse(req.body);
      if (!body.contains("text") || !body["text"].is_string()) {
        send_error(res, 400, "bad_request", "body needs a string field 'text'");
        return;
      }
      FlexibleQuery q = parse_query(body["text"].get<std::string>());
      if (body.contains("confidence") && !body["confidence"].is_null()) q.confidence = body["confidence"].get<double>();
      double sample_pct = kDefaultSamplePct;
      if (body.contains("sample_pct") && !body["sample_pct"].is_null()) sample_pct = body["sample_pct"].get<double>();
      std::uint64_t seed = config_.default_seed;
      if (body.contains("seed") && !body["seed"].is_null()) seed = body["seed"].get<std::uint64_t>();

      auto diagnostics = validate(q, *ds.kb, *ds.catalog);
      if (!diagnostics.empty()) {
        json details = json::array();
        for (const auto& d : diagnostics) {
          details.push_back({{"predicate", d.predicate ? json(*d.predicate) : json(nullptr)}, {"message", d.message}});
        }
        send_error(res, 422, "validation_error", diagnostics.front().message, details);
        return;
      }
      auto session = std::make_shared<Session>();
      session->relation = ds.relation;
      session->catalog = ds.catalog;
      session->kb = ds.kb;
      session->query = rewrite(q, sample_pct, *ds.kb);
      session->seed = seed;
      session->created_at = std::chrono::system_clock::now();
      {
        std::lock_guard lock(mutex_);
        session->id = "q" + std::to_string(next_session_++);
        sessions_[session->id] = session;
      }
      start(session);
      send_json(res, 202, {{"id", session->id}, {"rewritten", to_string(session->query)}, {"seed", seed}});
    });
  });

  server.Get(R"(/queries/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = find_session(req.matches[1]);
    if (!session) {
      send_error(res, 404, "not_found", "unknown query '" + std::string(req.matches[1]) + "'");
      return;
    }
    std::size_t start_at = 0;
    if (req.has_header("Last-Event-ID")) {
      if (auto last = parse_int(req.get_header_value("Last-Event-ID"))) {
        std::lock_guard lock(session->mutex);
        while (start_at < session->events.size() &&
               static_cast<long long>(session->events[start_at].batch) <= *last) {
          ++start_at;
        }
      }
    }
    auto next = std::make_shared<std::size_t>(start_at);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream", [session, next](std::size_t, httplib::DataSink& sink) {
          std::unique_lock lock(session->mutex);
          session->changed.wait_for(lock, std::chrono::milliseconds(200), [&] {
            return session->events.size() > *next || session->state != RunState::running;
          });
          std::string out;
          while (*next < session->events.size()) {
            const auto& e = session->events[*next];
            out += sse_frame("progress", e.batch, to_json(e));
            ++*next;
          }
          bool finished = session->state != RunState::running;
          std::size_t last_id = session->events.empty() ? 0 : session->events.back().batch;
          if (finished) out += sse_frame("terminal", last_id, terminal_json(session->state, session->events, session->error));
          lock.unlock();
          if (!out.empty() && !sink.write(out.data(), out.size())) return false;
          if (finished) {
            sink.done();
            return true;
          }
          return sink.is_writable();
        });
  });

  server.Post(R"(/queries/([^/]+)/cancel)", [this](const httplib::Request& req, httplib::Response& res) {
    auto session = find_session(req.matches[1]);
    if (!session) {
      send_error(res, 404, "not_found", "unknown query '" + std::string(req.matches[1]) + "'");
      return;
    }
    session->worker.request_stop();
    std::unique_lock lock(session->mutex);
    session->changed.wait(lock, [&] { return session->state != RunState::running; });
    send_json(res, 200, {{"id", session->id}, {"state", to_string(session->state)}});
  });

  server.Get(R"(/queries/([^/]+)/result)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto session = find_session(req.matches[1]);
      if (!session) {
        send_error(res, 404, "not_found", "unknown query '" + std::string(req.matches[1]) + "'");
        return;
      }
      json out;
      std::optional<double> latest;
      {
        std::lock_guard lock(session->mutex);
        out = {{"id", session->id},
               {"state", to_string(session->state)},
               {"query", to_string(session->query)},
               {"event", session->events.empty() ? json(nullptr) : to_json(session->events.back())}};
        if (!session->events.empty()) latest = session->events.back().estimate;
        if (session->state == RunState::failed) out["error"] = session->error;
      }
      if (req.has_param("exact") && req.get_param_value("exact") == "true") {
        auto exact = exact_answer(*session->kb, session->query, *session->relation);
        out["exact"] = exact.value ? json(*exact.value) : json(nullptr);
        out["deviation"] = (exact.value && latest) ? json(std::abs(*latest - *exact.value)) : json(nullptr);
      }
      send_json(res, 200, out);
    });
  });
}

}  // namespace flexq
