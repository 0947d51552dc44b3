#include <doctest.h>
#include <httplib.h>

#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "flexq/service.hpp"

using json = nlohmann::json;

namespace {

struct Frame {
  std::string event;
  std::size_t id = 0;
  json data;
};

std::vector<Frame> parse_sse(const std::string& text) {
  std::vector<Frame> out;
  std::istringstream in(text);
  std::string line;
  Frame cur;
  while (std::getline(in, line)) {
    if (line.empty()) {
      if (!cur.event.empty()) out.push_back(cur);
      cur = Frame{};
    } else if (line.rfind("event: ", 0) == 0) {
      cur.event = line.substr(7);
    } else if (line.rfind("id: ", 0) == 0) {
      cur.id = std::stoul(line.substr(4));
    } else if (line.rfind("data: ", 0) == 0) {
      cur.data = json::parse(line.substr(6));
    }
  }
  return out;
}

class TestServer {
 public:
  explicit TestServer(flexq::ServiceConfig config = {}) : service_(config) {
    service_.register_routes(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    service_.shutdown();
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }

 private:
  httplib::Server server_;
  flexq::Service service_;
  int port_ = 0;
  std::thread thread_;
};

std::string events_of(httplib::Client& c, const std::string& qid, const httplib::Headers& headers = {}) {
  std::string body;
  auto res = c.Get("/queries/" + qid + "/events", headers, [&](const char* data, std::size_t len) {
    body.append(data, len);
    return true;
  });
  REQUIRE(res);
  CHECK(res->status == 200);
  return body;
}

// Uploads the employee dataset and labels and builds the KB; returns the dataset id.
std::string setup_employee(httplib::Client& c, const char* csv = fixtures::kEmployeeCsv) {
  auto res = c.Post("/datasets?table=employee", csv, "text/csv");
  REQUIRE(res);
  REQUIRE(res->status == 201);
  std::string id = json::parse(res->body)["id"];
  res = c.Post("/datasets/" + id + "/labels", fixtures::kEmployeeLabels, "text/plain");
  REQUIRE(res->status == 200);
  res = c.Post("/datasets/" + id + "/kb", R"({"threshold": 0.4})", "application/json");
  REQUIRE(res->status == 200);
  return id;
}

std::string big_csv(std::size_t m) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 100);
  std::string csv = "id,Age,Salary\n";
  for (std::size_t i = 1; i <= m; ++i) csv += std::to_string(i) + "," + std::to_string(u(rng)) + "," + std::to_string(u(rng) * 10) + "\n";
  return csv;
}

}  // namespace

TEST_CASE("dataset, labels and KB endpoints") {
  TestServer server;
  auto c = server.client();

  auto res = c.Post("/datasets", "", "text/csv");
  REQUIRE(res);
  CHECK(res->status == 400);
  json err = json::parse(res->body);
  CHECK(err.contains("code"));
  CHECK(err.contains("message"));
  CHECK(err.contains("details"));

  res = c.Post("/datasets", "id,Age\n1,2\nx,3\n", "text/csv");
  CHECK(res->status == 400);
  CHECK(json::parse(res->body)["details"]["line"] == 3);

  res = c.Post("/datasets?table=employee", "id,Age,Salary\n1,25,400\n2,27,550\n", "text/csv");
  REQUIRE(res->status == 201);
  std::string id = json::parse(res->body)["id"];

  res = c.Post("/datasets/" + id + "/kb", R"({"threshold": 0.4})", "application/json");
  CHECK(res->status == 422);

  res = c.Post("/datasets/" + id + "/labels", "Age Young trapezoid 0 0\n", "text/plain");
  CHECK(res->status == 422);
  res = c.Post("/datasets/" + id + "/labels", "Height Tall singleton 1\n", "text/plain");
  CHECK(res->status == 422);
  res = c.Post("/datasets/nope/labels", fixtures::kFiveLabels, "text/plain");
  CHECK(res->status == 404);

  res = c.Post("/datasets/" + id + "/labels", fixtures::kFiveLabels, "text/plain");
  REQUIRE(res->status == 200);
  CHECK(json::parse(res->body)["labels"].size() == 5);

  res = c.Post("/datasets/" + id + "/kb", R"({"threshold": 2})", "application/json");
  CHECK(res->status == 422);
  res = c.Post("/datasets/nope/kb", R"({"threshold": 0.4})", "application/json");
  CHECK(res->status == 404);

  res = c.Post("/datasets/" + id + "/kb", R"({"threshold": 0.4})", "application/json");
  REQUIRE(res->status == 200);
  json summary = json::parse(res->body);
  CHECK(summary["m"] == 2);
  CHECK(summary["labels"].size() == 5);
  CHECK(summary["stored_degrees"] == 6);
  CHECK(summary.contains("ranges"));

  res = c.Post("/datasets/" + id + "/kb", R"({"threshold": 0})", "application/json");
  CHECK(json::parse(res->body)["stored_degrees"] == 7);
}

TEST_CASE("query lifecycle with event stream and result") {
  TestServer server;
  auto c = server.client();
  std::string id = setup_employee(c);

  auto res = c.Post("/datasets/" + id + "/queries", json{{"text", fixtures::kEmployeeQuery}, {"sample_pct", 20}, {"seed", 4}}.dump(),
                    "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 202);
  json created = json::parse(res->body);
  std::string qid = created["id"];
  CHECK(created["seed"] == 4);

  auto frames = parse_sse(events_of(c, qid));
  REQUIRE(frames.size() == 7);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(frames[i].event == "progress");
    CHECK(frames[i].id == i + 1);
    const json& e = frames[i].data;
    for (const char* key : {"batch", "n", "m", "estimate", "error_rate", "confidence", "fraction", "done", "diagnosis"}) {
      CHECK(e.contains(key));
    }
    CHECK(e.size() == 9);
    CHECK(e["batch"] == i + 1);
    CHECK(e["done"] == (i == 5));
  }
  CHECK(frames[6].event == "terminal");
  CHECK(frames[6].data["state"] == "done");
  double last = frames[5].data["estimate"];
  CHECK(last == doctest::Approx(3520.0 / 6 * 0.5));
  CHECK(frames[5].data["error_rate"] == 0.0);
  json diag = frames[5].data["diagnosis"];
  REQUIRE(diag.size() == 2);
  CHECK(diag[0]["intent"] == json::array({"Salary-Low"}));
  CHECK(diag[0]["extent"] == 4);

  auto resumed = parse_sse(events_of(c, qid, {{"Last-Event-ID", "4"}}));
  REQUIRE(resumed.size() == 3);
  CHECK(resumed[0].id == 5);

  res = c.Get("/queries/" + qid + "/result?exact=true");
  REQUIRE(res->status == 200);
  json result = json::parse(res->body);
  CHECK(result["state"] == "done");
  CHECK(std::abs(result["event"]["estimate"].get<double>() - result["exact"].get<double>()) <= 1e-9 * last);
  CHECK(result["deviation"].get<double>() <= 1e-9 * last);

  res = c.Post("/queries/" + qid + "/cancel", "", "application/json");
  CHECK(json::parse(res->body)["state"] == "done");

  CHECK(c.Get("/queries/nope/events")->status == 404);
  CHECK(c.Get("/queries/nope/result")->status == 404);
  CHECK(c.Post("/queries/nope/cancel", "", "application/json")->status == 404);
}

TEST_CASE("query validation errors") {
  TestServer server;
  auto c = server.client();
  auto res = c.Post("/datasets?table=employee", fixtures::kEmployeeCsv, "text/csv");
  std::string id = json::parse(res->body)["id"];
  res = c.Post("/datasets/" + id + "/queries", json{{"text", fixtures::kEmployeeQuery}}.dump(), "application/json");
  CHECK(res->status == 409);

  id = setup_employee(c);
  res = c.Post("/datasets/" + id + "/queries",
               json{{"text", "SELECT AVG(Salary) FROM employee WHERE Age IS ancient"}}.dump(), "application/json");
  REQUIRE(res->status == 422);
  json err = json::parse(res->body);
  CHECK(err["code"] == "validation_error");
  CHECK(err["details"][0]["predicate"] == 0);

  res = c.Post("/datasets/" + id + "/queries", json{{"text", "SELECT MAX(Salary) FROM employee WHERE Age IS Young"}}.dump(),
               "application/json");
  CHECK(res->status == 422);
  CHECK(json::parse(res->body)["details"]["position"] == 7);

  res = c.Post("/datasets/" + id + "/queries", "{not json", "application/json");
  CHECK(res->status == 400);

  res = c.Post("/datasets/" + id + "/queries", json{{"text", fixtures::kEmployeeQuery}}.dump(), "application/json");
  REQUIRE(res->status == 202);
  CHECK(json::parse(res->body)["rewritten"].get<std::string>().find("SAMPLE 1 PERCENT") != std::string::npos);
}

TEST_CASE("cancel a running query") {
  flexq::ServiceConfig config;
  config.batch_delay = std::chrono::milliseconds(20);
  TestServer server(config);
  auto c = server.client();
  std::string id = setup_employee(c, big_csv(2000).c_str());

  auto res = c.Post("/datasets/" + id + "/queries",
                    json{{"text", "SELECT COUNT(*) FROM employee WHERE Age IS Young"}, {"sample_pct", 1}}.dump(),
                    "application/json");
  REQUIRE(res->status == 202);
  std::string qid = json::parse(res->body)["id"];

  // Wait for a few events, then cancel.
  for (int i = 0; i < 200; ++i) {
    auto r = json::parse(c.Get("/queries/" + qid + "/result")->body);
    if (!r["event"].is_null() && r["event"]["batch"].get<int>() >= 3) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  auto before = json::parse(c.Get("/queries/" + qid + "/result")->body);
  CHECK(before["state"] == "running");
  int seen = before["event"]["batch"];

  res = c.Post("/queries/" + qid + "/cancel", "", "application/json");
  CHECK(json::parse(res->body)["state"] == "cancelled");
  res = c.Post("/queries/" + qid + "/cancel", "", "application/json");
  CHECK(json::parse(res->body)["state"] == "cancelled");

  auto frames = parse_sse(events_of(c, qid));
  REQUIRE(frames.size() >= 2);
  CHECK(frames.back().event == "terminal");
  CHECK(frames.back().data["state"] == "cancelled");
  const auto& last_progress = frames[frames.size() - 2];
  CHECK_FALSE(last_progress.data["done"].get<bool>());
  CHECK(last_progress.data["batch"].get<int>() <= seen + 1);
  for (std::size_t i = 1; i + 1 < frames.size(); ++i) CHECK(frames[i].id > frames[i - 1].id);
}

TEST_CASE("concurrent sessions over one KB") {
  TestServer server;
  auto c = server.client();
  std::string id = setup_employee(c, big_csv(3000).c_str());
  std::vector<std::string> qids;
  for (int i = 0; i < 4; ++i) {
    auto res = c.Post("/datasets/" + id + "/queries",
                      json{{"text", "SELECT AVG(Salary) FROM employee WHERE Age IS Young"}, {"sample_pct", 5}, {"seed", i}}.dump(),
                      "application/json");
    REQUIRE(res->status == 202);
    qids.push_back(json::parse(res->body)["id"]);
  }
  std::vector<double> finals;
  for (const auto& q : qids) {
    auto frames = parse_sse(events_of(c, q));
    REQUIRE(frames.size() == 21);
    finals.push_back(frames[19].data["estimate"]);
  }
  for (double f : finals) CHECK(f == doctest::Approx(finals[0]).epsilon(1e-9));
}
