#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "flexq/error.hpp"
#include "flexq/workspace.hpp"

#ifndef FLEXQ_CLI_PATH
#error "FLEXQ_CLI_PATH must point at the flexq binary"
#endif

namespace fs = std::filesystem;
using namespace flexq;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("flexq-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult cli(const fs::path& ws, const std::string& args) {
  std::string cmd = std::string(FLEXQ_CLI_PATH) + " --workspace '" + ws.string() + "' " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("workspace enforces pipeline order") {
  TempDir tmp;
  Workspace ws(tmp.path / "ws");
  CHECK_THROWS_AS(ws.relation(), PipelineError);
  CHECK_THROWS_AS(ws.kb(), PipelineError);
  write(tmp.path / "e.csv", fixtures::kEmployeeCsv);
  write(tmp.path / "l.cfg", fixtures::kEmployeeLabels);
  CHECK_THROWS_AS(ws.set_labels(tmp.path / "l.cfg"), PipelineError);

  ws.ingest(tmp.path / "e.csv", "employee");
  CHECK(ws.relation().size() == 6);
  CHECK_THROWS_AS(ws.labels(), PipelineError);
  CHECK_THROWS_AS(ws.build(0.4), PipelineError);
  ws.set_labels(tmp.path / "l.cfg");
  KnowledgeBase built = ws.build(0.4);
  CHECK(ws.kb() == built);
  CHECK(built == fixtures::employee_kb());

  // New labels invalidate the KB; a new dataset invalidates both.
  ws.set_labels(tmp.path / "l.cfg");
  CHECK_THROWS_AS(ws.kb(), PipelineError);
  ws.build(0.4);
  ws.ingest(tmp.path / "e.csv", "employee");
  CHECK_THROWS_AS(ws.labels(), PipelineError);
  CHECK_THROWS_AS(ws.kb(), PipelineError);
}

TEST_CASE("cli pipeline and exit codes") {
  TempDir tmp;
  fs::path ws = tmp.path / "ws";
  write(tmp.path / "e.csv", fixtures::kEmployeeCsv);
  write(tmp.path / "l.cfg", fixtures::kEmployeeLabels);
  std::string query = std::string("query \"") + fixtures::kEmployeeQuery + "\"";

  CHECK(cli(ws, query).code == 2);
  CHECK(cli(ws, "ingest '" + (tmp.path / "e.csv").string() + "' --table employee").code == 0);
  CHECK(cli(ws, "build-kb --threshold 0.4").code == 2);
  CHECK(cli(ws, "labels '" + (tmp.path / "l.cfg").string() + "'").code == 0);
  CHECK(cli(ws, "build-kb --threshold 3").code == 2);
  CHECK(cli(ws, "build-kb --threshold 0.4").code == 0);

  auto watch = cli(ws, query + " --watch --sample-pct 20 --seed 7 --exact");
  CHECK(watch.code == 0);
  auto again = cli(ws, query + " --watch --sample-pct 20 --seed 7 --exact");
  CHECK(again.out == watch.out);

  std::vector<std::string> lines;
  std::istringstream in(watch.out);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() >= 8);
  CHECK(lines[0].rfind("# SELECT AVG(Salary), 0.95 AS confidence", 0) == 0);
  CHECK(lines[1] == "batch\tn\tm\testimate\terror_rate\tconfidence\tcomplete\tdone");
  for (int i = 2; i < 8; ++i) {
    int tabs = 0;
    for (char ch : lines[i]) tabs += ch == '\t';
    CHECK(tabs == 7);
  }
  CHECK(lines[7].find("293.333") != std::string::npos);
  CHECK(lines[7].substr(lines[7].size() - 3) == "yes");
  CHECK(watch.out.find("exact\t293.333\n") != std::string::npos);
  CHECK(watch.out.find("deviation\t0\n") != std::string::npos);

  auto terminal = cli(ws, query + " --sample-pct 20");
  CHECK(terminal.code == 0);
  std::size_t data_lines = 0;
  std::istringstream tin(terminal.out);
  for (std::string line; std::getline(tin, line);) data_lines += !line.empty() && line[0] != '#';
  CHECK(data_lines == 2);

  CHECK(cli(ws, "query \"SELECT MAX(Salary) FROM employee WHERE Age IS Young\"").code == 2);
  CHECK(cli(ws, "query \"SELECT AVG(Salary) FROM employee WHERE Age IS ancient\"").code == 2);
  CHECK(cli(ws, query + " --sample-pct 0").code == 2);
  CHECK(cli(ws, "frobnicate").code == 2);

  auto concepts = cli(ws, "concepts \"" + std::string(fixtures::kEmployeeQuery) + "\" --sample-pct 100");
  CHECK(concepts.code == 0);
  CHECK(concepts.out.rfind("C#\tNiv#", 0) == 0);
}
