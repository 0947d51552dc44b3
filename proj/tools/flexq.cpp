// flexq: command-line driver for flexible aggregate queries.
//
//   flexq ingest employee.csv --table employee
//   flexq labels labels.cfg
//   flexq build-kb --threshold 0.4
//   flexq query "SELECT AVG(Salary) FROM employee WHERE Age IS Young" --watch --exact
//   flexq serve --port 8080
//
// Exit codes: 0 success, 1 internal error, 2 validation error, 3 cancelled.

#include <CLI11.hpp>
#include <httplib.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <stop_token>
#include <thread>

#include "flexq/aggregator.hpp"
#include "flexq/concept_table.hpp"
#include "flexq/error.hpp"
#include "flexq/query.hpp"
#include "flexq/service.hpp"
#include "flexq/text.hpp"
#include "flexq/workspace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCancelled = 3;

volatile std::sig_atomic_t g_interrupted = 0;

extern "C" void on_interrupt(int) { g_interrupted = 1; }

std::string number(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

void print_header() { std::cout << "batch\tn\tm\testimate\terror_rate\tconfidence\tcomplete\tdone\n"; }

void print_event(const flexq::ProgressEvent& e) {
  char complete[32];
  std::snprintf(complete, sizeof(complete), "%.2f%%", 100.0 * e.fraction);
  std::cout << e.batch << '\t' << e.n << '\t' << e.m << '\t' << number(e.estimate) << '\t'
            << (e.error_rate ? "±" + number(e.error_rate) : std::string("NA")) << '\t'
            << number(e.confidence) << '\t' << complete << '\t' << (e.done ? "yes" : "no") << '\n';
}

void print_diagnosis(const flexq::ProgressEvent& e) {
  if (e.diagnosis.empty()) return;
  std::cout << "# no sampled tuple satisfies every predicate; satisfiable relaxations:\n";
  for (const auto& s : e.diagnosis) {
    std::string labels;
    for (const auto& l : s.labels) labels += (labels.empty() ? "" : " AND ") + l;
    std::cout << "#   " << labels << " (" << s.extent_size << " tuples)\n";
  }
}

struct QueryOptions {
  std::string text;
  std::optional<double> confidence;
  double sample_pct = flexq::kDefaultSamplePct;
  std::uint64_t seed = 0;
  bool watch = false;
  bool exact = false;
  std::size_t batch = 1;
};

// Parses, validates and rewrites; diagnostics go to stderr.
std::optional<flexq::ApproximateQuery> prepare(const QueryOptions& opt, const flexq::KnowledgeBase& kb,
                                               const flexq::LabelCatalog& labels) {
  flexq::FlexibleQuery q = flexq::parse_query(opt.text);
  if (opt.confidence) q.confidence = *opt.confidence;
  auto diagnostics = flexq::validate(q, kb, labels);
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) std::cerr << "error: " << d.message << '\n';
    return std::nullopt;
  }
  return flexq::rewrite(q, opt.sample_pct, kb);
}

int run_query_command(const flexq::Workspace& ws, const QueryOptions& opt) {
  auto rel = ws.relation();
  auto labels = ws.labels();
  auto kb = ws.kb();
  auto aq = prepare(opt, kb, labels);
  if (!aq) return kExitValidation;

  std::cout << "# " << flexq::to_string(*aq) << '\n';
  print_header();
  std::stop_source stop;
  std::signal(SIGINT, on_interrupt);
  std::optional<flexq::ProgressEvent> last;
  auto outcome = flexq::run_query(kb, *aq, flexq::Sampler(kb.row_ids(), aq->sample_pct, opt.seed), rel,
                                  stop.get_token(), [&](const flexq::ProgressEvent& e) {
                                    if (opt.watch) {
                                      print_event(e);
                                      std::cout.flush();
                                    }
                                    last = e;
                                    if (g_interrupted) stop.request_stop();
                                  });
  std::signal(SIGINT, SIG_DFL);
  if (outcome.state == flexq::RunState::failed) {
    std::cerr << "error: " << outcome.error << '\n';
    return kExitValidation;
  }
  if (last) {
    if (!opt.watch) print_event(*last);
    print_diagnosis(*last);
  }
  if (opt.exact) {
    auto exact = flexq::exact_answer(kb, *aq, rel);
    std::cout << "exact\t" << number(exact.value) << '\n';
    std::optional<double> deviation;
    if (exact.value && last && last->estimate) deviation = std::abs(*last->estimate - *exact.value);
    std::cout << "deviation\t" << number(deviation) << '\n';
  }
  if (outcome.state == flexq::RunState::cancelled) {
    std::cout << "# cancelled\n";
    return kExitCancelled;
  }
  return kExitOk;
}

int run_concepts_command(const flexq::Workspace& ws, const QueryOptions& opt) {
  auto rel = ws.relation();
  auto labels = ws.labels();
  auto kb = ws.kb();
  auto aq = prepare(opt, kb, labels);
  if (!aq) return kExitValidation;
  auto bound = flexq::bind_query(aq->base, kb, rel);
  flexq::Sampler sampler(kb.row_ids(), aq->sample_pct, opt.seed);
  for (std::size_t i = 1;; ++i) {
    auto batch = sampler.next_batch();
    if (!batch) {
      std::cerr << "error: only " << i - 1 << " batches at this sample percentage\n";
      return kExitValidation;
    }
    if (i == opt.batch) {
      std::cout << flexq::to_text(flexq::build_concepts_table(flexq::build_context(*batch, kb, bound)));
      return kExitOk;
    }
  }
}

int run_serve_command(const std::string& host, int port, int delay_ms, std::uint64_t seed) {
  httplib::Server server;
  flexq::Service service(flexq::ServiceConfig{std::chrono::milliseconds(delay_ms), seed});
  service.register_routes(server);
  std::signal(SIGINT, on_interrupt);
  std::signal(SIGTERM, on_interrupt);
  std::jthread watcher([&](std::stop_token st) {
    while (!st.stop_requested()) {
      if (g_interrupted) {
        server.stop();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  });
  std::cerr << "listening on " << host << ":" << port << '\n';
  bool ok = server.listen(host, port);
  service.shutdown();
  return ok || g_interrupted ? kExitOk : kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate answers to flexible (fuzzy-predicate) aggregate queries"};
  app.require_subcommand(1);
  std::string workspace = ".flexq";
  app.add_option("-w,--workspace", workspace, "Workspace directory holding the dataset, labels and KB")
      ->capture_default_str();

  std::string csv, table, id_column;
  auto* ingest = app.add_subcommand("ingest", "Load a CSV dataset into the workspace");
  ingest->add_option("csv", csv, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  ingest->add_option("--table", table, "Table name used in FROM clauses")->required();
  ingest->add_option("--id-column", id_column, "Row-id column (default: first column)");

  std::string config;
  auto* labels = app.add_subcommand("labels", "Install a linguistic label catalog");
  labels->add_option("config", config, "Label catalog file")->required()->check(CLI::ExistingFile);

  double threshold = 0.0;
  auto* build = app.add_subcommand("build-kb", "Build the knowledge base of membership degrees");
  build->add_option("--threshold", threshold, "Drop degrees below this value")->required();

  QueryOptions qopt;
  auto add_query_options = [&](CLI::App* cmd) {
    cmd->add_option("text", qopt.text, "Flexible query")->required();
    cmd->add_option("--confidence", qopt.confidence, "Confidence level in (0, 1)");
    cmd->add_option("--sample-pct", qopt.sample_pct, "Percentage of the KB drawn per batch")->capture_default_str();
    cmd->add_option("--seed", qopt.seed, "Sampling seed")->capture_default_str();
  };
  auto* query = app.add_subcommand("query", "Run a flexible query with online aggregation");
  add_query_options(query);
  query->add_flag("--watch", qopt.watch, "Print every progressive estimate");
  query->add_flag("--exact", qopt.exact, "Also compute the exact answer by full scan");

  auto* concepts = app.add_subcommand("concepts", "Dump the concepts table of one sample batch");
  add_query_options(concepts);
  concepts->add_option("--batch", qopt.batch, "1-based batch number")->capture_default_str();

  std::string host = "127.0.0.1";
  int port = 8080;
  int delay_ms = 0;
  std::uint64_t serve_seed = 0;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--batch-delay-ms", delay_ms, "Pause between streamed batches")->capture_default_str();
  serve->add_option("--seed", serve_seed, "Default sampling seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  flexq::Workspace ws{workspace};
  try {
    if (*ingest) {
      auto rel = ws.ingest(csv, table, id_column.empty() ? std::nullopt : std::optional(id_column));
      std::cout << "ingested " << rel.size() << " rows into table '" << rel.name() << "' (";
      for (std::size_t i = 0; i < rel.columns().size(); ++i) {
        const auto& c = rel.columns()[i];
        std::cout << (i ? ", " : "") << c.name << (c.numeric ? "" : " [non-numeric]");
      }
      std::cout << ")\n";
      return kExitOk;
    }
    if (*labels) {
      auto catalog = ws.set_labels(config);
      std::cout << "installed " << catalog.size() << " labels:";
      for (const auto& l : catalog.labels()) std::cout << ' ' << l.key();
      std::cout << '\n';
      return kExitOk;
    }
    if (*build) {
      auto kb = ws.build(threshold);
      std::cout << "built knowledge base: m=" << kb.size() << " labels=" << kb.labels().size()
                << " stored=" << kb.stored_degrees() << " threshold=" << flexq::format_double(kb.threshold())
                << '\n';
      for (const auto& r : kb.ranges()) {
        std::cout << "  " << r.attribute << " in [" << flexq::format_double(r.range.min) << ", "
                  << flexq::format_double(r.range.max) << "]\n";
      }
      return kExitOk;
    }
    if (*query) return run_query_command(ws, qopt);
    if (*concepts) return run_concepts_command(ws, qopt);
    if (*serve) return run_serve_command(host, port, delay_ms, serve_seed);
  } catch (const flexq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
