#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "flexq/concept_table.hpp"
#include "flexq/knowledge_base.hpp"
#include "flexq/query.hpp"
#include "flexq/relation.hpp"
#include "flexq/sampler.hpp"

namespace flexq {

// Cross-batch aggregate state of one query.
struct RunningEstimate {
  Aggregate aggregate = Aggregate::avg;
  double confidence = kDefaultConfidence;
  ValueRange interval;  // bounds of one aggregated value
  std::size_t m = 0;    // KB size

  double som = 0.0;         // sum of qualifying values
  std::size_t card = 0;     // qualifying tuples folded
  double min_degree = 1.0;  // D
  std::size_t n = 0;        // rows sampled, qualifying or not

  // AVG: (som/card)*D; SUM: m/n*som*D; COUNT: m/n*card*D. Unset while
  // undefined (AVG without qualifying tuples, anything before the first
  // batch).
  std::optional<double> estimate;
  std::optional<double> error_rate;
  bool done = false;

  // Debug: the unscaled sample value (som*D, card*D) and the plain
  // conditional mean som/card.
  std::optional<double> sample_value;
  std::optional<double> unweighted_mean;
};

RunningEstimate fresh_estimate(const ApproximateQuery& aq, std::size_t m);

// Folds one batch's deduplicated qualifying tuples; batch_rows counts every
// row drawn in the batch. Degrees must lie in (0, 1].
RunningEstimate fold_batch(RunningEstimate est, std::span<const ExtentEntry> tuples,
                           std::size_t batch_rows);

// (b - a) * sqrt(ln(2 / (1 - p)) / (2n)); nullopt when n == 0. Throws
// ParameterError for a > b or p outside (0, 1).
std::optional<double> error_rate(std::size_t n, double p, double a, double b);
// sqrt(ln(2 / (1 - p)) / 2), the factor multiplying (b - a) / sqrt(n).
double error_rate_coefficient(double p);

struct ProgressEvent {
  std::size_t batch = 0;
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<double> estimate;
  std::optional<double> error_rate;
  double confidence = kDefaultConfidence;
  double fraction = 0.0;
  bool done = false;
  std::vector<SubQuery> diagnosis;  // empty unless the full conjunction has no tuple yet
};

// Pull-style online aggregation over one KB. Each step() samples a batch,
// folds its qualifying tuples and returns an event; nullopt once the
// terminal event has been returned. The batch's concepts table, whose
// bottom extent is exactly those tuples, is built on first request.
class OnlineAggregation {
 public:
  // Throws SchemaError / TypeError if the query does not bind.
  OnlineAggregation(const KnowledgeBase& kb, const Relation& rel, ApproximateQuery aq, Sampler sampler);
  OnlineAggregation(const KnowledgeBase& kb, const Relation& rel, const ApproximateQuery& aq, std::uint64_t seed);

  std::optional<ProgressEvent> step();
  bool finished() const { return finished_; }

  const RunningEstimate& estimate() const { return est_; }
  // Concepts table of the latest batch; empty before the first step.
  const ConceptsTable& last_table() const;
  const ApproximateQuery& query() const { return aq_; }
  const Sampler& sampler() const { return sampler_; }

 private:
  ProgressEvent event(std::size_t batch) const;

  const KnowledgeBase& kb_;
  ApproximateQuery aq_;
  BoundQuery bound_;
  Sampler sampler_;
  RunningEstimate est_;
  FormalContext context_;
  mutable std::optional<ConceptsTable> table_;
  std::map<std::uint32_t, std::size_t> mask_counts_;
  bool finished_ = false;
};

enum class RunState { running, done, cancelled, failed };

std::string_view to_string(RunState state);

struct RunOutcome {
  RunState state = RunState::done;
  std::size_t events = 0;
  std::string error;  // set when failed
};

using EventSink = std::function<void(const ProgressEvent&)>;

// Drives an aggregation to exhaustion or until stop is requested; the
// token is checked before each batch, so at most the in-flight batch
// completes after a stop request. Binding errors end the run as failed
// without events.
RunOutcome run_query(const KnowledgeBase& kb, const ApproximateQuery& aq, Sampler sampler,
                     const Relation& rel, std::stop_token stop, const EventSink& sink);

struct ExactAnswer {
  std::optional<double> value;  // unset for AVG without qualifying tuples
  double som = 0.0;
  std::size_t card = 0;
  double min_degree = 1.0;
};

// Full scan with the same qualifying/min-degree rules as the streamed path.
ExactAnswer exact_answer(const KnowledgeBase& kb, const ApproximateQuery& aq, const Relation& rel,
                         Execution exec = Execution::parallel);

}  // namespace flexq
