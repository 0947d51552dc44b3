#include "flexq/aggregator.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "flexq/error.hpp"
#include "flexq/kernels.hpp"

namespace flexq {

namespace {

// Width of the range one term of the estimator can take.
double term_width(const RunningEstimate& est) {
  const double m = static_cast<double>(est.m);
  switch (est.aggregate) {
    case Aggregate::avg:
      return est.interval.max - est.interval.min;
    case Aggregate::count:
      return m;
    case Aggregate::sum:
      // m * value for a qualifying row, 0 otherwise.
      return m * (std::max(est.interval.max, 0.0) - std::min(est.interval.min, 0.0));
  }
  return 0.0;
}

void recompute(RunningEstimate& est) {
  est.estimate.reset();
  est.error_rate.reset();
  est.sample_value.reset();
  est.unweighted_mean.reset();
  est.done = est.n == est.m;
  if (est.card > 0) est.unweighted_mean = est.som / static_cast<double>(est.card);
  if (est.n == 0) {
    if (est.done && est.aggregate != Aggregate::avg) {
      est.estimate = 0.0;
      est.sample_value = 0.0;
    }
    if (est.done) est.error_rate = 0.0;
    return;
  }
  const double scale = static_cast<double>(est.m) / static_cast<double>(est.n);
  switch (est.aggregate) {
    case Aggregate::avg:
      if (est.card > 0) est.estimate = est.sample_value = (est.som / static_cast<double>(est.card)) * est.min_degree;
      break;
    case Aggregate::sum:
      est.sample_value = est.som * est.min_degree;
      est.estimate = scale * est.som * est.min_degree;
      break;
    case Aggregate::count:
      est.sample_value = static_cast<double>(est.card) * est.min_degree;
      est.estimate = scale * static_cast<double>(est.card) * est.min_degree;
      break;
  }
  if (est.done) {
    est.error_rate = 0.0;
  } else {
    est.error_rate = error_rate(est.n, est.confidence, 0.0, term_width(est));
  }
}

}  // namespace

double error_rate_coefficient(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("confidence must be in (0, 1)");
  return std::sqrt(std::log(2.0 / (1.0 - p)) / 2.0);
}

std::optional<double> error_rate(std::size_t n, double p, double a, double b) {
  if (!(a <= b)) throw ParameterError("error interval requires a <= b");
  if (!(p > 0.0 && p < 1.0)) throw ParameterError("confidence must be in (0, 1)");
  if (n == 0) return std::nullopt;
  return (b - a) * std::sqrt(std::log(2.0 / (1.0 - p)) / (2.0 * static_cast<double>(n)));
}

RunningEstimate fresh_estimate(const ApproximateQuery& aq, std::size_t m) {
  RunningEstimate est;
  est.aggregate = aq.base.aggregate;
  est.confidence = aq.base.confidence;
  est.interval = aq.interval;
  est.m = m;
  recompute(est);
  return est;
}

namespace {

// Shared by the public fold and the streamed path, which folds context
// objects directly.
template <typename Tuple>
RunningEstimate fold_tuples(RunningEstimate est, std::span<const Tuple> tuples, std::size_t batch_rows) {
  if (tuples.size() > batch_rows) throw ParameterError("more qualifying tuples than sampled rows");
  if (est.n + batch_rows > est.m) throw ParameterError("folding beyond the knowledge base size");
  for (const auto& t : tuples) {
    if (!(t.degree > 0.0 && t.degree <= 1.0)) throw ParameterError("tuple degree outside (0, 1]");
    est.som += t.value;
    ++est.card;
    if (t.degree < est.min_degree) est.min_degree = t.degree;
  }
  est.n += batch_rows;
  recompute(est);
  return est;
}

}  // namespace

RunningEstimate fold_batch(RunningEstimate est, std::span<const ExtentEntry> tuples,
                           std::size_t batch_rows) {
  return fold_tuples(std::move(est), tuples, batch_rows);
}

std::string_view to_string(RunState state) {
  switch (state) {
    case RunState::running: return "running";
    case RunState::done: return "done";
    case RunState::cancelled: return "cancelled";
    case RunState::failed: return "failed";
  }
  return "?";
}

OnlineAggregation::OnlineAggregation(const KnowledgeBase& kb, const Relation& rel, ApproximateQuery aq,
                                     Sampler sampler)
    : kb_(kb),
      aq_(std::move(aq)),
      bound_(bind_query(aq_.base, kb, rel)),
      sampler_(std::move(sampler)),
      est_(fresh_estimate(aq_, kb.size())) {
  if (sampler_.m() != kb.size()) throw SchemaError("sampler size does not match the knowledge base");
}

OnlineAggregation::OnlineAggregation(const KnowledgeBase& kb, const Relation& rel, const ApproximateQuery& aq,
                                     std::uint64_t seed)
    : OnlineAggregation(kb, rel, aq, Sampler(kb.row_ids(), aq.sample_pct, seed)) {}

ProgressEvent OnlineAggregation::event(std::size_t batch) const {
  ProgressEvent e;
  e.batch = batch;
  e.n = est_.n;
  e.m = est_.m;
  e.estimate = est_.estimate;
  e.error_rate = est_.error_rate;
  e.confidence = est_.confidence;
  e.fraction = est_.m == 0 ? 1.0 : static_cast<double>(est_.n) / static_cast<double>(est_.m);
  e.done = est_.done;
  e.diagnosis = diagnose_empty(bound_.keys, mask_counts_);
  return e;
}

const ConceptsTable& OnlineAggregation::last_table() const {
  if (!table_) table_ = context_.attributes.empty() ? ConceptsTable{} : build_concepts_table(context_);
  return *table_;
}

std::optional<ProgressEvent> OnlineAggregation::step() {
  if (finished_) return std::nullopt;
  auto batch = sampler_.next_batch();
  if (!batch) {
    // Only reachable for an empty KB: one terminal event with nothing drawn.
    finished_ = true;
    return event(0);
  }
  context_ = build_context(*batch, kb_, bound_);
  table_.reset();
  const FormalContext& ctx = context_;
  // Batch histogram first: a flat array for up to six predicates.
  constexpr std::size_t kFlatMasks = 64;
  if (ctx.full_mask() < kFlatMasks) {
    std::array<std::size_t, kFlatMasks> counts{};
    for (const auto& o : ctx.objects) ++counts[o.mask];
    for (std::uint32_t mask = 1; mask < kFlatMasks; ++mask) {
      if (counts[mask] > 0) mask_counts_[mask] += counts[mask];
    }
  } else {
    for (const auto& o : ctx.objects) ++mask_counts_[o.mask];
  }
  est_ = fold_tuples(std::move(est_), std::span<const ContextObject>(ctx.objects), batch->ids.size());
  finished_ = est_.done;
  return event(batch->index);
}

RunOutcome run_query(const KnowledgeBase& kb, const ApproximateQuery& aq, Sampler sampler,
                     const Relation& rel, std::stop_token stop, const EventSink& sink) {
  RunOutcome outcome;
  try {
    if (stop.stop_requested()) {
      outcome.state = RunState::cancelled;
      return outcome;
    }
    OnlineAggregation agg(kb, rel, aq, std::move(sampler));
    while (!agg.finished()) {
      if (stop.stop_requested()) {
        outcome.state = RunState::cancelled;
        return outcome;
      }
      auto e = agg.step();
      if (!e) break;
      ++outcome.events;
      if (sink) sink(*e);
    }
    outcome.state = RunState::done;
  } catch (const Error& e) {
    outcome.state = RunState::failed;
    outcome.error = e.what();
  }
  return outcome;
}

ExactAnswer exact_answer(const KnowledgeBase& kb, const ApproximateQuery& aq, const Relation& rel,
                         Execution exec) {
  BoundQuery bound = bind_query(aq.base, kb, rel);
  auto totals = exec == Execution::parallel
                    ? kernels::qualifying_scan_parallel(kb, bound.labels, bound.values)
                    : kernels::qualifying_scan_serial(kb, bound.labels, bound.values);
  ExactAnswer out;
  out.som = totals.sum;
  out.card = totals.count;
  out.min_degree = totals.min_degree;
  switch (aq.base.aggregate) {
    case Aggregate::avg:
      if (out.card > 0) out.value = (out.som / static_cast<double>(out.card)) * out.min_degree;
      break;
    case Aggregate::sum:
      out.value = out.som * out.min_degree;
      break;
    case Aggregate::count:
      out.value = static_cast<double>(out.card) * out.min_degree;
      break;
  }
  return out;
}

}  // namespace flexq
