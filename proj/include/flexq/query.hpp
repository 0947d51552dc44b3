#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexq/membership.hpp"

namespace flexq {

class KnowledgeBase;
class LabelCatalog;

enum class Aggregate { avg, sum, count };

std::string_view to_string(Aggregate agg);

inline constexpr double kDefaultConfidence = 0.95;
inline constexpr double kDefaultSamplePct = 1.0;
// Upper bound on predicates per query; concept intents are bit masks.
inline constexpr std::size_t kMaxPredicates = 16;

struct Predicate {
  std::string attribute;
  std::string label;

  bool operator==(const Predicate&) const = default;
};

// SELECT <AGG>([attr]) FROM <table> WHERE <attr> IS <label> {AND ...}
//   [WITH CONFIDENCE <p>]
struct FlexibleQuery {
  Aggregate aggregate = Aggregate::avg;
  std::optional<std::string> target;  // always set for AVG/SUM once validated
  std::string table;
  std::vector<Predicate> predicates;
  double confidence = kDefaultConfidence;

  bool operator==(const FlexibleQuery&) const = default;
};

// A flexible query annotated with what the estimator needs: the error-bound
// interval [a, b] of one aggregated term and the sampling percentage.
struct ApproximateQuery {
  FlexibleQuery base;
  ValueRange interval;
  double sample_pct = kDefaultSamplePct;

  bool operator==(const ApproximateQuery&) const = default;
};

// Keywords are case-insensitive, identifiers keep their case. Throws
// SyntaxError with the byte offset of the offending token.
FlexibleQuery parse_query(std::string_view text);
std::string to_string(const FlexibleQuery& q);

// Rewritten surface form, e.g.
//   SELECT AVG(Salary), 0.95 AS confidence, ConsAvgInterval(0.95, 400, 900)
//   FROM employee WHERE age IS Young AND Salary IS Low SAMPLE 1 PERCENT
ApproximateQuery parse_approximate(std::string_view text);
std::string to_string(const ApproximateQuery& q);

struct Diagnostic {
  std::optional<std::size_t> predicate;  // 0-based index when the issue is a predicate
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

// Empty result means the query can run against kb.
std::vector<Diagnostic> validate(const FlexibleQuery& q, const KnowledgeBase& kb,
                                 const LabelCatalog& labels);

// Attaches the target's observed range (COUNT: the indicator range [0, 1])
// and the sampling percentage. Throws ParameterError for sample_pct outside
// (0, 100], RangeError when the source relation is empty, SchemaError when
// the target has no range.
ApproximateQuery rewrite(const FlexibleQuery& q, double sample_pct, const KnowledgeBase& kb);

}  // namespace flexq
