#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flexq {

// Trapezoid with support [a, d] and core [b, c]. Degenerate equalities are
// allowed; unbounded sides may use +/-infinity.
struct TrapezoidParams {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  bool operator==(const TrapezoidParams&) const = default;
};

// Throws ParameterError unless a <= b <= c <= d (and none is NaN).
void check_trapezoid(const TrapezoidParams& p);

// Degree of x in the trapezoid: 1 on the core, linear ramps on [a, b) and
// (c, d], 0 outside [a, d]. A vertical ramp (a == b or c == d) jumps
// straight to the core value.
double membership(double x, const TrapezoidParams& p);

// Same as membership() without re-validating p; for hot loops over
// parameters that were checked once.
inline double membership_unchecked(double x, const TrapezoidParams& p) {
  if (x < p.a || x > p.d) return 0.0;
  if (x < p.b) return (x - p.a) / (p.b - p.a);
  if (x <= p.c) return 1.0;
  return (p.d - x) / (p.d - p.c);
}

enum class Shape { trapezoid, triangular, singleton, l_shape, gamma };

std::string_view to_string(Shape shape);
// Throws ParameterError on an unknown shape name (case-insensitive).
Shape parse_shape(std::string_view name);
// Number of parameters each shape takes.
std::size_t parameter_count(Shape shape);

// Observed extent of an attribute, used to place the sentinel bounds of
// one-sided shapes.
struct ValueRange {
  double min = 0.0;
  double max = 0.0;

  double span() const { return max - min; }
  bool operator==(const ValueRange&) const = default;
};

// Parameters per shape:
//   trapezoid  (a, b, c, d)
//   triangular (a, peak, d)           -> (a, peak, peak, d)
//   singleton  (v)                    -> (v, v, v, v)
//   l_shape    (a, b)  rising, open above   -> (a, b, hi, hi)
//   gamma      (c, d)  falling, open below  -> (lo, lo, c, d)
// where lo/hi are the observed min/max pushed out by one span, or -inf/+inf
// when no range is supplied.
class MembershipFunction {
 public:
  MembershipFunction(Shape shape, std::vector<double> params);

  static MembershipFunction trapezoid(double a, double b, double c, double d) {
    return {Shape::trapezoid, {a, b, c, d}};
  }

  Shape shape() const { return shape_; }
  const std::vector<double>& params() const { return params_; }

  TrapezoidParams to_trapezoid(std::optional<ValueRange> range = std::nullopt) const;

  bool operator==(const MembershipFunction&) const = default;

 private:
  Shape shape_;
  std::vector<double> params_;
};

struct LinguisticLabel {
  std::string attribute;
  std::string name;
  MembershipFunction fn;

  // "Attribute-Name", the column key used by the knowledge base.
  std::string key() const { return attribute + "-" + name; }

  bool operator==(const LinguisticLabel&) const = default;
};

double evaluate_label(double x, const LinguisticLabel& label,
                      std::optional<ValueRange> range = std::nullopt);

}  // namespace flexq
