#include "flexq/membership.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flexq/error.hpp"
#include "flexq/text.hpp"

namespace flexq {

void check_trapezoid(const TrapezoidParams& p) {
  if (std::isnan(p.a) || std::isnan(p.b) || std::isnan(p.c) || std::isnan(p.d)) {
    throw ParameterError("trapezoid parameter is NaN");
  }
  if (!(p.a <= p.b && p.b <= p.c && p.c <= p.d)) {
    throw ParameterError("trapezoid requires a <= b <= c <= d, got (" + format_double(p.a) +
                         ", " + format_double(p.b) + ", " + format_double(p.c) + ", " +
                         format_double(p.d) + ")");
  }
}

double membership(double x, const TrapezoidParams& p) {
  check_trapezoid(p);
  return membership_unchecked(x, p);
}

std::string_view to_string(Shape shape) {
  switch (shape) {
    case Shape::trapezoid: return "trapezoid";
    case Shape::triangular: return "triangular";
    case Shape::singleton: return "singleton";
    case Shape::l_shape: return "L";
    case Shape::gamma: return "gamma";
  }
  return "?";
}

Shape parse_shape(std::string_view name) {
  if (iequals(name, "trapezoid") || iequals(name, "trapezoidal")) return Shape::trapezoid;
  if (iequals(name, "triangular") || iequals(name, "triangle")) return Shape::triangular;
  if (iequals(name, "singleton")) return Shape::singleton;
  if (iequals(name, "L")) return Shape::l_shape;
  if (iequals(name, "gamma")) return Shape::gamma;
  throw ParameterError("unsupported membership shape '" + std::string(name) + "'");
}

std::size_t parameter_count(Shape shape) {
  switch (shape) {
    case Shape::trapezoid: return 4;
    case Shape::triangular: return 3;
    case Shape::singleton: return 1;
    case Shape::l_shape: return 2;
    case Shape::gamma: return 2;
  }
  return 0;
}

MembershipFunction::MembershipFunction(Shape shape, std::vector<double> params)
    : shape_(shape), params_(std::move(params)) {
  if (params_.size() != parameter_count(shape_)) {
    throw ParameterError(std::string(to_string(shape_)) + " takes " +
                         std::to_string(parameter_count(shape_)) + " parameters, got " +
                         std::to_string(params_.size()));
  }
  for (double v : params_) {
    if (!std::isfinite(v)) throw ParameterError("membership parameter must be finite");
  }
  check_trapezoid(to_trapezoid());
}

TrapezoidParams MembershipFunction::to_trapezoid(std::optional<ValueRange> range) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto& p = params_;
  switch (shape_) {
    case Shape::trapezoid:
      return {p[0], p[1], p[2], p[3]};
    case Shape::triangular:
      return {p[0], p[1], p[1], p[2]};
    case Shape::singleton:
      return {p[0], p[0], p[0], p[0]};
    case Shape::l_shape: {
      double hi = range ? std::max(range->max + range->span(), p[1]) : inf;
      return {p[0], p[1], hi, hi};
    }
    case Shape::gamma: {
      double lo = range ? std::min(range->min - range->span(), p[0]) : -inf;
      return {lo, lo, p[0], p[1]};
    }
  }
  throw ParameterError("unsupported membership shape");
}

double evaluate_label(double x, const LinguisticLabel& label, std::optional<ValueRange> range) {
  return membership_unchecked(x, label.fn.to_trapezoid(range));
}

}  // namespace flexq
