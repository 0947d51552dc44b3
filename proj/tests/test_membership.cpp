#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "flexq/error.hpp"
#include "flexq/membership.hpp"

using namespace flexq;

namespace {

// Piecewise definition written out independently of the library.
double reference(double x, double a, double b, double c, double d) {
  if (x >= b && x <= c) return 1.0;
  if (x < a || x > d) return 0.0;
  if (x < b) return (x - a) / (b - a);
  return (d - x) / (d - c);
}

TrapezoidParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  double v[4] = {u(rng), u(rng), u(rng), u(rng)};
  std::sort(v, v + 4);
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

TEST_CASE("trapezoid examples") {
  TrapezoidParams p{18, 20, 25, 30};
  CHECK(membership(27, p) == doctest::Approx(0.6));
  CHECK(membership(22.5, p) == 1.0);
  CHECK(membership(17, p) == 0.0);
  CHECK(membership(31, p) == 0.0);
  CHECK(membership(19, p) == doctest::Approx(0.5));
  CHECK(membership(18, p) == 0.0);
  CHECK(membership(30, p) == 0.0);
  CHECK(membership(20, p) == 1.0);
  CHECK(membership(25, p) == 1.0);
}

TEST_CASE("degenerate ramps jump to the core") {
  TrapezoidParams p{5, 5, 10, 10};
  CHECK(membership(5, p) == 1.0);
  CHECK(membership(10, p) == 1.0);
  CHECK(membership(4.999, p) == 0.0);
  CHECK(membership(10.001, p) == 0.0);
  TrapezoidParams point{3, 3, 3, 3};
  CHECK(membership(3, point) == 1.0);
  CHECK(membership(3.0001, point) == 0.0);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(check_trapezoid({0, 2, 1, 3}), ParameterError);
  CHECK_THROWS_AS(check_trapezoid({1, 0, 2, 3}), ParameterError);
  CHECK_THROWS_AS(check_trapezoid({0, 1, 2, std::nan("")}), ParameterError);
  CHECK_THROWS_AS(membership(1.0, {3, 2, 1, 0}), ParameterError);
  CHECK_NOTHROW(check_trapezoid({0, 0, 0, 0}));
  double inf = std::numeric_limits<double>::infinity();
  CHECK_NOTHROW(check_trapezoid({0, 1, inf, inf}));
}

TEST_CASE("shapes reduce to trapezoids") {
  SUBCASE("triangular") {
    MembershipFunction f(Shape::triangular, {0, 5, 10});
    CHECK(f.to_trapezoid() == TrapezoidParams{0, 5, 5, 10});
    CHECK(membership(5, f.to_trapezoid()) == 1.0);
    CHECK(membership(7.5, f.to_trapezoid()) == doctest::Approx(0.5));
  }
  SUBCASE("singleton") {
    LinguisticLabel l{"X", "Seven", MembershipFunction(Shape::singleton, {7})};
    CHECK(evaluate_label(7, l) == 1.0);
    CHECK(evaluate_label(7.5, l) == 0.0);
    CHECK(evaluate_label(6.5, l) == 0.0);
  }
  SUBCASE("L is rising and open above") {
    LinguisticLabel l{"Salary", "High", MembershipFunction(Shape::l_shape, {600, 750})};
    CHECK(evaluate_label(1e12, l) == 1.0);
    CHECK(evaluate_label(750, l) == 1.0);
    CHECK(evaluate_label(675, l) == doctest::Approx(0.5));
    CHECK(evaluate_label(600, l) == 0.0);
    ValueRange r{400, 900};
    auto t = l.fn.to_trapezoid(r);
    CHECK(t.c == 1400);
    CHECK(t.d == 1400);
    CHECK(evaluate_label(900, l, r) == 1.0);
  }
  SUBCASE("gamma is falling and open below") {
    LinguisticLabel l{"Age", "Young", MembershipFunction(Shape::gamma, {25, 35})};
    CHECK(evaluate_label(-1e12, l) == 1.0);
    CHECK(evaluate_label(30, l) == doctest::Approx(0.5));
    CHECK(evaluate_label(35, l) == 0.0);
    ValueRange r{20, 60};
    auto t = l.fn.to_trapezoid(r);
    CHECK(t.a == -20);
    CHECK(t.b == -20);
  }
  SUBCASE("sentinel never crosses the core") {
    MembershipFunction f(Shape::l_shape, {0, 5000});
    auto t = f.to_trapezoid(ValueRange{0, 10});
    CHECK(t.c >= t.b);
  }
}

TEST_CASE("shape names and arity") {
  CHECK(parse_shape("TRAPEZOID") == Shape::trapezoid);
  CHECK(parse_shape("triangular") == Shape::triangular);
  CHECK(parse_shape("L") == Shape::l_shape);
  CHECK(parse_shape("gamma") == Shape::gamma);
  CHECK(parse_shape("singleton") == Shape::singleton);
  CHECK_THROWS_AS(parse_shape("bell"), ParameterError);
  CHECK(parameter_count(Shape::trapezoid) == 4);
  CHECK(parameter_count(Shape::triangular) == 3);
  CHECK(parameter_count(Shape::singleton) == 1);
  CHECK_THROWS_AS(MembershipFunction(Shape::trapezoid, {1, 2, 3}), ParameterError);
  CHECK_THROWS_AS(MembershipFunction(Shape::triangular, {3, 2, 1}), ParameterError);
  for (Shape s : {Shape::trapezoid, Shape::triangular, Shape::singleton, Shape::l_shape, Shape::gamma}) {
    CHECK(parse_shape(to_string(s)) == s);
  }
}

TEST_CASE("property: matches the piecewise definition and stays in [0, 1]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ux(-150.0, 150.0);
  for (int trial = 0; trial < 2000; ++trial) {
    auto p = random_params(rng);
    for (int j = 0; j < 20; ++j) {
      double x = ux(rng);
      double g = membership(x, p);
      REQUIRE(g >= 0.0);
      REQUIRE(g <= 1.0);
      REQUIRE(g == doctest::Approx(reference(x, p.a, p.b, p.c, p.d)).epsilon(1e-12));
    }
    REQUIRE(membership((p.b + p.c) / 2, p) == 1.0);
  }
}

TEST_CASE("property: monotone ramps, plateau iff core, Lipschitz") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 500; ++trial) {
    auto p = random_params(rng);
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
      double x = p.a - 1 + (p.b - p.a + 1) * i / 200.0;
      double g = membership(x, p);
      REQUIRE(g >= prev);
      prev = g;
    }
    prev = 1.0;
    for (int i = 0; i <= 200; ++i) {
      double x = p.c + (p.d - p.c + 1) * i / 200.0;
      double g = membership(x, p);
      REQUIRE(g <= prev);
      prev = g;
    }
    if (p.a < p.b && p.c < p.d) {
      double eps = 1e-6;
      double bound = eps * std::max(1 / (p.b - p.a), 1 / (p.d - p.c)) * (1 + 1e-6);
      std::uniform_real_distribution<double> ux(p.a - 5, p.d + 5);
      for (int j = 0; j < 50; ++j) {
        double x = ux(rng);
        double g = membership(x, p);
        REQUIRE((g == 1.0) == (x >= p.b && x <= p.c));
        REQUIRE(std::abs(g - membership(x + eps, p)) <= bound + 1e-12);
      }
    }
  }
}
