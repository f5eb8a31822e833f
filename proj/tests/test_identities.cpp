#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "mahlerlab/elliptic.hpp"
#include "mahlerlab/errors.hpp"
#include "mahlerlab/expression.hpp"
#include "mahlerlab/identities.hpp"
#include "mahlerlab/jet.hpp"

using namespace mahlerlab;
using namespace mahlerlab::identities;

namespace {

constexpr double kPi = std::numbers::pi;

// Central differences of the value (for d1) and of d1 (for d2).
void check_against_fd(const JetFunction& f, double x) {
  constexpr double h = 1e-5;
  const Jet2 j = f(Jet2::variable(x));
  const Jet2 up = f(Jet2::variable(x + h));
  const Jet2 down = f(Jet2::variable(x - h));
  CHECK(std::abs(j.d1 - (up.value - down.value) / (2 * h)) <= 1e-7);
  CHECK(std::abs(j.d2 - (up.d1 - down.d1) / (2 * h)) <= 1e-7);
}

}  // namespace

TEST_CASE("jet arithmetic follows the chain rule") {
  const Jet2 x = Jet2::variable(0.7);
  const Jet2 y = x * x * x;
  CHECK(y.value == doctest::Approx(0.343));
  CHECK(y.d1 == doctest::Approx(3 * 0.49));
  CHECK(y.d2 == doctest::Approx(6 * 0.7));

  const Jet2 inv = 1.0 / x;
  CHECK(inv.d1 == doctest::Approx(-1 / 0.49));
  CHECK(inv.d2 == doctest::Approx(2 / 0.343));

  const Jet2 s = sqrt(x);
  CHECK(s.d1 == doctest::Approx(0.5 / std::sqrt(0.7)));
  CHECK(s.d2 == doctest::Approx(-0.25 * std::pow(0.7, -1.5)));

  CHECK(pow(Jet2::variable(-2.0), 3).value == doctest::Approx(-8));
  CHECK(pow(Jet2::variable(-2.0), 3).d1 == doctest::Approx(12));
  CHECK(pow(Jet2::variable(2.0), -2).d2 == doctest::Approx(6.0 / 16));
  CHECK_THROWS_AS(sqrt(Jet2::variable(-1e-3)), DomainError);
  CHECK_THROWS_AS(pow(Jet2::variable(-1.0), 0.5), DomainError);
}

TEST_CASE("jet derivatives of compositions match finite differences") {
  const std::vector<JetFunction> fs = {
      [](const Jet2& x) { return sqrt(1.0 + x * x) / (2.0 - x); },
      [](const Jet2& x) { return exp(-x * x) * log(3.0 + x); },
      [](const Jet2& x) { return pow(2.0 + sqrt(x + 1.5), 2.5); },
  };
  for (const auto& f : fs) {
    for (double x : {-0.4, 0.1, 0.35, 0.8}) check_against_fd(f, x);
  }
  // Poles at -1/3 and 1 are kept at a distance.
  const JetFunction rational = [](const Jet2& x) {
    return pow(1.0 + x, 3) * (1.0 - 3.0 * x) / (pow(1.0 - x, 3) * (1.0 + 3.0 * x));
  };
  for (double x : {-4.0, -2.0, 0.1, 2.5}) check_against_fd(rational, x);
  for (const auto& c : builtin_candidates()) {
    const double lo = c.grid_interval.lo, hi = c.grid_interval.hi;
    for (double t : {0.2, 0.5, 0.8}) {
      check_against_fd(c.p, lo + t * (hi - lo));
      check_against_fd(c.q, lo + t * (hi - lo));
    }
  }
}

TEST_CASE("expression parser") {
  const auto at = [](const char* src, double x) { return compile_expression(src)(Jet2::variable(x)); };
  CHECK(at("1 + 2*3", 0).value == 7);
  CHECK(at("-x^2", 3).value == -9);
  CHECK(at("2^3^2", 0).value == 512);
  CHECK(at("(1+x)^3", -3).value == -8);
  CHECK(at("x^-1", 4).value == 0.25);
  CHECK(at("sqrt(x) * pi", 4).value == doctest::Approx(2 * kPi));
  CHECK(at("exp(log(x))", 2.5).value == doctest::Approx(2.5));
  CHECK(at("x^(1/2)", 9).value == doctest::Approx(3));
  CHECK(at("1−x×2÷4", 1).value == 0.5);
  CHECK(at("1e-3 * x", 2).value == 2e-3);
  CHECK(at("x^3", 2).d2 == 12);
  CHECK_THROWS_AS(compile_expression("1 +"), ParseError);
  CHECK_THROWS_AS(compile_expression("(x"), ParseError);
  CHECK_THROWS_AS(compile_expression("y + 1"), ParseError);
  CHECK_THROWS_AS(compile_expression("x 2"), ParseError);
  CHECK_THROWS_AS(compile_expression("sin(x)"), ParseError);
  CHECK_THROWS_AS(compile_expression(""), ParseError);
}

TEST_CASE("parsed built-in formulas agree with the compiled ones") {
  const std::vector<std::tuple<std::string, std::string, std::string>> sources = {
      {"A.3", "-x", "x"},
      {"A.4", "(1+x)(1-3x)/((1-x)(1+3x))", "sqrt((1+x)^3*(1-3*x)/((1-x)^3*(1+3*x)))"},
      {"A.5", "-x^2/(1+2*x)", "sqrt(x^3*(2+x)/(1+2*x))"},
      {"A.6", "x*(sqrt(x^2+1)+1)*(sqrt(x^2+1)-x)", "x^2"},
  };
  for (const auto& [name, p_src, q_src] : sources) {
    const IdentityCandidate c = builtin_candidate(name);
    if (name == "A.4") {
      CHECK_THROWS_AS(compile_expression(p_src), ParseError);  // no implicit products
      continue;
    }
    const JetFunction p = compile_expression(p_src), q = compile_expression(q_src);
    for (double t : {0.1, 0.5, 0.9}) {
      const double x = c.grid_interval.lo + t * (c.grid_interval.hi - c.grid_interval.lo);
      const Jet2 a = p(Jet2::variable(x)), b = c.p(Jet2::variable(x));
      CHECK(a.value == doctest::Approx(b.value).epsilon(1e-14));
      CHECK(a.d2 == doctest::Approx(b.d2).epsilon(1e-12));
      CHECK(q(Jet2::variable(x)).d1 == doctest::Approx(c.q(Jet2::variable(x)).d1).epsilon(1e-12));
    }
  }
}

TEST_CASE("eval_r and eval_f against the printed closed forms") {
  const auto a3 = builtin_candidate("A.3"), a4 = builtin_candidate("A.4");
  const auto a5 = builtin_candidate("A.5"), a6 = builtin_candidate("A.6");
  for (double x : {0.1, 0.5, 0.9}) CHECK(eval_r(a3, x) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(eval_r(a4, -2) == doctest::Approx(-5.0 / 12).epsilon(1e-13));
  CHECK(eval_r(a5, 0.5) == doctest::Approx(-2.5 * 2 / (3 * 2.25)).epsilon(1e-13));
  CHECK(eval_r(a6, 0.5) ==
        doctest::Approx((0.5 - 2 * std::sqrt(1.25)) / (4 * std::sqrt(1.25))).epsilon(1e-13));
  CHECK(anchor_r(a6, 0) == doctest::Approx(-0.25).epsilon(1e-11));
  CHECK(anchor_r(a4, -1) == doctest::Approx(-1.0 / 3).epsilon(1e-11));
  CHECK(anchor_r(a5, 0) == doctest::Approx(-2.0 / 3).epsilon(1e-11));
  CHECK_THROWS_AS(eval_r(a3, 0), SingularPointError);

  CHECK(eval_f(a3, 1) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(eval_f(a5, 0.5) == doctest::Approx(-5.0 / 6).epsilon(1e-13));
  CHECK(eval_f(a4, -2) == doctest::Approx(1.5 * (-1.0 / 3 - 1.0 / 5) + 0.5).epsilon(1e-13));
  CHECK(eval_f(a6, 0.5) == doctest::Approx(2 - 0.5 / 1.25).epsilon(1e-13));
  CHECK_THROWS_AS(eval_f(a3, 0), SingularPointError);
}

TEST_CASE("pointwise residuals") {
  const auto a3 = builtin_candidate("A.3"), a4 = builtin_candidate("A.4");
  const auto a5 = builtin_candidate("A.5"), a6 = builtin_candidate("A.6");
  CHECK(std::abs(ode_residual(a3, 0.5)) <= 1e-12);
  CHECK(std::abs(ode_residual(a4, -3)) <= 1e-11);
  CHECK(std::abs(e_coefficient_residual(a3, 0.3)) <= 1e-13);
  CHECK(std::abs(e_coefficient_residual(a5, 0.5)) <= 1e-12);
  CHECK(std::abs(e_coefficient_residual(a6, 0.5)) <= 1e-12);
  CHECK(std::abs(integrating_factor_residual(a3, 0.5)) <= 1e-11);
  CHECK(std::abs(integrating_factor_residual(a5, 0.3)) <= 1e-11);
  CHECK(std::abs(integrating_factor_residual(a4, -2)) <= 1e-11);

  IdentityCandidate perturbed = a3;
  perturbed.r_override = [](const Jet2&) { return Jet2::constant(-0.49); };
  CHECK(std::abs(ode_residual(perturbed, 0.5)) > 1e-3);
  CHECK(std::abs(e_coefficient_residual(perturbed, 0.5)) > 1e-3);
}

TEST_CASE("regime values quoted for the built-ins") {
  const auto all = builtin_candidates();
  REQUIRE(all.size() == 4);
  const auto a4 = builtin_candidate("A.4");
  const Jet2 x = Jet2::variable(-2);
  CHECK(a4.p(x).value == doctest::Approx(7.0 / 15).epsilon(1e-14));
  CHECK(std::pow(a4.q(x).value, 2) == doctest::Approx(7.0 / 135).epsilon(1e-14));
  const auto a5 = builtin_candidate("A.5");
  CHECK(a5.printed_rhs->fn(Jet2::constant(0)).value == doctest::Approx(kPi / 6));
  CHECK_THROWS_AS(builtin_candidate("A.7"), DomainError);
  CHECK(std::isinf(a4.domain.lo));
}

TEST_CASE("identity reports for the built-ins") {
  for (const auto& c : builtin_candidates()) {
    CAPTURE(c.name);
    const IdentityReport rep = verify_identity(c);
    CHECK(rep.grid.size() == 200);
    CHECK(rep.ode_residual_max <= 1e-10);
    CHECK(rep.e_coeff_residual_max <= 1e-11);
    CHECK(rep.identity_residual_max <= 1e-10);
    CHECK(rep.integrating_factor_residual_max <= 1e-10);
    CHECK(rep.integrating_factor_domain_errors == 0);
    REQUIRE(rep.rhs_residual_max.has_value());
    CHECK(*rep.rhs_residual_max <= 1e-10);
    CHECK(rep.singular_points == std::vector<double>{c.anchor});
    CHECK(rep.pass);
    MESSAGE(c.name << ": ode " << rep.ode_residual_max << ", E " << rep.e_coeff_residual_max
                   << ", id " << rep.identity_residual_max << ", if "
                   << rep.integrating_factor_residual_max << ", rhs " << *rep.rhs_residual_max);
  }
}

TEST_CASE("identity constants") {
  const auto a3 = verify_identity(builtin_candidate("A.3"));
  CHECK(a3.constant_C == doctest::Approx(kPi / 4).epsilon(1e-14));
  const auto a6 = verify_identity(builtin_candidate("A.6"));
  CHECK(a6.constant_C == doctest::Approx(3 * kPi / 8).epsilon(1e-12));

  // At x = -1, p = q = 0 and r = -1/3, so the left side is pi/2 - pi/6 and
  // the right side is -(pi/12) * sqrt(16) / (-1).
  const auto a4 = builtin_candidate("A.4");
  const auto rep = verify_identity(a4);
  CHECK(std::abs(rep.constant_C - kPi / 3) <= 1e-12);
  CHECK(std::abs(a4.printed_rhs->fn(Jet2::constant(-1)).value - kPi / 3) <= 1e-12);
  CHECK(rep.grid.front() == -10);
  CHECK(rep.grid.back() == -1);
}

TEST_CASE("the two printed coefficients of A.5") {
  const auto rep = verify_identity(builtin_candidate("A.5"));
  REQUIRE(rep.coefficient_verdicts.size() == 2);
  const auto& defined = rep.coefficient_verdicts[0];
  const auto& displayed = rep.coefficient_verdicts[1];
  CHECK(defined.satisfies);
  CHECK(defined.r_deviation_max <= 1e-10);
  CHECK(defined.identity_residual_max <= 1e-10);
  CHECK_FALSE(displayed.satisfies);
  CHECK(displayed.nonfinite_points == 1);
  CHECK(displayed.identity_residual_max > 1e-2);
  MESSAGE("displayed coefficient misses the right side by " << displayed.identity_residual_max);
}

TEST_CASE("A.3 at x = 4/k gives the ei identity") {
  for (double k : {4.5, 5.0, 8.0, 20.0, 100.0}) {
    CAPTURE(k);
    CHECK(ei_residual(k) <= 1e-11);
    const double direct = elliptic::ell_pi(-4 / k, 4 / k) - 0.5 * elliptic::ell_k(4 / k);
    CHECK(direct == doctest::Approx(k * kPi / (4 * (k + 4))).epsilon(1e-12));
  }
  CHECK_THROWS_AS(ei_residual(3.0), DomainError);
}

TEST_CASE("a non-solution fails the report") {
  IdentityCandidate c = builtin_candidate("A.3");
  c.r_override = [](const Jet2&) { return Jet2::constant(-0.49); };
  const auto rep = verify_identity(c);
  CHECK_FALSE(rep.pass);
  CHECK(rep.ode_residual_max > 1e-3);
}

TEST_CASE("regime errors name the offending point") {
  IdentityCandidate c = builtin_candidate("A.3");
  c.grid_interval = {0.0, 1.2};
  try {
    verify_identity(c, 0.0, {0.1, 0.5, 1.1});
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("1.1") != std::string::npos);
  }
  IdentityCandidate a4 = builtin_candidate("A.4");
  CHECK_THROWS_AS(verify_identity(a4, -1.0, {-2.0, 2.0}), DomainError);
}

TEST_CASE("candidate file format") {
  std::istringstream in(R"(# identity for the ei step
name: A.3 from file
p: -x
q: x
domain: 0 1
interval: 0 0.99
r: -1/2
rhs: pi/4/(x+1)
---
name: A.4 from file
p: (1+x)*(1-3*x)/((1-x)*(1+3*x))
q: sqrt((1+x)^3*(1-3*x)/((1-x)^3*(1+3*x)))
domain: -inf -1
interval: -10 -1
anchor: -1
rhs: -(pi/12)*sqrt((1+3*x)*(x-1)^3)/x
)");
  const auto cands = parse_candidates(in);
  REQUIRE(cands.size() == 2);
  CHECK(cands[0].anchor == 0);
  CHECK(cands[1].anchor == -1);
  for (const auto& c : cands) {
    CAPTURE(c.name);
    const auto rep = verify_identity(c);
    CHECK(rep.pass);
    CHECK(rep.identity_residual_max <= 1e-10);
  }

  const auto bad = [](const char* text) {
    std::istringstream s(text);
    return parse_candidates(s);
  };
  CHECK_THROWS_AS(bad("name: a\np: x\nq: x\n"), ParseError);
  CHECK_THROWS_AS(bad("name: a\np: x\nq: x\ndomain: -inf 0\n"), ParseError);
  CHECK_THROWS_AS(bad("name: a\np: x\nq: x\ndomain: 1 0\n"), ParseError);
  CHECK_THROWS_AS(bad("name: a\np: x +\nq: x\ndomain: 0 1\n"), ParseError);
  CHECK_THROWS_AS(bad("name: a\ncolour: red\n"), ParseError);
  CHECK_THROWS_AS(bad("just text\n"), ParseError);
  CHECK_THROWS_AS(bad("\n\n"), ParseError);
  CHECK_THROWS_AS(load_candidates("/nonexistent/candidates.txt"), DataError);
}
