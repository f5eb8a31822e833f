#pragma once

// Verifier for identities of the form
//
//   Pi(p(x), q(x)) + r(x) K(q(x)) = s(x),   s = exp(int f),
//
// where r and f are fixed by p, q and their first derivatives, and r must
// solve the linear first-order equation
//
//   r' - (f + q'/q) r = -p' / (2 p (p - 1)).
//
// Derivatives of p and q come from Jet2 arithmetic. s is rebuilt from an
// anchor x0 by quadrature of f and compared with the left-hand side.

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mahlerlab/expression.hpp"
#include "mahlerlab/jet.hpp"

namespace mahlerlab::identities {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct NamedFunction {
  std::string label;
  JetFunction fn;
};

struct IdentityCandidate {
  std::string name;
  JetFunction p;
  JetFunction q;
  // Real-evaluable domain; endpoints may be infinite.
  Interval domain;
  // Finite interval sampled by the default grid; must lie in the closure of domain.
  Interval grid_interval;
  double anchor = 0.0;
  // Closed-form coefficients to check against the derived r; more than one
  // when the source is ambiguous.
  std::vector<NamedFunction> printed_r;
  std::optional<NamedFunction> printed_rhs;
  // Replaces the derived r in the residuals below (used to probe non-solutions).
  std::optional<JetFunction> r_override;
};

// Derived r(x). Throws SingularPointError where the denominator vanishes.
double eval_r(const IdentityCandidate& cand, double x);

// Derived f(x). Throws SingularPointError where p in {0, 1} or p = q^2.
double eval_f(const IdentityCandidate& cand, double x);

// r' - (f + q'/q) r + p' / (2 p (p - 1)) with r' from jet lifting of the
// r formula (or the override's own jet).
double ode_residual(const IdentityCandidate& cand, double x);

// Coefficient of E(q(x)) in the derivative of Pi + r K; zero for the derived r.
double e_coefficient_residual(const IdentityCandidate& cand, double x);

// u'/u + f + q'/q with u = sqrt((p - 1)(q^2 - p) / (p q^2)). Throws
// DomainError where the radicand is not positive.
double integrating_factor_residual(const IdentityCandidate& cand, double x);

// r at x0 from the formula, or by Richardson extrapolation from the interior
// side of grid_interval when the formula is 0/0 there.
double anchor_r(const IdentityCandidate& cand, double x0);

struct IdentityTolerances {
  double ode = 1e-10;
  double e_coeff = 1e-11;
  double identity = 1e-10;
  double integrating_factor = 1e-10;
};

struct CoefficientVerdict {
  std::string label;
  double r_deviation_max = 0.0;       // max |printed r - derived r|
  double identity_residual_max = 0.0; // max |Pi + r K - printed rhs|
  int nonfinite_points = 0;           // grid points where the printed r is undefined
  bool satisfies = false;
};

struct IdentityReport {
  std::string name;
  double ode_residual_max = 0.0;
  double e_coeff_residual_max = 0.0;
  double identity_residual_max = 0.0;
  double integrating_factor_residual_max = 0.0;
  int integrating_factor_domain_errors = 0;
  double anchor_x0 = 0.0;
  double anchor_r = 0.0;
  double constant_C = 0.0;
  std::vector<double> grid;
  // Grid points where the pointwise formulas are 0/0 (the anchor, typically).
  std::vector<double> singular_points;
  std::optional<double> rhs_residual_max;  // max |s - printed rhs|
  std::vector<CoefficientVerdict> coefficient_verdicts;
  bool pass = false;
};

// 200 points over grid_interval, denser toward the end away from the anchor.
std::vector<double> default_grid(const IdentityCandidate& cand, int n = 200);

// Throws DomainError naming x if p(x) >= 1 or q(x) outside [0, 1) on the grid.
IdentityReport verify_identity(const IdentityCandidate& cand, double x0,
                               const std::vector<double>& grid,
                               const IdentityTolerances& tol = {});

IdentityReport verify_identity(const IdentityCandidate& cand, const IdentityTolerances& tol = {});

std::vector<IdentityCandidate> builtin_candidates();

// Candidate by name ("A.3" .. "A.6"); throws DomainError if unknown.
IdentityCandidate builtin_candidate(std::string_view name);

// |Pi(-4/k, 4/k) - K(4/k)/2 - k pi / (4 (k + 4))|, k > 4.
double ei_residual(double k);

// Blocks of "key: value" lines separated by blank lines or "---":
//
//   name: A.3
//   p: -x
//   q: x
//   domain: 0 1          (inf and -inf allowed)
//   interval: 0 0.99     (optional when domain is finite)
//   anchor: 0            (optional, defaults to interval lo)
//   r: -1/2              (optional, repeatable)
//   rhs: pi/4/(x+1)      (optional)
//
// '#' starts a comment. Throws ParseError with the line number.
std::vector<IdentityCandidate> parse_candidates(std::istream& in);
std::vector<IdentityCandidate> load_candidates(const std::string& path);

}  // namespace mahlerlab::identities
