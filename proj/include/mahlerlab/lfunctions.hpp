#pragma once

// L-functions of the curves
//
//   A_k: y^2 = x^3 + (k^2/8)(k^2/8 - 1) x^2 + (k^4/256) x
//
// for the real k with a known Mahler measure formula, and the eta-quotient
// parametrization check for the k = 5 curve.
//
// L(E, 2) is computed from Lambda(s) = N^{s/2} (2 pi)^{-s} Gamma(s) L(E, s) =
// eps Lambda(2 - s) by splitting the Mellin integral at y = A:
//
//   L(E, 2) = sum a_n e^{-2 pi n A} (2 pi A / n + 1 / n^2)
//           + eps (4 pi^2 / N) sum a_n E1(2 pi n / (N A)),
//
// and L'(E, 0) = Lambda(0) = eps (N / (4 pi^2)) L(E, 2).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace mahlerlab::lfunctions {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

std::string to_string(const Rational& r);

// One row of the table of proven formulas m(P_{1,k}) = r_k L'(E_k, 0).
struct SupportedCurve {
  std::string label;  // "1", "4sqrt2", ...
  double k = 0.0;
  std::int64_t k_squared = 0;
  int conductor = 0;
  Rational r_k;
};

const std::vector<SupportedCurve>& supported_curves();

struct CurveModel {
  std::string label;
  double k_label = 0.0;
  std::int64_t k_squared = 0;
  // y^2 = x^3 + a2 x^2 + a4 x, integral after (x, y) -> (x / d^2, y / d^3).
  std::int64_t a2 = 0;
  std::int64_t a4 = 0;
  std::int64_t discriminant = 0;
  int conductor_N = 0;
  std::int64_t scaling_exponent = 1;  // d
  Rational r_k;
};

// k must match a supported row to 1e-9 relative; otherwise UnsupportedCurveError.
CurveModel curve_from_k(double k);

// -sum_x legendre(x^3 + a2 x^2 + a4 x, p). p odd and p not dividing the
// discriminant of the model, else DomainError.
int ap_good(const CurveModel& curve, std::int64_t p);

enum class ApRoute {
  CharacterSum,        // odd p, good on the given model
  MinimalModelCount,   // good after local minimization (odd p or p = 2)
  NodeSlopes,          // multiplicative: split iff the node's tangent slopes are in F_p
  Additive,            // p^2 | N
  Consistency,         // fixed by split-point independence of L(E, 2)
};

const char* to_string(ApRoute route);

struct LocalFactor {
  std::int64_t p = 0;
  int ap = 0;
  ApRoute route = ApRoute::CharacterSum;
};

// a_p for p | N, or for p dividing the model's discriminant only (non-minimal
// model). Returns the route used. Primes where local analysis is
// inconclusive come back with route Consistency and ap = 0 until an_table
// resolves them.
LocalFactor ap_bad(const CurveModel& curve, std::int64_t p);

struct ApOptions {
  // Ignore local analysis at 2 and 3 and fix those a_p by the consistency
  // search instead.
  bool consistency_at_small_primes = false;
};

struct LFunctionData {
  std::vector<std::int64_t> an;  // an[n] for 1 <= n <= n_max; an[0] unused
  int eps = 0;                   // 0 until sign_detect has run
  int N = 0;
  std::vector<LocalFactor> special;  // every prime not handled by ap_good

  int n_max() const { return static_cast<int>(an.size()) - 1; }
};

// ceil(18 sqrt(N) / (2 pi)) + 50.
int default_nmax(int N);

// a_n for n <= n_max. eps is left at 0 unless the consistency search ran.
LFunctionData an_table(const CurveModel& curve, int n_max, const ApOptions& options = {});

// Exponential integral E1(x), x > 0.
double expint_e1(double x);

// The split formula at y = A with the given sign; no tail control.
double l2_at_split(const LFunctionData& data, double A, int eps);

struct LValueResult {
  double L2 = 0.0;
  double Lprime0 = 0.0;
  int n_used = 0;
  double tail_bound = 0.0;
  double split = 0.0;
  int eps = 0;
};

// Split at A = 1/sqrt(N). Needs data.eps set. Throws AccuracyError (with the
// estimate) when the truncation bound is not below tol.
LValueResult l2(const LFunctionData& data, double tol = 1e-12);

// Bound on the terms beyond n_max at split A, using |a_n| <= 2n.
double tail_bound(int N, int n_max, double A);

struct SignDetection {
  int eps = 0;
  double discrepancy_plus = 0.0;   // |L2(0.8/sqrt N) - L2(1.3/sqrt N)| with eps = +1
  double discrepancy_minus = 0.0;  // same with eps = -1
};

// Picks the sign whose split discrepancy is below 1e-10; DataError if not unique.
SignDetection sign_detect(const LFunctionData& data);

struct LValueReport {
  CurveModel curve;
  LFunctionData data;
  SignDetection sign;
  LValueResult value;
};

// curve_from_k, an_table (n_max = 0 means default), sign_detect, l2.
LValueReport lvalue_for_k(double k, double tol = 1e-12, int n_max = 0, const ApOptions& options = {});

// eta(i t) = q^{1/24} prod_{n <= terms} (1 - q^n), q = e^{-2 pi t}.
double dedekind_eta(double t, int terms = 40);

struct EtaParam {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double residual = 0.0;  // |3 (x + 1/x) + y - 1/y - 5|
};

EtaParam eta_param(double t);
double verify_eta_param(double t);

void write_an_csv(std::ostream& out, const LFunctionData& data);
nlohmann::json an_json(const LFunctionData& data);
nlohmann::json summary_json(const LValueReport& report);
std::string summary_csv_header();
std::string summary_csv_row(const LValueReport& report);

}  // namespace mahlerlab::lfunctions
