#pragma once

// Mahler and half-Mahler measures of
//
//   P_{1,k}(x, y) = x + 1/x + y + 1/y + k
//   P_{a,c}(x, y) = a (x + 1/x) + y + 1/y + c,   a = sqrt((4+k)/(4-k)), c = k/sqrt(4-k)
//
// and of the real form used for k > 4,
//
//   Pt_k(x, y) = -i P_{a,c}(x, i y)
//              = sqrt((k+4)/(k-4)) (x + 1/x) + y - 1/y - k/sqrt(k-4).
//
// All measures are in nats. The half measures m+ and m- integrate log+ of the
// two roots y+(x), y-(x) of the monic quadratic in y over |x| = 1; y+ always
// takes the + sign in front of the principal square root of the discriminant.

#include <complex>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace mahlerlab::mahler {

// 2(1 + sqrt 5): above it the crossing |y+| = |y-| = 1 leaves the unit circle
// and m-(Pt_k) vanishes.
inline constexpr double kRegimeBoundary = 2.0 * (1.0 + 2.23606797749978969640917366873128);

enum class Regime { Small, Mid, Large };

const char* to_string(Regime regime);

struct FamilyPoint {
  double k = 0.0;
  // Parameters of P_{a,c}; purely imaginary for k > 4.
  std::complex<double> a;
  std::complex<double> c;
  // Real coefficients of Pt_k (k > 4 only, zero otherwise).
  double a_tilde = 0.0;
  double c_tilde = 0.0;
  Regime regime = Regime::Small;
};

// k > 0, k != 4. Throws DomainError otherwise.
FamilyPoint params_from_k(double k);

// y^2 + B(x) y + sign = (y - y+)(y - y-), with B real on the unit circle.
struct QuadraticFactorization {
  std::function<double(double theta)> B;
  int constant_sign = 1;

  // (y+, y-) at x = e^{i theta}.
  std::pair<std::complex<double>, std::complex<double>> roots(double theta) const;
};

QuadraticFactorization factor_p1k(double k);
QuadraticFactorization factor_ptilde(double k);     // k > 4
QuadraticFactorization factor_pac_small(double k);  // 0 < k < 4

struct HalfMeasures {
  double m_plus = 0.0;
  double m_minus = 0.0;
  double m_total = 0.0;
};

struct LaurentTerm {
  int x_exp;
  int y_exp;
  std::complex<double> coeff;
};

// Laurent polynomial in two variables as a list of monomials x^i y^j.
class LaurentPoly2 {
 public:
  LaurentPoly2() = default;
  explicit LaurentPoly2(std::vector<LaurentTerm> terms);

  const std::vector<LaurentTerm>& terms() const { return terms_; }
  bool is_zero() const;
  std::complex<double> operator()(std::complex<double> x, std::complex<double> y) const;

  static LaurentPoly2 p1k(double k);
  static LaurentPoly2 pac(std::complex<double> a, std::complex<double> c);
  static LaurentPoly2 ptilde(double k);

 private:
  std::vector<LaurentTerm> terms_;
};

inline constexpr double kDefaultMeasureTol = 1e-8;
inline constexpr double kDefaultOracleTol = 1e-6;
// Below this, double precision quadrature cannot honour the request.
inline constexpr double kMinTol = 1e-13;

// m(P_{1,k}) for k > 0 by the one-dimensional Jensen integral; absolute error <= tol.
double m_p1k(double k, double tol = kDefaultMeasureTol);

// m+-(Pt_k) = m+-(P_{a,c}) for k > 4.
HalfMeasures half_measures_ptilde(double k, double tol = kDefaultMeasureTol);

// m+-(P_{a,c}) for real a, c, i.e. 0 < k < 4.
HalfMeasures half_measures_pac_small_k(double k, double tol = kDefaultMeasureTol);

// Brute-force double integral of log|P| over the torus (nested adaptive
// Gauss-Kronrod). Slow; meant as an oracle. tol >= 1e-8 recommended.
double m_generic_2d(const LaurentPoly2& poly, double tol = kDefaultOracleTol);

// d m(P_{1,k}) / dk = (2 / (k pi)) K(4/k), k > 4.
double dfdk(double k);

// d (m+ - m-)(P_{a,c}) / dk = (K(4/k) - (8/k) Pi(-4/k, 4/k)) / ((k - 4) pi), k > 4.
double dhdk(double k);

// The intermediate integrals that turn dh/dk into complete elliptic integrals.
struct ReductionChain {
  double t_integral = 0.0;      // int_{-1}^{1} (t - g) / sqrt(t^2 + b t + d) dt / sqrt(1 - t^2)
  double x_integral = 0.0;      // the same integral after the Moebius substitution
  double odd_part = 0.0;        // int x / (1 - x^2) dx / sqrt(...), zero by symmetry
  double first_kind = 0.0;      // int dx / sqrt(...)
  double first_kind_closed = 0.0;   // 2k / sqrt(k^2 - 16) K(i * 4/sqrt(k^2 - 16))
  double third_kind = 0.0;      // int 1 / (1 - x^2) dx / sqrt(...)
  double third_kind_closed = 0.0;   // 2k / sqrt(k^2 - 16) Pi(4/(k+4), i * 4/sqrt(k^2 - 16))
  double derivative = 0.0;      // dh/dk assembled from t_integral
};

ReductionChain dhdk_reduction_chain(double k, double tol = 1e-12);

// dh/dk by direct quadrature of the t-integral; independent of dhdk().
double dhdk_integral_form(double k, double tol = 1e-10);

// |m(P_{1,k}) - 2 (m+ - m-) - log((k-4)/(k+4)) / 2| for k > 4.
double verify_thm_main(double k, double tol = kDefaultMeasureTol);

struct CorollaryCheck {
  double m_minus = 0.0;
  double residual = 0.0;  // |m(P_{1,k}) - 2 m(P_{a,c}) - log((k-4)/(k+4)) / 2|
};

// k > 2(1 + sqrt 5).
CorollaryCheck verify_corollary(double k, double tol = kDefaultMeasureTol);

enum class Labeling { Principal, Swapped };

const char* to_string(Labeling labeling);

struct LszCheck {
  HalfMeasures half;           // principal labeling
  double m_p1k = 0.0;
  double log_a = 0.0;
  double log_residual = 0.0;        // |m(P_{a,c}) - log a|
  double principal_residual = 0.0;  // |m- - 3 m+ - m(P_{1,k})|
  double swapped_residual = 0.0;    // |m+ - 3 m- - m(P_{1,k})|
  Labeling matched = Labeling::Principal;
};

// Small-k identities m(P_{a,c}) = log a and m(P_{1,k}) = m- - 3 m+ with both
// root labelings tried, 0 < k < 4.
LszCheck verify_lsz(double k, double tol = kDefaultMeasureTol);

}  // namespace mahlerlab::mahler
