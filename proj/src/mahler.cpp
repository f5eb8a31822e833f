#include "mahlerlab/mahler.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/core.h>

#include "mahlerlab/elliptic.hpp"
#include "mahlerlab/errors.hpp"
#include "mahlerlab/quadrature.hpp"

namespace mahlerlab::mahler {

using std::numbers::pi;

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::Small: return "SMALL";
    case Regime::Mid: return "MID";
    case Regime::Large: return "LARGE";
  }
  return "?";
}

const char* to_string(Labeling labeling) {
  return labeling == Labeling::Principal ? "principal" : "swapped";
}

FamilyPoint params_from_k(double k) {
  if (!(k > 0) || k == 4) {
    throw DomainError(fmt::format("params_from_k: singular parameter k = {}", k));
  }
  FamilyPoint point;
  point.k = k;
  if (k < 4) {
    point.a = std::sqrt((4 + k) / (4 - k));
    point.c = k / std::sqrt(4 - k);
    point.regime = Regime::Small;
  } else {
    // sqrt(4 - k) = i sqrt(k - 4)
    point.a_tilde = std::sqrt((k + 4) / (k - 4));
    point.c_tilde = k / std::sqrt(k - 4);
    point.a = {0.0, point.a_tilde};
    point.c = {0.0, -point.c_tilde};
    point.regime = k <= kRegimeBoundary ? Regime::Mid : Regime::Large;
  }
  return point;
}

std::pair<std::complex<double>, std::complex<double>> QuadraticFactorization::roots(
    double theta) const {
  const double b = B(theta);
  const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4.0 * constant_sign));
  return {(-b + disc) / 2.0, (-b - disc) / 2.0};
}

QuadraticFactorization factor_p1k(double k) {
  return {[k](double theta) { return 2.0 * std::cos(theta) + k; }, 1};
}

QuadraticFactorization factor_ptilde(double k) {
  const FamilyPoint point = params_from_k(k);
  if (k < 4) throw DomainError(fmt::format("factor_ptilde: k = {} must exceed 4", k));
  return {[at = point.a_tilde, ct = point.c_tilde](double theta) {
            return 2.0 * at * std::cos(theta) - ct;
          },
          -1};
}

QuadraticFactorization factor_pac_small(double k) {
  const FamilyPoint point = params_from_k(k);
  if (k > 4) throw DomainError(fmt::format("factor_pac_small: k = {} must be below 4", k));
  return {[a = point.a.real(), c = point.c.real()](double theta) {
            return 2.0 * a * std::cos(theta) + c;
          },
          1};
}

LaurentPoly2::LaurentPoly2(std::vector<LaurentTerm> terms) : terms_(std::move(terms)) {}

bool LaurentPoly2::is_zero() const {
  std::map<std::pair<int, int>, std::complex<double>> merged;
  for (const auto& t : terms_) merged[{t.x_exp, t.y_exp}] += t.coeff;
  return std::all_of(merged.begin(), merged.end(),
                     [](const auto& kv) { return kv.second == 0.0; });
}

std::complex<double> LaurentPoly2::operator()(std::complex<double> x,
                                              std::complex<double> y) const {
  std::complex<double> sum = 0.0;
  for (const auto& t : terms_) sum += t.coeff * std::pow(x, t.x_exp) * std::pow(y, t.y_exp);
  return sum;
}

LaurentPoly2 LaurentPoly2::p1k(double k) {
  return LaurentPoly2({{1, 0, 1.0}, {-1, 0, 1.0}, {0, 1, 1.0}, {0, -1, 1.0}, {0, 0, k}});
}

LaurentPoly2 LaurentPoly2::pac(std::complex<double> a, std::complex<double> c) {
  return LaurentPoly2({{1, 0, a}, {-1, 0, a}, {0, 1, 1.0}, {0, -1, 1.0}, {0, 0, c}});
}

LaurentPoly2 LaurentPoly2::ptilde(double k) {
  const FamilyPoint point = params_from_k(k);
  if (k < 4) throw DomainError(fmt::format("ptilde: k = {} must exceed 4", k));
  return LaurentPoly2({{1, 0, point.a_tilde},
                       {-1, 0, point.a_tilde},
                       {0, 1, 1.0},
                       {0, -1, -1.0},
                       {0, 0, -point.c_tilde}});
}

namespace {

void check_tol(double tol, const char* who) {
  if (!(tol >= kMinTol)) {
    throw AccuracyError(fmt::format("{}: tolerance {:g} below attainable {:g}", who, tol, kMinTol),
                        NAN, NAN);
  }
}

// acosh(1 + e) for e >= 0 without cancellation.
double acosh1p(double e) { return std::log1p(e + std::sqrt(e * (2.0 + e))); }

// (1/pi) int g(amp * |cos t - u|) dt over the part of [0, pi] where
// side * (cos t - u) > 0. The crossing angle arccos(u) becomes an exact
// panel endpoint and |cos t - u| is formed from the distance to it, so the
// kink of log+ never sits inside a panel.
double arc_integral(const std::function<double(double)>& g, double amp, double u, int side,
                    double tol) {
  if (side > 0 && u >= 1) return 0.0;
  if (side < 0 && u <= -1) return 0.0;
  if ((side > 0 && u <= -1) || (side < 0 && u >= 1)) {
    auto f = [&](double t) { return g(amp * std::abs(std::cos(t) - u)); };
    return quad::tanh_sinh(f, 0.0, pi, tol * pi).value / pi;
  }
  const double crossing = std::acos(u);
  if (side > 0) {
    // t in [0, crossing]: cos t - cos c = 2 sin((c + t)/2) sin((c - t)/2)
    auto f = [&](double t, double, double to_c) {
      return g(amp * 2.0 * std::sin(0.5 * (crossing + t)) * std::sin(0.5 * to_c));
    };
    return quad::tanh_sinh(f, 0.0, crossing, tol * pi).value / pi;
  }
  auto f = [&](double t, double from_c, double) {
    return g(amp * 2.0 * std::sin(0.5 * (crossing + t)) * std::sin(0.5 * from_c));
  };
  return quad::tanh_sinh(f, crossing, pi, tol * pi).value / pi;
}

}  // namespace

double m_p1k(double k, double tol) {
  check_tol(tol, "m_p1k");
  if (!(k > 0)) throw DomainError(fmt::format("m_p1k: k = {} must be positive", k));
  // The larger root has modulus exp(acosh(B/2)) when B = 2 cos t + k > 2;
  // otherwise both roots lie on the unit circle. B > -2 always for k > 0.
  return arc_integral(acosh1p, 1.0, 1.0 - 0.5 * k, +1, tol);
}

HalfMeasures half_measures_ptilde(double k, double tol) {
  check_tol(tol, "half_measures_ptilde");
  if (!(k > 4)) throw DomainError(fmt::format("half_measures_ptilde: k = {} must exceed 4", k));
  // y^2 + B y - 1 with B = 2 sqrt(k+4) (cos t - u) / sqrt(k-4), u = k / (2 sqrt(k+4)).
  // log|y-| = asinh(B/2), log|y+| = -asinh(B/2).
  const double amp = std::sqrt(k + 4) / std::sqrt(k - 4);
  const double u = k / (2.0 * std::sqrt(k + 4));
  const auto asinh_fn = [](double e) { return std::asinh(e); };
  HalfMeasures h;
  h.m_minus = arc_integral(asinh_fn, amp, u, +1, tol);
  h.m_plus = arc_integral(asinh_fn, amp, u, -1, tol);
  h.m_total = h.m_plus + h.m_minus;
  return h;
}

HalfMeasures half_measures_pac_small_k(double k, double tol) {
  check_tol(tol, "half_measures_pac_small_k");
  if (!(k > 0 && k < 4)) {
    throw DomainError(fmt::format("half_measures_pac_small_k: k = {} outside (0, 4)", k));
  }
  const double a = std::sqrt((4 + k) / (4 - k));
  const double c = k / std::sqrt(4 - k);
  // B = 2a cos t + c. |y-| > 1 where B > 2, |y+| > 1 where B < -2; both
  // roots are unimodular in between and contribute nothing.
  HalfMeasures h;
  h.m_minus = arc_integral(acosh1p, a, (2.0 - c) / (2.0 * a), +1, tol);
  h.m_plus = arc_integral(acosh1p, a, (-2.0 - c) / (2.0 * a), -1, tol);
  h.m_total = h.m_plus + h.m_minus;
  return h;
}

double m_generic_2d(const LaurentPoly2& poly, double tol) {
  if (poly.is_zero()) throw DomainError("m_generic_2d: polynomial is identically zero");
  if (!(tol > 0)) throw DomainError("m_generic_2d: tolerance must be positive");
  const double inner_tol = tol * 1e-3;

  // Group by y exponent once; per outer angle only the y-coefficients change.
  std::map<int, std::vector<std::pair<int, std::complex<double>>>> by_y;
  for (const auto& t : poly.terms()) by_y[t.y_exp].push_back({t.x_exp, t.coeff});

  auto outer = [&](double s1) {
    std::vector<std::pair<int, std::complex<double>>> coeffs;
    for (const auto& [j, row] : by_y) {
      std::complex<double> cj = 0.0;
      for (const auto& [i, c] : row) cj += c * std::polar(1.0, 2.0 * pi * i * s1);
      coeffs.push_back({j, cj});
    }
    auto inner = [&](double s2) {
      std::complex<double> v = 0.0;
      for (const auto& [j, cj] : coeffs) v += cj * std::polar(1.0, 2.0 * pi * j * s2);
      // An exact zero at a node is a measure-zero event; bisection isolates it.
      return std::log(std::max(std::abs(v), 1e-300));
    };
    return quad::gauss_kronrod(inner, 0.0, 1.0, inner_tol, 20000).value;
  };
  return quad::gauss_kronrod(outer, 0.0, 1.0, 0.5 * tol, 20000).value;
}

double dfdk(double k) {
  if (!(k > 4)) throw DomainError(fmt::format("dfdk: k = {} must exceed 4", k));
  return 2.0 / (k * pi) * elliptic::ell_k(4.0 / k);
}

double dhdk(double k) {
  if (!(k > 4)) throw DomainError(fmt::format("dhdk: k = {} must exceed 4", k));
  const double z = 4.0 / k;
  return (elliptic::ell_k(z) - 8.0 / k * elliptic::ell_pi(-z, z)) / ((k - 4) * pi);
}

ReductionChain dhdk_reduction_chain(double k, double tol) {
  if (!(k > 4)) throw DomainError(fmt::format("dhdk_reduction_chain: k = {} must exceed 4", k));
  ReductionChain chain;
  const double root = std::sqrt(k + 4);
  const double shift = (k - 8) * root / 16.0;
  const double lin = k / root;
  const double cst = (k * k + 4 * k - 16) / (4 * (k + 4));
  // t = cos(theta) absorbs dt / sqrt(1 - t^2). The quadratic has negative
  // discriminant 4(4 - k)/(k + 4), so the root stays real.
  auto t_integrand = [&](double theta) {
    const double t = std::cos(theta);
    return (t - shift) / std::sqrt(t * t + lin * t + cst);
  };
  chain.t_integral = quad::tanh_sinh(t_integrand, 0.0, pi, tol).value;
  chain.derivative = -4.0 / ((k * k - 16) * pi) * chain.t_integral;

  // x-form with A1 = B2 = 4/k, A2 = (k-4)/k, B1 = -(k+4)/k on [-x0, x0],
  // x0 = 2/sqrt(k+4); B1 x^2 + A1 = ((k+4)/k)(x0 - x)(x0 + x).
  const double x0 = 2.0 / root;
  auto weight = [&](double x, double from_a, double to_b) {
    const double first = (k + 4) / k * from_a * to_b;
    const double second = 4.0 / k * x * x + (k - 4) / k;
    return 1.0 / std::sqrt(first * second);
  };
  chain.x_integral = quad::tanh_sinh(
                         [&](double x, double l, double r) {
                           return (-(k + 4) / 8.0 + (1.0 + x) / (1.0 - x * x)) * weight(x, l, r);
                         },
                         -x0, x0, tol)
                         .value;
  chain.odd_part = quad::tanh_sinh(
                       [&](double x, double l, double r) {
                         return x / (1.0 - x * x) * weight(x, l, r);
                       },
                       -x0, x0, tol)
                       .value;
  chain.first_kind = quad::tanh_sinh(weight, -x0, x0, tol).value;
  chain.third_kind = quad::tanh_sinh(
                         [&](double x, double l, double r) {
                           return weight(x, l, r) / (1.0 - x * x);
                         },
                         -x0, x0, tol)
                         .value;
  const double m = 4.0 / std::sqrt(k * k - 16);
  const double pre = 2.0 * k / std::sqrt(k * k - 16);
  chain.first_kind_closed = pre * elliptic::ell_k_imag(m);
  chain.third_kind_closed = pre * elliptic::ell_pi_imag(4.0 / (k + 4), m);
  return chain;
}

double dhdk_integral_form(double k, double tol) {
  if (!(k > 4)) throw DomainError(fmt::format("dhdk_integral_form: k = {} must exceed 4", k));
  const double root = std::sqrt(k + 4);
  const double shift = (k - 8) * root / 16.0;
  const double lin = k / root;
  const double cst = (k * k + 4 * k - 16) / (4 * (k + 4));
  auto integrand = [&](double theta) {
    const double t = std::cos(theta);
    return (t - shift) / std::sqrt(t * t + lin * t + cst);
  };
  const double prefactor = -4.0 / ((k * k - 16) * pi);
  const double inner_tol = std::clamp(tol / std::abs(prefactor), 1e-13, 1e-10);
  return prefactor * quad::tanh_sinh(integrand, 0.0, pi, inner_tol).value;
}

namespace {

double internal_tol(double tol) { return std::max(kMinTol, std::min(1e-11, tol * 1e-2)); }

}  // namespace

double verify_thm_main(double k, double tol) {
  check_tol(tol, "verify_thm_main");
  if (!(k > 4)) throw DomainError(fmt::format("verify_thm_main: k = {} must exceed 4", k));
  const double qt = internal_tol(tol);
  const double f = m_p1k(k, qt);
  const HalfMeasures h = half_measures_ptilde(k, qt);
  return std::abs(f - 2.0 * (h.m_plus - h.m_minus) - 0.5 * std::log((k - 4) / (k + 4)));
}

CorollaryCheck verify_corollary(double k, double tol) {
  check_tol(tol, "verify_corollary");
  if (!(k > kRegimeBoundary)) {
    throw DomainError(
        fmt::format("verify_corollary: k = {} must exceed 2(1 + sqrt 5) = {}", k, kRegimeBoundary));
  }
  const double qt = internal_tol(tol);
  const double f = m_p1k(k, qt);
  const HalfMeasures h = half_measures_ptilde(k, qt);
  CorollaryCheck check;
  check.m_minus = h.m_minus;
  check.residual = std::abs(f - 2.0 * h.m_total - 0.5 * std::log((k - 4) / (k + 4)));
  return check;
}

LszCheck verify_lsz(double k, double tol) {
  check_tol(tol, "verify_lsz");
  const double qt = internal_tol(tol);
  LszCheck check;
  check.half = half_measures_pac_small_k(k, qt);
  check.m_p1k = m_p1k(k, qt);
  check.log_a = 0.5 * std::log((4 + k) / (4 - k));
  check.log_residual = std::abs(check.half.m_total - check.log_a);
  check.principal_residual =
      std::abs(check.half.m_minus - 3.0 * check.half.m_plus - check.m_p1k);
  check.swapped_residual = std::abs(check.half.m_plus - 3.0 * check.half.m_minus - check.m_p1k);
  check.matched = check.principal_residual <= check.swapped_residual ? Labeling::Principal
                                                                     : Labeling::Swapped;
  return check;
}

}  // namespace mahlerlab::mahler
