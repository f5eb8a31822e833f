#include "mahlerlab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/core.h>

#include "mahlerlab/errors.hpp"

namespace mahlerlab::elliptic {

namespace {

// Target relative error of the duplication iterations.
constexpr double kTolerance = 1e-16;

}  // namespace

// Duplication algorithms after B. C. Carlson, "Numerical computation of real
// or complex elliptic integrals", Numer. Algorithms 10 (1995).

double carlson_rf(double x, double y, double z) {
  if (x < 0 || y < 0 || z < 0) {
    throw DomainError(fmt::format("carlson_rf: negative argument ({}, {}, {})", x, y, z));
  }
  if ((x == 0) + (y == 0) + (z == 0) >= 2) {
    throw DivergenceError("carlson_rf: two or more zero arguments");
  }
  const double a0 = (x + y + z) / 3.0;
  double a = a0;
  const double q = std::pow(3.0 * kTolerance, -1.0 / 6.0) *
                   std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z)});
  double scale = 1.0;  // 4^-m
  const double x0 = x, y0 = y;
  while (scale * q >= std::abs(a)) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const double lambda = sx * sy + sx * sz + sy * sz;
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    z = 0.25 * (z + lambda);
    a = 0.25 * (a + lambda);
    scale *= 0.25;
  }
  const double dx = (a0 - x0) * scale / a;
  const double dy = (a0 - y0) * scale / a;
  const double dz = -dx - dy;
  const double e2 = dx * dy - dz * dz;
  const double e3 = dx * dy * dz;
  return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / std::sqrt(a);
}

double carlson_rc(double x, double y) {
  if (x < 0 || !(y > 0)) {
    throw DomainError(fmt::format("carlson_rc: requires x >= 0, y > 0 (got {}, {})", x, y));
  }
  const double a0 = (x + 2.0 * y) / 3.0;
  double a = a0;
  const double q = std::pow(3.0 * kTolerance, -1.0 / 8.0) * std::abs(a0 - x);
  double scale = 1.0;
  const double y0 = y;
  while (scale * q >= std::abs(a)) {
    const double lambda = 2.0 * std::sqrt(x) * std::sqrt(y) + y;
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    a = 0.25 * (a + lambda);
    scale *= 0.25;
  }
  const double s = (y0 - a0) * scale / a;
  const double s2 = s * s;
  const double series =
      1.0 + s2 * (3.0 / 10.0 +
                  s * (1.0 / 7.0 +
                       s * (3.0 / 8.0 + s * (9.0 / 22.0 + s * (159.0 / 208.0 + s * 9.0 / 8.0)))));
  return series / std::sqrt(a);
}

double carlson_rd(double x, double y, double z) {
  if (x < 0 || y < 0 || !(z > 0) || (x == 0 && y == 0)) {
    throw DomainError(
        fmt::format("carlson_rd: requires x, y >= 0 (not both 0), z > 0 ({}, {}, {})", x, y, z));
  }
  const double a0 = (x + y + 3.0 * z) / 5.0;
  double a = a0;
  const double q = std::pow(0.25 * kTolerance, -1.0 / 6.0) *
                   std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z)});
  double scale = 1.0;
  double sum = 0.0;
  const double x0 = x, y0 = y;
  while (scale * q >= std::abs(a)) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const double lambda = sx * sy + sx * sz + sy * sz;
    sum += scale / (sz * (z + lambda));
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    z = 0.25 * (z + lambda);
    a = 0.25 * (a + lambda);
    scale *= 0.25;
  }
  const double dx = (a0 - x0) * scale / a;
  const double dy = (a0 - y0) * scale / a;
  const double dz = -(dx + dy) / 3.0;
  const double xy = dx * dy;
  const double z2 = dz * dz;
  const double e2 = xy - 6.0 * z2;
  const double e3 = (3.0 * xy - 8.0 * z2) * dz;
  const double e4 = 3.0 * (xy - z2) * z2;
  const double e5 = xy * z2 * dz;
  const double series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0 -
                        9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0;
  return scale * series / (a * std::sqrt(a)) + 3.0 * sum;
}

double carlson_rj(double x, double y, double z, double p) {
  if (x < 0 || y < 0 || z < 0) {
    throw DomainError(fmt::format("carlson_rj: negative argument ({}, {}, {})", x, y, z));
  }
  if (!(p > 0)) {
    throw DomainError(fmt::format("carlson_rj: p = {} <= 0 (principal value not supported)", p));
  }
  if ((x == 0) + (y == 0) + (z == 0) >= 2) {
    throw DivergenceError("carlson_rj: two or more zero arguments");
  }
  const double a0 = (x + y + z + 2.0 * p) / 5.0;
  double a = a0;
  const double delta = (p - x) * (p - y) * (p - z);
  const double q =
      std::pow(0.25 * kTolerance, -1.0 / 6.0) *
      std::max({std::abs(a0 - x), std::abs(a0 - y), std::abs(a0 - z), std::abs(a0 - p)});
  double scale = 1.0;   // 4^-m
  double scale3 = 1.0;  // 4^-3m
  double sum = 0.0;
  const double x0 = x, y0 = y, z0 = z;
  while (scale * q >= std::abs(a)) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z), sp = std::sqrt(p);
    const double lambda = sx * sy + sx * sz + sy * sz;
    const double d = (sp + sx) * (sp + sy) * (sp + sz);
    const double e = scale3 * delta / (d * d);
    sum += scale / d * carlson_rc(1.0, 1.0 + e);
    x = 0.25 * (x + lambda);
    y = 0.25 * (y + lambda);
    z = 0.25 * (z + lambda);
    p = 0.25 * (p + lambda);
    a = 0.25 * (a + lambda);
    scale *= 0.25;
    scale3 *= 1.0 / 64.0;
  }
  const double dx = (a0 - x0) * scale / a;
  const double dy = (a0 - y0) * scale / a;
  const double dz = (a0 - z0) * scale / a;
  const double dp = -(dx + dy + dz) / 2.0;
  const double xyz = dx * dy * dz;
  const double p2 = dp * dp;
  const double e2 = dx * dy + dx * dz + dy * dz - 3.0 * p2;
  const double e3 = xyz + 2.0 * e2 * dp + 4.0 * p2 * dp;
  const double e4 = (2.0 * xyz + e2 * dp + 3.0 * p2 * dp) * dp;
  const double e5 = xyz * p2;
  const double series = 1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0 - 3.0 * e4 / 22.0 -
                        9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0;
  return scale * series / (a * std::sqrt(a)) + 6.0 * sum;
}

namespace {

void check_modulus(double z, const char* who) {
  if (std::isnan(z) || z < 0) {
    throw DomainError(fmt::format("{}: modulus z = {} must be >= 0 (integrand depends on z^2; "
                                  "pass |z|)",
                                  who, z));
  }
}

// 1 - z^2 without cancellation near z = 1.
double complementary_parameter(double z) { return (1.0 - z) * (1.0 + z); }

}  // namespace

double ell_k(EllipticModulus modulus) {
  const double z = modulus.z;
  check_modulus(z, "ell_k");
  if (z >= 1) throw DivergenceError(fmt::format("ell_k: K(z) diverges for z = {} >= 1", z));
  return carlson_rf(0.0, complementary_parameter(z), 1.0);
}

double ell_e(EllipticModulus modulus) {
  const double z = modulus.z;
  check_modulus(z, "ell_e");
  if (z > 1) throw DomainError(fmt::format("ell_e: modulus z = {} > 1", z));
  if (z == 1) return 1.0;
  const double y = complementary_parameter(z);
  return carlson_rf(0.0, y, 1.0) - z * z / 3.0 * carlson_rd(0.0, y, 1.0);
}

double ell_pi(Characteristic characteristic, EllipticModulus modulus) {
  const double n = characteristic.n;
  const double z = modulus.z;
  check_modulus(z, "ell_pi");
  if (std::isnan(n) || n >= 1) {
    throw DomainError(fmt::format("ell_pi: characteristic n = {} >= 1 is singular", n));
  }
  if (z >= 1) throw DomainError(fmt::format("ell_pi: modulus z = {} >= 1", z));
  const double y = complementary_parameter(z);
  const double rf = carlson_rf(0.0, y, 1.0);
  if (n == 0) return rf;
  return rf + n / 3.0 * carlson_rj(0.0, y, 1.0, 1.0 - n);
}

double ell_k_imag(double m) {
  if (std::isnan(m) || m < 0) throw DomainError(fmt::format("ell_k_imag: m = {} < 0", m));
  return carlson_rf(0.0, 1.0 + m * m, 1.0);
}

double ell_pi_imag(Characteristic characteristic, double m) {
  const double n = characteristic.n;
  if (std::isnan(m) || m < 0) throw DomainError(fmt::format("ell_pi_imag: m = {} < 0", m));
  if (std::isnan(n) || n >= 1) {
    throw DomainError(fmt::format("ell_pi_imag: characteristic n = {} >= 1 is singular", n));
  }
  const double y = 1.0 + m * m;
  const double rf = carlson_rf(0.0, y, 1.0);
  if (n == 0) return rf;
  return rf + n / 3.0 * carlson_rj(0.0, y, 1.0, 1.0 - n);
}

}  // namespace mahlerlab::elliptic
