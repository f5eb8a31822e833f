#pragma once

// Second-order truncated Taylor arithmetic: a Jet2 carries f(x), f'(x) and
// f''(x) and propagates them through every operation by the chain rule.

#include <cmath>

#include <fmt/core.h>

#include "mahlerlab/errors.hpp"

namespace mahlerlab {

struct Jet2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  constexpr Jet2() = default;
  constexpr Jet2(double v, double first = 0.0, double second = 0.0)  // NOLINT: implicit from scalar
      : value(v), d1(first), d2(second) {}

  static constexpr Jet2 variable(double x) { return {x, 1.0, 0.0}; }
  static constexpr Jet2 constant(double c) { return {c, 0.0, 0.0}; }

  Jet2& operator+=(const Jet2& o) { return *this = *this + o; }
  Jet2& operator-=(const Jet2& o) { return *this = *this - o; }
  Jet2& operator*=(const Jet2& o) { return *this = *this * o; }
  Jet2& operator/=(const Jet2& o) { return *this = *this / o; }

  friend constexpr Jet2 operator+(const Jet2& a, const Jet2& b) {
    return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2};
  }
  friend constexpr Jet2 operator-(const Jet2& a, const Jet2& b) {
    return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2};
  }
  friend constexpr Jet2 operator-(const Jet2& a) { return {-a.value, -a.d1, -a.d2}; }
  friend constexpr Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
            a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
  }
  friend constexpr Jet2 operator/(const Jet2& a, const Jet2& b) {
    const double w = a.value / b.value;
    const double w1 = (a.d1 - w * b.d1) / b.value;
    const double w2 = (a.d2 - 2.0 * w1 * b.d1 - w * b.d2) / b.value;
    return {w, w1, w2};
  }
};

// g(u) given g(u0), g'(u0), g''(u0).
constexpr Jet2 compose(const Jet2& u, double g, double g1, double g2) {
  return {g, g1 * u.d1, g2 * u.d1 * u.d1 + g1 * u.d2};
}

// Requires u.value > 0 for finite derivatives; negative arguments throw.
inline Jet2 sqrt(const Jet2& u) {
  if (u.value < 0) {
    throw DomainError(fmt::format("Jet2 sqrt of negative value {}", u.value));
  }
  const double s = std::sqrt(u.value);
  return compose(u, s, 0.5 / s, -0.25 / (s * u.value));
}

inline Jet2 exp(const Jet2& u) {
  const double e = std::exp(u.value);
  return compose(u, e, e, e);
}

inline Jet2 log(const Jet2& u) {
  if (!(u.value > 0)) throw DomainError(fmt::format("Jet2 log of non-positive value {}", u.value));
  return compose(u, std::log(u.value), 1.0 / u.value, -1.0 / (u.value * u.value));
}

inline Jet2 pow(const Jet2& u, int n) {
  if (n == 0) return {1.0};
  Jet2 base = n > 0 ? u : Jet2{1.0} / u;
  unsigned e = static_cast<unsigned>(n > 0 ? n : -n);
  Jet2 result{1.0};
  while (e) {
    if (e & 1u) result = result * base;
    base = base * base;
    e >>= 1u;
  }
  return result;
}

inline Jet2 pow(const Jet2& u, double a) {
  if (a == std::trunc(a) && std::abs(a) < 1024) return pow(u, static_cast<int>(a));
  if (!(u.value > 0)) {
    throw DomainError(fmt::format("Jet2 pow: non-integer power {} of {}", a, u.value));
  }
  const double g = std::pow(u.value, a);
  return compose(u, g, a * g / u.value, a * (a - 1.0) * g / (u.value * u.value));
}

}  // namespace mahlerlab
