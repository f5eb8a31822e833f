#pragma once

// Complete elliptic integrals on top of Carlson's symmetric forms.
//
// Every function here takes the MODULUS z (not the parameter m = z^2):
//
//   K(z)     = int_0^1 dx / sqrt((1 - x^2)(1 - z^2 x^2))
//   E(z)     = int_0^1 sqrt(1 - z^2 x^2) / sqrt(1 - x^2) dx
//   Pi(n, z) = int_0^1 dx / ((1 - n x^2) sqrt((1 - x^2)(1 - z^2 x^2)))

namespace mahlerlab::elliptic {

// Strong types so that modulus and characteristic cannot be swapped silently.
struct EllipticModulus {
  double z;
  explicit constexpr EllipticModulus(double value) : z(value) {}
};

struct Characteristic {
  double n;
  explicit constexpr Characteristic(double value) : n(value) {}
};

// Carlson symmetric forms, relative error around 1e-15.
double carlson_rf(double x, double y, double z);
double carlson_rc(double x, double y);  // y > 0
double carlson_rd(double x, double y, double z);
double carlson_rj(double x, double y, double z, double p);  // p > 0 only

// 0 <= z < 1. Throws DomainError for z < 0 and DivergenceError for z >= 1.
double ell_k(EllipticModulus z);
// 0 <= z <= 1.
double ell_e(EllipticModulus z);
// n < 1, 0 <= z < 1.
double ell_pi(Characteristic n, EllipticModulus z);

// K and Pi at the purely imaginary modulus i*m, i.e. z^2 = -m^2 < 0:
//   ell_k_imag(m)     = int_0^1 dx / sqrt((1 - x^2)(1 + m^2 x^2))
//   ell_pi_imag(n, m) = int_0^1 dx / ((1 - n x^2) sqrt((1 - x^2)(1 + m^2 x^2)))
double ell_k_imag(double m);
double ell_pi_imag(Characteristic n, double m);

// Convenience overloads for plain doubles (modulus first for K/E, then
// characteristic, modulus for Pi as in the integral notation).
inline double ell_k(double z) { return ell_k(EllipticModulus{z}); }
inline double ell_e(double z) { return ell_e(EllipticModulus{z}); }
inline double ell_pi(double n, double z) { return ell_pi(Characteristic{n}, EllipticModulus{z}); }
inline double ell_pi_imag(double n, double m) { return ell_pi_imag(Characteristic{n}, m); }

}  // namespace mahlerlab::elliptic
