#pragma once

#include <functional>

namespace mahlerlab::quad {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  int evaluations = 0;
};

// Integrand that also receives the distances of the node to both ends of the
// interval, computed without cancellation. Endpoint singularities such as
// 1/sqrt(1 - x) must be written in terms of `to_b` (resp. `from_a`) to keep
// full relative accuracy at nodes that round to the endpoint.
using EndpointIntegrand = std::function<double(double x, double from_a, double to_b)>;
using Integrand = std::function<double(double x)>;

// Double-exponential (tanh-sinh) quadrature on a finite interval [a, b].
// The step is halved until two successive estimates differ by at most `tol`
// (absolute). Throws AccuracyError carrying the best estimate when
// `max_levels` halvings are not enough.
QuadResult tanh_sinh(const EndpointIntegrand& f, double a, double b, double tol,
                     int max_levels = 12);
QuadResult tanh_sinh(const Integrand& f, double a, double b, double tol, int max_levels = 12);

// Validation backstop used by the test oracles: tanh-sinh estimate of the
// integral of f over [a, b] with absolute error <= tol.
double quadrature_oracle(const Integrand& f, double a, double b, double tol);
double quadrature_oracle(const EndpointIntegrand& f, double a, double b, double tol);

// Globally adaptive Gauss-Kronrod (7/15) quadrature. Never samples the
// endpoints and copes with interior integrable singularities by bisection,
// which makes it the workhorse for the brute-force torus integrals.
QuadResult gauss_kronrod(const Integrand& f, double a, double b, double tol,
                         int max_intervals = 4000);

}  // namespace mahlerlab::quad
