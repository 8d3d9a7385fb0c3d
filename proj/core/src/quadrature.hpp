#pragma once

// Adaptive quadrature helpers shared by the bath module. Not installed.

#include <cmath>
#include <functional>
#include <span>

namespace pctnpi::detail {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  ///< absolute error estimate
  double l1 = 0.0;     ///< estimate of \int |f|
};

using RealFn = std::function<double(double)>;

/// Globally adaptive Gauss-Kronrod (61 points) over [a, b], starting from the
/// panels delimited by `cuts` (sorted, inside (a, b)). Stops when the summed
/// error estimate is below tol * |value| or at the round-off floor relative to
/// \int |f|. Throws QuadratureError if neither is reached within the panel budget.
QuadResult integrate(const RealFn& f, double a, double b, double tol, std::span<const double> cuts = {});

/// Same for [a, inf) through the map w = a + u / (1 - u). Suited to
/// non-oscillatory integrands with algebraic decay.
QuadResult integrate_to_infinity(const RealFn& f, double a, double tol);

/// \int_a^inf f(w) cos(nu w) dw and \int_a^inf f(w) sin(nu w) dw for smooth,
/// decaying f (double-exponential Fourier quadrature). nu may be any sign; a
/// zero frequency falls back to integrate_to_infinity for the cosine part.
QuadResult fourier_cos_tail(const RealFn& f, double a, double nu, double tol);
QuadResult fourier_sin_tail(const RealFn& f, double a, double nu, double tol);

}  // namespace pctnpi::detail
