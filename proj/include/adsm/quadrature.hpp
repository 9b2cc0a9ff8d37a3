#pragma once

#include <functional>
#include <span>

namespace adsm::quad {

struct Options {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  unsigned max_depth = 30;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
};

using Integrand = std::function<double(double)>;

/// Adaptive Gauss-Kronrod (7/15) on [a, b]. Throws NumericError carrying the
/// error estimate if it exceeds max(abs_tol, rel_tol * |value|).
Result integrate(const Integrand& f, double a, double b, const Options& opts = {});

/// Integral over [0, inf) after the substitution x = t / (1 - t).
Result integrate_to_infinity(const Integrand& f, const Options& opts = {});

/// Sum of adaptive integrals over consecutive breakpoint intervals. Meant for
/// integrands with kinks at known locations (piecewise-linear curves).
Result integrate_piecewise(const Integrand& f, std::span<const double> breakpoints,
                           const Options& opts = {});

}  // namespace adsm::quad
