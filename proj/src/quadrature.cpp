#include "adsm/quadrature.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "adsm/error.hpp"

namespace adsm::quad {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;

Result checked(double value, double error, const Options& opts, const char* where) {
  const double allowed = std::max(opts.abs_tol, opts.rel_tol * std::abs(value));
  if (!std::isfinite(value) || !(error <= allowed))
    throw NumericError(fmt::format("{}: quadrature did not converge (value {:.6g}, error {:.3g}, allowed {:.3g})",
                                   where, value, error, allowed),
                       error);
  return {value, error};
}

}  // namespace

Result integrate(const Integrand& f, double a, double b, const Options& opts) {
  if (a == b) return {};
  double error = 0.0;
  const double value = Rule::integrate(f, a, b, opts.max_depth, opts.rel_tol, &error);
  return checked(value, error, opts, "integrate");
}

Result integrate_to_infinity(const Integrand& f, const Options& opts) {
  double error = 0.0;
  const double value =
      Rule::integrate(f, 0.0, std::numeric_limits<double>::infinity(), opts.max_depth, opts.rel_tol, &error);
  return checked(value, error, opts, "integrate_to_infinity");
}

Result integrate_piecewise(const Integrand& f, std::span<const double> breakpoints, const Options& opts) {
  Result total;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    const double a = breakpoints[i];
    const double b = breakpoints[i + 1];
    if (a == b) continue;
    double error = 0.0;
    total.value += Rule::integrate(f, a, b, opts.max_depth, opts.rel_tol, &error);
    total.error += error;
  }
  return checked(total.value, total.error, opts, "integrate_piecewise");
}

}  // namespace adsm::quad
