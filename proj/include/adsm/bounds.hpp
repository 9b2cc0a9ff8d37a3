#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adsm/dist.hpp"

namespace adsm::bounds {

/// Lower and upper bound on the steady-state compromise probability q.
struct BoundsReport {
  double lower = 0.0;
  double upper = 1.0;
  std::string theorem;
  std::map<std::string, double> inputs;
  /// Lower bound as printed with gamma in the denominator, kept next to the
  /// value derived from the proof chain for the exponential theorems.
  std::optional<double> printed_lower;
  std::vector<std::string> notes;
};

/// General distributions on a regular graph, PUOD neighbor clocks with common
/// marginal F2 and X1 independent of them:
///   I_D / (int F1 + I_D) <= q <= I_D / (int F1 * F2^kbar + I_D).
/// Integrals use the adaptive quadrature.
BoundsReport bounds_general_regular(const dist::AttackDefenseModel& model, double kbar);

/// Exponential clocks, regular graph of degree mu. The upper bound is the
/// positive root of mu*gamma q^2 + (beta+eta+alpha-mu*gamma) q - alpha = 0.
BoundsReport bounds_exp_regular(double alpha, double beta, double eta, double gamma, double mu);

/// Lomax clocks, regular graph of degree mu.
BoundsReport bounds_lomax_regular(double lambda, double alpha1, double alpha2, double gamma, double beta1,
                                  double beta2, double mu);

/// Exponential clocks, arbitrary graph with average degree mu.
BoundsReport bounds_exp_arbitrary(double alpha, double beta, double eta, double gamma, double mu);

/// Lomax clocks, arbitrary graph with average degree mu.
BoundsReport bounds_lomax_arbitrary(double lambda, double alpha1, double alpha2, double gamma, double beta1,
                                    double beta2, double mu);

}  // namespace adsm::bounds
