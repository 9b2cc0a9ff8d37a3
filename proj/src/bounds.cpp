#include "adsm/bounds.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "adsm/error.hpp"
#include "adsm/quadrature.hpp"

namespace adsm::bounds {

namespace {

void validate_exponential(double alpha, double beta, double eta, double gamma, double mu) {
  if (!(alpha > 0 && beta > 0 && eta > 0))
    throw InvalidParameter("exponential bounds: alpha, beta, eta must be > 0");
  if (!(gamma >= 0)) throw InvalidParameter("exponential bounds: gamma must be >= 0");
  if (!(mu >= 0) || !std::isfinite(mu)) throw InvalidParameter("exponential bounds: mu must be >= 0");
}

void validate_lomax(double lambda, double alpha1, double alpha2, double gamma, double beta1, double beta2,
                    double mu) {
  if (!(lambda > 0 && gamma > 0)) throw InvalidParameter("lomax bounds: scales lambda and gamma must be > 0");
  if (!(alpha1 > 1 && alpha2 > 1 && beta1 > 1 && beta2 > 1))
    throw InvalidParameter("lomax bounds: shapes must exceed 1 (infinite mean otherwise)");
  if (!(mu >= 0) || !std::isfinite(mu)) throw InvalidParameter("lomax bounds: mu must be >= 0");
}

constexpr const char* kErratumNote =
    "printed lower bound alpha/(alpha+beta+gamma) differs from alpha/(alpha+beta+eta) obtained from the proof "
    "chain with G(x,x)=exp(-(beta+eta)x); the latter is reported as 'lower'";

BoundsReport exponential_report(std::string theorem, double alpha, double beta, double eta, double gamma,
                                double mu) {
  BoundsReport r;
  r.theorem = std::move(theorem);
  r.inputs = {{"alpha", alpha}, {"beta", beta}, {"eta", eta}, {"gamma", gamma}, {"mu", mu}};
  r.lower = alpha / (alpha + beta + eta);
  r.printed_lower = alpha / (alpha + beta + gamma);
  r.notes.emplace_back(kErratumNote);
  return r;
}

BoundsReport lomax_report(std::string theorem, double lambda, double alpha1, double alpha2, double gamma,
                          double beta1, double beta2, double mu) {
  BoundsReport r;
  r.theorem = std::move(theorem);
  r.inputs = {{"lambda", lambda}, {"alpha1", alpha1}, {"alpha2", alpha2}, {"gamma", gamma},
              {"beta1", beta1},   {"beta2", beta2},   {"mu", mu}};
  r.lower = gamma * (alpha1 - 1.0) / (lambda * (beta1 + beta2 - 1.0) + gamma * (alpha1 - 1.0));
  return r;
}

}  // namespace

BoundsReport bounds_general_regular(const dist::AttackDefenseModel& model, double kbar) {
  if (!(kbar >= 0.0) || !std::isfinite(kbar))
    throw InvalidParameter(fmt::format("general bound: kbar={} must be >= 0", kbar));

  using dist::Variable;
  auto f1 = [&](double x) { return dist::survival(model, Variable::x1, x); };
  auto f1f2 = [&](double x) {
    const double s2 = dist::survival(model, Variable::x2, x);
    return dist::survival(model, Variable::x1, x) * (kbar == 0.0 ? 1.0 : std::pow(s2, kbar));
  };

  double attack_only = 0.0;
  double attack_with_neighbors = 0.0;
  if (const auto* tab = model.get_if<dist::Tabulated>()) {
    // Piecewise-linear marginals: integrate between the union of their grids.
    if (!tab->x1_marginal || (kbar > 0.0 && !tab->x2_marginal))
      throw Unsupported("general bound on a tabulated model needs the X1 (and X2) marginal curves");
    std::vector<double> points(tab->x1_marginal->xs().begin(), tab->x1_marginal->xs().end());
    if (tab->x2_marginal) points.insert(points.end(), tab->x2_marginal->xs().begin(), tab->x2_marginal->xs().end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    attack_only = quad::integrate_piecewise(f1, points).value;
    attack_with_neighbors = quad::integrate_piecewise(f1f2, points).value;
  } else {
    attack_only = quad::integrate_to_infinity(f1).value;
    attack_with_neighbors = quad::integrate_to_infinity(f1f2).value;
  }
  const double defense = dist::defense_diag_integral(model);

  BoundsReport r;
  r.theorem = "general_regular";
  r.inputs = {{"kbar", kbar}, {"int_F1", attack_only}, {"int_F1_F2^kbar", attack_with_neighbors},
              {"int_G_diag", defense}};
  r.lower = defense / (attack_only + defense);
  r.upper = defense / (attack_with_neighbors + defense);
  r.notes.emplace_back("assumes X2 clocks PUOD with a common marginal and X1 independent of them");
  return r;
}

BoundsReport bounds_exp_regular(double alpha, double beta, double eta, double gamma, double mu) {
  validate_exponential(alpha, beta, eta, gamma, mu);
  auto r = exponential_report("exp_regular", alpha, beta, eta, gamma, mu);
  // Rationalised root 2*alpha / (c + sqrt(c^2 + 4 mu gamma alpha)): same value as
  // (-c + sqrt(...)) / (2 mu gamma), finite at mu*gamma = 0 where it equals the lower bound.
  const double c = beta + eta + alpha - mu * gamma;
  r.upper = 2.0 * alpha / (c + std::sqrt(c * c + 4.0 * mu * gamma * alpha));
  return r;
}

BoundsReport bounds_lomax_regular(double lambda, double alpha1, double alpha2, double gamma, double beta1,
                                  double beta2, double mu) {
  validate_lomax(lambda, alpha1, alpha2, gamma, beta1, beta2, mu);
  auto r = lomax_report("lomax_regular", lambda, alpha1, alpha2, gamma, beta1, beta2, mu);
  const double b = lambda * (beta1 + beta2 - 1.0) + gamma * (alpha1 - 1.0) - gamma * alpha2 * mu;
  r.inputs["B"] = b;
  // Rationalised form of (-B + sqrt(B^2 + 4 gamma^2 alpha2 (alpha1-1) mu)) / (2 alpha2 gamma mu).
  r.upper = 2.0 * gamma * (alpha1 - 1.0) / (b + std::sqrt(b * b + 4.0 * gamma * gamma * alpha2 * (alpha1 - 1.0) * mu));
  return r;
}

BoundsReport bounds_exp_arbitrary(double alpha, double beta, double eta, double gamma, double mu) {
  validate_exponential(alpha, beta, eta, gamma, mu);
  auto r = exponential_report("exp_arbitrary", alpha, beta, eta, gamma, mu);
  r.upper = (alpha + gamma * mu) / (alpha + beta + eta + gamma * mu);
  return r;
}

BoundsReport bounds_lomax_arbitrary(double lambda, double alpha1, double alpha2, double gamma, double beta1,
                                    double beta2, double mu) {
  validate_lomax(lambda, alpha1, alpha2, gamma, beta1, beta2, mu);
  auto r = lomax_report("lomax_arbitrary", lambda, alpha1, alpha2, gamma, beta1, beta2, mu);
  const double attack = gamma * (alpha1 + alpha2 * mu - 1.0);
  r.upper = attack / (lambda * (beta1 + beta2 - 1.0) + attack);
  return r;
}

}  // namespace adsm::bounds
