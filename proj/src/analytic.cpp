#include "adsm/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "adsm/error.hpp"
#include "adsm/quadrature.hpp"

namespace adsm::analytic {

namespace {

constexpr int kScanPoints = 1024;
constexpr int kMaxIterations = 200;
constexpr double kResidualTarget = 1e-10;

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameter(fmt::format("{}={} must lie in [0,1]", what, p));
}

/// a_k = I_A(k) / I_D for k = 0..mu.
std::vector<double> secure_to_compromised_ratios(std::size_t mu, const dist::AttackDefenseModel& model) {
  const double defense = dist::defense_diag_integral(model);
  std::vector<double> ratios(mu + 1);
  for (std::size_t k = 0; k <= mu; ++k)
    ratios[k] = dist::attack_diag_integral(model, static_cast<double>(k)) / defense;
  return ratios;
}

double expectation(std::span<const double> weights, std::span<const double> values) {
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    if (weights[k] != 0.0) sum += weights[k] * values[k];
  return sum;
}

/// Derivative of the residual q * (1 + m(q)) - 1, using the Bernstein form
/// m'(q) = mu * sum_k C(mu-1,k) q^k (1-q)^{mu-1-k} (a_{k+1} - a_k).
double fixed_point_slope(std::span<const double> ratios, double q) {
  const std::size_t mu = ratios.size() - 1;
  const double m = expectation(binomial_pmf(mu, q), ratios);
  if (mu == 0) return 1.0 + m;
  std::vector<double> diffs(mu);
  for (std::size_t k = 0; k < mu; ++k) diffs[k] = ratios[k + 1] - ratios[k];
  const double dm = static_cast<double>(mu) * expectation(binomial_pmf(mu - 1, q), diffs);
  return 1.0 + m + q * dm;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace

// ---------------------------------------------------------------------------
// KDistribution

KDistribution KDistribution::binomial(std::size_t trials, double p) {
  check_probability(p, "binomial p");
  return KDistribution(Binomial{trials, p});
}

KDistribution KDistribution::empirical(std::vector<double> pmf) {
  if (pmf.empty()) throw InvalidParameter("empirical pmf must not be empty");
  double sum = 0.0;
  for (double w : pmf) {
    if (!(w >= 0.0)) throw InvalidParameter("empirical pmf entries must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidParameter(fmt::format("empirical pmf sums to {:.12g}, not 1", sum));
  return KDistribution(Empirical{std::move(pmf)});
}

KDistribution KDistribution::moments(double mean, double variance, std::size_t deg) {
  if (!(mean >= 0.0 && mean <= static_cast<double>(deg)))
    throw InvalidParameter(fmt::format("mean={} must lie in [0, deg={}]", mean, deg));
  if (!(variance >= 0.0)) throw InvalidParameter(fmt::format("variance={} must be >= 0", variance));
  return KDistribution(Moments{mean, variance, deg});
}

KDistribution KDistribution::degenerate(std::size_t k) { return KDistribution(Degenerate{k}); }

std::size_t KDistribution::max_support() const noexcept {
  return std::visit(
      [](const auto& d) -> std::size_t {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Binomial>) return d.trials;
        else if constexpr (std::is_same_v<T, Empirical>) return d.pmf.size() - 1;
        else if constexpr (std::is_same_v<T, Moments>) return d.deg;
        else return d.k;
      },
      kind_);
}

std::vector<double> KDistribution::pmf() const {
  return std::visit(
      [](const auto& d) -> std::vector<double> {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Binomial>) {
          return binomial_pmf(d.trials, d.p);
        } else if constexpr (std::is_same_v<T, Empirical>) {
          return d.pmf;
        } else if constexpr (std::is_same_v<T, Moments>) {
          throw Unsupported("a moments-only K distribution has no pmf; use the normal approximation");
        } else {
          std::vector<double> out(d.k + 1, 0.0);
          out[d.k] = 1.0;
          return out;
        }
      },
      kind_);
}

std::vector<double> binomial_pmf(std::size_t trials, double p) {
  check_probability(p, "binomial p");
  std::vector<double> out(trials + 1, 0.0);
  if (p == 0.0) {
    out.front() = 1.0;
    return out;
  }
  if (p == 1.0) {
    out.back() = 1.0;
    return out;
  }
  const double n = static_cast<double>(trials);
  if (trials <= 50) {
    double coeff = 1.0;  // exact in double up to C(50,25)
    for (std::size_t k = 0; k <= trials; ++k) {
      out[k] = coeff * std::pow(p, static_cast<double>(k)) * std::pow(1.0 - p, n - static_cast<double>(k));
      coeff = coeff * static_cast<double>(trials - k) / static_cast<double>(k + 1);
    }
    return out;
  }
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double log_n_fact = std::lgamma(n + 1.0);
  for (std::size_t k = 0; k <= trials; ++k) {
    const double kk = static_cast<double>(k);
    out[k] = std::exp(log_n_fact - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0) + kk * log_p + (n - kk) * log_q);
  }
  return out;
}

// ---------------------------------------------------------------------------

double q_of_v(double m) {
  if (!(m >= 0.0)) throw InvalidParameter(fmt::format("m={} must be >= 0", m));
  return 1.0 / (1.0 + m);
}

double m_general(const KDistribution& kdist, const dist::AttackDefenseModel& model) {
  if (kdist.is_moments())
    throw Unsupported("m_general needs a pmf; a moments-only K distribution routes to the normal approximation");
  const auto pmf = kdist.pmf();
  double secure = 0.0;
  for (std::size_t k = 0; k < pmf.size(); ++k)
    if (pmf[k] > 0.0) secure += pmf[k] * dist::attack_diag_integral(model, static_cast<double>(k));
  return secure / dist::defense_diag_integral(model);
}

double fixed_point_residual(std::span<const double> ratios, double q) {
  const std::size_t mu = ratios.size() - 1;
  return q * (1.0 + expectation(binomial_pmf(mu, q), ratios)) - 1.0;
}

FixedPointResult solve_regular_fixed_point(std::size_t mu, const dist::AttackDefenseModel& model) {
  const auto ratios = secure_to_compromised_ratios(mu, model);
  FixedPointResult result;

  // Pre-scan for sign changes; the first one brackets the returned root.
  double lo = 0.0, hi = 1.0;
  double r_prev = fixed_point_residual(ratios, 0.0);
  bool bracketed = false;
  for (int i = 1; i <= kScanPoints; ++i) {
    const double q = static_cast<double>(i) / kScanPoints;
    const double r = fixed_point_residual(ratios, q);
    if ((r_prev < 0.0) != (r < 0.0)) {
      ++result.sign_changes;
      if (!bracketed) {
        lo = static_cast<double>(i - 1) / kScanPoints;
        hi = q;
        bracketed = true;
      }
    }
    r_prev = r;
  }
  if (!bracketed) throw NumericError("fixed point: residual has no sign change on [0,1]", r_prev);

  int iterations = 0;
  while (hi - lo > 1e-12 && iterations < kMaxIterations) {
    const double mid = 0.5 * (lo + hi);
    if (fixed_point_residual(ratios, mid) < 0.0) lo = mid; else hi = mid;
    ++iterations;
  }

  double q = 0.5 * (lo + hi);
  double r = fixed_point_residual(ratios, q);
  while (std::abs(r) > 1e-15 && iterations < kMaxIterations) {
    const double slope = fixed_point_slope(ratios, q);
    double next = q - r / slope;
    if (!(next > lo && next < hi)) break;
    const double r_next = fixed_point_residual(ratios, next);
    ++iterations;
    if (std::abs(r_next) >= std::abs(r)) break;
    q = next;
    r = r_next;
  }
  if (!(std::abs(r) <= kResidualTarget))
    throw NumericError(fmt::format("fixed point: residual {:.3g} above target after {} iterations (bracket [{}, {}])",
                                   r, iterations, lo, hi),
                       r);
  result.q = q;
  result.residual = r;
  result.iterations = iterations;
  return result;
}

NormalApprox m_normal_approx(std::size_t deg, double mean, double variance, const dist::AttackDefenseModel& model) {
  if (!(variance > 0.0)) throw InvalidParameter(fmt::format("normal approximation: variance={} must be > 0", variance));
  if (deg < 1) throw InvalidParameter("normal approximation: deg must be >= 1");
  if (!(mean >= 0.0)) throw InvalidParameter(fmt::format("normal approximation: mean={} must be >= 0", mean));
  if (!model.supports_real_k())
    throw Unsupported(fmt::format("normal approximation needs real-k closed forms (exponential or weibull), got {}",
                                  dist::to_string(model.regime())));

  const double sigma = std::sqrt(variance);
  const double top = static_cast<double>(deg);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  auto integrand = [&](double k) {
    const double z = (k - mean) / sigma;
    return norm * std::exp(-0.5 * z * z) * dist::attack_diag_integral(model, k);
  };
  // Split at mean + {-8, -2, 0, 2, 8} sigma where inside [0, deg].
  std::vector<double> points{0.0, top};
  for (double offset : {-8.0, -2.0, 0.0, 2.0, 8.0}) {
    const double x = mean + offset * sigma;
    if (x > 0.0 && x < top) points.push_back(x);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  const double secure = quad::integrate_piecewise(integrand, points).value;

  NormalApprox out;
  out.m = secure / dist::defense_diag_integral(model);
  out.mass_in_range = normal_cdf((top - mean) / sigma) - normal_cdf(-mean / sigma);
  return out;
}

double m_poisson_approx(std::size_t deg, double mean, const dist::AttackDefenseModel& model) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw InvalidParameter(fmt::format("poisson approximation: mean={} must be >= 0", mean));
  double secure = 0.0;
  if (mean == 0.0) {
    secure = dist::attack_diag_integral(model, 0.0);
  } else {
    const double log_mean = std::log(mean);
    for (std::size_t i = 0; i <= deg; ++i) {
      const double ii = static_cast<double>(i);
      const double weight = std::exp(-mean + ii * log_mean - std::lgamma(ii + 1.0));
      if (weight == 0.0) continue;
      secure += weight * dist::attack_diag_integral(model, ii);
    }
  }
  return secure / dist::defense_diag_integral(model);
}

KDistribution k_pmf_empirical(std::span<const std::size_t> observations, std::size_t deg) {
  if (observations.empty()) throw InvalidParameter("k_pmf_empirical: no observations");
  std::vector<double> counts(deg + 1, 0.0);
  for (std::size_t k : observations) {
    if (k > deg) throw DataError(fmt::format("k_pmf_empirical: observation {} exceeds degree {}", k, deg));
    counts[k] += 1.0;
  }
  const double b = static_cast<double>(observations.size());
  for (double& c : counts) c /= b;
  return KDistribution::empirical(std::move(counts));
}

double q_global(const NodeValues& per_node) {
  if (per_node.empty()) throw InvalidParameter("q_global: no nodes");
  double sum = 0.0;
  for (const auto& [v, q] : per_node) {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter(fmt::format("q({})={} outside [0,1]", v, q));
    sum += q;
  }
  return sum / static_cast<double>(per_node.size());
}

double q_global_weighted(const NodeValues& per_node, const NodeValues& assets) {
  if (per_node.empty()) throw InvalidParameter("q_global_weighted: no nodes");
  if (per_node.size() != assets.size())
    throw InvalidParameter("q_global_weighted: q and asset maps have different node sets");
  double sum = 0.0;
  auto a = assets.begin();
  for (const auto& [v, q] : per_node) {
    if (a->first != v) throw InvalidParameter(fmt::format("q_global_weighted: node {} has no asset value", v));
    if (!(a->second >= 0.0)) throw InvalidParameter(fmt::format("asset({})={} must be >= 0", v, a->second));
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter(fmt::format("q({})={} outside [0,1]", v, q));
    sum += q * a->second;
    ++a;
  }
  return sum / static_cast<double>(per_node.size());
}

QReport make_report(std::string method, NodeValues per_node) {
  QReport report;
  report.method = std::move(method);
  report.q = q_global(per_node);
  report.per_node = std::move(per_node);
  return report;
}

}  // namespace adsm::analytic
