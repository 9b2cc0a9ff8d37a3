#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "adsm/dist.hpp"
#include "adsm/graph.hpp"

namespace adsm::analytic {

using graph::NodeId;
using NodeValues = std::map<NodeId, double>;

/// Distribution of K(v), the number of compromised neighbors of a node.
class KDistribution {
 public:
  struct Binomial {
    std::size_t trials = 0;
    double p = 0.0;
  };
  struct Empirical {
    std::vector<double> pmf;  // index k = 0..deg
  };
  struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t deg = 0;
  };
  struct Degenerate {
    std::size_t k = 0;
  };

  static KDistribution binomial(std::size_t trials, double p);
  static KDistribution empirical(std::vector<double> pmf);
  static KDistribution moments(double mean, double variance, std::size_t deg);
  static KDistribution degenerate(std::size_t k);

  /// Largest k with possibly nonzero mass.
  std::size_t max_support() const noexcept;

  /// Probability mass over 0..max_support(). Not defined for the moments kind.
  std::vector<double> pmf() const;

  bool is_moments() const noexcept { return std::holds_alternative<Moments>(kind_); }
  const auto& kind() const noexcept { return kind_; }

 private:
  using Kind = std::variant<Binomial, Empirical, Moments, Degenerate>;
  explicit KDistribution(Kind kind) : kind_(std::move(kind)) {}
  Kind kind_;
};

/// Binomial(trials, p) mass; coefficients go through lgamma when trials > 50.
std::vector<double> binomial_pmf(std::size_t trials, double p);

/// q(v) = 1 / (1 + m).
double q_of_v(double m);

/// m = E[expected secure duration | K] / expected compromised duration,
/// summed exactly over the pmf of K.
double m_general(const KDistribution& kdist, const dist::AttackDefenseModel& model);

struct FixedPointResult {
  double q = 0.0;
  double residual = 0.0;
  int iterations = 0;
  /// Sign changes of the residual seen by the 1024-point pre-scan. More than
  /// one means the returned root (the smallest bracketed) may not be unique.
  int sign_changes = 0;
  bool multiple_roots() const noexcept { return sign_changes > 1; }
};

/// Solves the regular-graph self-consistency
///   q + sum_k C(mu,k) q^{k+1} (1-q)^{mu-k} I_A(k) / I_D = 1
/// by bracketing bisection followed by Newton polish. The residual is -1 at
/// q = 0 and positive at q = 1.
FixedPointResult solve_regular_fixed_point(std::size_t mu, const dist::AttackDefenseModel& model);

/// Left-hand side minus one of the fixed-point equation, with the a_k = I_A(k)/I_D
/// ratios supplied. Exposed for oracles and diagnostics.
double fixed_point_residual(std::span<const double> ratios, double q);

struct NormalApprox {
  double m = 0.0;
  /// Normal mass inside [0, deg]. The integral is not renormalised by it.
  double mass_in_range = 0.0;
};

/// Normal approximation of K over the continuous range [0, deg]:
///   m ~ integral_0^deg phi(k; mean, variance) I_A(k) dk / I_D.
/// Only regimes with real-k closed forms (exponential, weibull).
NormalApprox m_normal_approx(std::size_t deg, double mean, double variance,
                             const dist::AttackDefenseModel& model);

/// Poisson approximation: m ~ sum_{i=0}^{deg} e^{-mean} mean^i / i! I_A(i) / I_D.
double m_poisson_approx(std::size_t deg, double mean, const dist::AttackDefenseModel& model);

/// Relative-frequency pmf of observed neighbor counts over 0..deg.
KDistribution k_pmf_empirical(std::span<const std::size_t> observations, std::size_t deg);

double q_global(const NodeValues& per_node);

/// sum_v q(v) * asset(v) / n.
double q_global_weighted(const NodeValues& per_node, const NodeValues& assets);

struct Provenance {
  std::string config_digest;
  std::optional<std::uint64_t> seed;
  std::optional<int> solver_iterations;
};

struct QReport {
  std::string method;
  NodeValues per_node;
  double q = 0.0;
  std::optional<double> m;
  std::optional<double> weighted;
  /// Bound pair placed alongside the solution for context, with its source tag.
  std::optional<std::pair<double, double>> bounds;
  std::string bounds_tag;
  std::vector<std::string> notes;
  Provenance provenance;
};

/// Builds a report whose global q is the mean of per_node.
QReport make_report(std::string method, NodeValues per_node);

}  // namespace adsm::analytic
