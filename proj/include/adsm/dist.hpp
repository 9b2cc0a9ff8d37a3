#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "adsm/rng.hpp"

namespace adsm::dist {

/// The four clocks of the attack-defense process: external attack (X1),
/// attack through one compromised neighbor (X2), reactive recovery (Y1) and
/// proactive recovery (Y2).
enum class Variable { x1, x2, y1, y2 };

enum class Regime { exponential, weibull, lomax, marshall_olkin, tabulated };

std::string_view to_string(Regime r) noexcept;
std::string_view to_string(Variable v) noexcept;

/// All clocks independent exponentials.
struct Exponential {
  double alpha = 1.0;  // X1 rate
  double gamma = 0.0;  // X2 rate
  double beta = 1.0;   // Y1 rate
  double eta = 1.0;    // Y2 rate
};

/// Independent Weibull clocks with survival exp(-(scale * t)^shape). Attack
/// clocks share one shape, defense clocks another.
struct Weibull {
  double lambda1 = 1.0;  // X1 scale
  double lambda2 = 0.0;  // X2 scale
  double attack_shape = 1.0;
  double gamma1 = 1.0;  // Y1 scale
  double gamma2 = 1.0;  // Y2 scale
  double defense_shape = 1.0;
};

/// Independent Lomax clocks with survival (1 + t/scale)^-shape. Shapes must
/// exceed 1 so every clock has a finite mean.
struct Lomax {
  double lambda = 1.0;  // attack scale
  double alpha1 = 2.0;  // X1 shape
  double alpha2 = 2.0;  // X2 shape
  double gamma = 1.0;   // defense scale
  double beta1 = 2.0;   // Y1 shape
  double beta2 = 2.0;   // Y2 shape
};

/// Exponential X1 plus Marshall-Olkin shock models for the neighbor clocks
/// and the recovery pair. Neighbor dependence is restricted to the
/// exchangeable two-level family: one independent shock per neighbor (rate
/// lambda_ind) and one shock shared by all of them (rate lambda_all).
struct MarshallOlkin {
  double lambda = 1.0;  // X1 rate
  double lambda_ind = 0.0;
  double lambda_all = 0.0;
  double gamma1 = 1.0;  // Y1-only shock
  double gamma2 = 1.0;  // Y2-only shock
  double gamma12 = 0.0;  // common recovery shock
};

/// Sampled survival curve, linearly interpolated. x starts at 0, strictly
/// increasing; values in [0,1], non-increasing, first value 1. Beyond the last
/// point the curve is taken as zero, which requires the last value < 1e-9.
class Curve {
 public:
  Curve(std::vector<double> xs, std::vector<double> ys);

  double operator()(double x) const noexcept;
  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ys() const noexcept { return ys_; }
  double support_end() const noexcept { return xs_.back(); }

  /// Integral of the interpolant over [0, inf) by adaptive quadrature.
  double integral() const;

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

/// Two-column CSV with header `x,survival`.
Curve load_curve_csv(const std::filesystem::path& path);

/// Diagonal survival functions supplied as data. attack_diagonal[k] is
/// P(X1 > x, X2_1 > x, ..., X2_k > x); defense_diagonal is P(Y1 > x, Y2 > x).
/// Optional marginals of X1 and X2 enable the general bound.
struct Tabulated {
  std::vector<Curve> attack_diagonal;
  Curve defense_diagonal;
  std::optional<Curve> x1_marginal;
  std::optional<Curve> x2_marginal;
};

using Params = std::variant<Exponential, Weibull, Lomax, MarshallOlkin, Tabulated>;

/// Joint law of (X1, X2_i..., Y1, Y2) under one regime. Validated on
/// construction and immutable afterwards.
class AttackDefenseModel {
 public:
  AttackDefenseModel(Params params);  // NOLINT(google-explicit-constructor)

  Regime regime() const noexcept { return static_cast<Regime>(params_.index()); }
  const Params& params() const noexcept { return params_; }

  template <class T>
  const T* get_if() const noexcept {
    return std::get_if<T>(&params_);
  }

  /// Weibull/exponential closed forms extend to real k.
  bool supports_real_k() const noexcept;

 private:
  Params params_;
};

struct AttackDraw {
  double x1 = 0.0;
  std::vector<double> x2;
};

struct DefenseDraw {
  double y1 = 0.0;
  double y2 = 0.0;
  double duration() const noexcept { return y1 < y2 ? y1 : y2; }
};

/// Marginal survival P(which > x).
double survival(const AttackDefenseModel& model, Variable which, double x);

/// Inverse-transform draw from the marginal. Zero rates give +inf.
double sample(const AttackDefenseModel& model, Variable which, Rng& rng);

/// Joint draw of X1 and k neighbor clocks.
AttackDraw sample_attack_vector(const AttackDefenseModel& model, int k, Rng& rng);

/// Common-shock duration shared by one secure period's neighbor clocks
/// (Marshall-Olkin only; +inf otherwise).
double draw_cycle_shock(const AttackDefenseModel& model, Rng& rng);

/// One neighbor clock given the cycle's shared shock duration.
double sample_neighbor_clock(const AttackDefenseModel& model, double cycle_shock, Rng& rng);

DefenseDraw sample_defense(const AttackDefenseModel& model, Rng& rng);

/// H_{k+1}(x,...,x): probability that none of X1, X2_1..X2_k has fired by x.
double attack_diag_survival(const AttackDefenseModel& model, double k, double x);
/// G(x,x): probability that neither recovery clock has fired by x.
double defense_diag_survival(const AttackDefenseModel& model, double x);

/// Expected secure duration with k compromised neighbors:
/// integral of attack_diag_survival over [0, inf).
double attack_diag_integral(const AttackDefenseModel& model, double k);

/// Expected compromised duration: integral of defense_diag_survival.
double defense_diag_integral(const AttackDefenseModel& model);

/// Aggregate shock rate hitting at least one of k neighbor clocks:
/// k * lambda_ind + lambda_all * [k >= 1].
double mo_phi(const AttackDefenseModel& model, int k);

}  // namespace adsm::dist
