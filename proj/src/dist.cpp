#include "adsm/dist.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "adsm/error.hpp"
#include "adsm/quadrature.hpp"

namespace adsm::dist {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailCutoff = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, std::string_view regime, std::string_view what) {
  if (!ok) throw InvalidParameter(fmt::format("{} model: {}", regime, what));
}

double draw_exponential(double rate, Rng& rng) {
  return rate > 0.0 ? -std::log(uniform01(rng)) / rate : kInf;
}

double draw_weibull(double scale, double shape, Rng& rng) {
  return scale > 0.0 ? std::pow(-std::log(uniform01(rng)), 1.0 / shape) / scale : kInf;
}

double draw_lomax(double scale, double shape, Rng& rng) {
  // Survival (1 + x/scale)^-shape inverted at u.
  return scale * std::expm1(-std::log(uniform01(rng)) / shape);
}

double exp_survival(double rate, double x) { return std::exp(-rate * x); }

double weibull_survival(double scale, double shape, double x) {
  return std::exp(-std::pow(scale * x, shape));
}

double lomax_survival(double scale, double shape, double x) {
  return std::pow(1.0 + x / scale, -shape);
}

void require_integer_k(const AttackDefenseModel& model, double k) {
  if (!(k >= 0.0)) throw InvalidParameter(fmt::format("k={} must be nonnegative", k));
  if (!model.supports_real_k() && k != std::floor(k))
    throw Unsupported(fmt::format("{} regime: non-integer k={} has no defined diagonal survival",
                                  to_string(model.regime()), k));
}

const Curve& tabulated_attack_curve(const Tabulated& t, double k) {
  const auto index = static_cast<std::size_t>(k);
  if (index >= t.attack_diagonal.size())
    throw Unsupported(fmt::format("tabulated regime: no attack diagonal curve for k={} (have 0..{})",
                                  index, t.attack_diagonal.size() - 1));
  return t.attack_diagonal[index];
}

[[noreturn]] void no_marginal(Variable which) {
  throw Unsupported(fmt::format("tabulated regime: marginal of {} is not available", to_string(which)));
}

}  // namespace

std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::exponential: return "exponential";
    case Regime::weibull: return "weibull";
    case Regime::lomax: return "lomax";
    case Regime::marshall_olkin: return "marshall_olkin";
    case Regime::tabulated: return "tabulated";
  }
  return "unknown";
}

std::string_view to_string(Variable v) noexcept {
  switch (v) {
    case Variable::x1: return "X1";
    case Variable::x2: return "X2";
    case Variable::y1: return "Y1";
    case Variable::y2: return "Y2";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Curve

Curve::Curve(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
  if (xs_.size() != ys_.size() || xs_.size() < 2)
    throw DataError("survival curve needs at least two (x, survival) points");
  if (xs_.front() != 0.0) throw DataError("survival curve must start at x=0");
  if (std::abs(ys_.front() - 1.0) > 1e-12) throw DataError("survival curve must equal 1 at x=0");
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    if (!std::isfinite(xs_[i]) || !(ys_[i] >= 0.0 && ys_[i] <= 1.0))
      throw DataError(fmt::format("survival curve point {} out of range", i));
    if (i > 0 && !(xs_[i] > xs_[i - 1]))
      throw DataError(fmt::format("survival curve x values must increase strictly (point {})", i));
    if (i > 0 && ys_[i] > ys_[i - 1])
      throw DataError(fmt::format("survival curve must be non-increasing (point {})", i));
  }
  if (!(ys_.back() < kTailCutoff))
    throw DataError(fmt::format("survival curve tail: last value {:.3g} at x={} is not below {:g}; extend the curve",
                                ys_.back(), xs_.back(), kTailCutoff));
}

double Curve::operator()(double x) const noexcept {
  if (x <= 0.0) return 1.0;
  if (x >= xs_.back()) return 0.0;
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
  const std::size_t lo = hi - 1;
  const double w = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
  return ys_[lo] + w * (ys_[hi] - ys_[lo]);
}

double Curve::integral() const {
  return quad::integrate_piecewise([this](double x) { return (*this)(x); }, xs_).value;
}

Curve load_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open curve file '{}'", path.string()));
  std::string line;
  if (!std::getline(in, line) || line != "x,survival")
    throw DataError(fmt::format("{}:1: expected header 'x,survival'", path.string()));
  std::vector<double> xs, ys;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used = 0;
      xs.push_back(std::stod(line.substr(0, comma), &used));
      ys.push_back(std::stod(line.substr(comma + 1), &used));
    } catch (const std::exception&) {
      throw DataError(fmt::format("{}:{}: expected 'x,survival' numeric row", path.string(), line_no));
    }
  }
  try {
    return Curve(std::move(xs), std::move(ys));
  } catch (const DataError& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

// ---------------------------------------------------------------------------
// Model validation

AttackDefenseModel::AttackDefenseModel(Params params) : params_(std::move(params)) {
  std::visit(Overloaded{
                 [](const Exponential& p) {
                   require(p.alpha > 0, "exponential", "alpha must be > 0");
                   require(p.gamma >= 0, "exponential", "gamma must be >= 0");
                   require(p.beta > 0, "exponential", "beta must be > 0");
                   require(p.eta > 0, "exponential", "eta must be > 0");
                 },
                 [](const Weibull& p) {
                   require(p.lambda1 > 0, "weibull", "lambda1 must be > 0");
                   require(p.lambda2 >= 0, "weibull", "lambda2 must be >= 0");
                   require(p.attack_shape > 0, "weibull", "attack_shape must be > 0");
                   require(p.gamma1 > 0 && p.gamma2 > 0, "weibull", "gamma1 and gamma2 must be > 0");
                   require(p.defense_shape > 0, "weibull", "defense_shape must be > 0");
                 },
                 [](const Lomax& p) {
                   require(p.lambda > 0 && p.gamma > 0, "lomax", "scales lambda and gamma must be > 0");
                   require(p.alpha1 > 1 && p.alpha2 > 1 && p.beta1 > 1 && p.beta2 > 1, "lomax",
                           "shapes alpha1, alpha2, beta1, beta2 must exceed 1 (finite means)");
                 },
                 [](const MarshallOlkin& p) {
                   require(p.lambda >= 0 && p.lambda_ind >= 0 && p.lambda_all >= 0, "marshall_olkin",
                           "attack rates must be >= 0");
                   require(p.lambda + p.lambda_ind + p.lambda_all > 0, "marshall_olkin",
                           "lambda + lambda_ind + lambda_all must be > 0");
                   require(p.gamma1 >= 0 && p.gamma2 >= 0 && p.gamma12 >= 0, "marshall_olkin",
                           "defense rates must be >= 0");
                   require(p.gamma1 + p.gamma2 + p.gamma12 > 0, "marshall_olkin",
                           "gamma1 + gamma2 + gamma12 must be > 0");
                 },
                 [](const Tabulated& p) {
                   require(!p.attack_diagonal.empty(), "tabulated", "at least one attack diagonal curve (k=0)");
                 },
             },
             params_);
}

bool AttackDefenseModel::supports_real_k() const noexcept {
  return regime() == Regime::exponential || regime() == Regime::weibull;
}

// ---------------------------------------------------------------------------
// Marginals and sampling

double survival(const AttackDefenseModel& model, Variable which, double x) {
  if (!(x >= 0.0)) throw InvalidParameter(fmt::format("survival: x={} must be >= 0", x));
  return std::visit(
      Overloaded{
          [&](const Exponential& p) {
            const double rate[] = {p.alpha, p.gamma, p.beta, p.eta};
            return exp_survival(rate[static_cast<int>(which)], x);
          },
          [&](const Weibull& p) {
            switch (which) {
              case Variable::x1: return weibull_survival(p.lambda1, p.attack_shape, x);
              case Variable::x2: return weibull_survival(p.lambda2, p.attack_shape, x);
              case Variable::y1: return weibull_survival(p.gamma1, p.defense_shape, x);
              case Variable::y2: return weibull_survival(p.gamma2, p.defense_shape, x);
            }
            return 1.0;
          },
          [&](const Lomax& p) {
            switch (which) {
              case Variable::x1: return lomax_survival(p.lambda, p.alpha1, x);
              case Variable::x2: return lomax_survival(p.lambda, p.alpha2, x);
              case Variable::y1: return lomax_survival(p.gamma, p.beta1, x);
              case Variable::y2: return lomax_survival(p.gamma, p.beta2, x);
            }
            return 1.0;
          },
          [&](const MarshallOlkin& p) {
            const double rate[] = {p.lambda, p.lambda_ind + p.lambda_all, p.gamma1 + p.gamma12, p.gamma2 + p.gamma12};
            return exp_survival(rate[static_cast<int>(which)], x);
          },
          [&](const Tabulated& p) -> double {
            if (which == Variable::x1 && p.x1_marginal) return (*p.x1_marginal)(x);
            if (which == Variable::x2 && p.x2_marginal) return (*p.x2_marginal)(x);
            no_marginal(which);
          },
      },
      model.params());
}

double sample(const AttackDefenseModel& model, Variable which, Rng& rng) {
  return std::visit(
      Overloaded{
          [&](const Exponential& p) {
            const double rate[] = {p.alpha, p.gamma, p.beta, p.eta};
            return draw_exponential(rate[static_cast<int>(which)], rng);
          },
          [&](const Weibull& p) {
            switch (which) {
              case Variable::x1: return draw_weibull(p.lambda1, p.attack_shape, rng);
              case Variable::x2: return draw_weibull(p.lambda2, p.attack_shape, rng);
              case Variable::y1: return draw_weibull(p.gamma1, p.defense_shape, rng);
              case Variable::y2: return draw_weibull(p.gamma2, p.defense_shape, rng);
            }
            return kInf;
          },
          [&](const Lomax& p) {
            switch (which) {
              case Variable::x1: return draw_lomax(p.lambda, p.alpha1, rng);
              case Variable::x2: return draw_lomax(p.lambda, p.alpha2, rng);
              case Variable::y1: return draw_lomax(p.gamma, p.beta1, rng);
              case Variable::y2: return draw_lomax(p.gamma, p.beta2, rng);
            }
            return kInf;
          },
          [&](const MarshallOlkin& p) {
            const double rate[] = {p.lambda, p.lambda_ind + p.lambda_all, p.gamma1 + p.gamma12, p.gamma2 + p.gamma12};
            return draw_exponential(rate[static_cast<int>(which)], rng);
          },
          [&](const Tabulated&) -> double {
            throw Unsupported("tabulated regime cannot be sampled: only diagonal survival functions are known");
          },
      },
      model.params());
}

double draw_cycle_shock(const AttackDefenseModel& model, Rng& rng) {
  if (model.regime() == Regime::tabulated)
    throw Unsupported("tabulated regime cannot be sampled: only diagonal survival functions are known");
  if (const auto* mo = model.get_if<MarshallOlkin>()) return draw_exponential(mo->lambda_all, rng);
  return kInf;
}

double sample_neighbor_clock(const AttackDefenseModel& model, double cycle_shock, Rng& rng) {
  if (const auto* mo = model.get_if<MarshallOlkin>())
    return std::min(draw_exponential(mo->lambda_ind, rng), cycle_shock);
  return sample(model, Variable::x2, rng);
}

AttackDraw sample_attack_vector(const AttackDefenseModel& model, int k, Rng& rng) {
  if (k < 0) throw InvalidParameter(fmt::format("sample_attack_vector: k={} must be >= 0", k));
  AttackDraw draw;
  draw.x1 = sample(model, Variable::x1, rng);
  if (k == 0) return draw;
  const double shock = draw_cycle_shock(model, rng);
  draw.x2.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) draw.x2.push_back(sample_neighbor_clock(model, shock, rng));
  return draw;
}

DefenseDraw sample_defense(const AttackDefenseModel& model, Rng& rng) {
  if (const auto* mo = model.get_if<MarshallOlkin>()) {
    const double own1 = draw_exponential(mo->gamma1, rng);
    const double own2 = draw_exponential(mo->gamma2, rng);
    const double common = draw_exponential(mo->gamma12, rng);
    return {std::min(own1, common), std::min(own2, common)};
  }
  const double y1 = sample(model, Variable::y1, rng);
  const double y2 = sample(model, Variable::y2, rng);
  return {y1, y2};
}

// ---------------------------------------------------------------------------
// Diagonal survival functions and their integrals

double attack_diag_survival(const AttackDefenseModel& model, double k, double x) {
  require_integer_k(model, k);
  if (!(x >= 0.0)) throw InvalidParameter(fmt::format("x={} must be >= 0", x));
  return std::visit(Overloaded{
                        [&](const Exponential& p) { return std::exp(-(p.alpha + p.gamma * k) * x); },
                        [&](const Weibull& p) {
                          const double a = p.attack_shape;
                          return std::exp(-(std::pow(p.lambda1, a) + k * std::pow(p.lambda2, a)) * std::pow(x, a));
                        },
                        [&](const Lomax& p) { return std::pow(1.0 + x / p.lambda, -(p.alpha1 + k * p.alpha2)); },
                        [&](const MarshallOlkin& p) {
                          return std::exp(-(p.lambda + mo_phi(model, static_cast<int>(k))) * x);
                        },
                        [&](const Tabulated& p) { return tabulated_attack_curve(p, k)(x); },
                    },
                    model.params());
}

double defense_diag_survival(const AttackDefenseModel& model, double x) {
  if (!(x >= 0.0)) throw InvalidParameter(fmt::format("x={} must be >= 0", x));
  return std::visit(Overloaded{
                        [&](const Exponential& p) { return std::exp(-(p.beta + p.eta) * x); },
                        [&](const Weibull& p) {
                          const double b = p.defense_shape;
                          return std::exp(-(std::pow(p.gamma1, b) + std::pow(p.gamma2, b)) * std::pow(x, b));
                        },
                        [&](const Lomax& p) { return std::pow(1.0 + x / p.gamma, -(p.beta1 + p.beta2)); },
                        [&](const MarshallOlkin& p) { return std::exp(-(p.gamma1 + p.gamma2 + p.gamma12) * x); },
                        [&](const Tabulated& p) { return p.defense_diagonal(x); },
                    },
                    model.params());
}

double attack_diag_integral(const AttackDefenseModel& model, double k) {
  require_integer_k(model, k);
  return std::visit(Overloaded{
                        [&](const Exponential& p) { return 1.0 / (p.alpha + p.gamma * k); },
                        [&](const Weibull& p) {
                          const double a = p.attack_shape;
                          return std::tgamma(1.0 + 1.0 / a) /
                                 std::pow(std::pow(p.lambda1, a) + k * std::pow(p.lambda2, a), 1.0 / a);
                        },
                        [&](const Lomax& p) { return p.lambda / (p.alpha1 + k * p.alpha2 - 1.0); },
                        [&](const MarshallOlkin& p) {
                          const double rate = p.lambda + mo_phi(model, static_cast<int>(k));
                          if (!(rate > 0.0))
                            throw NumericError("marshall_olkin: expected secure duration diverges (lambda=0, k=0)",
                                               kInf);
                          return 1.0 / rate;
                        },
                        [&](const Tabulated& p) { return tabulated_attack_curve(p, k).integral(); },
                    },
                    model.params());
}

double defense_diag_integral(const AttackDefenseModel& model) {
  return std::visit(Overloaded{
                        [](const Exponential& p) { return 1.0 / (p.beta + p.eta); },
                        [](const Weibull& p) {
                          const double b = p.defense_shape;
                          return std::tgamma(1.0 + 1.0 / b) /
                                 std::pow(std::pow(p.gamma1, b) + std::pow(p.gamma2, b), 1.0 / b);
                        },
                        [](const Lomax& p) { return p.gamma / (p.beta1 + p.beta2 - 1.0); },
                        [](const MarshallOlkin& p) { return 1.0 / (p.gamma1 + p.gamma2 + p.gamma12); },
                        [](const Tabulated& p) { return p.defense_diagonal.integral(); },
                    },
                    model.params());
}

double mo_phi(const AttackDefenseModel& model, int k) {
  const auto* mo = model.get_if<MarshallOlkin>();
  if (!mo) throw Unsupported(fmt::format("mo_phi requires the marshall_olkin regime, got {}", to_string(model.regime())));
  if (k < 0) throw InvalidParameter(fmt::format("mo_phi: k={} must be >= 0", k));
  return k * mo->lambda_ind + (k >= 1 ? mo->lambda_all : 0.0);
}

}  // namespace adsm::dist
