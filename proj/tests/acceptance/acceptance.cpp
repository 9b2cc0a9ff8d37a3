#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "adsm/analytic.hpp"
#include "adsm/bounds.hpp"
#include "adsm/commands.hpp"
#include "adsm/config.hpp"
#include "adsm/cycles.hpp"
#include "adsm/error.hpp"
#include "adsm/graph.hpp"
#include "adsm/renewal.hpp"
#include "adsm/rng.hpp"
#include "adsm/sim.hpp"

using namespace adsm;
using dist::AttackDefenseModel;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

AttackDefenseModel expo(double a, double g, double b, double e) {
  return AttackDefenseModel(dist::Exponential{a, g, b, e});
}

double exp_draw(Rng& rng, double mean) { return -mean * std::log(uniform01(rng)); }

double lomax_draw(Rng& rng, double shape) { return std::expm1(-std::log(uniform01(rng)) / shape); }

double normal_draw(Rng& rng) {
  return std::sqrt(-2.0 * std::log(uniform01(rng))) * std::cos(6.283185307179586 * uniform01(rng));
}

std::vector<Cycle> iid_cycles(Rng& rng, std::size_t b) {
  std::vector<Cycle> out(b);
  for (auto& c : out) c = {exp_draw(rng, 2.0), exp_draw(rng, 1.0)};
  return out;
}

sim::ScenarioConfig scenario(graph::Graph g, AttackDefenseModel m, double horizon, std::size_t reps,
                             std::uint64_t seed) {
  sim::ScenarioConfig c{std::move(g), std::move(m)};
  c.horizon = horizon;
  c.replications = reps;
  c.master_seed = seed;
  c.burn_in = sim::BurnIn::fraction(0.2);
  return c;
}

Outcome ac1() {
  const auto start = Clock::now();
  const double target = 1.0 / 3.0;
  const auto model = expo(1, 0, 1, 1);
  const double fp = analytic::solve_regular_fixed_point(2, model).q;
  const auto r = sim::run(scenario(graph::make_regular(500, 2, 0), model, 1e4, 8, 1));
  double worst_renewal = 0.0;
  for (std::size_t i = 0; i < r.replications.size(); ++i) {
    const auto est = renewal::estimate_procedure(sim::export_cycles(r, i));
    worst_renewal = std::max(worst_renewal, std::abs(est.q_bar - target));
  }
  const double elapsed = seconds_since(start);
  const bool ok = std::abs(fp - target) <= 0.02 && std::abs(r.q - target) <= 0.02 && worst_renewal <= 0.02 &&
                  elapsed < 60.0;
  return {ok, fmt::format("fixed point {:.6f}, simulated {:.6f}, worst renewal deviation {:.4f}, {:.1f}s", fp, r.q,
                          worst_renewal, elapsed)};
}

Outcome ac2() {
  Rng rng(101);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = 0.05 + 2 * uniform01(rng), g = 2 * uniform01(rng);
    const double b = 0.05 + 2 * uniform01(rng), e = 0.05 + 2 * uniform01(rng);
    std::vector<double> pmf(1 + uniform_index(rng, 21));
    for (auto& x : pmf) x = uniform01(rng);
    const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
    for (auto& x : pmf) x /= total;
    double direct = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) direct += pmf[k] * (b + e) / (a + g * k);
    const double m = analytic::m_general(analytic::KDistribution::empirical(pmf), expo(a, g, b, e));
    worst = std::max(worst, std::abs(m - direct) / std::max(1.0, direct));
  }
  return {worst <= 1e-12, fmt::format("max relative deviation {:.3g} over 100 sets", worst)};
}

Outcome ac3() {
  Rng rng(102);
  double worst = 0.0;
  const int points = 120;
  for (int i = 0; i < points; ++i) {
    const double a = 0.05 + 2 * uniform01(rng), g = 0.01 + 2 * uniform01(rng);
    const double b = 0.05 + 2 * uniform01(rng), e = 0.05 + 2 * uniform01(rng);
    const auto reference = expo(a, g, b, e);
    const std::vector<AttackDefenseModel> reduced{AttackDefenseModel(dist::Weibull{a, g, 1.0, b, e, 1.0}),
                                                  AttackDefenseModel(dist::MarshallOlkin{a, g, 0.0, b, e, 0.0})};
    const std::size_t mu = 1 + uniform_index(rng, 12);
    const auto k = analytic::KDistribution::binomial(mu, uniform01(rng));
    const double m_ref = analytic::m_general(k, reference);
    const double q_ref = analytic::solve_regular_fixed_point(mu, reference).q;
    for (const auto& model : reduced) {
      worst = std::max(worst, std::abs(analytic::m_general(k, model) - m_ref) / std::max(1.0, m_ref));
      worst = std::max(worst, std::abs(analytic::solve_regular_fixed_point(mu, model).q - q_ref));
      worst = std::max(worst, std::abs(dist::defense_diag_integral(model) - dist::defense_diag_integral(reference)));
    }
  }
  return {worst <= 1e-9, fmt::format("max deviation {:.3g} over {} points", worst, points)};
}

Outcome ac4() {
  Rng rng(103);
  int violations = 0, lattices = 0;
  for (std::size_t mu : {2u, 4u, 8u}) {
    for (int i = 0; i < 100; ++i, ++lattices) {
      const double a = 0.05 + 2 * uniform01(rng), g = 0.01 + 2 * uniform01(rng);
      const double b = 0.05 + 2 * uniform01(rng), e = 0.05 + 2 * uniform01(rng);
      const double q = analytic::solve_regular_fixed_point(mu, expo(a, g, b, e)).q;
      const auto reg = bounds::bounds_exp_regular(a, b, e, g, double(mu));
      const auto arb = bounds::bounds_exp_arbitrary(a, b, e, g, double(mu));
      const bool ok = q >= reg.lower && q <= reg.upper && q >= arb.lower && q <= arb.upper && reg.upper <= arb.upper;
      violations += !ok;
    }
  }
  return {violations == 0, fmt::format("{} violations over {} parameter lattices", violations, lattices)};
}

Outcome ac5() {
  const auto start = Clock::now();
  Rng rng(2026);
  int in_bounds = 0, near_fp = 0;
  double worst_gap = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double a = 0.2 + 0.8 * uniform01(rng);
    const double b = 0.5 + uniform01(rng), e = 0.5 + uniform01(rng);
    const std::size_t mu = uniform01(rng) < 0.5 ? 4 : 8;
    const double u = 0.05 + 0.7 * uniform01(rng);
    const double g = u * (b + e) / double(mu);
    const auto model = expo(a, g, b, e);
    const auto r = sim::run(scenario(graph::make_random_regular(500, mu, derive_seed(2026, {1, std::uint64_t(i)})), model, 1e4, 2,
                                     derive_seed(2026, {2, std::uint64_t(i)})));
    const auto bnd = bounds::bounds_exp_regular(a, b, e, g, double(mu));
    const double fp = analytic::solve_regular_fixed_point(mu, model).q;
    const double slack = 3 * r.standard_error;
    in_bounds += r.q >= bnd.lower - slack && r.q <= bnd.upper + slack;
    near_fp += std::abs(r.q - fp) <= 0.03;
    worst_gap = std::max(worst_gap, std::abs(r.q - fp));
  }
  const double elapsed = seconds_since(start);
  return {in_bounds == 20 && near_fp >= 18 && elapsed < 600.0,
          fmt::format("{}/20 within bounds, {}/20 within 0.03 of the fixed point (max gap {:.4f}), {:.0f}s", in_bounds,
                      near_fp, worst_gap, elapsed)};
}

Outcome ac6() {
  const auto reg = bounds::bounds_lomax_regular(1, 2, 2, 1, 2, 2, 2);
  const auto arb = bounds::bounds_lomax_arbitrary(1, 2, 2, 1, 2, 2, 2);
  const double err = std::max({std::abs(reg.lower - 0.25), std::abs(reg.upper - 0.5), std::abs(arb.lower - 0.25),
                               std::abs(arb.upper - 0.625)});
  return {err <= 1e-12, fmt::format("regular ({:.17g}, {:.17g}), arbitrary ({:.17g}, {:.17g})", reg.lower, reg.upper,
                                    arb.lower, arb.upper)};
}

Outcome ac7() {
  const auto model = expo(0.5, 0.3, 1, 1);
  const std::size_t deg = 200;
  const double exact_half = analytic::m_general(analytic::KDistribution::binomial(deg, 0.5), model);
  const double normal = analytic::m_normal_approx(deg, deg * 0.5, deg * 0.25, model).m;
  const double exact_small = analytic::m_general(analytic::KDistribution::binomial(deg, 0.01), model);
  const double poisson = analytic::m_poisson_approx(deg, deg * 0.01, model);
  const double e1 = std::abs(normal / exact_half - 1.0), e2 = std::abs(poisson / exact_small - 1.0);
  return {e1 <= 0.02 && e2 <= 0.02,
          fmt::format("normal relative error {:.3g}, Poisson relative error {:.3g}", e1, e2)};
}

Outcome ac8() {
  const auto start = Clock::now();
  Rng rng(108);
  std::vector<double> scaled;
  for (std::size_t b : {100u, 1000u, 10000u}) {
    double ss = 0.0;
    for (int r = 0; r < 200; ++r) {
      const double e = renewal::estimate_node(iid_cycles(rng, b)) - 1.0 / 3.0;
      ss += e * e;
    }
    scaled.push_back(std::sqrt(ss / 200) * std::sqrt(double(b)));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  const double elapsed = seconds_since(start);
  return {*hi <= 2 * *lo && elapsed < 120.0,
          fmt::format("RMS * sqrt(b) = {:.4f}, {:.4f}, {:.4f}, {:.1f}s", scaled[0], scaled[1], scaled[2], elapsed)};
}

// True when the procedure rejects the single node for a reason containing `needle`.
bool rejected_for(const std::vector<Cycle>& cycles, const std::string& needle) {
  try {
    renewal::estimate_procedure(CyclesTrace{{NodeTrace{0, "", cycles}}});
  } catch (const ProcedureAbort& e) {
    return std::any_of(e.reasons().begin(), e.reasons().end(),
                       [&](const std::string& r) { return r.find(needle) != std::string::npos; });
  }
  return false;
}

Outcome ac9() {
  Rng rng(109);
  const int reps = 200;
  int independence_hits = 0, tail_hits = 0;
  for (int r = 0; r < reps; ++r) {
    std::vector<Cycle> walk;
    double s = 2.0;
    for (int i = 0; i < 500; ++i) {
      s *= std::exp(0.25 * normal_draw(rng));
      walk.push_back({s, exp_draw(rng, 1.0)});
    }
    independence_hits += rejected_for(walk, "independence test failed on secure durations");

    std::vector<Cycle> heavy(5000);
    for (auto& c : heavy) c = {exp_draw(rng, 2.0), lomax_draw(rng, 1.5)};
    tail_hits += rejected_for(heavy, "heavy tail on compromised durations");
  }
  return {independence_hits >= 0.9 * reps && tail_hits >= 0.9 * reps,
          fmt::format("independence abort {}/{}, heavy-tail verdict {}/{}", independence_hits, reps, tail_hits, reps)};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / fmt::format("adsm_acceptance_{}_{}", ::getpid(), name);
  fs::remove_all(dir);
  return dir;
}

const char* kPipelineConfig =
    "[graph]\ntype = erdos_renyi\nn = 100\np = 0.05\nseed = 17\n"
    "[model]\nregime = exponential\nalpha = 0.5\ngamma = 0.3\nbeta = 1\neta = 1\n"
    "[sim]\nhorizon = 10000\nreplications = 1\nseed = 23\n";

Outcome ac10() {
  const auto start = Clock::now();
  const auto cfg = config::load_string(kPipelineConfig);
  const auto out = scratch_dir("pipeline");
  const auto simulated = cli::cmd_simulate(cfg, out);
  const auto est = cli::cmd_estimate(config::load_string(""), {out / "cycles_rep0.csv"});
  const auto& occupancy = simulated.result.replications[0].occupancy;
  double total = 0.0;
  std::size_t compared = 0;
  for (const auto& node : est.nodes) {
    if (!node.q || node.aborted) continue;
    total += std::abs(*node.q - occupancy[std::stoul(node.label)]);
    ++compared;
  }
  fs::remove_all(out);
  const double mad = compared ? total / compared : 1.0;
  const double elapsed = seconds_since(start);
  return {compared > 0 && mad <= 0.02 && elapsed < 300.0,
          fmt::format("MAD {:.3g} over {} of {} nodes, {:.1f}s", mad, compared, est.nodes.size(), elapsed)};
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome ac11() {
  const auto cfg = config::load_string(std::string(kPipelineConfig) + "snapshot_interval = 50\n");
  const auto a = scratch_dir("repro_a"), b = scratch_dir("repro_b");
  const auto first = cli::cmd_simulate(cfg, a);
  cli::cmd_simulate(cfg, b);
  std::size_t csvs = 0, identical = 0;
  for (const auto& path : first.artifacts) {
    if (path.extension() != ".csv") continue;
    ++csvs;
    identical += read_file(path) == read_file(b / path.filename());
  }
  fs::remove_all(a);
  fs::remove_all(b);
  return {csvs > 0 && identical == csvs, fmt::format("{}/{} CSV artifacts byte-identical", identical, csvs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::string> only(argv + 1, argv + argc);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},   {"AC5", ac5},   {"AC6", ac6},
      {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failures += !o.passed;
    fmt::print("{} {}: {}\n", name, o.passed ? "PASS" : "FAIL", o.detail);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
