#include "adsm/commands.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "adsm/cycles.hpp"
#include "adsm/error.hpp"
#include "adsm/rng.hpp"

namespace adsm::cli {

namespace {

// Degree shared by every node, if the graph is regular.
std::optional<std::size_t> common_degree(const graph::Graph& g) {
  if (g.size() == 0) return std::nullopt;
  const auto d = g.degree(0);
  for (graph::NodeId v = 1; v < g.size(); ++v)
    if (g.degree(v) != d) return std::nullopt;
  return d;
}

std::optional<double> configured_mu(const config::Config& cfg) {
  if (cfg.bounds.mu) return cfg.bounds.mu;
  if (cfg.solve.mu) return static_cast<double>(*cfg.solve.mu);
  if (cfg.graph) return graph::degree_stats(config::build_graph(cfg)).mu;
  return std::nullopt;
}

void attach_context_bounds(analytic::QReport& report, const dist::AttackDefenseModel& model, double mu,
                           bool regular) {
  std::optional<bounds::BoundsReport> b;
  if (const auto* e = model.get_if<dist::Exponential>())
    b = regular ? bounds::bounds_exp_regular(e->alpha, e->beta, e->eta, e->gamma, mu)
                : bounds::bounds_exp_arbitrary(e->alpha, e->beta, e->eta, e->gamma, mu);
  else if (const auto* l = model.get_if<dist::Lomax>())
    b = regular ? bounds::bounds_lomax_regular(l->lambda, l->alpha1, l->alpha2, l->gamma, l->beta1, l->beta2, mu)
                : bounds::bounds_lomax_arbitrary(l->lambda, l->alpha1, l->alpha2, l->gamma, l->beta1, l->beta2, mu);
  if (!b) return;
  report.bounds = std::make_pair(b->lower, b->upper);
  report.bounds_tag = b->theorem;
}

analytic::KDistribution solve_k_distribution(const config::SolveSpec& s) {
  std::string kind = s.k_distribution;
  if (kind.empty()) kind = !s.k_pmf.empty() ? "empirical" : (s.k_trials > 0 ? "binomial" : "");
  try {
    if (kind == "binomial") return analytic::KDistribution::binomial(s.k_trials, s.k_p);
    if (kind == "empirical") {
      if (s.k_pmf.empty()) throw ConfigError("config [solve] k_pmf: required for an empirical K distribution");
      return analytic::KDistribution::empirical(s.k_pmf);
    }
    if (kind == "degenerate") return analytic::KDistribution::degenerate(s.k);
  } catch (const InvalidParameter& e) {
    throw ConfigError(fmt::format("config [solve]: {}", e.what()));
  }
  throw ConfigError("config [solve] k_distribution: required for theorem3_exact (binomial, empirical or degenerate)");
}

}  // namespace

config::Config resolve_config(const Overrides& o) {
  config::RawConfig raw;
  std::filesystem::path base = ".";
  if (o.config) {
    auto loaded = config::load(*o.config);
    raw = std::move(loaded.raw);
    base = loaded.base_dir;
  }
  if (o.graph_file) raw["graph"] = {{"type", "file"}, {"file", std::filesystem::absolute(*o.graph_file).string()}};
  if (o.seed) raw["sim"]["seed"] = std::to_string(*o.seed);
  if (o.jobs) raw["sim"]["jobs"] = std::to_string(*o.jobs);
  return config::interpret(std::move(raw), base);
}

analytic::QReport cmd_solve(const config::Config& cfg) {
  const auto model = config::build_model(cfg);
  const auto& s = cfg.solve;
  analytic::QReport report;
  report.method = s.method;
  report.provenance.config_digest = config::digest(cfg.raw);

  auto finish_single = [&](double m) {
    report.m = m;
    report.q = analytic::q_of_v(m);
    report.per_node = {{0, report.q}};
  };

  if (s.method == "fixed_point") {
    std::optional<std::size_t> mu = s.mu;
    if (!mu && cfg.graph) {
      mu = common_degree(config::build_graph(cfg));
      if (!mu) throw ConfigError("config [solve] method: fixed_point needs a regular graph (or set solve.mu)");
    }
    if (!mu) throw ConfigError("config [solve] mu: required for fixed_point (or give a regular [graph])");
    if (model.regime() == dist::Regime::tabulated && *mu + 1 > model.get_if<dist::Tabulated>()->attack_diagonal.size())
      throw ConfigError(fmt::format("config [model] attack_curves: fixed_point with mu={} needs curves for k = 0..{}",
                                    *mu, *mu));
    const auto fp = analytic::solve_regular_fixed_point(*mu, model);
    report.q = fp.q;
    report.m = fp.q > 0.0 ? (1.0 - fp.q) / fp.q : INFINITY;
    report.per_node = {{0, fp.q}};
    report.provenance.solver_iterations = fp.iterations;
    report.notes.push_back(fmt::format("residual {:.3g}", fp.residual));
    if (fp.multiple_roots())
      report.notes.push_back(
          fmt::format("residual changes sign {} times on [0,1]; the smallest root is reported", fp.sign_changes));
    attach_context_bounds(report, model, static_cast<double>(*mu), true);
  } else if (s.method == "theorem3_exact") {
    const auto kd = solve_k_distribution(s);
    finish_single(analytic::m_general(kd, model));
    if (auto mu = configured_mu(cfg)) attach_context_bounds(report, model, *mu, cfg.bounds.graph_class == "regular");
  } else if (s.method == "empirical_k") {
    std::optional<analytic::KDistribution> kd;
    if (!s.k_pmf.empty()) {
      kd = analytic::KDistribution::empirical(s.k_pmf);
    } else if (!s.k_observations.empty()) {
      if (!s.deg) throw ConfigError("config [solve] deg: required with k_observations");
      kd = analytic::k_pmf_empirical(s.k_observations, *s.deg);
    } else {
      throw ConfigError("config [solve] k_pmf: empirical_k needs k_pmf or k_observations");
    }
    finish_single(analytic::m_general(*kd, model));
    if (auto mu = configured_mu(cfg)) attach_context_bounds(report, model, *mu, cfg.bounds.graph_class == "regular");
  } else if (s.method == "normal_approx") {
    if (!s.deg || !s.k_mean || !s.k_variance)
      throw ConfigError("config [solve]: normal_approx needs deg, k_mean and k_variance");
    if (!model.supports_real_k())
      throw ConfigError(fmt::format("config [solve] method: normal_approx needs a regime with real-k closed forms "
                                    "(exponential or weibull), not {}",
                                    dist::to_string(model.regime())));
    const auto na = analytic::m_normal_approx(*s.deg, *s.k_mean, *s.k_variance, model);
    finish_single(na.m);
    report.notes.push_back(fmt::format("normal mass inside [0, deg] = {:.17g}", na.mass_in_range));
    if (auto mu = configured_mu(cfg)) attach_context_bounds(report, model, *mu, cfg.bounds.graph_class == "regular");
  } else {
    if (!s.deg || !s.k_mean) throw ConfigError("config [solve]: poisson_approx needs deg and k_mean");
    if (model.regime() == dist::Regime::tabulated &&
        *s.deg + 1 > model.get_if<dist::Tabulated>()->attack_diagonal.size())
      throw ConfigError("config [solve] deg: exceeds the tabulated attack curves");
    finish_single(analytic::m_poisson_approx(*s.deg, *s.k_mean, model));
    if (auto mu = configured_mu(cfg)) attach_context_bounds(report, model, *mu, cfg.bounds.graph_class == "regular");
  }
  return report;
}

bounds::BoundsReport cmd_bounds(const config::Config& cfg) {
  const auto model = config::build_model(cfg);
  const auto& b = cfg.bounds;
  std::string theorem = b.theorem;
  if (theorem == "auto") {
    switch (model.regime()) {
      case dist::Regime::exponential:
        theorem = "exponential";
        break;
      case dist::Regime::lomax:
        theorem = "lomax";
        break;
      case dist::Regime::tabulated:
        theorem = "general";
        break;
      case dist::Regime::weibull:
      case dist::Regime::marshall_olkin:
        throw Unsupported(fmt::format("no bound theorem covers the {} regime (exponential, lomax, or general with "
                                      "tabulated marginals)",
                                      dist::to_string(model.regime())));
    }
  }
  if (theorem == "general") {
    if (b.graph_class != "regular")
      throw ConfigError("config [bounds] graph_class: the general bound applies to regular graphs only");
    if (!b.kbar) throw ConfigError("config [bounds] kbar: required for the general bound");
    return bounds::bounds_general_regular(model, *b.kbar);
  }
  const auto mu = configured_mu(cfg);
  if (!mu) throw ConfigError("config [bounds] mu: required (or give a [graph])");
  const bool regular = b.graph_class == "regular";
  if (theorem == "exponential") {
    const auto* e = model.get_if<dist::Exponential>();
    if (!e) throw ConfigError("config [bounds] theorem: exponential bounds need the exponential regime");
    return regular ? bounds::bounds_exp_regular(e->alpha, e->beta, e->eta, e->gamma, *mu)
                   : bounds::bounds_exp_arbitrary(e->alpha, e->beta, e->eta, e->gamma, *mu);
  }
  const auto* l = model.get_if<dist::Lomax>();
  if (!l) throw ConfigError("config [bounds] theorem: lomax bounds need the lomax regime");
  return regular ? bounds::bounds_lomax_regular(l->lambda, l->alpha1, l->alpha2, l->gamma, l->beta1, l->beta2, *mu)
                 : bounds::bounds_lomax_arbitrary(l->lambda, l->alpha1, l->alpha2, l->gamma, l->beta1, l->beta2, *mu);
}

SimulateOutput cmd_simulate(const config::Config& cfg, const std::filesystem::path& out_dir) {
  auto scenario = config::build_scenario(cfg);
  SimulateOutput out;
  out.result = sim::run(scenario);
  std::filesystem::create_directories(out_dir);
  for (std::size_t r = 0; r < out.result.replications.size(); ++r) {
    const auto& rep = out.result.replications[r];
    if (cfg.report.write_cycles) {
      const auto path = out_dir / fmt::format("cycles_rep{}.csv", r);
      write_cycles_csv(rep.cycles, path);
      out.artifacts.push_back(path);
    }
    if (cfg.sim.write_snapshots) {
      const auto path = out_dir / fmt::format("snapshots_rep{}.csv", r);
      sim::write_snapshots_csv(rep, path);
      out.artifacts.push_back(path);
    }
  }
  const auto summary = out_dir / "simulate.json";
  write_json(envelope("simulate", cfg, to_json(out.result)), summary);
  out.artifacts.push_back(summary);
  return out;
}

renewal::RenewalEstimate cmd_estimate(const config::Config& cfg, const std::vector<std::filesystem::path>& files) {
  std::vector<std::filesystem::path> all = cfg.estimate.files;
  all.insert(all.end(), files.begin(), files.end());
  if (all.empty()) throw ConfigError("estimate: no trace files given (positional arguments or [estimate] files)");
  CyclesTrace pooled;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto prefix = all.size() > 1 ? fmt::format("f{}", i) : std::string();
    auto trace = read_cycles_csv(all[i], prefix);
    for (auto& node : trace.nodes) pooled.nodes.push_back(std::move(node));
  }
  return renewal::estimate_procedure(pooled, cfg.estimate.options);
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

ValidationReport cmd_validate(const config::Config& cfg) {
  ValidationReport report;
  auto add = [&](std::string name, bool ok, double measured, double tol, std::string detail) {
    report.checks.push_back(Check{std::move(name), ok, measured, tol, std::move(detail)});
  };

  const auto model = cfg.model ? config::build_model(cfg)
                               : dist::AttackDefenseModel(dist::Exponential{0.5, 0.2, 1.0, 1.0});
  if (model.regime() != dist::Regime::exponential && model.regime() != dist::Regime::weibull)
    throw ConfigError("config [model] regime: validate needs exponential or weibull (closed forms)");
  const bool faulty_bound = cfg.validate.inject_fault == "bound";
  Rng rng(derive_seed(cfg.sim.seed, {0x7661'6c69ULL}));
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };

  // Reduction identities on random points.
  {
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg.validate.reduction_points; ++i) {
      const double a = uniform(0.1, 3.0), g = uniform(0.0, 2.0), b = uniform(0.1, 3.0), e = uniform(0.1, 3.0);
      const std::size_t mu = 1 + uniform_index(rng, 8);
      const dist::AttackDefenseModel ex(dist::Exponential{a, g, b, e});
      const dist::AttackDefenseModel wb(dist::Weibull{a, g, 1.0, b, e, 1.0});
      const dist::AttackDefenseModel mo(dist::MarshallOlkin{a, g, 0.0, b, e, 0.0});
      const auto kd = analytic::KDistribution::binomial(mu, uniform(0.0, 1.0));
      const double m_ex = analytic::m_general(kd, ex);
      const double q_ex = analytic::solve_regular_fixed_point(mu, ex).q;
      for (const auto* other : {&wb, &mo}) {
        worst = std::max(worst, std::abs(analytic::m_general(kd, *other) - m_ex) / std::max(1.0, std::abs(m_ex)));
        worst = std::max(worst, std::abs(analytic::solve_regular_fixed_point(mu, *other).q - q_ex));
      }
    }
    add("reduction_identities", worst <= 1e-9, worst, 1e-9,
        fmt::format("weibull shape 1 and marshall-olkin without shared shocks vs exponential over {} points",
                    cfg.validate.reduction_points));
  }
  if (const auto* w = model.get_if<dist::Weibull>(); w && w->attack_shape == 1.0 && w->defense_shape == 1.0) {
    const dist::AttackDefenseModel ex(dist::Exponential{w->lambda1, w->lambda2, w->gamma1, w->gamma2});
    double worst = 0.0;
    for (std::size_t mu : {0u, 2u, 4u, 8u}) {
      worst = std::max(worst, std::abs(analytic::solve_regular_fixed_point(mu, model).q -
                                       analytic::solve_regular_fixed_point(mu, ex).q));
      const auto kd = analytic::KDistribution::binomial(mu, 0.3);
      worst = std::max(worst, std::abs(analytic::m_general(kd, model) - analytic::m_general(kd, ex)));
    }
    add("configured_weibull_reduces_to_exponential", worst <= 1e-9, worst, 1e-9, "shapes equal 1");
  }

  // Closed-form expectation against m_general for exponential clocks.
  {
    double worst = 0.0;
    for (std::size_t i = 0; i < cfg.validate.reduction_points; ++i) {
      const double a = uniform(0.1, 3.0), g = uniform(0.0, 2.0), b = uniform(0.1, 3.0), e = uniform(0.1, 3.0);
      std::vector<double> pmf(1 + uniform_index(rng, 21));
      double total = 0.0;
      for (auto& p : pmf) total += (p = uniform01(rng));
      for (auto& p : pmf) p /= total;
      double direct = 0.0;
      for (std::size_t k = 0; k < pmf.size(); ++k) direct += pmf[k] * (b + e) / (a + g * static_cast<double>(k));
      const double m = analytic::m_general(analytic::KDistribution::empirical(pmf),
                                           dist::AttackDefenseModel(dist::Exponential{a, g, b, e}));
      worst = std::max(worst, std::abs(m - direct) / std::max(1.0, std::abs(direct)));
    }
    add("expectation_identity", worst <= 1e-12, worst, 1e-12, "m_general vs E[(beta+eta)/(alpha+gamma K)]");
  }

  // Sandwich battery: fixed point inside both exponential bound pairs.
  {
    std::size_t violations = 0;
    std::string first;
    for (std::size_t i = 0; i < cfg.validate.sandwich_points; ++i) {
      const double a = uniform(0.05, 2.0), g = uniform(0.0, 2.0), b = uniform(0.05, 2.0), e = uniform(0.05, 2.0);
      const std::size_t mu = std::size_t{2} << uniform_index(rng, 3);
      const double q = analytic::solve_regular_fixed_point(mu, dist::AttackDefenseModel(dist::Exponential{a, g, b, e})).q;
      auto regular = bounds::bounds_exp_regular(a, b, e, g, static_cast<double>(mu));
      const auto arbitrary = bounds::bounds_exp_arbitrary(a, b, e, g, static_cast<double>(mu));
      if (faulty_bound) regular.upper = 0.5 * q;
      const double slack = 1e-12;
      const bool ok = q >= regular.lower - slack && q <= regular.upper + slack && q >= arbitrary.lower - slack &&
                      q <= arbitrary.upper + slack && regular.upper <= arbitrary.upper + slack;
      if (!ok) {
        ++violations;
        if (first.empty())
          first = fmt::format("violated sandwich at alpha={:.6g} gamma={:.6g} beta={:.6g} eta={:.6g} mu={}: q={:.17g} "
                              "regular [{:.17g}, {:.17g}] arbitrary [{:.17g}, {:.17g}]",
                              a, g, b, e, mu, q, regular.lower, regular.upper, arbitrary.lower, arbitrary.upper);
      }
    }
    add("fixed_point_sandwich", violations == 0, static_cast<double>(violations), 0.0,
        first.empty() ? fmt::format("{} parameter points", cfg.validate.sandwich_points) : first);
  }

  // Simulation against the bounds, the fixed point, and the renewal estimator.
  {
    const bool have_sim = cfg.raw.count("sim") > 0;
    std::optional<graph::Graph> g;
    if (cfg.graph) g = config::build_graph(cfg);
    else g = graph::make_random_regular(200, 4, cfg.sim.seed);
    const auto mu = common_degree(*g);
    if (!mu) throw ConfigError("config [graph]: validate needs a regular graph");

    sim::ScenarioConfig sc{*g, model};
    sc.master_seed = cfg.sim.seed;
    sc.jobs = cfg.sim.jobs;
    if (have_sim) {
      sc.horizon = cfg.sim.horizon;
      sc.burn_in = cfg.sim.burn_in;
      sc.replications = cfg.sim.replications;
      sc.snapshot_interval = cfg.sim.snapshot_interval;
      sc.initial_compromised_fraction = cfg.sim.initial_compromised_fraction;
    } else {
      sc.horizon = 2000.0;
      sc.burn_in = sim::BurnIn::fraction(0.2);
      sc.replications = 4;
    }
    const auto result = sim::run(sc);
    const double se = result.standard_error;
    const double fp = analytic::solve_regular_fixed_point(*mu, model).q;

    if (const auto* e = model.get_if<dist::Exponential>()) {
      auto b = bounds::bounds_exp_regular(e->alpha, e->beta, e->eta, e->gamma, static_cast<double>(*mu));
      if (faulty_bound) b.upper = 0.5 * result.q;
      const double lo = b.lower - 3 * se, hi = b.upper + 3 * se;
      const bool ok = result.q >= lo && result.q <= hi;
      add("simulation_within_bounds", ok, result.q, 3 * se,
          fmt::format("q={:.6g} bounds [{:.6g}, {:.6g}] widened by 3 SE={:.3g}", result.q, b.lower, b.upper, 3 * se));
    }
    const double tol = 3 * (se + 0.01);
    add("simulation_near_fixed_point", std::abs(result.q - fp) <= tol, std::abs(result.q - fp), tol,
        fmt::format("simulated {:.6g} vs fixed point {:.6g}", result.q, fp));

    const auto& rep = result.replications.front();
    double dev = 0.0;
    std::size_t counted = 0;
    for (const auto& node : rep.cycles.nodes) {
      if (node.cycles.empty()) continue;
      dev += std::abs(renewal::estimate_node(node.cycles) - rep.occupancy[node.node]);
      ++counted;
    }
    const double mad = counted ? dev / static_cast<double>(counted) : INFINITY;
    add("estimator_recovers_occupancy", mad <= 0.02, mad, 0.02,
        fmt::format("mean |q_hat(v) - occupancy(v)| over {} nodes", counted));
  }
  return report;
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json rank_json(const renewal::RankTest& t) {
  return Json{{"verdict", renewal::to_string(t.verdict)}, {"statistic", t.statistic}, {"p_value", t.p_value}};
}

Json tail_json(const renewal::TailTest& t) {
  return Json{{"verdict", renewal::to_string(t.verdict)},
              {"index", t.index},
              {"lower", t.lower},
              {"upper", t.upper},
              {"order_statistics", t.order_statistics}};
}

}  // namespace

Json to_json(const analytic::QReport& r) {
  Json per_node = Json::object();
  for (const auto& [v, q] : r.per_node) per_node[std::to_string(v)] = q;
  Json j{{"method", r.method}, {"q", r.q}, {"m", optional_number(r.m)}, {"per_node", per_node}};
  if (r.weighted) j["weighted_q"] = *r.weighted;
  if (r.bounds) j["bounds"] = Json{{"lower", r.bounds->first}, {"upper", r.bounds->second}, {"theorem", r.bounds_tag}};
  j["notes"] = r.notes;
  Json prov{{"config_digest", r.provenance.config_digest}};
  if (r.provenance.seed) prov["seed"] = *r.provenance.seed;
  if (r.provenance.solver_iterations) prov["solver_iterations"] = *r.provenance.solver_iterations;
  j["provenance"] = prov;
  return j;
}

Json to_json(const bounds::BoundsReport& r) {
  Json inputs = Json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = v;
  Json j{{"theorem", r.theorem}, {"lower", r.lower}, {"upper", r.upper}, {"inputs", inputs}};
  j["printed_lower"] = optional_number(r.printed_lower);
  j["notes"] = r.notes;
  return j;
}

Json to_json(const sim::SimResult& r) {
  Json reps = Json::array();
  for (std::size_t i = 0; i < r.replications.size(); ++i) {
    const auto& rep = r.replications[i];
    std::size_t cycles = 0;
    for (const auto& n : rep.cycles.nodes) cycles += n.cycles.size();
    reps.push_back(Json{{"index", i},
                        {"seed", rep.seed},
                        {"q", rep.q},
                        {"events", rep.events},
                        {"completed_cycles", cycles},
                        {"batch_q", rep.batch_q},
                        {"degenerate", rep.degenerate}});
  }
  Json running = Json::array();
  if (!r.replications.empty())
    for (const auto& [t, q] : r.replications.front().running_q) running.push_back(Json::array({t, q}));
  return Json{{"q", r.q},
              {"standard_error", r.standard_error},
              {"error_method", r.error_method},
              {"burn_in", r.burn_in},
              {"master_seed", r.master_seed},
              {"steadiness",
               Json{{"steady", r.steady.steady}, {"index", r.steady.index}, {"time", r.steady.time}}},
              {"occupancy", r.occupancy},
              {"replications", reps},
              {"running_q", running},
              {"warnings", r.warnings}};
}

Json to_json(const renewal::RenewalEstimate& r) {
  Json nodes = Json::array();
  for (const auto& d : r.nodes) {
    nodes.push_back(Json{{"node", d.label},
                         {"cycles", d.cycles},
                         {"W", d.secure_total},
                         {"D", d.compromised_total},
                         {"q_hat", optional_number(d.q)},
                         {"aborted", d.aborted},
                         {"steadiness", d.steadiness},
                         {"steady_time", d.steady_time},
                         {"independence",
                          Json{{"secure", rank_json(d.secure_independence)},
                               {"compromised", rank_json(d.compromised_independence)},
                               {"pairs", rank_json(d.pair_independence)}}},
                         {"finite_variance",
                          Json{{"secure", tail_json(d.secure_tail)}, {"compromised", tail_json(d.compromised_tail)}}},
                         {"reasons", d.reasons},
                         {"warnings", d.warnings}});
  }
  return Json{{"q_bar", r.survivors ? Json(r.q_bar) : Json(nullptr)},
              {"standard_error", optional_number(r.standard_error)},
              {"survivors", r.survivors},
              {"observed_nodes", r.nodes.size()},
              {"nodes", nodes},
              {"abort_log", r.abort_log}};
}

Json to_json(const ValidationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back(Json{{"name", c.name},
                          {"passed", c.passed},
                          {"measured", c.measured},
                          {"tolerance", c.tolerance},
                          {"detail", c.detail}});
  return Json{{"all_passed", r.all_passed()}, {"checks", checks}};
}

Json envelope(const std::string& kind, const config::Config& cfg, Json body) {
  Json j{{"schema", kSchemaId}, {"kind", kind}, {"config_digest", config::digest(cfg.raw)}};
  for (auto& [k, v] : body.items()) j[k] = v;
  return j;
}

void write_json(const Json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open {} for writing", path.string()));
  out << doc.dump(2) << '\n';
  if (!out) throw DataError(fmt::format("write to {} failed", path.string()));
}

Json to_json(const RunManifest& m) {
  Json cfg = Json::object();
  for (const auto& [section, body] : m.config) {
    Json s = Json::object();
    for (const auto& [k, v] : body) s[k] = v;
    cfg[section] = s;
  }
  Json seeds = Json::object();
  for (const auto& [name, seed] : m.seeds) seeds[name] = seed;
  Json artifacts = Json::array();
  for (const auto& a : m.artifacts) artifacts.push_back(a.generic_string());
  return Json{{"schema", kSchemaId},
              {"kind", "manifest"},
              {"subcommand", m.subcommand},
              {"tool_version", kToolVersion},
              {"config_digest", config::digest(m.config)},
              {"config", cfg},
              {"seeds", seeds},
              {"artifacts", artifacts},
              {"wall_seconds", m.wall_seconds}};
}

std::filesystem::path write_manifest(RunManifest manifest, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto ini = out_dir / "config.ini";
  {
    std::ofstream out(ini, std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot open {} for writing", ini.string()));
    out << config::canonical_text(manifest.config);
  }
  const auto path = out_dir / "manifest.json";
  manifest.artifacts.push_back(ini);
  manifest.artifacts.push_back(path);
  write_json(to_json(manifest), path);
  return path;
}

}  // namespace adsm::cli
