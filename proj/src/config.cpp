#include "adsm/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "adsm/error.hpp"

namespace adsm::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find_first_of(",;", start);
    if (end == std::string_view::npos) end = s.size();
    const auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

// Reads typed fields of one section and remembers which keys were used.
class Section {
 public:
  Section(const RawConfig& raw, std::string name) : name_(std::move(name)) {
    if (auto it = raw.find(name_); it != raw.end()) values_ = &it->second;
  }

  bool present() const { return values_ != nullptr; }
  bool has(const std::string& key) const { return values_ && values_->count(key) > 0; }

  std::optional<std::string> text(const std::string& key) {
    if (!has(key)) return std::nullopt;
    used_.insert(key);
    return std::string(trim(values_->at(key)));
  }

  std::optional<double> number(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
    if (t->empty() || ec != std::errc{} || ptr != t->data() + t->size() || !std::isfinite(v))
      fail(key, fmt::format("expected a finite number, got '{}'", *t));
    return v;
  }

  std::optional<std::uint64_t> unsigned_int(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
    if (t->empty() || ec != std::errc{} || ptr != t->data() + t->size())
      fail(key, fmt::format("expected a non-negative integer, got '{}'", *t));
    return v;
  }

  std::optional<bool> boolean(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    if (*t == "true" || *t == "1" || *t == "yes" || *t == "on") return true;
    if (*t == "false" || *t == "0" || *t == "no" || *t == "off") return false;
    fail(key, fmt::format("expected true or false, got '{}'", *t));
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split_list(*t)) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(v))
        fail(key, fmt::format("expected a list of numbers, bad entry '{}'", item));
      out.push_back(v);
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(const std::string& key) {
    auto t = text(key);
    if (!t) return std::nullopt;
    return split_list(*t);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(fmt::format("config [{}] {}: {}", name_, key, what));
  }

  void reject_unused() const {
    if (!values_) return;
    for (const auto& [key, value] : *values_)
      if (!used_.count(key)) throw ConfigError(fmt::format("config [{}] {}: unknown key", name_, key));
  }

 private:
  std::string name_;
  const std::map<std::string, std::string>* values_ = nullptr;
  std::set<std::string> used_;
};

const std::set<std::string> kSections = {"graph", "model", "sim", "solve", "bounds", "estimate", "validate", "report"};

const std::map<std::string, std::vector<std::string>> kRegimeParams = {
    {"exponential", {"alpha", "gamma", "beta", "eta"}},
    {"weibull", {"lambda1", "lambda2", "attack_shape", "gamma1", "gamma2", "defense_shape"}},
    {"lomax", {"lambda", "alpha1", "alpha2", "gamma", "beta1", "beta2"}},
    {"marshall_olkin", {"lambda", "lambda_ind", "lambda_all", "gamma1", "gamma2", "gamma12"}},
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::size_t positive_count(Section& s, const std::string& key, std::size_t fallback) {
  const auto v = s.unsigned_int(key);
  if (!v) return fallback;
  if (*v == 0) s.fail(key, "must be >= 1");
  return static_cast<std::size_t>(*v);
}

GraphSpec read_graph(Section& s, const std::filesystem::path& base) {
  GraphSpec g;
  if (auto t = s.text("type")) g.type = *t;
  if (g.type != "regular" && g.type != "random_regular" && g.type != "erdos_renyi" && g.type != "power_law" &&
      g.type != "file")
    s.fail("type",
           fmt::format("'{}' is not one of regular, random_regular, erdos_renyi, power_law, file", g.type));
  if (g.type == "file") {
    auto f = s.text("file");
    if (!f) s.fail("file", "required when type = file (or pass --graph-file)");
    g.file = resolve(base, *f);
    return g;
  }
  const auto n = s.unsigned_int("n");
  if (!n || *n == 0) s.fail("n", "required, must be >= 1");
  g.n = static_cast<std::size_t>(*n);
  if (auto seed = s.unsigned_int("seed")) g.seed = *seed;
  if (g.type == "regular") {
    const auto mu = s.unsigned_int("mu");
    if (!mu) s.fail("mu", "required for a regular graph");
    g.mu = static_cast<std::size_t>(*mu);
    if (g.mu % 2 != 0 || (g.mu >= g.n && g.mu != 0))
      s.fail("mu", fmt::format("must be even and below n={} (got {})", g.n, g.mu));
  } else if (g.type == "random_regular") {
    const auto mu = s.unsigned_int("mu");
    if (!mu) s.fail("mu", "required for a random regular graph");
    g.mu = static_cast<std::size_t>(*mu);
    if (g.mu >= g.n || (g.n * g.mu) % 2 != 0)
      s.fail("mu", fmt::format("must be below n={} with n*mu even (got {})", g.n, g.mu));
  } else if (g.type == "erdos_renyi") {
    const auto p = s.number("p");
    if (!p || !(*p >= 0.0 && *p <= 1.0)) s.fail("p", "required, must lie in [0, 1]");
    g.p = *p;
  } else {
    if (auto tau = s.number("tau")) g.tau = *tau;
    if (!(g.tau > 2.0)) s.fail("tau", "must exceed 2");
    if (auto v = s.unsigned_int("min_degree")) g.min_degree = static_cast<std::size_t>(*v);
    if (auto v = s.unsigned_int("max_degree")) g.max_degree = static_cast<std::size_t>(*v);
    if (g.min_degree == 0) s.fail("min_degree", "must be >= 1");
  }
  return g;
}

ModelSpec read_model(Section& s, const std::filesystem::path& base) {
  ModelSpec m;
  auto regime = s.text("regime");
  if (!regime) s.fail("regime", "required (exponential, weibull, lomax, marshall_olkin, tabulated)");
  m.regime = *regime;
  if (m.regime == "tabulated") {
    auto curves = s.strings("attack_curves");
    if (!curves || curves->empty()) s.fail("attack_curves", "required: list of CSV files for k = 0, 1, ...");
    for (const auto& c : *curves) m.attack_curves.push_back(resolve(base, c));
    auto def = s.text("defense_curve");
    if (!def) s.fail("defense_curve", "required for the tabulated regime");
    m.defense_curve = resolve(base, *def);
    if (auto x1 = s.text("x1_marginal")) m.x1_marginal = resolve(base, *x1);
    if (auto x2 = s.text("x2_marginal")) m.x2_marginal = resolve(base, *x2);
    return m;
  }
  const auto it = kRegimeParams.find(m.regime);
  if (it == kRegimeParams.end())
    s.fail("regime", fmt::format("unknown regime '{}' (exponential, weibull, lomax, marshall_olkin, tabulated)",
                                 m.regime));
  for (const auto& key : it->second) {
    const auto v = s.number(key);
    if (!v) s.fail(key, fmt::format("required for the {} regime", m.regime));
    m.params[key] = *v;
  }
  return m;
}

SimSpec read_sim(Section& s) {
  SimSpec out;
  if (auto h = s.number("horizon")) out.horizon = *h;
  if (!(out.horizon > 0.0)) s.fail("horizon", "must be > 0");
  if (s.has("burn_in") && s.has("burn_in_time"))
    s.fail("burn_in_time", "give either burn_in (fraction or auto) or burn_in_time, not both");
  if (auto b = s.text("burn_in")) {
    if (*b == "auto") {
      out.burn_in = sim::BurnIn::automatic();
    } else {
      double f = 0.0;
      const auto [ptr, ec] = std::from_chars(b->data(), b->data() + b->size(), f);
      if (ec != std::errc{} || ptr != b->data() + b->size() || !(f >= 0.0 && f < 1.0))
        s.fail("burn_in", fmt::format("expected 'auto' or a fraction in [0, 1), got '{}'", *b));
      out.burn_in = sim::BurnIn::fraction(f);
    }
  }
  if (auto t = s.number("burn_in_time")) {
    if (!(*t >= 0.0 && *t < out.horizon))
      s.fail("burn_in_time", fmt::format("must satisfy 0 <= burn_in_time < horizon={}", out.horizon));
    out.burn_in = sim::BurnIn::absolute(*t);
  }
  out.replications = positive_count(s, "replications", out.replications);
  if (auto seed = s.unsigned_int("seed")) out.seed = *seed;
  if (auto v = s.number("snapshot_interval")) out.snapshot_interval = *v;
  if (!(out.snapshot_interval > 0.0)) s.fail("snapshot_interval", "must be > 0");
  if (auto v = s.number("initial_compromised_fraction")) out.initial_compromised_fraction = *v;
  if (!(out.initial_compromised_fraction >= 0.0 && out.initial_compromised_fraction <= 1.0))
    s.fail("initial_compromised_fraction", "must lie in [0, 1]");
  out.jobs = positive_count(s, "jobs", out.jobs);
  out.batches = positive_count(s, "batches", out.batches);
  if (out.batches < 2) s.fail("batches", "must be >= 2");
  out.steady_window = positive_count(s, "steady_window", out.steady_window);
  if (auto v = s.number("steady_tol")) out.steady_tol = *v;
  if (!(out.steady_tol > 0.0)) s.fail("steady_tol", "must be > 0");
  if (auto v = s.boolean("write_snapshots")) out.write_snapshots = *v;
  return out;
}

SolveSpec read_solve(Section& s) {
  SolveSpec out;
  if (auto m = s.text("method")) out.method = *m;
  static const std::set<std::string> methods = {"theorem3_exact", "fixed_point", "normal_approx", "poisson_approx",
                                                "empirical_k"};
  if (!methods.count(out.method))
    s.fail("method", fmt::format("'{}' is not one of theorem3_exact, fixed_point, normal_approx, poisson_approx, "
                                 "empirical_k",
                                 out.method));
  if (auto v = s.unsigned_int("mu")) out.mu = static_cast<std::size_t>(*v);
  if (auto v = s.text("k_distribution")) out.k_distribution = *v;
  if (!out.k_distribution.empty() && out.k_distribution != "binomial" && out.k_distribution != "empirical" &&
      out.k_distribution != "degenerate")
    s.fail("k_distribution", fmt::format("'{}' is not one of binomial, empirical, degenerate", out.k_distribution));
  if (auto v = s.unsigned_int("k_trials")) out.k_trials = static_cast<std::size_t>(*v);
  if (auto v = s.number("k_p")) out.k_p = *v;
  if (auto v = s.unsigned_int("k")) out.k = static_cast<std::size_t>(*v);
  if (auto v = s.numbers("k_pmf")) out.k_pmf = *v;
  if (auto v = s.numbers("k_observations")) {
    for (double x : *v) {
      if (!(x >= 0.0) || x != std::floor(x)) s.fail("k_observations", "entries must be non-negative integers");
      out.k_observations.push_back(static_cast<std::size_t>(x));
    }
  }
  if (auto v = s.unsigned_int("deg")) out.deg = static_cast<std::size_t>(*v);
  if (auto v = s.number("k_mean")) out.k_mean = *v;
  if (auto v = s.number("k_variance")) out.k_variance = *v;
  return out;
}

BoundsSpec read_bounds(Section& s) {
  BoundsSpec out;
  if (auto t = s.text("theorem")) out.theorem = *t;
  if (out.theorem != "auto" && out.theorem != "exponential" && out.theorem != "lomax" && out.theorem != "general")
    s.fail("theorem", fmt::format("'{}' is not one of auto, exponential, lomax, general", out.theorem));
  if (auto t = s.text("graph_class")) out.graph_class = *t;
  if (out.graph_class != "regular" && out.graph_class != "arbitrary")
    s.fail("graph_class", fmt::format("'{}' is not one of regular, arbitrary", out.graph_class));
  if (auto v = s.number("mu")) {
    if (!(*v >= 0.0)) s.fail("mu", "must be >= 0");
    out.mu = *v;
  }
  if (auto v = s.number("kbar")) {
    if (!(*v >= 0.0)) s.fail("kbar", "must be >= 0");
    out.kbar = *v;
  }
  return out;
}

EstimateSpec read_estimate(Section& s, const std::filesystem::path& base) {
  EstimateSpec out;
  auto& o = out.options;
  if (auto v = s.number("significance")) o.significance = *v;
  if (!(o.significance > 0.0 && o.significance < 1.0)) s.fail("significance", "must lie in (0, 1)");
  if (auto v = s.boolean("bonferroni")) o.bonferroni = *v;
  o.min_independence_length = positive_count(s, "min_independence_length", o.min_independence_length);
  o.min_tail_length = positive_count(s, "min_tail_length", o.min_tail_length);
  if (auto v = s.number("tail_fraction")) o.tail_fraction = *v;
  if (!(o.tail_fraction > 0.0 && o.tail_fraction < 1.0)) s.fail("tail_fraction", "must lie in (0, 1)");
  if (auto v = s.number("tail_cutoff")) o.tail_cutoff = *v;
  if (!(o.tail_cutoff > 0.0)) s.fail("tail_cutoff", "must be > 0");
  o.steady_window = positive_count(s, "steady_window", o.steady_window);
  if (auto v = s.number("steady_tol")) o.steady_tol = *v;
  if (!(o.steady_tol > 0.0)) s.fail("steady_tol", "must be > 0");
  if (auto v = s.boolean("force_pass")) o.force_pass = *v;
  if (auto files = s.strings("files"))
    for (const auto& f : *files) out.files.push_back(resolve(base, f));
  return out;
}

ValidateSpec read_validate(Section& s) {
  ValidateSpec out;
  if (auto t = s.text("inject_fault")) out.inject_fault = *t;
  if (!out.inject_fault.empty() && out.inject_fault != "bound" && out.inject_fault != "none")
    s.fail("inject_fault", fmt::format("'{}' is not one of none, bound", out.inject_fault));
  if (out.inject_fault == "none") out.inject_fault.clear();
  out.sandwich_points = positive_count(s, "sandwich_points", out.sandwich_points);
  out.reduction_points = positive_count(s, "reduction_points", out.reduction_points);
  return out;
}

ReportSpec read_report(Section& s) {
  ReportSpec out;
  if (auto v = s.boolean("write_cycles")) out.write_cycles = *v;
  return out;
}

std::string json_scalar(const nlohmann::json& v, const std::string& where) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return fmt::format("{:.17g}", v.get<double>());
  throw ConfigError(fmt::format("config {}: expected a scalar or a list of scalars", where));
}

}  // namespace

RawConfig parse_ini(std::istream& in, std::string_view name) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", name, e.line(), e.message()));
  }
  RawConfig raw;
  for (const auto& [section, body] : tree) {
    if (body.empty())
      throw ConfigError(fmt::format("{}: key '{}' appears outside any [section]", name, section));
    auto& dst = raw[section];
    for (const auto& [key, value] : body) dst[key] = value.get_value<std::string>();
  }
  return raw;
}

RawConfig parse_json(std::istream& in, std::string_view name) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("{}: {}", name, e.what()));
  }
  if (!doc.is_object()) throw ConfigError(fmt::format("{}: top level must be an object of sections", name));
  RawConfig raw;
  for (const auto& [section, body] : doc.items()) {
    if (!body.is_object()) throw ConfigError(fmt::format("{}: section '{}' must be an object", name, section));
    auto& dst = raw[section];
    for (const auto& [key, value] : body.items()) {
      const auto where = fmt::format("[{}] {}", section, key);
      if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) {
          if (!joined.empty()) joined += ',';
          joined += json_scalar(item, where);
        }
        dst[key] = joined;
      } else {
        dst[key] = json_scalar(value, where);
      }
    }
  }
  return raw;
}

Config interpret(RawConfig raw, std::filesystem::path base_dir) {
  for (const auto& [section, body] : raw)
    if (!kSections.count(section))
      throw ConfigError(fmt::format("config [{}]: unknown section (expected graph, model, sim, solve, bounds, "
                                    "estimate, validate, report)",
                                    section));
  Config cfg;
  cfg.base_dir = base_dir;

  Section graph(raw, "graph"), model(raw, "model"), sim(raw, "sim"), solve(raw, "solve"), bounds(raw, "bounds"),
      estimate(raw, "estimate"), validate(raw, "validate"), report(raw, "report");
  if (graph.present()) cfg.graph = read_graph(graph, base_dir);
  if (model.present()) cfg.model = read_model(model, base_dir);
  cfg.sim = read_sim(sim);
  cfg.solve = read_solve(solve);
  cfg.bounds = read_bounds(bounds);
  cfg.estimate = read_estimate(estimate, base_dir);
  cfg.validate = read_validate(validate);
  cfg.report = read_report(report);
  for (const Section* s : {&graph, &model, &sim, &solve, &bounds, &estimate, &validate, &report}) s->reject_unused();
  cfg.raw = std::move(raw);
  return cfg;
}

Config load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  const auto text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool json = path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
  std::istringstream stream(text);
  auto raw = json ? parse_json(stream, path.string()) : parse_ini(stream, path.string());
  return interpret(std::move(raw), path.parent_path().empty() ? "." : path.parent_path());
}

Config load_string(std::string_view text, std::filesystem::path base_dir) {
  const auto first = text.find_first_not_of(" \t\r\n");
  std::istringstream stream{std::string(text)};
  auto raw = (first != std::string_view::npos && text[first] == '{') ? parse_json(stream, "<string>")
                                                                      : parse_ini(stream, "<string>");
  return interpret(std::move(raw), std::move(base_dir));
}

dist::AttackDefenseModel build_model(const Config& cfg) {
  if (!cfg.model) throw ConfigError("config [model]: section required");
  const auto& m = *cfg.model;
  try {
    const auto p = [&](const char* key) { return m.params.at(key); };
    if (m.regime == "exponential") return dist::AttackDefenseModel(dist::Exponential{p("alpha"), p("gamma"), p("beta"), p("eta")});
    if (m.regime == "weibull")
      return dist::AttackDefenseModel(dist::Weibull{p("lambda1"), p("lambda2"), p("attack_shape"), p("gamma1"), p("gamma2"), p("defense_shape")});
    if (m.regime == "lomax")
      return dist::AttackDefenseModel(dist::Lomax{p("lambda"), p("alpha1"), p("alpha2"), p("gamma"), p("beta1"), p("beta2")});
    if (m.regime == "marshall_olkin")
      return dist::AttackDefenseModel(dist::MarshallOlkin{p("lambda"), p("lambda_ind"), p("lambda_all"), p("gamma1"), p("gamma2"), p("gamma12")});
    std::vector<dist::Curve> attack;
    for (const auto& f : m.attack_curves) attack.push_back(dist::load_curve_csv(f));
    dist::Tabulated t{std::move(attack), dist::load_curve_csv(m.defense_curve), std::nullopt, std::nullopt};
    if (!m.x1_marginal.empty()) t.x1_marginal = dist::load_curve_csv(m.x1_marginal);
    if (!m.x2_marginal.empty()) t.x2_marginal = dist::load_curve_csv(m.x2_marginal);
    return dist::AttackDefenseModel(std::move(t));
  } catch (const InvalidParameter& e) {
    throw ConfigError(fmt::format("config [model]: {}", e.what()));
  }
}

graph::Graph build_graph(const Config& cfg) {
  if (!cfg.graph) throw ConfigError("config [graph]: section required (or pass --graph-file)");
  const auto& g = *cfg.graph;
  const auto seed = g.seed.value_or(cfg.sim.seed);
  try {
    if (g.type == "file") return graph::read_edge_list(g.file);
    if (g.type == "regular") return graph::make_regular(g.n, g.mu, seed);
    if (g.type == "random_regular") return graph::make_random_regular(g.n, g.mu, seed);
    if (g.type == "erdos_renyi") return graph::make_random(graph::ErdosRenyi{g.p}, g.n, seed);
    return graph::make_random(graph::PowerLaw{g.tau, g.min_degree, g.max_degree}, g.n, seed);
  } catch (const InvalidParameter& e) {
    throw ConfigError(fmt::format("config [graph]: {}", e.what()));
  }
}

sim::ScenarioConfig build_scenario(const Config& cfg) {
  sim::ScenarioConfig sc{build_graph(cfg), build_model(cfg)};
  sc.horizon = cfg.sim.horizon;
  sc.burn_in = cfg.sim.burn_in;
  sc.replications = cfg.sim.replications;
  sc.master_seed = cfg.sim.seed;
  sc.snapshot_interval = cfg.sim.snapshot_interval;
  sc.initial_compromised_fraction = cfg.sim.initial_compromised_fraction;
  sc.jobs = cfg.sim.jobs;
  sc.batches = cfg.sim.batches;
  sc.steady_window = cfg.sim.steady_window;
  sc.steady_tol = cfg.sim.steady_tol;
  sc.record_cycles = true;
  sc.record_snapshots = cfg.sim.write_snapshots;
  return sc;
}

std::string canonical_text(const RawConfig& raw) {
  std::string out;
  for (const auto& [section, body] : raw) {
    out += fmt::format("[{}]\n", section);
    for (const auto& [key, value] : body) out += fmt::format("{} = {}\n", key, value);
  }
  return out;
}

std::string digest(const RawConfig& raw) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_text(raw)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace adsm::config
