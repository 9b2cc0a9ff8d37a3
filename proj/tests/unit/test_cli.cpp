#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "adsm/commands.hpp"
#include "adsm/config.hpp"
#include "adsm/error.hpp"

using namespace adsm;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("adsm_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto path = scratch() / name;
  std::ofstream(path) << text;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code = -1;
  std::string output;
};

Run run_cli(const std::string& args) {
  const auto log = scratch() / "cli.log";
  const std::string cmd = std::string(ADSM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(log)};
}

std::string config_error(const std::string& text) {
  try {
    config::load_string(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const std::string kExpModel = "[model]\nregime = exponential\nalpha = 1\ngamma = 1\nbeta = 1\neta = 1\n";

}  // namespace

TEST_CASE("config errors name the field") {
  CHECK(config_error("[bogus]\nx = 1\n").find("bogus") != std::string::npos);
  CHECK(config_error(kExpModel + "colour = red\n").find("[model] colour") != std::string::npos);
  CHECK(config_error("[model]\nregime = exponential\nalpha = 1\n").find("[model] gamma") != std::string::npos);
  CHECK(config_error("[model]\nregime = exponential\nalpha = x\ngamma = 1\nbeta = 1\neta = 1\n").find("alpha") !=
        std::string::npos);
  CHECK(config_error("[sim]\nburn_in = 1.5\n").find("[sim] burn_in") != std::string::npos);
  CHECK(config_error("[sim]\nburn_in = 0.2\nburn_in_time = 5\n").find("burn_in_time") != std::string::npos);
  CHECK(config_error("[graph]\ntype = regular\nn = 10\nmu = 3\n").find("[graph] mu") != std::string::npos);
  CHECK(config_error("[graph]\ntype = lattice\nn = 10\n").find("[graph] type") != std::string::npos);
  CHECK(config_error("[solve]\nmethod = magic\n").find("[solve] method") != std::string::npos);
  CHECK_FALSE(config_error("alpha = 1\n").empty());
  CHECK(config_error("[model]\nregime = exponential\nalpha = 0\ngamma = 1\nbeta = 1\neta = 1\n").empty());
  CHECK_THROWS_AS(config::build_model(config::load_string("[model]\nregime = exponential\nalpha = 0\ngamma = 1\n"
                                                          "beta = 1\neta = 1\n")),
                  ConfigError);
}

TEST_CASE("INI and JSON configs are equivalent") {
  const auto ini = config::load_string(kExpModel + "[sim]\nhorizon = 500\nseed = 3\n");
  const auto json = config::load_string(
      R"({"model": {"regime": "exponential", "alpha": 1, "gamma": 1, "beta": 1, "eta": 1},
          "sim": {"horizon": 500, "seed": 3}})");
  CHECK(config::digest(ini.raw) == config::digest(json.raw));
  CHECK(config::digest(ini.raw).size() == 16);
  CHECK(json.sim.horizon == 500);
  CHECK(json.sim.seed == 3);
}

TEST_CASE("solve examples") {
  auto solve = [](const std::string& text) { return cli::cmd_solve(config::load_string(text)); };
  const auto fp = solve(kExpModel + "[solve]\nmethod = fixed_point\nmu = 0\n");
  CHECK(fp.q == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(fp.bounds.has_value());

  const auto emp = solve(kExpModel + "[solve]\nmethod = empirical_k\nk_pmf = 0.5, 0, 0.5\n");
  CHECK(emp.q == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(*emp.m == doctest::Approx(4.0 / 3.0).epsilon(1e-12));

  const auto obs = solve(kExpModel + "[solve]\nmethod = empirical_k\nk_observations = 0, 2, 0, 2\ndeg = 2\n");
  CHECK(obs.q == doctest::Approx(3.0 / 7.0).epsilon(1e-12));

  const auto mo = solve(
      "[model]\nregime = marshall_olkin\nlambda = 1\nlambda_ind = 0.5\nlambda_all = 0.25\ngamma1 = 1\ngamma2 = 0.5\n"
      "gamma12 = 0.5\n[solve]\nmethod = theorem3_exact\nk_pmf = 0.2, 0.3, 0.5\n");
  const double phi[] = {0.0, 0.75, 1.25};
  const double pk[] = {0.2, 0.3, 0.5};
  double expected = 0.0;
  for (int k = 0; k < 3; ++k) expected += pk[k] / (1.0 + phi[k]);
  expected *= 2.0;
  CHECK(*mo.m == doctest::Approx(expected).epsilon(1e-12));

  const auto poisson = solve(kExpModel + "[solve]\nmethod = poisson_approx\ndeg = 10\nk_mean = 0\n");
  CHECK(*poisson.m == doctest::Approx(2.0));

  try {
    solve("[model]\nregime = lomax\nlambda = 1\nalpha1 = 2\nalpha2 = 2\ngamma = 1\nbeta1 = 2\nbeta2 = 2\n"
          "[solve]\nmethod = normal_approx\ndeg = 10\nk_mean = 2\nk_variance = 1\n");
    FAIL("expected a configuration error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("normal_approx") != std::string::npos);
    CHECK(std::string(e.what()).find("lomax") != std::string::npos);
  }
}

TEST_CASE("bounds examples") {
  auto bounds = [](const std::string& text) { return cli::cmd_bounds(config::load_string(text, scratch())); };
  const auto exp_arb = bounds(kExpModel + "[bounds]\ngraph_class = arbitrary\nmu = 4\n");
  CHECK(exp_arb.lower == doctest::Approx(1.0 / 3.0));
  CHECK(exp_arb.upper == doctest::Approx(5.0 / 7.0));
  CHECK_FALSE(exp_arb.notes.empty());

  const auto lomax = bounds("[model]\nregime = lomax\nlambda = 1\nalpha1 = 2\nalpha2 = 2\ngamma = 1\nbeta1 = 2\n"
                            "beta2 = 2\n[bounds]\nmu = 2\n");
  CHECK(std::abs(lomax.lower - 0.25) <= 1e-12);
  CHECK(std::abs(lomax.upper - 0.5) <= 1e-12);

  auto curve = [](double rate) {
    std::ostringstream s;
    s << "x,survival\n";
    s.precision(17);
    for (double x = 0.0;; x += 5e-4 * (1.0 / rate + x)) {
      s << x << "," << std::exp(-rate * x) << "\n";
      if (std::exp(-rate * x) < 1e-13) break;
    }
    return s.str();
  };
  write_file("x1.csv", curve(1.0));
  write_file("x2.csv", curve(1.0));
  write_file("defense.csv", curve(2.0));
  const auto general = bounds("[model]\nregime = tabulated\nattack_curves = x1.csv\ndefense_curve = defense.csv\n"
                              "x1_marginal = x1.csv\nx2_marginal = x2.csv\n[bounds]\nkbar = 2\n");
  CHECK(general.theorem == "general_regular");
  CHECK(std::abs(general.lower - 1.0 / 3.0) <= 1e-6);
  CHECK(std::abs(general.upper - 3.0 / 5.0) <= 1e-6);

  CHECK_THROWS_AS(bounds("[model]\nregime = weibull\nlambda1 = 1\nlambda2 = 1\nattack_shape = 1\ngamma1 = 1\n"
                         "gamma2 = 1\ndefense_shape = 1\n[bounds]\nmu = 2\n"),
                  Unsupported);
}

TEST_CASE("simulate rejects the tabulated regime") {
  write_file("d.csv", "x,survival\n0,1\n1,0\n");
  const auto cfg = config::load_string(
      "[graph]\ntype = regular\nn = 10\nmu = 2\n[model]\nregime = tabulated\nattack_curves = d.csv\n"
      "defense_curve = d.csv\n",
      scratch());
  try {
    cli::cmd_simulate(cfg, scratch() / "tab");
    FAIL("expected unsupported");
  } catch (const Unsupported& e) {
    CHECK(std::string(e.what()).find("tabulated") != std::string::npos);
  }
}

TEST_CASE("estimate on the toy trace") {
  const auto trace = write_file("toy.csv", "node_id,cycle_index,secure_duration,compromised_duration\n"
                                           "0,1,2,1\n0,2,4,3\n0,3,3,2\n");
  const auto est = cli::cmd_estimate(config::load_string(""), {trace});
  CHECK(est.q_bar == doctest::Approx(0.4).epsilon(1e-15));
  const auto pooled = cli::cmd_estimate(config::load_string(""), {trace, trace});
  CHECK(pooled.nodes.size() == 2);
  CHECK(pooled.nodes[1].label == "f1:0");
}

TEST_CASE("validate passes by default and reports an injected fault") {
  const std::string sim = "[sim]\nhorizon = 1000\nreplications = 2\nseed = 4\n[graph]\ntype = random_regular\n"
                          "n = 100\nmu = 4\n";
  const auto ok = cli::cmd_validate(config::load_string(sim));
  for (const auto& c : ok.checks) {
    CAPTURE(c.name);
    CAPTURE(c.detail);
    CHECK(c.passed);
  }
  const auto bad = cli::cmd_validate(config::load_string(sim + "[validate]\ninject_fault = bound\n"));
  bool sandwich_failed = false;
  for (const auto& c : bad.checks)
    if (c.name == "fixed_point_sandwich") {
      sandwich_failed = !c.passed;
      CHECK(c.detail.find("violated sandwich") != std::string::npos);
    }
  CHECK(sandwich_failed);
  CHECK_FALSE(bad.all_passed());
}

TEST_CASE("validate with a shape-one weibull model") {
  const auto report = cli::cmd_validate(config::load_string(
      "[model]\nregime = weibull\nlambda1 = 0.5\nlambda2 = 0.2\nattack_shape = 1\ngamma1 = 1\ngamma2 = 1\n"
      "defense_shape = 1\n[sim]\nhorizon = 1000\nreplications = 2\n[graph]\ntype = random_regular\nn = 100\nmu = 4\n"));
  bool saw = false;
  for (const auto& c : report.checks) {
    if (c.name == "reduction_identities" || c.name == "configured_weibull_reduces_to_exponential") {
      CHECK(c.passed);
      CHECK(c.measured <= 1e-9);
      saw = true;
    }
  }
  CHECK(saw);
}

TEST_CASE("command line exit codes and messages") {
  const auto cfg = write_file("small.ini", "[graph]\ntype = regular\nn = 20\nmu = 2\n" + kExpModel +
                                               "[sim]\nhorizon = 200\nreplications = 2\nseed = 9\n");
  const auto out = scratch() / "out_a";
  const auto sim = run_cli("simulate --config " + cfg.string() + " --out " + out.string());
  CHECK(sim.code == 0);
  CHECK(sim.output.find("q = ") != std::string::npos);
  CHECK(fs::exists(out / "cycles_rep1.csv"));
  CHECK(fs::exists(out / "snapshots_rep0.csv"));
  CHECK(fs::exists(out / "manifest.json"));
  const auto report = nlohmann::json::parse(read_file(out / "simulate.json"));
  CHECK(report["schema"] == cli::kSchemaId);
  CHECK(report["kind"] == "simulate");

  const auto est = run_cli("estimate " + (out / "cycles_rep0.csv").string() + " --out " + out.string());
  CHECK(est.code == 0);

  const auto bad_cfg = write_file("bad.ini", "[model]\nregime = exponential\nalpha = 1\n");
  const auto r2 = run_cli("solve --config " + bad_cfg.string() + " --out " + out.string());
  CHECK(r2.code == 2);
  CHECK(r2.output.find("[model] gamma") != std::string::npos);

  const auto broken = write_file("broken.csv", "node_id,cycle_index,secure_duration\n0,1,2\n");
  const auto r3 = run_cli("estimate " + broken.string() + " --out " + out.string());
  CHECK(r3.code == 3);
  CHECK(r3.output.find("node_id,cycle_index,secure_duration,compromised_duration") != std::string::npos);

  std::string rising = "node_id,cycle_index,secure_duration,compromised_duration\n";
  for (int i = 1; i <= 200; ++i) rising += "0," + std::to_string(i) + "," + std::to_string(i) + ",1\n";
  const auto r4 = run_cli("estimate " + write_file("rising.csv", rising).string() + " --out " + out.string());
  CHECK(r4.code == 5);
  CHECK(r4.output.find("independence") != std::string::npos);

  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("estimate " + (scratch() / "missing.csv").string() + " --out " + out.string()).code == 3);
}

TEST_CASE("repeated runs write byte-identical CSV artifacts") {
  const auto cfg = write_file("repro.ini", "[graph]\ntype = erdos_renyi\nn = 40\np = 0.1\n" + kExpModel +
                                               "[sim]\nhorizon = 300\nreplications = 2\nseed = 5\n");
  const auto a = scratch() / "repro_a";
  const auto b = scratch() / "repro_b";
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --out " + a.string()).code == 0);
  REQUIRE(run_cli("simulate --jobs 2 --config " + cfg.string() + " --out " + b.string()).code == 0);
  for (const char* name : {"cycles_rep0.csv", "cycles_rep1.csv", "snapshots_rep0.csv", "snapshots_rep1.csv"}) {
    CAPTURE(name);
    CHECK(read_file(a / name) == read_file(b / name));
    CHECK_FALSE(read_file(a / name).empty());
  }
}

TEST_CASE("seed flag overrides the config") {
  const auto cfg = write_file("seeded.ini", "[graph]\ntype = regular\nn = 20\nmu = 2\n" + kExpModel +
                                                "[sim]\nhorizon = 200\nseed = 1\n");
  const auto a = scratch() / "seed_a";
  const auto b = scratch() / "seed_b";
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --seed 2 --out " + a.string()).code == 0);
  REQUIRE(run_cli("simulate --config " + cfg.string() + " --seed 3 --out " + b.string()).code == 0);
  CHECK(read_file(a / "cycles_rep0.csv") != read_file(b / "cycles_rep0.csv"));
  const auto manifest = nlohmann::json::parse(read_file(a / "manifest.json"));
  CHECK(manifest.dump().find("\"master\"") != std::string::npos);
}

TEST_CASE("graph file flag replaces the graph section") {
  const auto edges = write_file("edges.txt", "n=3\n0 1\n1 2\n0 2\n");
  const auto cfg = write_file("solve.ini", kExpModel + "[solve]\nmethod = fixed_point\n");
  const auto r = run_cli("solve --config " + cfg.string() + " --graph-file " + edges.string() + " --out " +
                         (scratch() / "gf").string());
  CHECK(r.code == 0);
  const auto report = nlohmann::json::parse(read_file(scratch() / "gf" / "solve.json"));
  const double q = report["q"].get<double>();
  CHECK(q > 1.0 / 3.0);
  CHECK(q < 1.0);
}
