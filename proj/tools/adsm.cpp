#include <chrono>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "adsm/commands.hpp"
#include "adsm/error.hpp"

namespace {

using namespace adsm;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_parameter:
    case ErrorKind::unsupported:
      return 2;
    case ErrorKind::data:
    case ErrorKind::insufficient_data:
      return 3;
    case ErrorKind::numeric:
      return 4;
    case ErrorKind::procedure_abort:
      return 5;
  }
  return 1;
}

struct Flags {
  std::string config;
  std::string graph_file;
  std::string out = "adsm-out";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::vector<std::string> traces;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "scenario config (INI or JSON)");
  cmd->add_option("--graph-file", f.graph_file, "edge list overriding the [graph] section");
  cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--seed", f.seed, "master seed overriding [sim] seed");
  cmd->add_option("--jobs", f.jobs, "replications run in parallel")->check(CLI::PositiveNumber);
}

cli::Overrides overrides_of(const CLI::App* cmd, const Flags& f) {
  cli::Overrides o;
  if (!f.config.empty()) o.config = f.config;
  if (!f.graph_file.empty()) o.graph_file = f.graph_file;
  if (cmd->count("--seed")) o.seed = f.seed;
  if (cmd->count("--jobs")) o.jobs = f.jobs;
  return o;
}

void finish(const std::string& name, const config::Config& cfg, std::vector<std::filesystem::path> artifacts,
            const std::filesystem::path& out, std::chrono::steady_clock::time_point start,
            std::vector<std::pair<std::string, std::uint64_t>> seeds) {
  cli::RunManifest m;
  m.subcommand = name;
  m.config = cfg.raw;
  m.artifacts = std::move(artifacts);
  m.seeds = std::move(seeds);
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  cli::write_manifest(std::move(m), out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attack-defense security model: analytic solutions, bounds, simulation and renewal estimation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cli::kToolVersion);

  Flags f;
  auto* solve = app.add_subcommand("solve", "compute q from the analytic model");
  auto* bounds = app.add_subcommand("bounds", "lower and upper bounds on q");
  auto* simulate = app.add_subcommand("simulate", "event-driven simulation of the process");
  auto* estimate = app.add_subcommand("estimate", "estimate q from observed cycle traces");
  auto* validate = app.add_subcommand("validate", "cross-check analytics, bounds, simulation and estimator");
  for (auto* cmd : {solve, bounds, simulate, estimate, validate}) add_common(cmd, f);
  estimate->add_option("traces", f.traces, "cycle trace CSV files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto start = std::chrono::steady_clock::now();
  const std::filesystem::path out = f.out;
  try {
    const auto* cmd = app.get_subcommands().front();
    const auto cfg = cli::resolve_config(overrides_of(cmd, f));
    const std::string name = cmd->get_name();

    if (name == "solve") {
      const auto report = cli::cmd_solve(cfg);
      const auto path = out / "solve.json";
      cli::write_json(cli::envelope("solve", cfg, cli::to_json(report)), path);
      fmt::print("method {}: q = {:.17g}", report.method, report.q);
      if (report.m) fmt::print(", m = {:.17g}", *report.m);
      if (report.bounds) fmt::print(" ({} bounds [{:.17g}, {:.17g}])", report.bounds_tag, report.bounds->first,
                                    report.bounds->second);
      fmt::print("\n");
      finish(name, cfg, {path}, out, start, {});
    } else if (name == "bounds") {
      const auto report = cli::cmd_bounds(cfg);
      const auto path = out / "bounds.json";
      cli::write_json(cli::envelope("bounds", cfg, cli::to_json(report)), path);
      fmt::print("{}: [{:.17g}, {:.17g}]\n", report.theorem, report.lower, report.upper);
      for (const auto& note : report.notes) fmt::print("note: {}\n", note);
      finish(name, cfg, {path}, out, start, {});
    } else if (name == "simulate") {
      auto result = cli::cmd_simulate(cfg, out);
      const auto& r = result.result;
      fmt::print("q = {:.17g} +/- {:.17g} (standard error, {}, {} replication(s), burn-in {:.17g})\n", r.q,
                 r.standard_error, r.error_method, r.replications.size(), r.burn_in);
      for (const auto& w : r.warnings) fmt::print(stderr, "warning: {}\n", w);
      std::vector<std::pair<std::string, std::uint64_t>> seeds{{"master", r.master_seed}};
      for (std::size_t i = 0; i < r.replications.size(); ++i)
        seeds.emplace_back(fmt::format("replication_{}", i), r.replications[i].seed);
      finish(name, cfg, std::move(result.artifacts), out, start, std::move(seeds));
    } else if (name == "estimate") {
      std::vector<std::filesystem::path> files(f.traces.begin(), f.traces.end());
      const auto path = out / "estimate.json";
      try {
        const auto est = cli::cmd_estimate(cfg, files);
        cli::write_json(cli::envelope("estimate", cfg, cli::to_json(est)), path);
        fmt::print("q_bar = {:.17g} over {} of {} node(s)\n", est.q_bar, est.survivors, est.nodes.size());
        for (const auto& line : est.abort_log) fmt::print("abort: {}\n", line);
      } catch (const ProcedureAbort& e) {
        cli::Json body{{"status", "aborted"}, {"message", e.what()}, {"abort_log", e.reasons()}};
        cli::write_json(cli::envelope("estimate", cfg, body), path);
        finish(name, cfg, {path}, out, start, {});
        throw;
      }
      finish(name, cfg, {path}, out, start, {});
    } else {
      const auto report = cli::cmd_validate(cfg);
      const auto path = out / "validate.json";
      cli::write_json(cli::envelope("validate", cfg, cli::to_json(report)), path);
      for (const auto& c : report.checks)
        fmt::print("{} {}: measured {:.6g} (tolerance {:.3g}) {}\n", c.passed ? "PASS" : "FAIL", c.name, c.measured,
                   c.tolerance, c.detail);
      finish(name, cfg, {path}, out, start, {{"master", cfg.sim.seed}});
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    if (const auto* abort = dynamic_cast<const ProcedureAbort*>(&e))
      for (const auto& r : abort->reasons()) fmt::print(stderr, "  {}\n", r);
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 0;
}
