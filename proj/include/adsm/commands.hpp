#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adsm/analytic.hpp"
#include "adsm/bounds.hpp"
#include "adsm/config.hpp"
#include "adsm/renewal.hpp"
#include "adsm/sim.hpp"

namespace adsm::cli {

inline constexpr const char* kSchemaId = "adsm.report/1";
inline constexpr const char* kToolVersion = "1.0.0";

using Json = nlohmann::ordered_json;

/// Command-line flags folded into the raw config before it is interpreted.
struct Overrides {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> graph_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
};

/// Loads the config file (or an empty one) and applies the overrides.
config::Config resolve_config(const Overrides& overrides);

analytic::QReport cmd_solve(const config::Config& cfg);
bounds::BoundsReport cmd_bounds(const config::Config& cfg);

struct SimulateOutput {
  sim::SimResult result;
  std::vector<std::filesystem::path> artifacts;
};

/// Runs the scenario and writes cycles_rep<r>.csv, snapshots_rep<r>.csv and
/// simulate.json into out_dir.
SimulateOutput cmd_simulate(const config::Config& cfg, const std::filesystem::path& out_dir);

/// Reads the trace files (config files first, then `files`). Node labels get
/// an "f<i>" prefix when several files are pooled.
renewal::RenewalEstimate cmd_estimate(const config::Config& cfg, const std::vector<std::filesystem::path>& files);

struct Check {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Check> checks;
  bool all_passed() const;
};

ValidationReport cmd_validate(const config::Config& cfg);

Json to_json(const analytic::QReport& r);
Json to_json(const bounds::BoundsReport& r);
Json to_json(const sim::SimResult& r);
Json to_json(const renewal::RenewalEstimate& r);
Json to_json(const ValidationReport& r);

/// Adds the schema id and report kind ahead of the body.
Json envelope(const std::string& kind, const config::Config& cfg, Json body);

void write_json(const Json& doc, const std::filesystem::path& path);

struct RunManifest {
  std::string subcommand;
  config::RawConfig config;
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<std::filesystem::path> artifacts;
  double wall_seconds = 0.0;
};

Json to_json(const RunManifest& m);

/// Writes manifest.json and config.ini (the resolved config) into out_dir;
/// both are appended to the artifact list.
std::filesystem::path write_manifest(RunManifest manifest, const std::filesystem::path& out_dir);

}  // namespace adsm::cli
