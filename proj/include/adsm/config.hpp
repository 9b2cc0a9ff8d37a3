#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adsm/dist.hpp"
#include "adsm/graph.hpp"
#include "adsm/renewal.hpp"
#include "adsm/sim.hpp"

namespace adsm::config {

/// section -> key -> raw value, as read from INI or JSON.
using RawConfig = std::map<std::string, std::map<std::string, std::string>>;

struct GraphSpec {
  /// regular (circulant), random_regular, erdos_renyi, power_law, file
  std::string type = "regular";
  std::size_t n = 0;
  std::size_t mu = 0;
  double p = 0.0;
  double tau = 2.5;
  std::size_t min_degree = 1;
  std::size_t max_degree = 0;
  std::filesystem::path file;
  std::optional<std::uint64_t> seed;
};

struct ModelSpec {
  std::string regime;
  std::map<std::string, double> params;
  std::vector<std::filesystem::path> attack_curves;
  std::filesystem::path defense_curve;
  std::filesystem::path x1_marginal;
  std::filesystem::path x2_marginal;
};

struct SimSpec {
  double horizon = 1e4;
  sim::BurnIn burn_in{};
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  double snapshot_interval = 10.0;
  double initial_compromised_fraction = 0.0;
  std::size_t jobs = 1;
  std::size_t batches = 10;
  std::size_t steady_window = 20;
  double steady_tol = 0.02;
  bool write_snapshots = true;
};

struct SolveSpec {
  /// theorem3_exact, fixed_point, normal_approx, poisson_approx, empirical_k
  std::string method = "fixed_point";
  std::optional<std::size_t> mu;
  /// K distribution for theorem3_exact: binomial, empirical or degenerate.
  std::string k_distribution;
  std::size_t k_trials = 0;
  double k_p = 0.0;
  std::size_t k = 0;
  std::vector<double> k_pmf;
  std::vector<std::size_t> k_observations;
  std::optional<std::size_t> deg;
  std::optional<double> k_mean;
  std::optional<double> k_variance;
};

struct BoundsSpec {
  /// auto picks exponential or lomax from the model; general uses quadrature.
  std::string theorem = "auto";
  /// regular or arbitrary
  std::string graph_class = "regular";
  std::optional<double> mu;
  std::optional<double> kbar;
};

struct EstimateSpec {
  renewal::Options options;
  std::vector<std::filesystem::path> files;
};

struct ValidateSpec {
  /// Test hook: "bound" shrinks the bound pair so the sandwich check must fail.
  std::string inject_fault;
  std::size_t sandwich_points = 200;
  std::size_t reduction_points = 100;
};

struct ReportSpec {
  bool write_cycles = true;
};

struct Config {
  RawConfig raw;
  std::filesystem::path base_dir;
  std::optional<GraphSpec> graph;
  std::optional<ModelSpec> model;
  SimSpec sim;
  SolveSpec solve;
  BoundsSpec bounds;
  EstimateSpec estimate;
  ValidateSpec validate;
  ReportSpec report;
};

/// Parses INI (`[section]` and `key = value` lines, `#` or `;` comments).
RawConfig parse_ini(std::istream& in, std::string_view name);
/// Parses a JSON object of objects; arrays become comma-separated values.
RawConfig parse_json(std::istream& in, std::string_view name);

/// Type-checks every known field and rejects unknown sections or keys with
/// a ConfigError naming the field.
Config interpret(RawConfig raw, std::filesystem::path base_dir);

/// Reads INI or JSON, chosen by a `.json` extension or a leading '{'.
Config load(const std::filesystem::path& path);
Config load_string(std::string_view text, std::filesystem::path base_dir = ".");

dist::AttackDefenseModel build_model(const Config& cfg);
graph::Graph build_graph(const Config& cfg);

/// Scenario for the simulator with the graph and model resolved.
sim::ScenarioConfig build_scenario(const Config& cfg);

/// FNV-1a 64 digest of the canonical raw config text, as 16 hex digits.
std::string digest(const RawConfig& raw);
/// Canonical `[section]\nkey = value` text of the raw config.
std::string canonical_text(const RawConfig& raw);

}  // namespace adsm::config
