#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adsm/cycles.hpp"
#include "adsm/dist.hpp"
#include "adsm/graph.hpp"

namespace adsm::sim {

struct BurnIn {
  enum class Kind { fraction, absolute, automatic };
  Kind kind = Kind::automatic;
  /// Fraction of the horizon, absolute time, or the floor fraction for automatic.
  double value = 0.2;

  static BurnIn fraction(double f) { return {Kind::fraction, f}; }
  static BurnIn absolute(double t) { return {Kind::absolute, t}; }
  static BurnIn automatic(double floor_fraction = 0.2) { return {Kind::automatic, floor_fraction}; }
};

struct ScenarioConfig {
  graph::Graph graph;
  dist::AttackDefenseModel model;
  double horizon = 1e4;
  BurnIn burn_in{};
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  double snapshot_interval = 10.0;
  double initial_compromised_fraction = 0.0;
  std::size_t jobs = 1;
  std::size_t batches = 10;
  std::size_t steady_window = 20;
  double steady_tol = 0.02;
  bool record_cycles = true;
  bool record_snapshots = false;
};

/// Throws InvalidParameter or Unsupported when the scenario cannot run.
void validate(const ScenarioConfig& config);

struct Steadiness {
  bool steady = false;
  std::size_t index = 0;
  double time = 0.0;
};

/// Earliest point after which every window-averaged value stays within tol
/// (relative) of the mean of the remaining series. Needs at least 2*window points.
Steadiness detect_steady(std::span<const std::pair<double, double>> series, std::size_t window, double tol);

struct ReplicationResult {
  std::uint64_t seed = 0;
  double burn_in = 0.0;
  double q = 0.0;
  std::vector<double> occupancy;
  std::vector<double> secure_time;
  std::vector<double> compromised_time;
  /// Per node, counts of compromised neighbors over snapshots taken after
  /// burn-in. The first only counts snapshots where the node itself is secure.
  std::vector<std::vector<std::uint64_t>> k_counts_secure;
  std::vector<std::vector<std::uint64_t>> k_counts_all;
  /// (t, compromised area up to t / (n t)) at every snapshot time from t = 0.
  std::vector<std::pair<double, double>> running_q;
  std::vector<double> batch_q;
  CyclesTrace cycles;
  std::vector<double> snapshot_times;
  std::vector<std::vector<std::uint8_t>> snapshot_states;
  std::uint64_t events = 0;
  bool degenerate = false;
};

struct SimResult {
  double q = 0.0;
  double standard_error = 0.0;
  /// "replications" or "batch_means" depending on how the error was formed.
  std::string error_method;
  std::vector<double> occupancy;
  double burn_in = 0.0;
  std::uint64_t master_seed = 0;
  Steadiness steady;
  std::vector<ReplicationResult> replications;
  std::vector<std::string> warnings;
};

/// Seed of replication r, independent of the replication count.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t r);

/// Burn-in time for the configuration; automatic mode runs a pilot replication.
double resolve_burn_in(const ScenarioConfig& config);

/// One replication with an already resolved burn-in.
ReplicationResult run_replication(const ScenarioConfig& config, std::size_t r, double burn_in);

SimResult run(const ScenarioConfig& config);

/// Completed cycles of one replication, trailing partial cycles dropped.
CyclesTrace export_cycles(const SimResult& result, std::size_t replication = 0);

/// Splits a node's timeline into completed cycles. The node is secure from
/// `start` and toggles state at each change time; cycles whose secure period
/// begins before `record_from` are skipped.
std::vector<Cycle> segment_cycles(std::span<const double> change_times, double start = 0.0,
                                  double record_from = 0.0);

/// Empirical pmf of K(v) for one node; secure-conditioned by default.
std::vector<double> k_pmf(const ReplicationResult& rep, graph::NodeId v, bool secure_only = true);

void write_snapshots_csv(const ReplicationResult& rep, std::ostream& out);
void write_snapshots_csv(const ReplicationResult& rep, const std::filesystem::path& path);

}  // namespace adsm::sim
