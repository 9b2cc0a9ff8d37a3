#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adsm/cycles.hpp"

namespace adsm::renewal {

enum class Independence { pass, fail, inconclusive };
enum class Tail { finite, heavy_tail, inconclusive };

std::string_view to_string(Independence v) noexcept;
std::string_view to_string(Tail v) noexcept;

/// Thresholds of the diagnostics. `force_pass` skips every test.
struct Options {
  double significance = 0.05;
  /// Divide the significance by the number of independence tests run across
  /// all nodes (familywise level).
  bool bonferroni = true;
  std::size_t min_independence_length = 10;
  std::size_t min_tail_length = 50;
  double tail_fraction = 0.10;
  double tail_cutoff = 2.5;
  std::size_t steady_window = 20;
  double steady_tol = 0.02;
  bool force_pass = false;
};

/// sum C / (sum S + sum C). Throws InsufficientData on an empty trace.
double estimate_node(std::span<const Cycle> cycles);

struct RankTest {
  Independence verdict = Independence::inconclusive;
  double statistic = 0.0;  // standardised score
  double p_value = 1.0;
};

/// Lag-1 rank autocorrelation of a sequence, normal approximation.
RankTest test_independence(std::span<const double> seq, double significance = 0.05,
                           std::size_t min_length = 10);

/// Spearman rank correlation between paired sequences.
RankTest test_pair_independence(std::span<const double> a, std::span<const double> b,
                                double significance = 0.05, std::size_t min_length = 10);

struct TailTest {
  Tail verdict = Tail::inconclusive;
  double index = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t order_statistics = 0;
};

/// Hill estimator over the top `fraction` of the sample.
TailTest test_finite_variance(std::span<const double> seq, std::size_t min_length = 50,
                              double fraction = 0.10, double cutoff = 2.5);

struct NodeDiagnostics {
  std::string label;
  std::size_t cycles = 0;
  double secure_total = 0.0;
  double compromised_total = 0.0;
  std::optional<double> q;
  std::string steadiness;  // "steady", "not_steady" or "inconclusive"
  double steady_time = 0.0;
  RankTest secure_independence;
  RankTest compromised_independence;
  RankTest pair_independence;
  TailTest secure_tail;
  TailTest compromised_tail;
  bool aborted = false;
  std::vector<std::string> reasons;
  std::vector<std::string> warnings;
};

struct RenewalEstimate {
  std::vector<NodeDiagnostics> nodes;
  double q_bar = 0.0;
  std::size_t survivors = 0;
  /// Naive normal interval over survivor estimates; absent with one survivor.
  std::optional<double> standard_error;
  std::vector<std::string> abort_log;
};

/// Runs the per-node diagnostics and aggregates surviving estimates. Throws
/// ProcedureAbort carrying the log when every node aborts.
RenewalEstimate estimate_procedure(const CyclesTrace& trace, const Options& options = {});

}  // namespace adsm::renewal
