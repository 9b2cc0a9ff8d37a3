#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "adsm/graph.hpp"

namespace adsm {

/// One alternating-renewal cycle: a secure period followed by a compromised one.
struct Cycle {
  double secure = 0.0;
  double compromised = 0.0;
  friend bool operator==(const Cycle&, const Cycle&) = default;
};

/// Completed cycles of one observed node, in time order. `source` tells nodes
/// apart when traces from several files are pooled.
struct NodeTrace {
  graph::NodeId node = 0;
  std::string source;
  std::vector<Cycle> cycles;

  std::string label() const;
};

struct CyclesTrace {
  std::vector<NodeTrace> nodes;
};

inline constexpr std::string_view kCyclesCsvHeader = "node_id,cycle_index,secure_duration,compromised_duration";

/// Writes the trace CSV; cycle_index starts at 1 and durations carry 17
/// significant digits.
void write_cycles_csv(const CyclesTrace& trace, std::ostream& out);
void write_cycles_csv(const CyclesTrace& trace, const std::filesystem::path& path);

/// Parses a trace CSV. Rows of different nodes may interleave, but each node's
/// cycle indices must run 1, 2, ... in order. Malformed input raises DataError
/// naming the line.
CyclesTrace read_cycles_csv(std::istream& in, std::string_view source_name, std::string_view node_prefix = {});
CyclesTrace read_cycles_csv(const std::filesystem::path& path, std::string_view node_prefix = {});

}  // namespace adsm
