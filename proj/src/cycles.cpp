#include "adsm/cycles.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "adsm/error.hpp"

namespace adsm {

std::string NodeTrace::label() const {
  return source.empty() ? std::to_string(node) : fmt::format("{}:{}", source, node);
}

void write_cycles_csv(const CyclesTrace& trace, std::ostream& out) {
  out << kCyclesCsvHeader << '\n';
  for (const auto& node : trace.nodes)
    for (std::size_t j = 0; j < node.cycles.size(); ++j)
      fmt::print(out, "{},{},{:.17g},{:.17g}\n", node.node, j + 1, node.cycles[j].secure, node.cycles[j].compromised);
}

void write_cycles_csv(const CyclesTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot open {} for writing", path.string()));
  write_cycles_csv(trace, out);
  if (!out) throw DataError(fmt::format("write to {} failed", path.string()));
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

CyclesTrace read_cycles_csv(std::istream& in, std::string_view source_name, std::string_view node_prefix) {
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw DataError(fmt::format("{}:{}: {}", source_name, line_no, what));
  };

  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t != kCyclesCsvHeader) fail(fmt::format("expected header '{}', found '{}'", kCyclesCsvHeader, t));
    have_header = true;
  }
  if (!have_header) fail(fmt::format("empty file; expected header '{}'", kCyclesCsvHeader));

  std::map<graph::NodeId, NodeTrace> nodes;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto fields = split(t);
    if (fields.size() != 4)
      fail(fmt::format("expected 4 columns ({}), found {}", kCyclesCsvHeader, fields.size()));
    graph::NodeId node = 0;
    std::size_t index = 0;
    double s = 0.0, c = 0.0;
    if (!parse_number(fields[0], node)) fail(fmt::format("bad node_id '{}'", fields[0]));
    if (!parse_number(fields[1], index)) fail(fmt::format("bad cycle_index '{}'", fields[1]));
    if (!parse_number(fields[2], s) || !std::isfinite(s) || !(s > 0.0))
      fail(fmt::format("secure_duration '{}' must be a positive finite number", fields[2]));
    if (!parse_number(fields[3], c) || !std::isfinite(c) || !(c > 0.0))
      fail(fmt::format("compromised_duration '{}' must be a positive finite number", fields[3]));
    auto& trace = nodes[node];
    trace.node = node;
    trace.source = std::string(node_prefix);
    if (index != trace.cycles.size() + 1)
      fail(fmt::format("node {}: cycle_index {} out of sequence (expected {})", node, index, trace.cycles.size() + 1));
    trace.cycles.push_back(Cycle{s, c});
  }

  CyclesTrace out;
  for (auto& [id, trace] : nodes) out.nodes.push_back(std::move(trace));
  return out;
}

CyclesTrace read_cycles_csv(const std::filesystem::path& path, std::string_view node_prefix) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open cycles file {}", path.string()));
  return read_cycles_csv(in, path.string(), node_prefix);
}

}  // namespace adsm
