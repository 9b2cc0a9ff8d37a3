#include "adsm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "adsm/error.hpp"
#include "adsm/rng.hpp"

namespace adsm::graph {

Graph Graph::from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges) {
  if (n == 0) throw InvalidParameter("graph must have at least one node");
  std::vector<std::vector<NodeId>> adjacency(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n)
      throw InvalidParameter(fmt::format("edge ({}, {}) out of range for n={}", u, v, n));
    if (u == v) throw InvalidParameter(fmt::format("self-loop at node {}", u));
    adjacency[u].push_back(v);
    adjacency[v].push_back(u);
  }
  for (NodeId v = 0; v < n; ++v) {
    auto& list = adjacency[v];
    std::sort(list.begin(), list.end());
    if (std::adjacent_find(list.begin(), list.end()) != list.end())
      throw InvalidParameter(fmt::format("duplicate edge at node {}", v));
  }
  return Graph(std::move(adjacency), edges.size());
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < adjacency_.size(); ++u)
    for (NodeId v : adjacency_[u])
      if (u < v) out.emplace_back(u, v);
  return out;
}

Graph make_regular(std::size_t n, std::size_t mu, std::uint64_t /*seed*/) {
  if (n == 0) throw InvalidParameter("make_regular: n must be positive");
  if (mu % 2 != 0) throw InvalidParameter(fmt::format("make_regular: mu={} must be even", mu));
  if (mu >= n) throw InvalidParameter(fmt::format("make_regular: mu={} must be < n={}", mu, n));
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(n * mu / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t d = 1; d <= mu / 2; ++d)
      edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>((i + d) % n));
  return Graph::from_edges(n, edges);
}

Graph make_random_regular(std::size_t n, std::size_t mu, std::uint64_t seed) {
  if (n == 0) throw InvalidParameter("make_random_regular: n must be positive");
  if (mu >= n) throw InvalidParameter(fmt::format("make_random_regular: mu={} must be < n={}", mu, n));
  if ((n * mu) % 2 != 0) throw InvalidParameter(fmt::format("make_random_regular: n*mu={} must be even", n * mu));
  Rng rng(derive_seed(seed, {stream_tag::graph}));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<NodeId> stubs;
    stubs.reserve(n * mu);
    for (std::size_t v = 0; v < n; ++v) stubs.insert(stubs.end(), mu, static_cast<NodeId>(v));
    std::vector<std::vector<NodeId>> adj(n);
    std::vector<std::pair<NodeId, NodeId>> edges;
    auto suitable = [&](std::size_t i, std::size_t j) {
      const NodeId a = stubs[i], b = stubs[j];
      return i != j && a != b && std::find(adj[a].begin(), adj[a].end(), b) == adj[a].end();
    };
    bool stuck = false;
    while (!stubs.empty()) {
      std::size_t i = 0, j = 0;
      bool found = false;
      for (int t = 0; t < 64 && !found; ++t) {
        i = uniform_index(rng, stubs.size());
        j = uniform_index(rng, stubs.size());
        found = suitable(i, j);
      }
      for (std::size_t a = 0; a < stubs.size() && !found; ++a)
        for (std::size_t b = a + 1; b < stubs.size() && !found; ++b)
          if (suitable(a, b)) {
            i = a;
            j = b;
            found = true;
          }
      if (!found) {
        stuck = true;
        break;
      }
      const NodeId a = stubs[i], b = stubs[j];
      adj[a].push_back(b);
      adj[b].push_back(a);
      edges.emplace_back(a, b);
      if (i < j) std::swap(i, j);
      stubs[i] = stubs.back();
      stubs.pop_back();
      stubs[j] = stubs.back();
      stubs.pop_back();
    }
    if (!stuck) return Graph::from_edges(n, edges);
  }
  throw NumericError(fmt::format("make_random_regular: no simple pairing found for n={}, mu={}", n, mu), 0.0);
}

namespace {

Graph make_erdos_renyi(double p, std::size_t n, Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidParameter(fmt::format("erdos_renyi: p={} outside [0,1]", p));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (uniform01(rng) < p) edges.emplace_back(u, v);
  return Graph::from_edges(n, edges);
}

Graph make_power_law(const PowerLaw& params, std::size_t n, Rng& rng) {
  if (!(params.tau > 2.0))
    throw InvalidParameter(fmt::format("power_law: tau={} must exceed 2", params.tau));
  if (params.min_degree < 1) throw InvalidParameter("power_law: min_degree must be >= 1");
  const std::size_t cap = params.max_degree == 0 ? n - 1 : std::min(params.max_degree, n - 1);
  if (params.min_degree > cap)
    throw InvalidParameter(fmt::format("power_law: min_degree={} exceeds cap {}", params.min_degree, cap));

  // Continuous Pareto draw floored to an integer degree.
  std::vector<std::size_t> degree(n);
  std::size_t total = 0;
  const double inv = 1.0 / (params.tau - 1.0);
  for (auto& d : degree) {
    const double k = std::floor(static_cast<double>(params.min_degree) * std::pow(uniform01(rng), -inv));
    d = k >= static_cast<double>(cap) ? cap : static_cast<std::size_t>(k);
    total += d;
  }
  if (total % 2 != 0) {
    auto& last = degree.back();
    if (last < cap) ++last; else --last;
  }

  std::vector<NodeId> stubs;
  for (NodeId v = 0; v < n; ++v) stubs.insert(stubs.end(), degree[v], v);
  for (std::size_t i = stubs.size(); i > 1; --i) std::swap(stubs[i - 1], stubs[uniform_index(rng, i)]);

  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
    auto [u, v] = std::minmax(stubs[i], stubs[i + 1]);
    if (u != v) edges.emplace_back(u, v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Graph::from_edges(n, edges);
}

}  // namespace

Graph make_random(const RandomGraphParams& params, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw InvalidParameter("make_random: n must be positive");
  Rng rng(derive_seed(seed, {stream_tag::graph}));
  if (const auto* er = std::get_if<ErdosRenyi>(&params)) return make_erdos_renyi(er->p, n, rng);
  return make_power_law(std::get<PowerLaw>(params), n, rng);
}

DegreeStats degree_stats(const Graph& g) {
  DegreeStats stats;
  stats.degrees.reserve(g.size());
  std::size_t sum = 0;
  for (NodeId v = 0; v < g.size(); ++v) {
    stats.degrees.push_back(g.degree(v));
    sum += g.degree(v);
  }
  stats.mu = static_cast<double>(sum) / static_cast<double>(g.size());
  return stats;
}

Graph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open graph file '{}'", path.string()));
  std::string line;
  std::size_t line_no = 0;
  std::size_t n = 0;
  bool have_header = false;
  std::vector<std::pair<NodeId, NodeId>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      if (line.rfind("n=", 0) != 0)
        throw DataError(fmt::format("{}:{}: expected header 'n=<count>'", path.string(), line_no));
      try {
        n = std::stoul(line.substr(2));
      } catch (const std::exception&) {
        throw DataError(fmt::format("{}:{}: bad node count", path.string(), line_no));
      }
      have_header = true;
      continue;
    }
    std::istringstream row(line);
    long long u = -1, v = -1;
    std::string rest;
    if (!(row >> u >> v) || (row >> rest) || u < 0 || v < 0)
      throw DataError(fmt::format("{}:{}: expected 'u v'", path.string(), line_no));
    edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  if (!have_header) throw DataError(fmt::format("{}: missing 'n=<count>' header", path.string()));
  try {
    return Graph::from_edges(n, edges);
  } catch (const InvalidParameter& e) {
    throw DataError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_edge_list(const Graph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write graph file '{}'", path.string()));
  out << "n=" << g.size() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

}  // namespace adsm::graph
