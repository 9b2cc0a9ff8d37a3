#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace adsm::graph {

using NodeId = std::uint32_t;

/// Simple undirected graph on nodes 0..n-1. Immutable once built; adjacency
/// lists are sorted, symmetric, and free of self-loops and duplicates.
class Graph {
 public:
  /// Builds from an undirected edge list. Rejects self-loops, duplicate edges
  /// and out-of-range endpoints.
  static Graph from_edges(std::size_t n, std::span<const std::pair<NodeId, NodeId>> edges);

  std::size_t size() const noexcept { return adjacency_.size(); }
  std::size_t degree(NodeId v) const { return adjacency_.at(v).size(); }
  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.at(v); }
  std::size_t edge_count() const noexcept { return edge_count_; }

  /// Edges with u < v, ordered lexicographically.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  explicit Graph(std::vector<std::vector<NodeId>> adjacency, std::size_t edge_count)
      : adjacency_(std::move(adjacency)), edge_count_(edge_count) {}

  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Circulant mu-regular graph: node i is linked to the mu/2 nearest ring
/// neighbors on each side. The seed is accepted for interface uniformity.
Graph make_regular(std::size_t n, std::size_t mu, std::uint64_t seed);

/// Random mu-regular graph by sequential stub pairing that only accepts
/// pairs keeping the graph simple, restarting when it gets stuck. n*mu must be even.
Graph make_random_regular(std::size_t n, std::size_t mu, std::uint64_t seed);

struct ErdosRenyi {
  double p = 0.0;
};

/// Configuration model with degrees drawn from P(k) proportional to k^-tau,
/// k >= min_degree, capped at max_degree (0 means n-1). Self-loops and
/// parallel edges are dropped after stub matching.
struct PowerLaw {
  double tau = 2.5;
  std::size_t min_degree = 1;
  std::size_t max_degree = 0;
};

using RandomGraphParams = std::variant<ErdosRenyi, PowerLaw>;

Graph make_random(const RandomGraphParams& params, std::size_t n, std::uint64_t seed);

struct DegreeStats {
  double mu = 0.0;
  std::vector<std::size_t> degrees;
};

DegreeStats degree_stats(const Graph& g);

/// Edge-list text format: header line `n=<count>` followed by one `u v` pair
/// per line. Blank lines and lines starting with '#' are ignored.
Graph read_edge_list(const std::filesystem::path& path);
void write_edge_list(const Graph& g, const std::filesystem::path& path);

}  // namespace adsm::graph
