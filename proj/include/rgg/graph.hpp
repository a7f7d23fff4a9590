// Random geometric graphs, vertex connectivity, and exact critical radii
// for minimum degree and k-connectivity.

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "rgg/spatial_index.hpp"

namespace rgg {

/// Undirected simple graph with sorted adjacency lists.
class Graph {
 public:
  explicit Graph(std::size_t vertices = 0, double radius = 0.0);

  /// Builds from an edge list; duplicates are merged, self-loops rejected.
  static Graph from_edges(std::size_t vertices, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                          double radius = 0.0);

  std::size_t vertex_count() const { return adj_.size(); }
  std::size_t edge_count() const;
  double radius() const { return radius_; }
  const std::vector<std::uint32_t>& neighbors(std::size_t v) const { return adj_.at(v); }
  bool has_edge(std::size_t u, std::size_t v) const;
  /// Edges as (u, v) with u < v, lexicographically sorted.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

 private:
  friend Graph build_rgg(const CellGrid& grid, double r);
  std::vector<std::vector<std::uint32_t>> adj_;
  double radius_ = 0.0;
};

/// Edge {i, j} iff distance <= r.
Graph build_rgg(const PointSample& sample, double r);
Graph build_rgg(const CellGrid& grid, double r);

/// Smallest vertex degree. Throws on an empty graph.
std::size_t min_degree(const Graph& g);

bool is_connected(const Graph& g);

/// True iff vertex connectivity >= k, with kappa(K_m) = m - 1.
bool is_k_connected(const Graph& g, int k);

/// Vertex connectivity (kappa(K_m) = m - 1, disconnected graphs 0).
int vertex_connectivity(const Graph& g);

/// min(kappa(g), cap); the max-flow sweeps stop as soon as cap is decided.
int vertex_connectivity_capped(const Graph& g, int cap);

/// Cell edge used when the caller does not pick one: about 2(k+1) points
/// per occupied cell for a sample filling its bounding box.
double default_cell_size(const PointSample& sample, int k);

/// Least r with min_degree(build_rgg(sample, r)) >= k: the largest k-th
/// nearest neighbor distance. Requires k >= 1 and at least k + 1 points.
double critical_radius_min_degree(const PointSample& sample, int k,
                                  std::optional<double> cell_size = std::nullopt);

/// Least r with build_rgg(sample, r) k-connected. Requires k >= 1 and at
/// least k + 1 points.
double critical_radius_k_connectivity(const PointSample& sample, int k,
                                      std::optional<double> cell_size = std::nullopt);

/// Both critical radii for the level k + 1 (min degree >= k + 1 and
/// (k + 1)-connectivity).
struct CriticalRadii {
  double rho_delta = 0.0;
  double rho_kappa = 0.0;
  int k = 1;
  bool equal = false;
};

CriticalRadii critical_radii(const PointSample& sample, int k, std::optional<double> cell_size = std::nullopt);

}  // namespace rgg
