#include "rgg/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace rgg {

namespace {

using Edge = std::pair<std::uint32_t, std::uint32_t>;

// Unit-capacity flow network with every vertex split into in/out halves.
// Vertex v: in = 2v, out = 2v + 1.
class SplitFlowNetwork {
 public:
  explicit SplitFlowNetwork(const Graph& g) : nodes_(2 * g.vertex_count()), head_(nodes_, -1) {
    for (std::size_t v = 0; v < g.vertex_count(); ++v) add_arc(2 * v, 2 * v + 1);
    for (std::size_t u = 0; u < g.vertex_count(); ++u) {
      for (std::uint32_t v : g.neighbors(u)) add_arc(2 * u + 1, 2 * static_cast<std::size_t>(v));
    }
    flow_.assign(to_.size(), 0);
  }

  // Internally vertex-disjoint s-t paths, counted up to `limit`.
  int local_connectivity(std::size_t s, std::size_t t, int limit) {
    std::fill(flow_.begin(), flow_.end(), 0);
    const std::size_t source = 2 * s + 1;
    const std::size_t sink = 2 * t;
    int paths = 0;
    std::vector<int> parent_arc(nodes_);
    while (paths < limit) {
      std::fill(parent_arc.begin(), parent_arc.end(), -1);
      std::deque<std::size_t> queue{source};
      parent_arc[source] = -2;
      while (!queue.empty() && parent_arc[sink] == -1) {
        const std::size_t x = queue.front();
        queue.pop_front();
        for (int a = head_[x]; a != -1; a = next_[static_cast<std::size_t>(a)]) {
          const auto ua = static_cast<std::size_t>(a);
          const std::size_t y = to_[ua];
          if (parent_arc[y] == -1 && cap_[ua] - flow_[ua] > 0) {
            parent_arc[y] = a;
            queue.push_back(y);
          }
        }
      }
      if (parent_arc[sink] == -1) break;
      for (std::size_t y = sink; y != source;) {
        const auto a = static_cast<std::size_t>(parent_arc[y]);
        flow_[a] += 1;
        flow_[a ^ 1] -= 1;
        y = to_[a ^ 1];
      }
      ++paths;
    }
    return paths;
  }

 private:
  void add_arc(std::size_t from, std::size_t to) {
    push(from, to, 1);
    push(to, from, 0);
  }
  void push(std::size_t from, std::size_t to, int cap) {
    to_.push_back(to);
    cap_.push_back(cap);
    next_.push_back(head_[from]);
    head_[from] = static_cast<int>(to_.size() - 1);
  }

  std::size_t nodes_;
  std::vector<int> head_;
  std::vector<std::size_t> to_;
  std::vector<int> cap_;
  std::vector<int> next_;
  std::vector<int> flow_;
};

bool is_complete(const Graph& g) {
  const std::size_t m = g.vertex_count();
  for (std::size_t v = 0; v < m; ++v) {
    if (g.neighbors(v).size() + 1 != m) return false;
  }
  return true;
}

// Connected with no articulation point (iterative Tarjan low-link).
bool is_biconnected(const Graph& g) {
  const std::size_t m = g.vertex_count();
  if (m < 3 || !is_connected(g)) return false;
  constexpr std::uint32_t kUnseen = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> disc(m, kUnseen);
  std::vector<std::uint32_t> low(m, 0);
  std::vector<std::uint32_t> parent(m, kUnseen);
  std::vector<std::size_t> cursor(m, 0);
  std::uint32_t time = 0;
  std::uint32_t root_children = 0;
  std::vector<std::uint32_t> stack{0};
  disc[0] = low[0] = time++;
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    const auto& nb = g.neighbors(v);
    if (cursor[v] < nb.size()) {
      const std::uint32_t w = nb[cursor[v]++];
      if (disc[w] == kUnseen) {
        parent[w] = v;
        disc[w] = low[w] = time++;
        if (v == 0) ++root_children;
        stack.push_back(w);
      } else if (w != parent[v]) {
        low[v] = std::min(low[v], disc[w]);
      }
    } else {
      stack.pop_back();
      const std::uint32_t p = parent[v];
      if (p != kUnseen) {
        low[p] = std::min(low[p], low[v]);
        if (p != 0 && low[v] >= disc[p]) return false;
      }
    }
  }
  return root_children < 2;
}

struct WeightedEdge {
  double d;
  std::uint32_t u;
  std::uint32_t v;
  bool operator<(const WeightedEdge& o) const {
    if (d != o.d) return d < o.d;
    if (u != o.u) return u < o.u;
    return v < o.v;
  }
};

// All pairs with distance <= r, sorted by (distance, u, v).
std::vector<WeightedEdge> pairs_within(const CellGrid& grid, double r) {
  std::vector<WeightedEdge> out;
  for (std::size_t i = 0; i < grid.point_count(); ++i) {
    for (std::uint32_t j : grid.neighbors_within(i, r)) {
      if (j > i) out.push_back({distance(grid.point(i), grid.point(j)), static_cast<std::uint32_t>(i), j});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Graph graph_from_prefix(std::size_t vertices, const std::vector<WeightedEdge>& sorted, std::size_t count) {
  std::vector<Edge> edges;
  edges.reserve(count);
  for (std::size_t e = 0; e < count; ++e) edges.emplace_back(sorted[e].u, sorted[e].v);
  return Graph::from_edges(vertices, edges, count ? sorted[count - 1].d : 0.0);
}

double max_pairwise_bound(const CellGrid& grid) {
  Point3 lo = grid.point(0);
  Point3 hi = lo;
  for (std::size_t i = 0; i < grid.point_count(); ++i) {
    const Point3& p = grid.point(i);
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  return distance(lo, hi);
}

void require_level(std::size_t count, int k) {
  if (k < 1) throw DomainError("critical radius requires k >= 1");
  if (count < static_cast<std::size_t>(k) + 1) {
    throw DomainError("critical radius requires at least k + 1 points");
  }
}

double min_degree_radius(const CellGrid& grid, int k) {
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.point_count(); ++i) {
    worst = std::max(worst, grid.kth_nn_distance(i, static_cast<std::size_t>(k)));
  }
  return worst;
}

double k_connectivity_radius(const CellGrid& grid, int k, double lower) {
  const std::size_t m = grid.point_count();
  // Adding edges never lowers connectivity, so search upward from the
  // min-degree radius over realized pairwise distances.
  double hi = lower;
  std::vector<WeightedEdge> pairs = pairs_within(grid, hi);
  if (is_k_connected(graph_from_prefix(m, pairs, pairs.size()), k)) return lower;
  // Slightly above the bounding-box diagonal, so the graph at `ceiling` is complete.
  const double ceiling = max_pairwise_bound(grid) * (1.0 + 1e-9) + 1e-300;
  while (true) {
    hi = hi > 0.0 ? std::min(2.0 * hi, ceiling) : ceiling;
    pairs = pairs_within(grid, hi);
    if (hi >= ceiling || is_k_connected(graph_from_prefix(m, pairs, pairs.size()), k)) break;
  }
  // Distinct candidate radii above the known-failing `lower`; the largest passes.
  std::vector<double> radii;
  for (const auto& e : pairs) {
    if (e.d > lower && (radii.empty() || radii.back() != e.d)) radii.push_back(e.d);
  }
  auto passes = [&](double r) {
    const auto count = static_cast<std::size_t>(
        std::upper_bound(pairs.begin(), pairs.end(), r,
                         [](double x, const WeightedEdge& e) { return x < e.d; }) -
        pairs.begin());
    return is_k_connected(graph_from_prefix(m, pairs, count), k);
  };
  std::size_t lo = 0;  // radii[0..lo) fail
  std::size_t hi_idx = radii.size() - 1;
  while (lo < hi_idx) {
    const std::size_t mid = lo + (hi_idx - lo) / 2;
    if (passes(radii[mid])) {
      hi_idx = mid;
    } else {
      lo = mid + 1;
    }
  }
  return radii[hi_idx];
}

CellGrid make_grid(const PointSample& sample, int k, std::optional<double> cell_size) {
  return CellGrid(sample.points, cell_size.value_or(default_cell_size(sample, k)));
}

}  // namespace

Graph::Graph(std::size_t vertices, double radius) : adj_(vertices), radius_(radius) {}

Graph Graph::from_edges(std::size_t vertices, const std::vector<Edge>& edges, double radius) {
  Graph g(vertices, radius);
  for (const auto& [u, v] : edges) {
    if (u >= vertices || v >= vertices) throw std::out_of_range("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
    g.adj_[u].push_back(v);
    g.adj_[v].push_back(u);
  }
  for (auto& nb : g.adj_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
  return g;
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (const auto& nb : adj_) total += nb.size();
  return total / 2;
}

bool Graph::has_edge(std::size_t u, std::size_t v) const {
  const auto& nb = adj_.at(u);
  return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(v));
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (std::size_t u = 0; u < adj_.size(); ++u) {
    for (std::uint32_t v : adj_[u]) {
      if (u < v) out.emplace_back(static_cast<std::uint32_t>(u), v);
    }
  }
  return out;
}

Graph build_rgg(const CellGrid& grid, double r) {
  if (!(r >= 0.0)) throw DomainError("build_rgg requires r >= 0");
  Graph g(grid.point_count(), r);
  for (std::size_t i = 0; i < grid.point_count(); ++i) g.adj_[i] = grid.neighbors_within(i, r);
  return g;
}

Graph build_rgg(const PointSample& sample, double r) {
  if (!(r >= 0.0)) throw DomainError("build_rgg requires r >= 0");
  if (sample.points.empty()) return Graph(0, r);
  const double cell = r > 0.0 ? r : default_cell_size(sample, 1);
  return build_rgg(CellGrid(sample.points, cell), r);
}

std::size_t min_degree(const Graph& g) {
  if (g.vertex_count() == 0) throw DomainError("min_degree of an empty graph");
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t v = 0; v < g.vertex_count(); ++v) best = std::min(best, g.neighbors(v).size());
  return best;
}

bool is_connected(const Graph& g) {
  const std::size_t m = g.vertex_count();
  if (m == 0) return false;
  std::vector<char> seen(m, 0);
  std::vector<std::uint32_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::uint32_t v = stack.back();
    stack.pop_back();
    for (std::uint32_t w : g.neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == m;
}

int vertex_connectivity_capped(const Graph& g, int cap) {
  const std::size_t m = g.vertex_count();
  if (m == 0) throw DomainError("vertex connectivity of an empty graph");
  if (cap <= 0 || m == 1) return 0;
  if (!is_connected(g)) return 0;
  if (is_complete(g)) return std::min(cap, static_cast<int>(m - 1));

  std::size_t v = 0;
  for (std::size_t u = 1; u < m; ++u) {
    if (g.neighbors(u).size() < g.neighbors(v).size()) v = u;
  }
  int best = std::min(cap, static_cast<int>(g.neighbors(v).size()));
  SplitFlowNetwork net(g);
  // A minimum cut either avoids v, separating it from some non-neighbor,
  // or contains v and separates two non-adjacent neighbors of v.
  for (std::size_t u = 0; u < m && best > 0; ++u) {
    if (u == v || g.has_edge(v, u)) continue;
    best = std::min(best, net.local_connectivity(v, u, best));
  }
  const auto& nb = g.neighbors(v);
  for (std::size_t a = 0; a < nb.size() && best > 0; ++a) {
    for (std::size_t b = a + 1; b < nb.size() && best > 0; ++b) {
      if (g.has_edge(nb[a], nb[b])) continue;
      best = std::min(best, net.local_connectivity(nb[a], nb[b], best));
    }
  }
  return best;
}

int vertex_connectivity(const Graph& g) {
  return vertex_connectivity_capped(g, static_cast<int>(std::max<std::size_t>(g.vertex_count(), 1)));
}

bool is_k_connected(const Graph& g, int k) {
  if (k <= 0) return true;
  const std::size_t m = g.vertex_count();
  if (m <= static_cast<std::size_t>(k)) return false;
  if (k == 1) return is_connected(g);
  if (min_degree(g) < static_cast<std::size_t>(k)) return false;
  if (k == 2) return is_biconnected(g);
  return vertex_connectivity_capped(g, k) >= k;
}

double default_cell_size(const PointSample& sample, int k) {
  if (sample.points.empty()) return 1.0;
  Point3 lo = sample.points.front();
  Point3 hi = lo;
  for (const auto& p : sample.points) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
  }
  const double vol = std::max(hi.x - lo.x, 1e-300) * std::max(hi.y - lo.y, 1e-300) * std::max(hi.z - lo.z, 1e-300);
  const double per_cell = 2.0 * (std::max(k, 1) + 1);
  const double cell = std::cbrt(vol * per_cell / static_cast<double>(sample.points.size()));
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  if (!(cell > 0.0) || !std::isfinite(cell)) return extent > 0.0 ? extent : 1.0;
  return std::max(cell, extent / 1024.0);
}

double critical_radius_min_degree(const PointSample& sample, int k, std::optional<double> cell_size) {
  require_level(sample.size(), k);
  return min_degree_radius(make_grid(sample, k, cell_size), k);
}

double critical_radius_k_connectivity(const PointSample& sample, int k, std::optional<double> cell_size) {
  require_level(sample.size(), k);
  const CellGrid grid = make_grid(sample, k, cell_size);
  return k_connectivity_radius(grid, k, min_degree_radius(grid, k));
}

CriticalRadii critical_radii(const PointSample& sample, int k, std::optional<double> cell_size) {
  const int level = k + 1;
  require_level(sample.size(), level);
  const CellGrid grid = make_grid(sample, level, cell_size);
  CriticalRadii out;
  out.k = k;
  out.rho_delta = min_degree_radius(grid, level);
  out.rho_kappa = k_connectivity_radius(grid, level, out.rho_delta);
  out.equal = out.rho_delta == out.rho_kappa;
  return out;
}

}  // namespace rgg
