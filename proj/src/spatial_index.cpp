#include "rgg/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>

namespace rgg {

namespace {

constexpr std::int64_t kMaxCellsPerAxis = 1024;

}  // namespace

PointSample make_sample(std::vector<Point3> points) {
  PointSample s;
  s.n_param = points.size();
  s.points = std::move(points);
  return s;
}

CellGrid::CellGrid(std::span<const Point3> points, double cell_size)
    : points_(points.begin(), points.end()) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw DomainError("cell size must be positive and finite");
  }
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("too many points for a CellGrid");
  }
  Point3 lo{0, 0, 0};
  Point3 hi{0, 0, 0};
  if (!points_.empty()) {
    lo = hi = points_.front();
    for (const auto& p : points_) {
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
  }
  origin_ = lo;
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  cell_ = std::max(cell_size, extent / static_cast<double>(kMaxCellsPerAxis - 1));
  const double spans[3] = {hi.x - lo.x, hi.y - lo.y, hi.z - lo.z};
  // Bound memory by the point count as well: coarsen until the grid fits.
  const std::int64_t budget = std::max<std::int64_t>(4096, 8 * static_cast<std::int64_t>(points_.size()));
  for (;;) {
    for (int a = 0; a < 3; ++a) {
      dims_[static_cast<std::size_t>(a)] =
          std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(spans[a] / cell_)) + 1, 1,
                                   kMaxCellsPerAxis);
    }
    if (dims_[0] * dims_[1] * dims_[2] <= budget) break;
    cell_ *= 1.25;
  }

  const std::size_t cells = static_cast<std::size_t>(dims_[0] * dims_[1] * dims_[2]);
  cell_start_.assign(cells + 1, 0);
  point_cell_.resize(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto c = coords_of(points_[i]);
    point_cell_[i] = static_cast<std::uint32_t>(flat(c[0], c[1], c[2]));
    ++cell_start_[point_cell_[i] + 1];
  }
  for (std::size_t c = 0; c < cells; ++c) cell_start_[c + 1] += cell_start_[c];
  members_.resize(points_.size());
  std::vector<std::uint32_t> fill(cell_start_.begin(), cell_start_.end() - 1);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    members_[fill[point_cell_[i]]++] = static_cast<std::uint32_t>(i);
  }
}

std::array<std::int64_t, 3> CellGrid::coords_of(const Point3& p) const {
  auto axis = [&](double v, double o, std::int64_t dim) {
    const auto c = static_cast<std::int64_t>(std::floor((v - o) / cell_));
    return std::clamp<std::int64_t>(c, 0, dim - 1);
  };
  return {axis(p.x, origin_.x, dims_[0]), axis(p.y, origin_.y, dims_[1]), axis(p.z, origin_.z, dims_[2])};
}

std::size_t CellGrid::flat(std::int64_t cx, std::int64_t cy, std::int64_t cz) const {
  return static_cast<std::size_t>((cz * dims_[1] + cy) * dims_[0] + cx);
}

std::size_t CellGrid::occupied_cells() const {
  std::size_t count = 0;
  for (std::size_t c = 0; c + 1 < cell_start_.size(); ++c) {
    if (cell_start_[c + 1] > cell_start_[c]) ++count;
  }
  return count;
}

std::vector<std::size_t> CellGrid::bucket_sizes() const {
  std::vector<std::size_t> sizes(cell_start_.size() - 1);
  for (std::size_t c = 0; c < sizes.size(); ++c) sizes[c] = cell_start_[c + 1] - cell_start_[c];
  return sizes;
}

std::size_t CellGrid::cell_of(std::size_t i) const { return point_cell_.at(i); }

std::span<const std::uint32_t> CellGrid::bucket(std::size_t cell) const {
  return {members_.data() + cell_start_.at(cell), members_.data() + cell_start_.at(cell + 1)};
}

std::vector<double> CellGrid::knn_distances(std::size_t i, std::size_t k) const {
  if (i >= points_.size()) throw std::out_of_range("point index out of range");
  if (k < 1 || k + 1 > points_.size()) {
    throw DomainError("k-th nearest neighbor requires 1 <= k <= count - 1");
  }
  const Point3& p = points_[i];
  const auto home = coords_of(p);
  // Max-heap of the best k (distance, index) pairs seen so far.
  std::priority_queue<std::pair<double, std::uint32_t>> best;
  const std::int64_t max_ring = std::max({dims_[0], dims_[1], dims_[2]});

  for (std::int64_t ring = 0; ring <= max_ring; ++ring) {
    for (std::int64_t dz = -ring; dz <= ring; ++dz) {
      const std::int64_t cz = home[2] + dz;
      if (cz < 0 || cz >= dims_[2]) continue;
      for (std::int64_t dy = -ring; dy <= ring; ++dy) {
        const std::int64_t cy = home[1] + dy;
        if (cy < 0 || cy >= dims_[1]) continue;
        const bool on_shell_yz = std::abs(dz) == ring || std::abs(dy) == ring;
        const std::int64_t step = on_shell_yz ? 1 : 2 * ring;
        for (std::int64_t dx = -ring; dx <= ring; dx += step) {
          const std::int64_t cx = home[0] + dx;
          if (cx >= 0 && cx < dims_[0]) {
            for (std::uint32_t j : bucket(flat(cx, cy, cz))) {
              if (j == i) continue;
              const std::pair<double, std::uint32_t> cand{distance(p, points_[j]), j};
              if (best.size() < k) {
                best.push(cand);
              } else if (cand < best.top()) {
                best.pop();
                best.push(cand);
              }
            }
          }
        }
      }
    }
    // Points outside the (2 ring + 1)^3 block are at least ring * cell away;
    // the slack absorbs rounding in the cell assignment.
    if (best.size() == k && best.top().first < (static_cast<double>(ring) - 1e-9) * cell_) break;
  }

  std::vector<double> out(best.size());
  for (std::size_t pos = best.size(); pos-- > 0;) {
    out[pos] = best.top().first;
    best.pop();
  }
  return out;
}

double CellGrid::kth_nn_distance(std::size_t i, std::size_t k) const { return knn_distances(i, k).back(); }

std::vector<std::uint32_t> CellGrid::neighbors_within(std::size_t i, double r) const {
  if (i >= points_.size()) throw std::out_of_range("point index out of range");
  if (!(r >= 0.0)) throw DomainError("neighbors_within requires r >= 0");
  std::vector<std::uint32_t> out;
  const Point3& p = points_[i];
  const auto home = coords_of(p);
  const double span = std::ceil(r / cell_);
  const std::int64_t reach =
      span >= static_cast<double>(kMaxCellsPerAxis) ? kMaxCellsPerAxis : static_cast<std::int64_t>(span);
  const std::int64_t z0 = std::max<std::int64_t>(0, home[2] - reach);
  const std::int64_t z1 = std::min<std::int64_t>(dims_[2] - 1, home[2] + reach);
  const std::int64_t y0 = std::max<std::int64_t>(0, home[1] - reach);
  const std::int64_t y1 = std::min<std::int64_t>(dims_[1] - 1, home[1] + reach);
  const std::int64_t x0 = std::max<std::int64_t>(0, home[0] - reach);
  const std::int64_t x1 = std::min<std::int64_t>(dims_[0] - 1, home[0] + reach);
  for (std::int64_t cz = z0; cz <= z1; ++cz) {
    for (std::int64_t cy = y0; cy <= y1; ++cy) {
      for (std::int64_t cx = x0; cx <= x1; ++cx) {
        for (std::uint32_t j : bucket(flat(cx, cy, cz))) {
          if (j != i && distance(p, points_[j]) <= r) out.push_back(j);
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

CellGrid build_grid(const PointSample& sample, double cell_size) { return CellGrid(sample.points, cell_size); }

}  // namespace rgg
