// Uniform cell grid over a point sample: exact k-th nearest neighbor
// distances and fixed-radius neighbor queries.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rgg/geometry.hpp"

namespace rgg {

enum class ProcessKind { kBinomial, kPoisson };

/// A realized point process together with how it was generated.
struct PointSample {
  std::vector<Point3> points;
  std::optional<ConvexRegion> region;
  ProcessKind process = ProcessKind::kBinomial;
  std::uint64_t seed = 0;
  std::uint64_t n_param = 0;

  std::size_t size() const { return points.size(); }
};

/// Wraps bare points (no region, binomial with n = point count).
PointSample make_sample(std::vector<Point3> points);

class CellGrid {
 public:
  /// Buckets the points into cubic cells of edge `cell_size` over their
  /// bounding box. At most 1024 cells per axis and max(4096, 8 * count)
  /// cells in total; a finer request is coarsened.
  CellGrid(std::span<const Point3> points, double cell_size);

  std::size_t point_count() const { return points_.size(); }
  double cell_size() const { return cell_; }
  std::size_t occupied_cells() const;
  /// Sizes of all buckets, occupied or not.
  std::vector<std::size_t> bucket_sizes() const;
  /// Cell index holding point i.
  std::size_t cell_of(std::size_t i) const;
  std::span<const std::uint32_t> bucket(std::size_t cell) const;

  /// Distance from point i to its k-th nearest other point (1 <= k < count).
  /// Ties are ordered by point index.
  double kth_nn_distance(std::size_t i, std::size_t k) const;

  /// Distances to the k nearest other points, ascending.
  std::vector<double> knn_distances(std::size_t i, std::size_t k) const;

  /// All j != i with distance(i, j) <= r, sorted by index.
  std::vector<std::uint32_t> neighbors_within(std::size_t i, double r) const;

  const Point3& point(std::size_t i) const { return points_[i]; }

 private:
  std::array<std::int64_t, 3> coords_of(const Point3& p) const;
  std::size_t flat(std::int64_t cx, std::int64_t cy, std::int64_t cz) const;

  std::vector<Point3> points_;
  Point3 origin_;
  double cell_ = 1.0;
  std::array<std::int64_t, 3> dims_{1, 1, 1};
  std::vector<std::uint32_t> cell_start_;  // CSR offsets, size cells + 1
  std::vector<std::uint32_t> members_;
  std::vector<std::uint32_t> point_cell_;
};

/// Grid over a sample with the given cell edge.
CellGrid build_grid(const PointSample& sample, double cell_size);

}  // namespace rgg
