// Convex regions in R^3, uniform sampling, and ball-intersection volumes.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rgg {

/// Raised when an argument lies outside the mathematical domain of an
/// operation (negative radius, point outside the region, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct Box3 {
  Point3 lo;
  Point3 hi;
};

/// Closed halfspace {p : normal . p <= offset} with a unit normal.
struct Halfspace {
  Point3 normal;
  double offset = 0.0;
};

enum class RegionKind { kBall, kBox, kEllipsoid, kPolytope };

/// Raw shape parameters before volume normalization.
///
/// Conventions: a ball and an ellipsoid are centered at the origin; a box
/// spans [0, lx] x [0, ly] x [0, lz]; a polytope is the intersection of its
/// halfspaces (normals need not be unit length on input).
struct RegionSpec {
  RegionKind kind = RegionKind::kBox;
  std::array<double, 3> dims{1.0, 1.0, 1.0};  // radius in dims[0] for a ball
  std::vector<Halfspace> halfspaces;

  static RegionSpec ball(double radius);
  static RegionSpec box(double lx, double ly, double lz);
  static RegionSpec cube(double side = 1.0) { return box(side, side, side); }
  static RegionSpec ellipsoid(double a, double b, double c);
  static RegionSpec polytope(std::vector<Halfspace> halfspaces);
};

/// A convex body scaled to unit volume, with cached volume, boundary area
/// and bounding box.
class ConvexRegion {
 public:
  RegionKind kind() const { return kind_; }
  /// Ball radius, box side lengths, or ellipsoid semi-axes.
  const std::array<double, 3>& dims() const { return dims_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }
  double volume() const { return volume_; }
  double surface_area() const { return surface_area_; }
  const Box3& bounding_box() const { return bbox_; }
  /// Radius of the largest ball contained in the region.
  double inradius() const { return inradius_; }

  bool contains(const Point3& p) const;
  /// Euclidean distance from an interior point to the boundary.
  double dist_to_boundary(const Point3& p) const;

  /// Human-readable token, e.g. "box:2,1,0.5".
  std::string describe() const;

 private:
  friend ConvexRegion normalize_unit_volume(const RegionSpec& spec);

  RegionKind kind_ = RegionKind::kBox;
  std::array<double, 3> dims_{1.0, 1.0, 1.0};
  std::vector<Halfspace> halfspaces_;
  double volume_ = 1.0;
  double surface_area_ = 6.0;
  double inradius_ = 0.5;
  Box3 bbox_{};
  std::string description_;
};

/// Scales a raw shape isotropically (about the origin) to unit volume.
/// Throws DomainError for degenerate, empty, or unbounded shapes.
ConvexRegion normalize_unit_volume(const RegionSpec& spec);

/// Parses `ball`, `cube`, `box:LX,LY,LZ`, `ellipsoid:A,B,C`, or
/// `polytope:<path>` (one `nx ny nz offset` halfspace per line).
RegionSpec parse_region_spec(std::string_view token);

/// Reads a halfspace file; blank lines and lines starting with '#' are skipped.
std::vector<Halfspace> read_halfspace_file(const std::string& path);

/// Cap on rejection attempts per sampled point.
inline constexpr std::uint64_t kMaxRejectionAttempts = 1'000'000;

/// Uniform double in [0, 1) built from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Draws one point uniformly from the region.
Point3 sample_uniform(const ConvexRegion& region, std::mt19937_64& rng);

/// pi/3 (r - t)^2 (2r + t): volume of the part of a radius-r ball at signed
/// distance >= t from its center along a fixed axis. Requires 0 <= t <= r.
double cap_volume_beyond(double r, double t);

/// Volume of a radius-r ball clipped by a plane at distance s from the center,
/// the center lying on the kept side.
double halfspace_clipped_ball_volume(double r, double s);

/// Volume of the half of B(x, r) facing y, minus B(y, r), for |xy| = d < r.
double lens_deficit(double d);

/// Exact volume of B(center, r) intersected with the axis-aligned box.
double ball_box_intersection_volume(const Point3& center, double r, const Box3& box);

/// Exact volume of the intersection of two balls with center distance d.
double ball_ball_intersection_volume(double r1, double r2, double d);

inline constexpr int kDefaultClipSamples = 32768;

/// |B(x, r) intersected with region| for x in the region.
///
/// Closed forms are used when the ball is interior, when exactly one
/// supporting plane cuts it, and for ball and box regions. Ellipsoids and
/// polytopes otherwise fall back to a fixed Halton point set of `samples`
/// points in the ball, so the result is reproducible.
double clipped_ball_volume(const ConvexRegion& region, const Point3& x, double r,
                           int samples = kDefaultClipSamples);

}  // namespace rgg
