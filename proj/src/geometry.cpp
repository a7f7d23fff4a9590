#include "rgg/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

namespace rgg {

namespace {

constexpr double kPi = std::numbers::pi;

double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Point3 cross(const Point3& a, const Point3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
Point3 sub(const Point3& a, const Point3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Point3 scaled(const Point3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
double norm(const Point3& a) { return std::sqrt(dot(a, a)); }

double ball_volume(double r) { return 4.0 * kPi * r * r * r / 3.0; }

void require_positive_finite(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

// ---------------------------------------------------------------------------
// Polytope bookkeeping: vertices by triple-plane intersection, facet polygons,
// and a pyramid decomposition from the vertex centroid.

struct PolytopeShape {
  std::vector<Point3> vertices;
  double volume = 0.0;
  double area = 0.0;
  Box3 bbox{};
};

bool solve3(const Point3& a, const Point3& b, const Point3& c, const Point3& rhs, Point3& out) {
  const Point3 bc = cross(b, c);
  const double det = dot(a, bc);
  if (std::abs(det) < 1e-12) return false;
  const Point3 ca = cross(c, a);
  const Point3 ab = cross(a, b);
  // Rows a, b, c; solution via the adjugate.
  out = scaled(Point3{rhs.x * bc.x + rhs.y * ca.x + rhs.z * ab.x,
                      rhs.x * bc.y + rhs.y * ca.y + rhs.z * ab.y,
                      rhs.x * bc.z + rhs.y * ca.z + rhs.z * ab.z},
               1.0 / det);
  return true;
}

double feasibility_tol(const std::vector<Halfspace>& hs) {
  double scale = 1.0;
  for (const auto& h : hs) scale = std::max(scale, std::abs(h.offset));
  return 1e-9 * scale;
}

PolytopeShape analyze_polytope(const std::vector<Halfspace>& hs) {
  PolytopeShape shape;
  const std::size_t m = hs.size();
  if (m < 4) throw DomainError("polytope needs at least 4 halfspaces to be bounded");
  const double tol = feasibility_tol(hs);

  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      for (std::size_t l = j + 1; l < m; ++l) {
        Point3 v;
        if (!solve3(hs[i].normal, hs[j].normal, hs[l].normal,
                    {hs[i].offset, hs[j].offset, hs[l].offset}, v)) {
          continue;
        }
        bool feasible = true;
        for (const auto& h : hs) {
          if (dot(h.normal, v) > h.offset + tol) {
            feasible = false;
            break;
          }
        }
        if (!feasible) continue;
        const bool dup = std::any_of(shape.vertices.begin(), shape.vertices.end(),
                                     [&](const Point3& w) { return norm(sub(v, w)) <= 10 * tol; });
        if (!dup) shape.vertices.push_back(v);
      }
    }
  }
  if (shape.vertices.size() < 4) {
    throw DomainError("polytope is empty, degenerate, or unbounded");
  }

  Point3 centroid;
  for (const auto& v : shape.vertices) centroid = {centroid.x + v.x, centroid.y + v.y, centroid.z + v.z};
  centroid = scaled(centroid, 1.0 / static_cast<double>(shape.vertices.size()));

  Point3 area_vector;
  for (const auto& h : hs) {
    std::vector<Point3> face;
    for (const auto& v : shape.vertices) {
      if (std::abs(dot(h.normal, v) - h.offset) <= 10 * tol) face.push_back(v);
    }
    if (face.size() < 3) continue;
    Point3 fc;
    for (const auto& v : face) fc = {fc.x + v.x, fc.y + v.y, fc.z + v.z};
    fc = scaled(fc, 1.0 / static_cast<double>(face.size()));
    // In-plane orthonormal basis (u, w).
    const Point3 seed = std::abs(h.normal.x) < 0.9 ? Point3{1, 0, 0} : Point3{0, 1, 0};
    Point3 u = cross(h.normal, seed);
    u = scaled(u, 1.0 / norm(u));
    const Point3 w = cross(h.normal, u);
    std::vector<std::pair<double, double>> uv;
    uv.reserve(face.size());
    for (const auto& v : face) uv.emplace_back(dot(sub(v, fc), u), dot(sub(v, fc), w));
    std::sort(uv.begin(), uv.end(), [](const auto& a, const auto& b) {
      return std::atan2(a.second, a.first) < std::atan2(b.second, b.first);
    });
    double twice = 0.0;
    for (std::size_t a = 0; a < uv.size(); ++a) {
      const auto& p = uv[a];
      const auto& q = uv[(a + 1) % uv.size()];
      twice += p.first * q.second - q.first * p.second;
    }
    const double face_area = 0.5 * std::abs(twice);
    shape.area += face_area;
    shape.volume += face_area * (h.offset - dot(h.normal, centroid)) / 3.0;
    area_vector = {area_vector.x + face_area * h.normal.x, area_vector.y + face_area * h.normal.y,
                   area_vector.z + face_area * h.normal.z};
  }
  // A closed surface has zero net area vector; an unbounded set does not.
  if (!(shape.volume > 0.0) || norm(area_vector) > 1e-7 * shape.area) {
    throw DomainError("polytope is empty, degenerate, or unbounded");
  }

  shape.bbox.lo = shape.bbox.hi = shape.vertices.front();
  for (const auto& v : shape.vertices) {
    shape.bbox.lo = {std::min(shape.bbox.lo.x, v.x), std::min(shape.bbox.lo.y, v.y),
                     std::min(shape.bbox.lo.z, v.z)};
    shape.bbox.hi = {std::max(shape.bbox.hi.x, v.x), std::max(shape.bbox.hi.y, v.y),
                     std::max(shape.bbox.hi.z, v.z)};
  }
  return shape;
}

// Chebyshev radius: max s such that n_i . x + s <= b_i for all i. The optimum
// of this 4-variable LP sits where four constraints are tight.
double polytope_inradius(const std::vector<Halfspace>& hs) {
  const std::size_t m = hs.size();
  const double tol = feasibility_tol(hs);
  double best = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      for (std::size_t c = b + 1; c < m; ++c) {
        for (std::size_t d = c + 1; d < m; ++d) {
          const std::size_t idx[4] = {a, b, c, d};
          double mat[4][5];
          for (int r = 0; r < 4; ++r) {
            const auto& h = hs[idx[r]];
            mat[r][0] = h.normal.x;
            mat[r][1] = h.normal.y;
            mat[r][2] = h.normal.z;
            mat[r][3] = 1.0;
            mat[r][4] = h.offset;
          }
          bool singular = false;
          for (int col = 0; col < 4 && !singular; ++col) {
            int piv = col;
            for (int r = col + 1; r < 4; ++r) {
              if (std::abs(mat[r][col]) > std::abs(mat[piv][col])) piv = r;
            }
            if (std::abs(mat[piv][col]) < 1e-12) {
              singular = true;
              break;
            }
            std::swap(mat[piv], mat[col]);
            for (int r = 0; r < 4; ++r) {
              if (r == col) continue;
              const double f = mat[r][col] / mat[col][col];
              for (int k = col; k < 5; ++k) mat[r][k] -= f * mat[col][k];
            }
          }
          if (singular) continue;
          const Point3 x{mat[0][4] / mat[0][0], mat[1][4] / mat[1][1], mat[2][4] / mat[2][2]};
          const double s = mat[3][4] / mat[3][3];
          if (s <= best) continue;
          const bool feasible = std::all_of(hs.begin(), hs.end(), [&](const Halfspace& h) {
            return dot(h.normal, x) + s <= h.offset + tol;
          });
          if (feasible) best = s;
        }
      }
    }
  }
  return best;
}

// Ellipsoid boundary area for semi-axes a >= b >= c via Legendre's form.
double ellipsoid_area(double a, double b, double c) {
  if (a - c <= 1e-14 * a) return 4.0 * kPi * a * a;
  const double phi = std::acos(c / a);
  const double sin_phi = std::sin(phi);
  const double cos_phi = std::cos(phi);
  const double k2 = (a * a * (b * b - c * c)) / (b * b * (a * a - c * c));
  const double k = std::sqrt(std::clamp(k2, 0.0, 1.0));
  const double e = std::ellint_2(k, phi);
  const double f = std::ellint_1(k, phi);
  return 2.0 * kPi * c * c + 2.0 * kPi * a * b / sin_phi * (e * sin_phi * sin_phi + f * cos_phi * cos_phi);
}

// --- Point-to-ellipse/ellipsoid distance (bisection on the Lagrange root).
// Semi-axes sorted descending, point coordinates nonnegative.

double robust_length(double a, double b) {
  return std::hypot(a, b);
}
double robust_length(double a, double b, double c) {
  return std::hypot(a, b, c);
}

constexpr int kMaxBisection = 1100;

double ellipse_root(double r0, double z0, double z1, double g) {
  const double n0 = r0 * z0;
  double s0 = z1 - 1.0;
  double s1 = g < 0.0 ? 0.0 : robust_length(n0, z1) - 1.0;
  double s = 0.0;
  for (int i = 0; i < kMaxBisection; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = z1 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

double ellipsoid_root(double r0, double r1, double z0, double z1, double z2, double g) {
  const double n0 = r0 * z0;
  const double n1 = r1 * z1;
  double s0 = z2 - 1.0;
  double s1 = g < 0.0 ? 0.0 : robust_length(n0, n1, z2) - 1.0;
  double s = 0.0;
  for (int i = 0; i < kMaxBisection; ++i) {
    s = 0.5 * (s0 + s1);
    if (s == s0 || s == s1) break;
    const double ratio0 = n0 / (s + r0);
    const double ratio1 = n1 / (s + r1);
    const double ratio2 = z2 / (s + 1.0);
    const double gs = ratio0 * ratio0 + ratio1 * ratio1 + ratio2 * ratio2 - 1.0;
    if (gs > 0.0) {
      s0 = s;
    } else if (gs < 0.0) {
      s1 = s;
    } else {
      break;
    }
  }
  return s;
}

double ellipse_distance(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0;
      const double z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return 0.0;
      const double r0 = (e0 / e1) * (e0 / e1);
      const double sbar = ellipse_root(r0, z0, z1, g);
      const double x0 = r0 * y0 / (sbar + r0);
      const double x1 = y1 / (sbar + 1.0);
      return std::hypot(x0 - y0, x1 - y1);
    }
    return std::abs(y1 - e1);
  }
  const double numer0 = e0 * y0;
  const double denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    const double x0 = e0 * xde0;
    const double x1 = e1 * std::sqrt(1.0 - xde0 * xde0);
    return std::hypot(x0 - y0, x1);
  }
  return std::abs(y0 - e0);
}

double ellipsoid_distance(double e0, double e1, double e2, double y0, double y1, double y2) {
  if (y2 > 0.0) {
    if (y1 > 0.0) {
      if (y0 > 0.0) {
        const double z0 = y0 / e0;
        const double z1 = y1 / e1;
        const double z2 = y2 / e2;
        const double g = z0 * z0 + z1 * z1 + z2 * z2 - 1.0;
        if (g == 0.0) return 0.0;
        const double r0 = (e0 / e2) * (e0 / e2);
        const double r1 = (e1 / e2) * (e1 / e2);
        const double sbar = ellipsoid_root(r0, r1, z0, z1, z2, g);
        const double x0 = r0 * y0 / (sbar + r0);
        const double x1 = r1 * y1 / (sbar + r1);
        const double x2 = y2 / (sbar + 1.0);
        return std::hypot(x0 - y0, x1 - y1, x2 - y2);
      }
      return ellipse_distance(e1, e2, y1, y2);
    }
    if (y0 > 0.0) return ellipse_distance(e0, e2, y0, y2);
    return std::abs(y2 - e2);
  }
  const double denom0 = e0 * e0 - e2 * e2;
  const double denom1 = e1 * e1 - e2 * e2;
  const double numer0 = e0 * y0;
  const double numer1 = e1 * y1;
  if (numer0 < denom0 && numer1 < denom1) {
    const double xde0 = numer0 / denom0;
    const double xde1 = numer1 / denom1;
    const double discr = 1.0 - xde0 * xde0 - xde1 * xde1;
    if (discr > 0.0) {
      const double x0 = e0 * xde0;
      const double x1 = e1 * xde1;
      const double x2 = e2 * std::sqrt(discr);
      return std::hypot(x0 - y0, x1 - y1, x2);
    }
  }
  return ellipse_distance(e0, e1, y0, y1);
}

// --- Disk/rectangle areas for the ball-box slice integral.

// Antiderivative of sqrt(rho^2 - y^2).
double half_chord_integral(double rho, double y) {
  y = std::clamp(y, -rho, rho);
  return 0.5 * (y * std::sqrt(std::max(0.0, rho * rho - y * y)) + rho * rho * std::asin(y / rho));
}

// Area of the disk of radius rho (origin-centered) within {y >= p, z >= q}.
double disk_quadrant_area(double rho, double p, double q) {
  if (rho <= 0.0) return 0.0;
  p = std::clamp(p, -rho, rho);
  q = std::clamp(q, -rho, rho);
  const double w = std::sqrt(std::max(0.0, rho * rho - q * q));
  auto g = [rho](double y) { return half_chord_integral(rho, y); };
  double area = 0.0;
  if (q >= 0.0) {
    const double a = std::max(p, -w);
    if (a < w) area = g(w) - g(a) - q * (w - a);
  } else {
    if (p < -w) area += 2.0 * (g(-w) - g(p));
    const double a = std::max(p, -w);
    if (a < w) area += g(w) - g(a) - q * (w - a);
    const double b = std::max(p, w);
    area += 2.0 * (g(rho) - g(b));
  }
  return std::max(0.0, area);
}

double disk_rect_area(double rho, double y1, double y2, double z1, double z2) {
  if (rho <= 0.0 || y1 >= y2 || z1 >= z2) return 0.0;
  const double a = disk_quadrant_area(rho, y1, z1) - disk_quadrant_area(rho, y2, z1) -
                   disk_quadrant_area(rho, y1, z2) + disk_quadrant_area(rho, y2, z2);
  return std::max(0.0, a);
}

// Radical inverse in the given prime base.
double radical_inverse(std::uint32_t index, std::uint32_t base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

// Halton points mapped (measure-preservingly) onto the unit ball.
std::vector<Point3> halton_unit_ball(int count) {
  std::vector<Point3> pts;
  pts.reserve(static_cast<std::size_t>(count));
  for (int i = 1; i <= count; ++i) {
    const auto idx = static_cast<std::uint32_t>(i);
    const double rad = std::cbrt(radical_inverse(idx, 2));
    const double cos_t = 2.0 * radical_inverse(idx, 3) - 1.0;
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2.0 * kPi * radical_inverse(idx, 5);
    pts.push_back({rad * sin_t * std::cos(phi), rad * sin_t * std::sin(phi), rad * cos_t});
  }
  return pts;
}

const std::vector<Point3>& default_ball_points() {
  static const std::vector<Point3> pts = halton_unit_ball(kDefaultClipSamples);
  return pts;
}

Point3 sample_unit_ball(std::mt19937_64& rng) {
  const double rad = std::cbrt(uniform01(rng));
  const double cos_t = 2.0 * uniform01(rng) - 1.0;
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const double phi = 2.0 * kPi * uniform01(rng);
  return {rad * sin_t * std::cos(phi), rad * sin_t * std::sin(phi), rad * cos_t};
}

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------

RegionSpec RegionSpec::ball(double radius) {
  RegionSpec s;
  s.kind = RegionKind::kBall;
  s.dims = {radius, radius, radius};
  return s;
}

RegionSpec RegionSpec::box(double lx, double ly, double lz) {
  RegionSpec s;
  s.kind = RegionKind::kBox;
  s.dims = {lx, ly, lz};
  return s;
}

RegionSpec RegionSpec::ellipsoid(double a, double b, double c) {
  RegionSpec s;
  s.kind = RegionKind::kEllipsoid;
  s.dims = {a, b, c};
  return s;
}

RegionSpec RegionSpec::polytope(std::vector<Halfspace> halfspaces) {
  RegionSpec s;
  s.kind = RegionKind::kPolytope;
  s.halfspaces = std::move(halfspaces);
  return s;
}

ConvexRegion normalize_unit_volume(const RegionSpec& spec) {
  ConvexRegion region;
  region.kind_ = spec.kind;
  switch (spec.kind) {
    case RegionKind::kBall: {
      require_positive_finite(spec.dims[0], "ball radius");
      const double radius = spec.dims[0] * std::cbrt(1.0 / ball_volume(spec.dims[0]));
      region.dims_ = {radius, radius, radius};
      region.volume_ = ball_volume(radius);
      region.surface_area_ = 4.0 * kPi * radius * radius;
      region.inradius_ = radius;
      region.bbox_ = {{-radius, -radius, -radius}, {radius, radius, radius}};
      region.description_ = "ball:" + format_number(radius);
      break;
    }
    case RegionKind::kBox: {
      for (double l : spec.dims) require_positive_finite(l, "box side");
      const double raw = spec.dims[0] * spec.dims[1] * spec.dims[2];
      const double s = std::cbrt(1.0 / raw);
      // Exact-volume inputs stay bit-identical.
      const double scale = raw == 1.0 ? 1.0 : s;
      const std::array<double, 3> l{spec.dims[0] * scale, spec.dims[1] * scale, spec.dims[2] * scale};
      region.dims_ = l;
      region.volume_ = l[0] * l[1] * l[2];
      region.surface_area_ = 2.0 * (l[0] * l[1] + l[1] * l[2] + l[0] * l[2]);
      region.inradius_ = 0.5 * std::min({l[0], l[1], l[2]});
      region.bbox_ = {{0.0, 0.0, 0.0}, {l[0], l[1], l[2]}};
      region.description_ = "box:" + format_number(l[0]) + "," + format_number(l[1]) + "," + format_number(l[2]);
      break;
    }
    case RegionKind::kEllipsoid: {
      for (double l : spec.dims) require_positive_finite(l, "ellipsoid semi-axis");
      const double raw = 4.0 * kPi * spec.dims[0] * spec.dims[1] * spec.dims[2] / 3.0;
      const double s = std::cbrt(1.0 / raw);
      const std::array<double, 3> e{spec.dims[0] * s, spec.dims[1] * s, spec.dims[2] * s};
      std::array<double, 3> sorted = e;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      region.dims_ = e;
      region.volume_ = 4.0 * kPi * e[0] * e[1] * e[2] / 3.0;
      region.surface_area_ = ellipsoid_area(sorted[0], sorted[1], sorted[2]);
      region.inradius_ = sorted[2];
      region.bbox_ = {{-e[0], -e[1], -e[2]}, {e[0], e[1], e[2]}};
      region.description_ =
          "ellipsoid:" + format_number(e[0]) + "," + format_number(e[1]) + "," + format_number(e[2]);
      break;
    }
    case RegionKind::kPolytope: {
      std::vector<Halfspace> hs;
      hs.reserve(spec.halfspaces.size());
      for (const auto& h : spec.halfspaces) {
        const double len = norm(h.normal);
        if (!(len > 0.0) || !std::isfinite(len) || !std::isfinite(h.offset)) {
          throw DomainError("polytope halfspace has a zero or non-finite normal");
        }
        hs.push_back({scaled(h.normal, 1.0 / len), h.offset / len});
      }
      const PolytopeShape raw = analyze_polytope(hs);
      const double s = std::cbrt(1.0 / raw.volume);
      for (auto& h : hs) h.offset *= s;
      region.halfspaces_ = hs;
      region.volume_ = raw.volume * s * s * s;
      region.surface_area_ = raw.area * s * s;
      region.inradius_ = polytope_inradius(hs);
      region.bbox_ = {scaled(raw.bbox.lo, s), scaled(raw.bbox.hi, s)};
      region.description_ = "polytope:" + std::to_string(hs.size()) + " halfspaces";
      break;
    }
  }
  return region;
}

bool ConvexRegion::contains(const Point3& p) const {
  switch (kind_) {
    case RegionKind::kBall:
      return dot(p, p) <= dims_[0] * dims_[0];
    case RegionKind::kBox:
      return p.x >= 0.0 && p.y >= 0.0 && p.z >= 0.0 && p.x <= dims_[0] && p.y <= dims_[1] &&
             p.z <= dims_[2];
    case RegionKind::kEllipsoid: {
      const double u = p.x / dims_[0];
      const double v = p.y / dims_[1];
      const double w = p.z / dims_[2];
      return u * u + v * v + w * w <= 1.0;
    }
    case RegionKind::kPolytope:
      return std::all_of(halfspaces_.begin(), halfspaces_.end(),
                         [&](const Halfspace& h) { return dot(h.normal, p) <= h.offset; });
  }
  return false;
}

double ConvexRegion::dist_to_boundary(const Point3& p) const {
  if (!contains(p)) throw DomainError("dist_to_boundary: point lies outside the region");
  switch (kind_) {
    case RegionKind::kBall:
      return std::max(0.0, dims_[0] - norm(p));
    case RegionKind::kBox:
      return std::min({p.x, p.y, p.z, dims_[0] - p.x, dims_[1] - p.y, dims_[2] - p.z});
    case RegionKind::kEllipsoid: {
      std::array<std::pair<double, double>, 3> ax{{{dims_[0], std::abs(p.x)},
                                                   {dims_[1], std::abs(p.y)},
                                                   {dims_[2], std::abs(p.z)}}};
      std::sort(ax.begin(), ax.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      return ellipsoid_distance(ax[0].first, ax[1].first, ax[2].first, ax[0].second, ax[1].second,
                                ax[2].second);
    }
    case RegionKind::kPolytope: {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& h : halfspaces_) d = std::min(d, h.offset - dot(h.normal, p));
      return std::max(0.0, d);
    }
  }
  return 0.0;
}

std::string ConvexRegion::describe() const { return description_; }

std::vector<Halfspace> read_halfspace_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open halfspace file: " + path);
  std::vector<Halfspace> hs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    Halfspace h;
    if (!(row >> h.normal.x >> h.normal.y >> h.normal.z >> h.offset)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected `nx ny nz offset`");
    }
    std::string extra;
    if (row >> extra) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": trailing tokens");
    }
    hs.push_back(h);
  }
  return hs;
}

RegionSpec parse_region_spec(std::string_view token) {
  auto parse_triple = [&](std::string_view args) {
    std::array<double, 3> out{};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
      const std::size_t end = i < 2 ? args.find(',', pos) : args.size();
      if (end == std::string_view::npos) {
        throw std::invalid_argument("region `" + std::string(token) + "` needs three comma-separated values");
      }
      const std::string field(args.substr(pos, end - pos));
      std::size_t used = 0;
      try {
        out[static_cast<std::size_t>(i)] = std::stod(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != field.size()) {
        throw std::invalid_argument("region `" + std::string(token) + "`: bad number `" + field + "`");
      }
      pos = end + 1;
    }
    return out;
  };

  if (token == "ball") return RegionSpec::ball(1.0);
  if (token == "cube") return RegionSpec::cube(1.0);
  const auto colon = token.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("unknown region `" + std::string(token) + "`");
  }
  const std::string_view head = token.substr(0, colon);
  const std::string_view args = token.substr(colon + 1);
  if (head == "box") {
    const auto d = parse_triple(args);
    return RegionSpec::box(d[0], d[1], d[2]);
  }
  if (head == "ellipsoid") {
    const auto d = parse_triple(args);
    return RegionSpec::ellipsoid(d[0], d[1], d[2]);
  }
  if (head == "polytope") {
    if (args.empty()) throw std::invalid_argument("polytope region needs a file path");
    return RegionSpec::polytope(read_halfspace_file(std::string(args)));
  }
  throw std::invalid_argument("unknown region `" + std::string(token) + "`");
}

Point3 sample_uniform(const ConvexRegion& region, std::mt19937_64& rng) {
  switch (region.kind()) {
    case RegionKind::kBall:
      return scaled(sample_unit_ball(rng), region.dims()[0]);
    case RegionKind::kEllipsoid: {
      const Point3 u = sample_unit_ball(rng);
      const auto& e = region.dims();
      return {u.x * e[0], u.y * e[1], u.z * e[2]};
    }
    case RegionKind::kBox: {
      const auto& l = region.dims();
      // Clamp guards the rounding case u * l == l + ulp.
      return {std::min(uniform01(rng) * l[0], l[0]), std::min(uniform01(rng) * l[1], l[1]),
              std::min(uniform01(rng) * l[2], l[2])};
    }
    case RegionKind::kPolytope: {
      const Box3& b = region.bounding_box();
      for (std::uint64_t attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
        const Point3 p{b.lo.x + uniform01(rng) * (b.hi.x - b.lo.x),
                       b.lo.y + uniform01(rng) * (b.hi.y - b.lo.y),
                       b.lo.z + uniform01(rng) * (b.hi.z - b.lo.z)};
        if (region.contains(p)) return p;
      }
      throw std::runtime_error("sample_uniform: rejection sampling exceeded the attempt cap");
    }
  }
  throw std::logic_error("sample_uniform: unknown region kind");
}

double cap_volume_beyond(double r, double t) {
  if (!(r >= 0.0) || !(t >= 0.0) || t > r) {
    throw DomainError("cap_volume_beyond requires 0 <= t <= r");
  }
  return kPi / 3.0 * (r - t) * (r - t) * (2.0 * r + t);
}

double halfspace_clipped_ball_volume(double r, double s) {
  if (!(s >= 0.0)) throw DomainError("halfspace_clipped_ball_volume requires s >= 0");
  if (!(r >= 0.0)) throw DomainError("halfspace_clipped_ball_volume requires r >= 0");
  return ball_volume(r) - cap_volume_beyond(r, std::min(s, r));
}

double lens_deficit(double d) {
  if (!(d >= 0.0)) throw DomainError("lens_deficit requires d >= 0");
  return 0.25 * kPi * d * d * d;
}

double ball_ball_intersection_volume(double r1, double r2, double d) {
  if (!(r1 >= 0.0) || !(r2 >= 0.0) || !(d >= 0.0)) {
    throw DomainError("ball_ball_intersection_volume requires nonnegative arguments");
  }
  if (d >= r1 + r2) return 0.0;
  if (d <= std::abs(r1 - r2)) return ball_volume(std::min(r1, r2));
  const double s = r1 + r2 - d;
  return kPi * s * s * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2) * (r1 - r2)) / (12.0 * d);
}

double ball_box_intersection_volume(const Point3& center, double r, const Box3& box) {
  if (!(r >= 0.0)) throw DomainError("ball_box_intersection_volume requires r >= 0");
  if (r == 0.0) return 0.0;
  const double x1 = std::max(box.lo.x - center.x, -r);
  const double x2 = std::min(box.hi.x - center.x, r);
  const double y1 = std::max(box.lo.y - center.y, -r);
  const double y2 = std::min(box.hi.y - center.y, r);
  const double z1 = std::max(box.lo.z - center.z, -r);
  const double z2 = std::min(box.hi.z - center.z, r);
  if (x1 >= x2 || y1 >= y2 || z1 >= z2) return 0.0;

  // Slice radius crosses these values at the kinks of the area function.
  std::vector<double> cuts{x1, x2};
  const double ys[2] = {y1, y2};
  const double zs[2] = {z1, z2};
  std::vector<double> thresholds;
  for (double y : ys) thresholds.push_back(y * y);
  for (double z : zs) thresholds.push_back(z * z);
  for (double y : ys) {
    for (double z : zs) thresholds.push_back(y * y + z * z);
  }
  for (double th : thresholds) {
    if (th < r * r) {
      const double xc = std::sqrt(r * r - th);
      for (double c : {-xc, xc}) {
        if (c > x1 && c < x2) cuts.push_back(c);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto slice = [&](double x) {
    const double rho = std::sqrt(std::max(0.0, r * r - x * x));
    return disk_rect_area(rho, y1, y2, z1, z2);
  };
  // Smooth between kinks apart from square-root endpoints; a fixed rule
  // with sqrt-graded substitution at both ends is enough.
  using Rule = boost::math::quadrature::gauss<double, 20>;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a <= 0.0) continue;
    const double mid = 0.5 * (a + b), h = 0.5 * (b - a);
    // x = mid + h * sin(theta) clusters nodes at both ends, absorbing sqrt kinks.
    total += Rule::integrate(
        [&](double th) { return slice(mid + h * std::sin(th)) * h * std::cos(th); },
        -std::numbers::pi / 2, std::numbers::pi / 2);
  }
  return std::clamp(total, 0.0, ball_volume(r));
}

double clipped_ball_volume(const ConvexRegion& region, const Point3& x, double r, int samples) {
  if (!(r > 0.0)) throw DomainError("clipped_ball_volume requires r > 0");
  if (samples < 1) throw DomainError("clipped_ball_volume requires a positive sample count");
  const double depth = region.dist_to_boundary(x);
  const double full = ball_volume(r);
  if (depth >= r) return full;

  switch (region.kind()) {
    case RegionKind::kBall:
      return ball_ball_intersection_volume(r, region.dims()[0], norm(x));
    case RegionKind::kBox: {
      const auto& l = region.dims();
      const double d[6] = {x.x, x.y, x.z, l[0] - x.x, l[1] - x.y, l[2] - x.z};
      int cutting = 0;
      double s = 0.0;
      for (double v : d) {
        if (v < r) {
          ++cutting;
          s = v;
        }
      }
      if (cutting == 1) return halfspace_clipped_ball_volume(r, s);
      return ball_box_intersection_volume(x, r, region.bounding_box());
    }
    case RegionKind::kPolytope: {
      int cutting = 0;
      double s = 0.0;
      for (const auto& h : region.halfspaces()) {
        const double v = h.offset - dot(h.normal, x);
        if (v < r) {
          ++cutting;
          s = std::max(0.0, v);
        }
      }
      if (cutting == 1) return halfspace_clipped_ball_volume(r, s);
      break;
    }
    case RegionKind::kEllipsoid:
      break;
  }

  const std::vector<Point3> owned =
      samples == kDefaultClipSamples ? std::vector<Point3>{} : halton_unit_ball(samples);
  const std::vector<Point3>& pts = samples == kDefaultClipSamples ? default_ball_points() : owned;
  std::size_t inside = 0;
  for (const auto& u : pts) {
    if (region.contains({x.x + r * u.x, x.y + r * u.y, x.z + r * u.z})) ++inside;
  }
  return full * static_cast<double>(inside) / static_cast<double>(pts.size());
}

}  // namespace rgg
