#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "rgg/geometry.hpp"

using namespace rgg;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double ball_vol(double r) { return 4.0 * kPi * r * r * r / 3.0; }

std::vector<Halfspace> cube_halfspaces(double side) {
  return {{{1, 0, 0}, side}, {{-1, 0, 0}, 0}, {{0, 1, 0}, side},
          {{0, -1, 0}, 0},   {{0, 0, 1}, side}, {{0, 0, -1}, 0}};
}

std::vector<Halfspace> tetra_halfspaces() {
  return {{{1, 1, 1}, 1}, {{1, -1, -1}, 1}, {{-1, 1, -1}, 1}, {{-1, -1, 1}, 1}};
}

/// Surface area of an ellipsoid by a midpoint rule in (theta, phi).
double grid_ellipsoid_area(double a, double b, double c, int m) {
  double total = 0.0;
  const double dt = kPi / m, dp = 2.0 * kPi / (2 * m);
  for (int i = 0; i < m; ++i) {
    const double t = (i + 0.5) * dt;
    const double st = std::sin(t), ct = std::cos(t);
    for (int j = 0; j < 2 * m; ++j) {
      const double p = (j + 0.5) * dp;
      const double sp = std::sin(p), cp = std::cos(p);
      // |r_theta x r_phi| for r = (a st cp, b st sp, c ct).
      const double nx = b * c * st * st * cp;
      const double ny = a * c * st * st * sp;
      const double nz = a * b * st * ct;
      total += std::sqrt(nx * nx + ny * ny + nz * nz);
    }
  }
  return total * dt * dp;
}

/// Distance from p to the ellipsoid surface by a dense parametric scan and a
/// local refinement.
double grid_ellipsoid_distance(const std::array<double, 3>& e, const Point3& p) {
  auto dist_at = [&](double t, double ph) {
    const Point3 s{e[0] * std::sin(t) * std::cos(ph), e[1] * std::sin(t) * std::sin(ph), e[2] * std::cos(t)};
    return distance(s, p);
  };
  const int m = 600;
  double best = 1e300, bt = 0, bp = 0;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j < 2 * m; ++j) {
      const double t = kPi * i / m, ph = kPi * j / m;
      const double d = dist_at(t, ph);
      if (d < best) {
        best = d;
        bt = t;
        bp = ph;
      }
    }
  }
  double step = kPi / m;
  while (step > 1e-12) {
    bool moved = false;
    for (double dt : {-step, 0.0, step}) {
      for (double dp : {-step, 0.0, step}) {
        const double d = dist_at(bt + dt, bp + dp);
        if (d < best) {
          best = d;
          bt += dt;
          bp += dp;
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("normalize_unit_volume examples") {
    const auto cube = normalize_unit_volume(RegionSpec::cube());
    CHECK(cube.dims() == std::array<double, 3>{1.0, 1.0, 1.0});
    CHECK(cube.surface_area() == 6.0);
    CHECK(cube.volume() == 1.0);

    const auto ball = normalize_unit_volume(RegionSpec::ball(1.0));
    CHECK(ball.dims()[0] == Approx(std::cbrt(3.0 / (4.0 * kPi))).epsilon(1e-14));
    CHECK(ball.volume() == Approx(1.0).epsilon(1e-14));
    CHECK(ball.surface_area() == Approx(4.0 * kPi * std::pow(3.0 / (4.0 * kPi), 2.0 / 3.0)).epsilon(1e-13));
    CHECK(ball.surface_area() == Approx(4.836).epsilon(1e-3));

    const auto box = normalize_unit_volume(RegionSpec::box(2.0, 1.0, 0.5));
    CHECK(box.dims() == std::array<double, 3>{2.0, 1.0, 0.5});
    CHECK(box.surface_area() == 7.0);
  }

  TEST_CASE("normalization is scale invariant") {
    const auto big = normalize_unit_volume(RegionSpec::box(6.0, 3.0, 1.5));
    CHECK(big.dims()[0] == Approx(2.0).epsilon(1e-14));
    CHECK(big.surface_area() == Approx(7.0).epsilon(1e-14));
    const auto e1 = normalize_unit_volume(RegionSpec::ellipsoid(1.0, 2.0, 3.0));
    const auto e2 = normalize_unit_volume(RegionSpec::ellipsoid(10.0, 20.0, 30.0));
    CHECK(e1.volume() == Approx(1.0).epsilon(1e-14));
    CHECK(e1.surface_area() == Approx(e2.surface_area()).epsilon(1e-13));
  }

  TEST_CASE("degenerate shapes are rejected") {
    CHECK_THROWS_AS(normalize_unit_volume(RegionSpec::ball(0.0)), DomainError);
    CHECK_THROWS_AS(normalize_unit_volume(RegionSpec::ball(-1.0)), DomainError);
    CHECK_THROWS_AS(normalize_unit_volume(RegionSpec::box(1.0, 0.0, 1.0)), DomainError);
    CHECK_THROWS_AS(normalize_unit_volume(RegionSpec::ellipsoid(1.0, 1.0, NAN)), DomainError);
    // Unbounded: only three faces.
    CHECK_THROWS_AS(normalize_unit_volume(RegionSpec::polytope({{{-1, 0, 0}, 0}, {{0, -1, 0}, 0}, {{0, 0, -1}, 0}})),
                    DomainError);
    // Empty: x <= -1 and x >= 1.
    auto empty = cube_halfspaces(1.0);
    empty.push_back({{1, 0, 0}, -1.0});
    CHECK_THROWS_AS(normalize_unit_volume(RegionSpec::polytope(empty)), DomainError);
    // Flat: x <= 0 and x >= 0.
    auto flat = cube_halfspaces(1.0);
    flat[0].offset = 0.0;
    CHECK_THROWS_AS(normalize_unit_volume(RegionSpec::polytope(flat)), DomainError);
    CHECK_THROWS_AS(normalize_unit_volume(RegionSpec::polytope({{{0, 0, 0}, 1.0}})), DomainError);
  }

  TEST_CASE("polytope cube matches the box") {
    const auto poly = normalize_unit_volume(RegionSpec::polytope(cube_halfspaces(2.0)));
    CHECK(poly.volume() == Approx(1.0).epsilon(1e-12));
    CHECK(poly.surface_area() == Approx(6.0).epsilon(1e-12));
    CHECK(poly.inradius() == Approx(0.5).epsilon(1e-12));
    CHECK(poly.contains({0.5, 0.5, 0.5}));
    CHECK_FALSE(poly.contains({1.2, 0.5, 0.5}));
    CHECK(poly.dist_to_boundary({0.1, 0.5, 0.5}) == Approx(0.1).epsilon(1e-12));
  }

  TEST_CASE("regular tetrahedron") {
    const auto t = normalize_unit_volume(RegionSpec::polytope(tetra_halfspaces()));
    // V = a^3 / (6 sqrt 2) = 1, area = sqrt(3) a^2, inradius = a / (2 sqrt 6).
    const double a = std::cbrt(6.0 * std::sqrt(2.0));
    CHECK(t.volume() == Approx(1.0).epsilon(1e-12));
    CHECK(t.surface_area() == Approx(std::sqrt(3.0) * a * a).epsilon(1e-12));
    CHECK(t.inradius() == Approx(a / (2.0 * std::sqrt(6.0))).epsilon(1e-9));
  }

  TEST_CASE("contains and dist_to_boundary examples") {
    const auto cube = normalize_unit_volume(RegionSpec::cube());
    CHECK(cube.contains({0.5, 0.5, 0.5}));
    CHECK_FALSE(cube.contains({1.5, 0.0, 0.0}));
    CHECK(cube.contains({0.0, 0.0, 0.0}));  // closed
    CHECK(cube.dist_to_boundary({0.5, 0.5, 0.5}) == 0.5);
    CHECK(cube.dist_to_boundary({0.1, 0.5, 0.5}) == Approx(0.1));
    CHECK_THROWS_AS(cube.dist_to_boundary({1.5, 0.5, 0.5}), DomainError);

    const auto ball = normalize_unit_volume(RegionSpec::ball(1.0));
    CHECK(ball.contains({0, 0, 0}));
    CHECK(ball.dist_to_boundary({0, 0, 0}) == Approx(0.6204).epsilon(1e-4));
  }

  TEST_CASE("ellipsoid area and distance against numerical oracles") {
    const auto e = normalize_unit_volume(RegionSpec::ellipsoid(1.0, 2.0, 3.0));
    const auto& d = e.dims();
    CHECK(e.surface_area() == Approx(grid_ellipsoid_area(d[0], d[1], d[2], 800)).epsilon(1e-5));
    const auto oblate = normalize_unit_volume(RegionSpec::ellipsoid(2.0, 2.0, 1.0));
    const auto& o = oblate.dims();
    CHECK(oblate.surface_area() == Approx(grid_ellipsoid_area(o[0], o[1], o[2], 800)).epsilon(1e-5));

    std::mt19937_64 rng(11);
    for (int i = 0; i < 8; ++i) {
      const Point3 p = sample_uniform(e, rng);
      CHECK(e.dist_to_boundary(p) == Approx(grid_ellipsoid_distance(d, p)).epsilon(1e-7));
    }
    CHECK(e.dist_to_boundary({0, 0, 0}) == Approx(std::min({d[0], d[1], d[2]})).epsilon(1e-12));
    CHECK(e.inradius() == Approx(d[0]).epsilon(1e-12));
  }

  TEST_CASE("cap_volume_beyond") {
    CHECK(cap_volume_beyond(1.0, 0.0) == Approx(2.0 * kPi / 3.0).epsilon(1e-15));
    CHECK(cap_volume_beyond(1.0, 1.0) == 0.0);
    CHECK(cap_volume_beyond(1.0, 0.5) == Approx(5.0 * kPi / 24.0).epsilon(1e-15));
    CHECK_THROWS_AS(cap_volume_beyond(1.0, -0.1), DomainError);
    CHECK_THROWS_AS(cap_volume_beyond(1.0, 1.1), DomainError);
    // Decreasing in t.
    double prev = cap_volume_beyond(2.0, 0.0);
    for (int i = 1; i <= 100; ++i) {
      const double cur = cap_volume_beyond(2.0, 0.02 * i);
      CHECK(cur <= prev);
      prev = cur;
    }
  }

  TEST_CASE("halfspace_clipped_ball_volume") {
    CHECK(halfspace_clipped_ball_volume(1.0, 0.0) == Approx(2.0 * kPi / 3.0).epsilon(1e-15));
    CHECK(halfspace_clipped_ball_volume(1.0, 2.0) == Approx(4.0 * kPi / 3.0).epsilon(1e-15));
    CHECK(halfspace_clipped_ball_volume(1.0, 0.5) == Approx(9.0 * kPi / 8.0).epsilon(1e-15));
    CHECK_THROWS_AS(halfspace_clipped_ball_volume(1.0, -0.1), DomainError);

    std::mt19937_64 rng(5);
    const auto mc = oracle::mc_halfspace_clipped(1.0, 0.5, 2'000'000, rng);
    CHECK(std::abs(halfspace_clipped_ball_volume(1.0, 0.5) - mc.mean) < 3.0 * mc.sigma);
  }

  TEST_CASE("lens_deficit") {
    CHECK(lens_deficit(0.0) == 0.0);
    CHECK(lens_deficit(0.5) == Approx(kPi / 32.0).epsilon(1e-15));
    CHECK_THROWS_AS(lens_deficit(-0.1), DomainError);
    std::mt19937_64 rng(6);
    const auto mc = oracle::mc_lens_deficit(0.3, 1.0, 2'000'000, rng);
    CHECK(std::abs(lens_deficit(0.3) - mc.mean) < 3.0 * mc.sigma);
  }

  TEST_CASE("clipped_ball_volume on the cube") {
    const auto cube = normalize_unit_volume(RegionSpec::cube());
    CHECK(clipped_ball_volume(cube, {0.5, 0.5, 0.5}, 0.1) == Approx(ball_vol(0.1)).epsilon(1e-14));
    CHECK(clipped_ball_volume(cube, {0.0, 0.5, 0.5}, 0.1) == Approx(ball_vol(0.1) / 2).epsilon(1e-14));
    CHECK(clipped_ball_volume(cube, {0.0, 0.0, 0.5}, 0.1) == Approx(ball_vol(0.1) / 4).epsilon(1e-12));
    CHECK(clipped_ball_volume(cube, {0.0, 0.0, 0.0}, 0.1) == Approx(5.23599e-4).epsilon(1e-5));
    CHECK(clipped_ball_volume(cube, {0.0, 0.0, 0.0}, 0.1) == Approx(ball_vol(0.1) / 8).epsilon(1e-12));
    CHECK_THROWS_AS(clipped_ball_volume(cube, {0.5, 0.5, 0.5}, 0.0), DomainError);
    CHECK_THROWS_AS(clipped_ball_volume(cube, {2.0, 0.5, 0.5}, 0.1), DomainError);
  }

  TEST_CASE("ball-box intersection against a dense grid oracle") {
    std::mt19937_64 rng(17);
    const Box3 box{{0, 0, 0}, {1, 1, 1}};
    for (int i = 0; i < 12; ++i) {
      const double r = 0.05 + 0.3 * oracle::u01(rng);
      const Point3 c{r * 1.2 * oracle::u01(rng), r * 1.2 * oracle::u01(rng), r * 1.2 * oracle::u01(rng)};
      const double exact = ball_box_intersection_volume(c, r, box);
      CHECK(exact == Approx(oracle::grid_ball_box(c, r, 1, 1, 1, 1500)).epsilon(2e-5));
    }
    // Thin slab cuts the ball on two opposite sides.
    const Box3 slab{{0, 0, 0}, {1, 1, 0.1}};
    const double v = ball_box_intersection_volume({0.5, 0.5, 0.05}, 0.2, slab);
    CHECK(v == Approx(oracle::grid_ball_box({0.5, 0.5, 0.05}, 0.2, 1, 1, 0.1, 2000)).epsilon(2e-5));
  }

  TEST_CASE("ball-ball intersection") {
    CHECK(ball_ball_intersection_volume(1.0, 1.0, 0.0) == Approx(ball_vol(1.0)));
    CHECK(ball_ball_intersection_volume(1.0, 2.0, 0.5) == Approx(ball_vol(1.0)));
    CHECK(ball_ball_intersection_volume(1.0, 1.0, 2.5) == 0.0);
    // Equal radii: 2 caps of height r - d/2.
    const double d = 0.6, h = 1.0 - d / 2;
    CHECK(ball_ball_intersection_volume(1.0, 1.0, d) == Approx(2.0 * kPi * h * h * (3.0 - h) / 3.0).epsilon(1e-13));
  }

  TEST_CASE("clipped volume property: half ball lower bound and monotone in depth") {
    const auto ball = normalize_unit_volume(RegionSpec::ball(1.0));
    const double R = ball.dims()[0];
    const double r = 0.05;
    double prev = 0.0;
    for (int i = 0; i <= 20; ++i) {
      const double depth = r * i / 20.0;
      const double v = clipped_ball_volume(ball, {R - depth, 0, 0}, r);
      CHECK(v >= prev);
      // Curved boundary removes a bit more than a plane would.
      CHECK(v <= halfspace_clipped_ball_volume(r, depth) * (1 + 1e-12));
      prev = v;
    }
    CHECK(clipped_ball_volume(ball, {R, 0, 0}, r) == Approx(ball_vol(r) / 2).epsilon(0.05));
  }

  TEST_CASE("QMC fallback agrees with exact values") {
    const auto poly = normalize_unit_volume(RegionSpec::polytope(cube_halfspaces(1.0)));
    CHECK(clipped_ball_volume(poly, {0, 0, 0}, 0.1) == Approx(ball_vol(0.1) / 8).epsilon(0.02));
    CHECK(clipped_ball_volume(poly, {0, 0.03, 0.5}, 0.1) ==
          Approx(ball_box_intersection_volume({0, 0.03, 0.5}, 0.1, {{0, 0, 0}, {1, 1, 1}})).epsilon(0.02));
    // Single cutting plane uses the closed form.
    CHECK(clipped_ball_volume(poly, {0.03, 0.5, 0.5}, 0.1) == Approx(halfspace_clipped_ball_volume(0.1, 0.03)));
    const auto e = normalize_unit_volume(RegionSpec::ellipsoid(1.0, 1.0, 1.0));
    const auto b = normalize_unit_volume(RegionSpec::ball(1.0));
    const Point3 x{e.dims()[0] - 0.02, 0, 0};
    CHECK(clipped_ball_volume(e, x, 0.1) == Approx(clipped_ball_volume(b, x, 0.1)).epsilon(0.02));
  }

  TEST_CASE("sampling stays inside and is uniform") {
    for (const auto& spec : {RegionSpec::cube(), RegionSpec::ball(1.0), RegionSpec::ellipsoid(1, 2, 3),
                             RegionSpec::polytope(tetra_halfspaces())}) {
      const auto region = normalize_unit_volume(spec);
      std::mt19937_64 rng(3);
      for (int i = 0; i < 2000; ++i) CHECK(region.contains(sample_uniform(region, rng)));
    }
    const auto cube = normalize_unit_volume(RegionSpec::cube());
    std::mt19937_64 rng(9);
    double sx = 0, sy = 0, sz = 0;
    const int n = 100000;
    int sub = 0;
    for (int i = 0; i < n; ++i) {
      const Point3 p = sample_uniform(cube, rng);
      sx += p.x;
      sy += p.y;
      sz += p.z;
      if (p.x < 0.5 && p.y < 0.5) ++sub;
    }
    CHECK(std::abs(sx / n - 0.5) < 0.01);
    CHECK(std::abs(sy / n - 0.5) < 0.01);
    CHECK(std::abs(sz / n - 0.5) < 0.01);
    CHECK(std::abs(static_cast<double>(sub) / n - 0.25) < 3.0 * std::sqrt(0.25 * 0.75 / n));

    // Ball: P(|p| <= R/2) = 1/8.
    const auto ball = normalize_unit_volume(RegionSpec::ball(1.0));
    int inner = 0;
    for (int i = 0; i < n; ++i) {
      const Point3 p = sample_uniform(ball, rng);
      if (std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z) <= ball.dims()[0] / 2) ++inner;
    }
    CHECK(std::abs(static_cast<double>(inner) / n - 0.125) < 3.0 * std::sqrt(0.125 * 0.875 / n));
  }

  TEST_CASE("sampling is deterministic") {
    const auto cube = normalize_unit_volume(RegionSpec::cube());
    std::mt19937_64 a(77), b(77);
    for (int i = 0; i < 100; ++i) CHECK(sample_uniform(cube, a) == sample_uniform(cube, b));
  }

  TEST_CASE("parse_region_spec") {
    CHECK(parse_region_spec("cube").kind == RegionKind::kBox);
    CHECK(parse_region_spec("ball").kind == RegionKind::kBall);
    const auto box = parse_region_spec("box:2,1,0.5");
    CHECK(box.dims == std::array<double, 3>{2, 1, 0.5});
    CHECK(parse_region_spec("ellipsoid:1,2,3").kind == RegionKind::kEllipsoid);
    CHECK_THROWS_AS(parse_region_spec("sphere"), std::invalid_argument);
    CHECK_THROWS_AS(parse_region_spec("box:1,2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_region_spec("box:1,x,2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_region_spec("box:1,2,3,"), std::invalid_argument);
    CHECK_THROWS(parse_region_spec("polytope:/nonexistent/file.txt"));

    const auto path = std::filesystem::temp_directory_path() / "rgg_tetra_test.txt";
    {
      std::ofstream f(path);
      f << "# regular tetrahedron\n1 1 1 1\n\n1 -1 -1 1\n-1 1 -1 1\n-1 -1 1 1\n";
    }
    const auto spec = parse_region_spec("polytope:" + path.string());
    CHECK(spec.halfspaces.size() == 4);
    CHECK(normalize_unit_volume(spec).volume() == Approx(1.0).epsilon(1e-12));
    {
      std::ofstream f(path);
      f << "1 1 1\n";
    }
    CHECK_THROWS(parse_region_spec("polytope:" + path.string()));
    std::filesystem::remove(path);
  }
}
