#include "rgg/theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "rgg/quadrature.hpp"

namespace rgg::theory {

namespace {

constexpr double kPi = std::numbers::pi;

void require_k_3d(int k) {
  if (k < 1) throw DomainError("k >= 1 required in 3D");
}

void require_n(double n) {
  if (!(n >= 3.0) || !std::isfinite(n)) throw DomainError("n >= 3 required (log log n must be positive)");
}

double ball_volume(double r) { return 4.0 * kPi * r * r * r / 3.0; }

// Panel breakpoints over [0, 1] refined geometrically toward 0, where the
// clipped volume is smallest and the integrand largest.
constexpr std::array<double, 9> kGradedBreaks{0.0,     1.0 / 128, 1.0 / 64, 1.0 / 32, 1.0 / 16,
                                              1.0 / 8, 1.0 / 4,   1.0 / 2,  1.0};

template <unsigned N, class F>
double graded_gauss(F&& f, double r) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < kGradedBreaks.size(); ++i) {
    total += boost::math::quadrature::gauss<double, N>::integrate(f, kGradedBreaks[i] * r,
                                                                  kGradedBreaks[i + 1] * r);
  }
  return total;
}

// Integrates g over [0, r]^dims with the graded tensor rule.
template <unsigned N, class G>
double tensor_layer(int dims, double r, G&& g) {
  if (dims == 1) return graded_gauss<N>([&](double a) { return g(a, 2.0 * r, 2.0 * r); }, r);
  if (dims == 2) {
    return graded_gauss<N>(
        [&](double a) { return graded_gauss<N>([&](double b) { return g(a, b, 2.0 * r); }, r); }, r);
  }
  return graded_gauss<N>(
      [&](double a) {
        return graded_gauss<N>(
            [&](double b) { return graded_gauss<N>([&](double c) { return g(a, b, c); }, r); }, r);
      },
      r);
}

IntegralReport layered_box(const ConvexRegion& region, const TheoryParams& p) {
  const double r = p.r_n;
  const auto& l = region.dims();
  const double n = p.n;
  // Clipped volume at depths (a, b, c) from three mutually orthogonal faces;
  // a depth >= r means that face is out of reach.
  auto clipped = [r](double a, double b, double c) {
    const Box3 box{{-a, -b, -c}, {2.0 * r, 2.0 * r, 2.0 * r}};
    return ball_box_intersection_volume({0.0, 0.0, 0.0}, r, box);
  };
  std::size_t evals = 0;
  auto integrand = [&](double a, double b, double c) {
    ++evals;
    return n * psi(n, p.k, clipped(a, b, c));
  };
  auto face_integrand = [&](double a, double, double) {
    ++evals;
    return n * psi(n, p.k, halfspace_clipped_ball_volume(r, a));
  };

  const double ix = l[0] - 2.0 * r;
  const double iy = l[1] - 2.0 * r;
  const double iz = l[2] - 2.0 * r;
  const double interior = ix * iy * iz * n * psi(n, p.k, ball_volume(r));
  const double face_weight = 2.0 * (iy * iz + ix * iz + ix * iy);
  const double edge_weight = 4.0 * (ix + iy + iz);
  const double corner_weight = 8.0;

  const double face_fine = tensor_layer<10>(1, r, face_integrand);
  const double face_coarse = tensor_layer<5>(1, r, face_integrand);
  const double edge_fine = tensor_layer<10>(2, r, integrand);
  const double edge_coarse = tensor_layer<5>(2, r, integrand);
  const double corner_fine = tensor_layer<10>(3, r, integrand);
  const double corner_coarse = tensor_layer<5>(3, r, integrand);

  IntegralReport rep;
  rep.estimator = Estimator::kLayered;
  rep.value = interior + face_weight * face_fine + edge_weight * edge_fine + corner_weight * corner_fine;
  rep.error = face_weight * std::abs(face_fine - face_coarse) +
              edge_weight * std::abs(edge_fine - edge_coarse) +
              corner_weight * std::abs(corner_fine - corner_coarse);
  rep.samples = evals;
  return rep;
}

IntegralReport layered_ball(const ConvexRegion& region, const TheoryParams& p) {
  const double r = p.r_n;
  const double big = region.dims()[0];
  const double n = p.n;
  const double interior = ball_volume(big - r) * n * psi(n, p.k, ball_volume(r));
  // Shell at depth t has area 4 pi (R - t)^2.
  auto shell = [&](double t) {
    const double v = ball_ball_intersection_volume(r, big, big - t);
    return 4.0 * kPi * (big - t) * (big - t) * n * psi(n, p.k, v);
  };
  const QuadratureResult q = adaptive_simpson(shell, 0.0, r, 1e-10);
  IntegralReport rep;
  rep.estimator = Estimator::kLayered;
  rep.value = interior + q.value;
  rep.error = q.error;
  rep.samples = q.nodes;
  return rep;
}

IntegralReport monte_carlo(const ConvexRegion& region, const TheoryParams& p,
                           const PsiIntegralOptions& opt) {
  if (opt.mc_samples < 2) throw DomainError("Monte Carlo estimator needs at least 2 samples");
  std::mt19937_64 rng(opt.seed);
  const double interior_value = p.n * psi(p.n, p.k, ball_volume(p.r_n));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < opt.mc_samples; ++i) {
    const Point3 x = sample_uniform(region, rng);
    const double f = region.dist_to_boundary(x) >= p.r_n
                         ? interior_value
                         : p.n * psi(p.n, p.k, clipped_ball_volume(region, x, p.r_n, opt.clip_samples));
    sum += f;
    sum_sq += f * f;
  }
  const auto m = static_cast<double>(opt.mc_samples);
  const double mean = sum / m;
  const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
  IntegralReport rep;
  rep.estimator = Estimator::kMonteCarlo;
  rep.value = region.volume() * mean;
  rep.error = region.volume() * std::sqrt(var / m);
  rep.samples = opt.mc_samples;
  return rep;
}

}  // namespace

std::string to_string(Estimator e) {
  switch (e) {
    case Estimator::kLayered:
      return "layered";
    case Estimator::kMonteCarlo:
      return "monte-carlo";
    case Estimator::kQuadrature1d:
      return "quadrature-1d";
  }
  return "unknown";
}

double xi_equation_constant(int k, double area) {
  require_k_3d(k);
  if (!(area > 0.0) || !std::isfinite(area)) throw DomainError("boundary area must be positive");
  return area * 4.0 / (3.0 * kPi) * std::pow(5.0 * kPi / 16.0, 2.0 / 3.0) *
         std::exp(k * std::log(2.0 / 3.0) - std::lgamma(k + 1.0));
}

double xi_equation_lhs(double xi, int k, double area) {
  return area * boundary_layer_asymptote(k, xi);
}

double solve_xi_3d(double c, int k, double area) {
  return 1.5 * (c + std::log(xi_equation_constant(k, area)));
}

double log_term_3d(double n, int k, double xi) {
  require_n(n);
  require_k_3d(k);
  const double log_n = std::log(n);
  return log_n + (1.5 * k - 1.0) * std::log(log_n) + xi;
}

double radius_3d(double n, int k, double xi) {
  const double term = log_term_3d(n, k, xi);
  if (!(term > 0.0)) {
    throw DomainError("radius_3d: log n + (3k/2 - 1) log log n + xi = " + std::to_string(term) +
                      " is not positive (xi too negative for this n)");
  }
  return std::cbrt(16.0 / (5.0 * kPi) * term / n);
}

TheoryParams make_params(double n, int k, double c, double area) {
  TheoryParams p;
  p.n = n;
  p.k = k;
  p.c = c;
  p.area = area;
  p.xi = solve_xi_3d(c, k, area);
  p.r_n = radius_3d(n, k, p.xi);
  return p;
}

double limit_probability(double c) { return std::exp(-std::exp(-c)); }

double solve_xi_2d(double c, int k, double perimeter) {
  if (k < 1) throw DomainError("solve_xi_2d requires k >= 1 (k = 0 uses c directly)");
  if (!(perimeter >= 0.0) || !std::isfinite(perimeter)) throw DomainError("boundary length must be nonnegative");
  // k = 1 has a finite l -> 0 limit (xi = c); k > 1 takes log l.
  if (k > 1 && perimeter == 0.0) throw DomainError("boundary length must be positive for k > 1");
  if (k == 1) {
    const double root = std::sqrt(std::exp(-c) + kPi * perimeter * perimeter / 64.0);
    return -2.0 * std::log(root - perimeter * std::sqrt(kPi) / 8.0);
  }
  return 2.0 * (std::log(perimeter * std::sqrt(kPi)) - (k + 1) * std::log(2.0) - std::lgamma(k + 1.0)) +
         2.0 * c;
}

double radius_2d(double n, int k, double param) {
  require_n(n);
  if (k < 0) throw DomainError("radius_2d requires k >= 0");
  const double log_n = std::log(n);
  const double term = k == 0 ? log_n + param : log_n + (2.0 * k - 1.0) * std::log(log_n) + param;
  if (!(term > 0.0)) {
    throw DomainError(k == 0 ? "radius_2d: log n + c is not positive"
                             : "radius_2d: log n + (2k - 1) log log n + xi is not positive");
  }
  return std::sqrt(term / (kPi * n));
}

double psi(double n, int k, double v) {
  if (k < 0) throw DomainError("psi requires k >= 0");
  if (!(v >= 0.0)) throw DomainError("psi requires v >= 0");
  const double mean = n * v;
  if (mean == 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

double boundary_layer_asymptote(int k, double xi) {
  require_k_3d(k);
  return 4.0 / (3.0 * kPi) * std::exp(-2.0 * xi / 3.0) * std::pow(5.0 * kPi / 16.0, 2.0 / 3.0) *
         std::exp(k * std::log(2.0 / 3.0) - std::lgamma(k + 1.0));
}

IntegralReport boundary_layer_integral(double n, int k, double xi) {
  const double r = radius_3d(n, k, xi);
  // t = r u keeps the integration variable O(1).
  auto f = [&](double u) {
    const double t = std::min(r * u, r);
    return psi(n, k, cap_volume_beyond(r, t));
  };
  const QuadratureResult q = adaptive_simpson(f, 0.0, 0.5, 1e-8, std::size_t{1} << 20);
  IntegralReport rep;
  rep.estimator = Estimator::kQuadrature1d;
  rep.value = n * r * q.value;
  rep.error = n * r * q.error;
  rep.samples = q.nodes;
  return rep;
}

IntegralReport psi_integral_over_region(const ConvexRegion& region, const TheoryParams& params,
                                        const PsiIntegralOptions& options) {
  if (!(params.r_n > 0.0)) throw DomainError("psi_integral_over_region requires r_n > 0");
  if (params.r_n > region.inradius()) {
    throw DomainError("r_n = " + std::to_string(params.r_n) + " exceeds the region inradius " +
                      std::to_string(region.inradius()) + "; asymptotic regime not reached");
  }
  if (options.estimator == Estimator::kQuadrature1d) {
    throw DomainError("the 1d estimator integrates the boundary layer only; use boundary_layer_integral");
  }
  if (options.estimator == Estimator::kLayered) {
    if (region.kind() == RegionKind::kBox) return layered_box(region, params);
    if (region.kind() == RegionKind::kBall) return layered_ball(region, params);
  }
  return monte_carlo(region, params, options);
}

}  // namespace rgg::theory
