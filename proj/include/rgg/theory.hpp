// Closed-form critical-radius calculators and the integrals behind the
// exp(-e^{-c}) limit law.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "rgg/geometry.hpp"

namespace rgg::theory {

/// (n, k, c, xi, r_n, boundary area) tied together by the 3D radius law.
/// `k` is the degree/connectivity offset: the events of interest are
/// min degree >= k+1 and k+1-connectivity.
struct TheoryParams {
  double n = 0.0;
  int k = 1;
  double c = 0.0;
  double xi = 0.0;
  double r_n = 0.0;
  double area = 0.0;
};

enum class Estimator { kLayered, kMonteCarlo, kQuadrature1d };

std::string to_string(Estimator e);

struct IntegralReport {
  double value = 0.0;
  Estimator estimator = Estimator::kLayered;
  std::size_t samples = 0;  // integrand evaluations or MC draws
  double error = 0.0;       // quadrature residual or MC one-sigma
};

// --- 3D ------------------------------------------------------------------

/// The constant K(k, area) with area * K * e^{-2 xi / 3} = e^{-c}.
double xi_equation_constant(int k, double area);

/// Left side of the xi-equation: area * boundary_layer_asymptote(k, xi).
double xi_equation_lhs(double xi, int k, double area);

/// Solves the xi-equation in closed form: xi = 3/2 (c + ln K).
double solve_xi_3d(double c, int k, double area);

/// log n + (3k/2 - 1) log log n + xi.
double log_term_3d(double n, int k, double xi);

/// r_n = ((16 / (5 pi)) * log_term_3d / n)^{1/3}. Requires n >= 3 and a
/// positive log term.
double radius_3d(double n, int k, double xi);

/// Builds the full parameter bundle from (n, k, c, area).
TheoryParams make_params(double n, int k, double c, double area);

/// exp(-e^{-c}).
double limit_probability(double c);

// --- 2D ------------------------------------------------------------------

/// xi for the planar law with boundary length l; k >= 1.
double solve_xi_2d(double c, int k, double perimeter);

/// Planar radius. For k = 0 `param` is c, otherwise it is xi.
double radius_2d(double n, int k, double param);

// --- Integrals -----------------------------------------------------------

/// (n v)^k e^{-n v} / k!, evaluated in log space.
double psi(double n, int k, double v);

/// 4/(3 pi) e^{-2 xi / 3} (5 pi / 16)^{2/3} (2/3)^k / k!.
double boundary_layer_asymptote(int k, double xi);

/// n * integral over [0, r_n / 2] of psi(n, k, cap_volume_beyond(r_n, t)) dt,
/// by adaptive Simpson (relative tolerance 1e-8, node cap 2^20).
IntegralReport boundary_layer_integral(double n, int k, double xi);

struct PsiIntegralOptions {
  Estimator estimator = Estimator::kLayered;
  std::size_t mc_samples = 200'000;
  std::uint64_t seed = 1;
  int clip_samples = kDefaultClipSamples;
};

/// n * integral over the region of psi(n, k, |B(x, r_n) intersected with region|) dx.
///
/// The layered estimator treats the interior {dist >= r_n} in closed form and
/// integrates the boundary layer by depth quadrature for balls and boxes;
/// other shapes use plain Monte Carlo. Throws DomainError when r_n exceeds
/// the region's inradius.
IntegralReport psi_integral_over_region(const ConvexRegion& region, const TheoryParams& params,
                                        const PsiIntegralOptions& options = {});

}  // namespace rgg::theory
