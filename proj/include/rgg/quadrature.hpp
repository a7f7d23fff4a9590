// Adaptive Simpson quadrature with a relative tolerance and a node budget.

#pragma once

#include <cmath>
#include <cstddef>

namespace rgg {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;       // sum of local Richardson error estimates
  std::size_t nodes = 0;    // integrand evaluations
  bool converged = true;    // false if the node budget ran out
};

namespace detail {

template <class F>
struct SimpsonState {
  F& f;
  double abs_tol;
  std::size_t max_nodes;
  std::size_t nodes;
  double error;
  bool converged;
};

template <class F>
double simpson_recurse(SimpsonState<F>& st, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  st.nodes += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || st.nodes >= st.max_nodes) {
    if (std::abs(delta) > 15.0 * tol) st.converged = false;
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (std::abs(delta) <= 15.0 * tol) {
    st.error += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Integrates f over [a, b]. The absolute target is rel_tol times a coarse
/// estimate of the integral of |f| (a 33-point composite Simpson pass), so
/// the tolerance is relative to the integral's magnitude.
template <class F>
QuadratureResult adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-8,
                                  std::size_t max_nodes = std::size_t{1} << 20) {
  QuadratureResult out;
  if (a == b) return out;

  constexpr int kPanels = 32;
  const double h = (b - a) / kPanels;
  double coarse = 0.0;
  for (int i = 0; i <= kPanels; ++i) {
    const double w = (i == 0 || i == kPanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    coarse += w * std::abs(f(a + i * h));
  }
  coarse *= h / 3.0;
  const double abs_tol = rel_tol * (coarse > 0.0 ? coarse : 1.0);

  detail::SimpsonState<F> st{f, abs_tol, max_nodes, kPanels + 1, 0.0, true};
  // Start from the coarse panels so narrow peaks are not missed.
  double total = 0.0;
  constexpr int kSegments = kPanels / 2;
  const double seg = (b - a) / kSegments;
  for (int i = 0; i < kSegments; ++i) {
    const double lo = a + i * seg;
    const double hi = (i + 1 == kSegments) ? b : lo + seg;
    const double flo = f(lo);
    const double fmid = f(0.5 * (lo + hi));
    const double fhi = f(hi);
    st.nodes += 3;
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_recurse(st, lo, hi, flo, fmid, fhi, whole, abs_tol / kSegments, 50);
  }
  out.value = total;
  out.error = st.error;
  out.nodes = st.nodes;
  out.converged = st.converged;
  return out;
}

}  // namespace rgg
