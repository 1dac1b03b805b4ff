#pragma once

// Coarea integration over hyperboloids F_w and cones H^t, bulk integrals over
// D^{s,t}_{r,w}, the four-term boundary sum and divergence-theorem residuals.

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <vector>

#include "uclab/currents.hpp"
#include "uclab/error.hpp"
#include "uclab/geometry.hpp"
#include "uclab/grid.hpp"

namespace uclab {

using Integrand = std::function<double(double u, double v)>;
using CurrentFn = std::function<CurrentLocal(double u, double v)>;

/// Compensated (Neumaier) accumulator.
class NeumaierSum {
 public:
  void add(double x) {
    const double t = s_ + x;
    if (std::abs(s_) >= std::abs(x))
      c_ += (s_ - t) + x;
    else
      c_ += (x - t) + s_;
    s_ = t;
  }
  NeumaierSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return s_ + c_; }

 private:
  double s_ = 0.0, c_ = 0.0;
};

/// Angular factor: 1 for integrands quadratic in a normalized mode, |S^{n-1}| for mode-free ones.
enum class ModeFactor { normalized, mode_free };

inline double mode_factor(ModeFactor m, int n) { return m == ModeFactor::normalized ? 1.0 : sphere_area(n); }

struct QuadratureOptions {
  int nodes = 128;  // Gauss-Legendre nodes per panel
  int panels = 1;   // panels, equally spaced in log h (surfaces) or (s, y) (bulk)
  ModeFactor mode = ModeFactor::normalized;
};

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
};

inline const GaussRule& gauss_legendre(int m) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[m];
  if (!slot) {
    auto rule = std::make_unique<GaussRule>();
    const auto zeros = boost::math::legendre_p_zeros<double>(m);
    auto push = [&](double z) {
      const double dp = boost::math::legendre_p_prime(m, z);
      rule->x.push_back(z);
      rule->w.push_back(2.0 / ((1.0 - z * z) * dp * dp));
    };
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
      if (*it != 0.0) push(-*it);
    for (double z : zeros) push(z);
    slot = std::move(rule);
  }
  return *slot;
}

/// Composite Gauss-Legendre over [a, b] split at the given interior breakpoints.
template <class Fn>
double gauss_composite(Fn&& fn, const std::vector<double>& breaks, int m) {
  const GaussRule& g = gauss_legendre(m);
  NeumaierSum acc;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k], b = breaks[k + 1];
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    for (std::size_t i = 0; i < g.x.size(); ++i) acc += hw * g.w[i] * fn(c + hw * g.x[i]);
  }
  return acc.value();
}

namespace detail {

inline void require_cutoffs(double lo, double hi, const char* what) {
  if (!(lo > 0.0 && hi > lo && std::isfinite(hi))) {
    std::ostringstream os;
    os << what << " cutoffs must satisfy 0 < lo < hi, got (" << lo << ", " << hi << ")";
    throw Error(ErrorCode::invalid_cutoffs, os.str());
  }
}

inline void require_nodes(const QuadratureOptions& o) {
  require(o.nodes >= 16, ErrorCode::invalid_input, "quadrature needs at least 16 nodes");
  require(o.panels >= 1, ErrorCode::invalid_input, "panel count must be positive");
}

/// Breakpoints in x = map(log c) for c equally spaced in log between lo and hi.
template <class Map>
std::vector<double> log_breaks(double lo, double hi, int panels, Map map) {
  std::vector<double> b(panels + 1);
  const double l0 = std::log(lo), l1 = std::log(hi);
  for (int k = 0; k <= panels; ++k) b[k] = map(std::exp(l0 + (l1 - l0) * k / panels));
  b.front() = map(lo);
  b.back() = map(hi);
  return b;
}

}  // namespace detail

inline double hyperboloid_t(double omega, double h) { return std::sqrt(omega) * (std::sqrt(h) - 1.0 / std::sqrt(h)); }
inline double cone_r(double tau, double f) { return std::sqrt(f) * (std::sqrt(tau) + 1.0 / std::sqrt(tau)); }

/// int_{F^{s,t}_w} Psi = 2 w^{1/2} int Psi r^{n-2} dt over f = w.
inline double integrate_hyperboloid(double omega, double sigma, double tau, const Integrand& psi, int n,
                                    const QuadratureOptions& o = {}) {
  require(omega > 0.0, ErrorCode::invalid_cutoffs, "omega must be positive");
  detail::require_cutoffs(sigma, tau, "hyperboloid");
  detail::require_nodes(o);
  const auto breaks = detail::log_breaks(sigma, tau, o.panels, [&](double h) { return hyperboloid_t(omega, h); });
  const double val = gauss_composite(
      [&](double t) {
        const double r = std::sqrt(t * t + 4.0 * omega);
        const NullPair q = null_from_rect(t, r);
        return psi(q.u, q.v) * std::pow(r, n - 2);
      },
      breaks, o.nodes);
  return 2.0 * std::sqrt(omega) * mode_factor(o.mode, n) * val;
}

/// int_{H^t_{r,w}} Psi = 2 int f^{1/2} Psi r^{n-2} dr over h = tau.
inline double integrate_cone(double tau, double rho, double omega, const Integrand& psi, int n,
                             const QuadratureOptions& o = {}) {
  require(tau > 0.0, ErrorCode::invalid_cutoffs, "tau must be positive");
  detail::require_cutoffs(rho, omega, "cone");
  detail::require_nodes(o);
  const double c = (tau - 1.0) / (tau + 1.0);  // t = c r on h = tau
  const double k = std::sqrt(tau) + 1.0 / std::sqrt(tau);
  const auto breaks = detail::log_breaks(rho, omega, o.panels, [&](double f) { return cone_r(tau, f); });
  const double val = gauss_composite(
      [&](double r) {
        const NullPair q = null_from_rect(c * r, r);
        const double sf = r / k;  // f^{1/2}
        return sf * psi(q.u, q.v) * std::pow(r, n - 2);
      },
      breaks, o.nodes);
  return 2.0 * mode_factor(o.mode, n) * val;
}

/// The same hyperboloid integral evaluated on the inverted hyperboloid f-bar = 1/w:
///   2 w^{n-1/2} int Psi r-bar^{n-2} dt-bar, with Psi read at the inverted point.
inline double integrate_hyperboloid_inverted(double omega, double sigma, double tau, const Integrand& psi, int n,
                                             const QuadratureOptions& o = {}) {
  require(omega > 0.0, ErrorCode::invalid_cutoffs, "omega must be positive");
  detail::require_cutoffs(sigma, tau, "hyperboloid");
  detail::require_nodes(o);
  const double wb = 1.0 / omega;
  const auto breaks = detail::log_breaks(sigma, tau, o.panels, [&](double h) { return hyperboloid_t(wb, h); });
  const double val = gauss_composite(
      [&](double tb) {
        const double rb = std::sqrt(tb * tb + 4.0 * wb);
        const NullPair qb = null_from_rect(tb, rb);
        const SpacetimePoint q = invert(SpacetimePoint(qb.u, qb.v));
        return psi(q.u(), q.v()) * std::pow(rb, n - 2);
      },
      breaks, o.nodes);
  return 2.0 * std::pow(omega, n - 0.5) * mode_factor(o.mode, n) * val;
}

/// int_D Psi dvol with dvol = r^{n-1} f ds dy on the (s, y) chart (2 r^{n-1} du dv).
inline double integrate_bulk(const AdmissibleRegion& reg, const Integrand& psi, int n,
                             const QuadratureOptions& o = {}) {
  reg.validate();
  detail::require_nodes(o);
  const GaussRule& g = gauss_legendre(o.nodes);
  const double s0 = std::log(reg.rho), s1 = std::log(reg.omega);
  const double y0 = std::log(reg.sigma), y1 = std::log(reg.tau);
  NeumaierSum acc;
  const int P = o.panels;
  for (int a = 0; a < P; ++a) {
    const double sa = s0 + (s1 - s0) * a / P, sb = s0 + (s1 - s0) * (a + 1) / P;
    const double sc = 0.5 * (sa + sb), sh = 0.5 * (sb - sa);
    for (int b = 0; b < P; ++b) {
      const double ya = y0 + (y1 - y0) * b / P, yb = y0 + (y1 - y0) * (b + 1) / P;
      const double yc = 0.5 * (ya + yb), yh = 0.5 * (yb - ya);
      for (std::size_t i = 0; i < g.x.size(); ++i) {
        const double s = sc + sh * g.x[i];
        for (std::size_t j = 0; j < g.x.size(); ++j) {
          const double y = yc + yh * g.x[j];
          const double u = -std::exp(0.5 * (s - y)), v = std::exp(0.5 * (s + y));
          acc += sh * yh * g.w[i] * g.w[j] * psi(u, v) * std::pow(v - u, n - 1) * std::exp(s);
        }
      }
    }
  }
  return mode_factor(o.mode, n) * acc.value();
}

/// Signed four-term boundary sum
///   int_{F_w} f^{-1/2} P.grad f - int_{F_r} f^{-1/2} P.grad f
///   + int_{H^t} f^{-1/2} u^2 P.grad h - int_{H^s} f^{-1/2} u^2 P.grad h,
/// which equals int_D div P.
inline double boundary_sum(const CurrentFn& P, const AdmissibleRegion& reg, int n, const QuadratureOptions& o = {}) {
  reg.validate();
  auto pf = [&](double u, double v) { return P(u, v).dot_grad_f(u, v) / std::sqrt(-u * v); };
  auto ph = [&](double u, double v) { return P(u, v).u2_dot_grad_h(u, v) / std::sqrt(-u * v); };
  return integrate_hyperboloid(reg.omega, reg.sigma, reg.tau, pf, n, o) -
         integrate_hyperboloid(reg.rho, reg.sigma, reg.tau, pf, n, o) +
         integrate_cone(reg.tau, reg.rho, reg.omega, ph, n, o) - integrate_cone(reg.sigma, reg.rho, reg.omega, ph, n, o);
}

// ------------------------------------------------------------ grid-based

/// Fourth-order end-corrected trapezoid weights on m nodes of spacing h.
inline std::vector<double> gregory_weights(int m, double h) {
  require(m >= 8, ErrorCode::grid_too_coarse, "grid quadrature needs at least 8 nodes per axis");
  std::vector<double> w(m, h);
  const double e[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (int k = 0; k < 3; ++k) {
    w[k] = e[k] * h;
    w[m - 1 - k] = e[k] * h;
  }
  return w;
}

struct GridWindow {
  int i0, i1, j0, j1;  // inclusive node ranges in s and y
};

inline GridWindow window_of(const GridSpec& g, const AdmissibleRegion& reg) {
  reg.validate();
  const double s0 = std::log(reg.rho), s1 = std::log(reg.omega);
  const double y0 = std::log(reg.sigma), y1 = std::log(reg.tau);
  const double tol = 1e-9;
  if (s0 < g.s0 - tol || s1 > g.s1 + tol || y0 < g.y0 - tol || y1 > g.y1 + tol)
    throw Error(ErrorCode::region_out_of_grid, "region extends beyond the grid");
  GridWindow w{snap_index(s0, g.s0, g.ds(), g.ns), snap_index(s1, g.s0, g.ds(), g.ns),
               snap_index(y0, g.y0, g.dy(), g.ny), snap_index(y1, g.y0, g.dy(), g.ny)};
  if (w.i0 < 0 || w.i1 < 0 || w.j0 < 0 || w.j1 < 0)
    throw Error(ErrorCode::region_mismatch, "region bounds do not fall on grid lines");
  return w;
}

inline AdmissibleRegion region_of(const GridSpec& g) {
  return {std::exp(g.s0), std::exp(g.s1), std::exp(g.y0), std::exp(g.y1)};
}

/// Bulk integral of nodal values over the grid window of a region.
inline double integrate_bulk(const GridSpec& g, const std::vector<double>& vals, const AdmissibleRegion& reg, int n,
                             ModeFactor mode = ModeFactor::normalized) {
  require(vals.size() == g.size(), ErrorCode::invalid_input, "value count does not match grid");
  const GridWindow w = window_of(g, reg);
  const auto ws = gregory_weights(w.i1 - w.i0 + 1, g.ds());
  const auto wy = gregory_weights(w.j1 - w.j0 + 1, g.dy());
  NeumaierSum acc;
  for (int i = w.i0; i <= w.i1; ++i)
    for (int j = w.j0; j <= w.j1; ++j)
      acc += ws[i - w.i0] * wy[j - w.j0] * vals[g.index(i, j)] * std::pow(g.r(i, j), n - 1) * g.f(i);
  return mode_factor(mode, n) * acc.value();
}

inline double integrate_bulk(const ScalarField& fld, const AdmissibleRegion& reg, int n,
                             ModeFactor mode = ModeFactor::normalized) {
  return integrate_bulk(fld.grid(), fld.values(), reg, n, mode);
}

/// Four-term boundary sum of a gridded current along the grid lines bounding the region.
inline double boundary_sum(const CurrentField& P, const AdmissibleRegion& reg, int n,
                           ModeFactor mode = ModeFactor::normalized) {
  const GridSpec& g = P.grid;
  const GridWindow w = window_of(g, reg);
  const auto Pf = contract(P, Direction::f).values();
  const auto Ph = contract(P, Direction::h).values();
  const auto ws = gregory_weights(w.i1 - w.i0 + 1, g.ds());
  const auto wy = gregory_weights(w.j1 - w.j0 + 1, g.dy());
  NeumaierSum acc;
  for (int j = w.j0; j <= w.j1; ++j) {
    acc += wy[j - w.j0] * Pf[g.index(w.i1, j)] * std::pow(g.r(w.i1, j), n - 1);
    acc += -wy[j - w.j0] * Pf[g.index(w.i0, j)] * std::pow(g.r(w.i0, j), n - 1);
  }
  for (int i = w.i0; i <= w.i1; ++i) {
    acc += ws[i - w.i0] * Ph[g.index(i, w.j1)] * std::pow(g.r(i, w.j1), n - 1);
    acc += -ws[i - w.i0] * Ph[g.index(i, w.j0)] * std::pow(g.r(i, w.j0), n - 1);
  }
  return mode_factor(mode, n) * acc.value();
}

/// |int_D div P - boundary_sum(P)| on the grid.
inline double divergence_residual(const CurrentField& P, const AdmissibleRegion& reg, int n) {
  const double bulk = integrate_bulk(P.grid, divergence(P, n), reg, n);
  return std::abs(bulk - boundary_sum(P, reg, n));
}

}  // namespace uclab
