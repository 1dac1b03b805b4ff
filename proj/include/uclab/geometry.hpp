#pragma once

// Coordinates on the exterior region |t| < r of Minkowski space.
//
// Null coordinates (u, v) are canonical; (t, r) and the hyperbolic pair
// f = -uv, h = -v/u are derived. Level sets of f are timelike hyperboloids,
// level sets of h are spacelike cones, and the two foliations are orthogonal.

#include <cmath>
#include <numbers>
#include <sstream>

#include "uclab/error.hpp"

namespace uclab {

struct Dimension {
  int n = 3;

  explicit Dimension(int spatial) : n(spatial) {
    require(spatial >= 2, ErrorCode::invalid_input, "spatial dimension must be >= 2");
  }
};

/// Angular eigenvalue l(l+n-2) of the unit sphere S^{n-1}.
inline double angular_eigenvalue(int ell, int n) {
  return static_cast<double>(ell) * static_cast<double>(ell + n - 2);
}

/// Area of the unit sphere S^{n-1}.
inline double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

struct NullPair {
  double u = 0.0;
  double v = 0.0;
};

struct HyperbolicPair {
  double f = 0.0;
  double h = 0.0;
};

inline NullPair null_from_rect(double t, double r) {
  require(r >= 0.0, ErrorCode::invalid_input, "radius must be non-negative");
  return {0.5 * (t - r), 0.5 * (t + r)};
}

inline bool in_exterior(double u, double v) { return u < 0.0 && v > 0.0; }

inline HyperbolicPair hyperbolic(double u, double v) {
  if (!in_exterior(u, v)) {
    std::ostringstream os;
    os << "(u, v) = (" << u << ", " << v << ") violates u < 0 < v";
    throw Error(ErrorCode::outside_exterior_region, os.str());
  }
  return {-u * v, -v / u};
}

class SpacetimePoint {
 public:
  SpacetimePoint(double u, double v) : u_(u), v_(v) {
    if (!in_exterior(u, v)) {
      std::ostringstream os;
      os << "(u, v) = (" << u << ", " << v << ") violates u < 0 < v";
      throw Error(ErrorCode::outside_exterior_region, os.str());
    }
  }

  static SpacetimePoint from_rect(double t, double r) {
    const NullPair p = null_from_rect(t, r);
    return {p.u, p.v};
  }

  double u() const { return u_; }
  double v() const { return v_; }
  double t() const { return u_ + v_; }
  double r() const { return v_ - u_; }
  double f() const { return -u_ * v_; }
  double h() const { return -v_ / u_; }

 private:
  double u_;
  double v_;
};

/// The unique exterior point with (f, h) = (omega, tau).
inline SpacetimePoint point_from_fh(double omega, double tau) {
  require(omega > 0.0 && tau > 0.0, ErrorCode::invalid_input, "f and h values must be positive");
  const double so = std::sqrt(omega), st = std::sqrt(tau);
  return {-so / st, so * st};
}

/// Conformal inversion u -> -1/v, v -> -1/u. Sends f to 1/f and fixes h.
inline SpacetimePoint invert(const SpacetimePoint& q) { return {-1.0 / q.v(), -1.0 / q.u()}; }

/// Metric contractions of grad f and grad h in g = -4 du dv + r^2 (round sphere).
struct MetricData {
  double grad_f_sq;       // g(grad f, grad f) = f
  double grad_h_sq;       // g(grad h, grad h) = -u^{-4} f
  double grad_f_grad_h;   // 0
  double box_f;           // (n + 1) / 2
  double volume_density;  // 2 r^{n-1} in (u, v, angles)
};

inline MetricData metric_data(const SpacetimePoint& q, int n) {
  Dimension{n};
  const double u = q.u(), v = q.v();
  const double f = q.f();
  // grad f = -1/2 (u_v f d_u + ...) via g^{uv} = -1/2
  const double fu = -v, fv = -u;
  const double hu = v / (u * u), hv = -1.0 / u;
  const double g_uv_inv = -0.5;
  MetricData m{};
  m.grad_f_sq = 2.0 * g_uv_inv * fu * fv;
  m.grad_h_sq = 2.0 * g_uv_inv * hu * hv;
  m.grad_f_grad_h = g_uv_inv * (fu * hv + fv * hu);
  m.box_f = 0.5 * (n + 1);
  m.volume_density = 2.0 * std::pow(q.r(), n - 1);
  (void)f;
  return m;
}

/// D^{sigma,tau}_{rho,omega} = { rho < f < omega, sigma < h < tau }.
struct AdmissibleRegion {
  double rho = 0.0;
  double omega = 0.0;
  double sigma = 0.0;
  double tau = 0.0;

  AdmissibleRegion() = default;
  AdmissibleRegion(double rho_, double omega_, double sigma_, double tau_)
      : rho(rho_), omega(omega_), sigma(sigma_), tau(tau_) {
    validate();
  }

  void validate() const {
    require(rho > 0.0 && rho < omega && std::isfinite(omega), ErrorCode::invalid_input,
            "region requires 0 < rho < omega < inf");
    require(sigma > 0.0 && sigma < tau && std::isfinite(tau), ErrorCode::invalid_input,
            "region requires 0 < sigma < tau < inf");
  }

  /// Open-set membership; a positive band widens the test by that relative amount.
  bool contains(const SpacetimePoint& q, double band = 0.0) const {
    const double f = q.f(), h = q.h();
    return f > rho * (1.0 - band) && f < omega * (1.0 + band) && h > sigma * (1.0 - band) &&
           h < tau * (1.0 + band);
  }
};

}  // namespace uclab
