#pragma once

// Structured grids in (s, y) = (log f, log h) and the finite-difference
// stencils used on them.
//
//   u = -exp((s - y)/2),  v = exp((s + y)/2)
//   u d_u = d_s - d_y,    v d_v = d_s + d_y

#include <cmath>
#include <sstream>
#include <vector>

#include "uclab/error.hpp"
#include "uclab/geometry.hpp"

namespace uclab {

struct GridSpec {
  int n = 3;
  int ell = 0;
  double s0 = 0.0, s1 = 0.0;
  int ns = 0;
  double y0 = 0.0, y1 = 0.0;
  int ny = 0;
  int fd_order = 4;

  GridSpec() = default;
  GridSpec(int n_, int ell_, double s0_, double s1_, int ns_, double y0_, double y1_, int ny_,
           int fd_order_ = 4)
      : n(n_), ell(ell_), s0(s0_), s1(s1_), ns(ns_), y0(y0_), y1(y1_), ny(ny_), fd_order(fd_order_) {
    validate();
  }

  /// Grid covering rho <= f <= omega, sigma <= h <= tau.
  static GridSpec over(const AdmissibleRegion& reg, int n, int ell, int ns, int ny, int fd_order = 4) {
    return {n, ell, std::log(reg.rho), std::log(reg.omega), ns, std::log(reg.sigma), std::log(reg.tau), ny,
            fd_order};
  }

  void validate() const {
    Dimension{n};
    require(ell >= 0, ErrorCode::invalid_input, "angular mode must be >= 0");
    require(std::isfinite(s0) && std::isfinite(s1) && s0 < s1, ErrorCode::invalid_input, "bad s-range");
    require(std::isfinite(y0) && std::isfinite(y1) && y0 < y1, ErrorCode::invalid_input, "bad y-range");
    require(ns >= 8 && ny >= 8, ErrorCode::grid_too_coarse, "grids need at least 8 nodes per axis");
    require(fd_order == 2 || fd_order == 4, ErrorCode::invalid_input, "fd_order must be 2 or 4");
  }

  std::size_t size() const { return static_cast<std::size_t>(ns) * static_cast<std::size_t>(ny); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * ny + j; }
  double ds() const { return (s1 - s0) / (ns - 1); }
  double dy() const { return (y1 - y0) / (ny - 1); }
  double s(int i) const { return i == ns - 1 ? s1 : s0 + i * ds(); }
  double y(int j) const { return j == ny - 1 ? y1 : y0 + j * dy(); }
  double f(int i) const { return std::exp(s(i)); }
  double h(int j) const { return std::exp(y(j)); }
  double u(int i, int j) const { return -std::exp(0.5 * (s(i) - y(j))); }
  double v(int i, int j) const { return std::exp(0.5 * (s(i) + y(j))); }
  double r(int i, int j) const { return v(i, j) - u(i, j); }
  double t(int i, int j) const { return v(i, j) + u(i, j); }
  SpacetimePoint point(int i, int j) const { return {u(i, j), v(i, j)}; }
  double lambda() const { return angular_eigenvalue(ell, n); }

  /// Same ranges, (N - 1) -> k (N - 1) intervals.
  GridSpec refined(int k) const {
    return {n, ell, s0, s1, (ns - 1) * k + 1, y0, y1, (ny - 1) * k + 1, fd_order};
  }

  bool same_nodes(const GridSpec& o) const {
    return ns == o.ns && ny == o.ny && s0 == o.s0 && s1 == o.s1 && y0 == o.y0 && y1 == o.y1;
  }
};

namespace fd {

// First derivative along one axis of strided data.
inline void d1(const double* in, double* out, int N, std::ptrdiff_t stride, double h, int order) {
  auto at = [&](int k) { return in[k * stride]; };
  auto put = [&](int k, double x) { out[k * stride] = x; };
  require(N >= 6, ErrorCode::grid_too_coarse, "need at least 6 nodes for differencing");
  if (order == 4) {
    put(0, (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) - 3.0 * at(4)) / (12.0 * h));
    put(1, (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) / (12.0 * h));
    put(N - 1, (25.0 * at(N - 1) - 48.0 * at(N - 2) + 36.0 * at(N - 3) - 16.0 * at(N - 4) + 3.0 * at(N - 5)) / (12.0 * h));
    put(N - 2, (3.0 * at(N - 1) + 10.0 * at(N - 2) - 18.0 * at(N - 3) + 6.0 * at(N - 4) - at(N - 5)) / (12.0 * h));
    for (int k = 2; k < N - 2; ++k)
      put(k, (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * h));
  } else {
    put(0, (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h));
    put(N - 1, (3.0 * at(N - 1) - 4.0 * at(N - 2) + at(N - 3)) / (2.0 * h));
    for (int k = 1; k < N - 1; ++k) put(k, (at(k + 1) - at(k - 1)) / (2.0 * h));
  }
}

inline void d2(const double* in, double* out, int N, std::ptrdiff_t stride, double h, int order) {
  auto at = [&](int k) { return in[k * stride]; };
  auto put = [&](int k, double x) { out[k * stride] = x; };
  require(N >= 6, ErrorCode::grid_too_coarse, "need at least 6 nodes for differencing");
  const double h2 = h * h;
  if (order == 4) {
    auto edge0 = [&](int k, int sgn) {
      return (45.0 * at(k) - 154.0 * at(k + sgn) + 214.0 * at(k + 2 * sgn) - 156.0 * at(k + 3 * sgn) +
              61.0 * at(k + 4 * sgn) - 10.0 * at(k + 5 * sgn)) / (12.0 * h2);
    };
    auto edge1 = [&](int k, int sgn) {
      return (10.0 * at(k - sgn) - 15.0 * at(k) - 4.0 * at(k + sgn) + 14.0 * at(k + 2 * sgn) - 6.0 * at(k + 3 * sgn) +
              at(k + 4 * sgn)) / (12.0 * h2);
    };
    put(0, edge0(0, 1));
    put(1, edge1(1, 1));
    put(N - 1, edge0(N - 1, -1));
    put(N - 2, edge1(N - 2, -1));
    for (int k = 2; k < N - 2; ++k)
      put(k, (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * at(k) + 16.0 * at(k + 1) - at(k + 2)) / (12.0 * h2));
  } else {
    put(0, (2.0 * at(0) - 5.0 * at(1) + 4.0 * at(2) - at(3)) / h2);
    put(N - 1, (2.0 * at(N - 1) - 5.0 * at(N - 2) + 4.0 * at(N - 3) - at(N - 4)) / h2);
    for (int k = 1; k < N - 1; ++k) put(k, (at(k - 1) - 2.0 * at(k) + at(k + 1)) / h2);
  }
}

inline std::vector<double> ds(const GridSpec& g, const std::vector<double>& a) {
  std::vector<double> out(a.size());
  for (int j = 0; j < g.ny; ++j) d1(a.data() + j, out.data() + j, g.ns, g.ny, g.ds(), g.fd_order);
  return out;
}

inline std::vector<double> dy(const GridSpec& g, const std::vector<double>& a) {
  std::vector<double> out(a.size());
  for (int i = 0; i < g.ns; ++i)
    d1(a.data() + g.index(i, 0), out.data() + g.index(i, 0), g.ny, 1, g.dy(), g.fd_order);
  return out;
}

inline std::vector<double> dss(const GridSpec& g, const std::vector<double>& a) {
  std::vector<double> out(a.size());
  for (int j = 0; j < g.ny; ++j) d2(a.data() + j, out.data() + j, g.ns, g.ny, g.ds(), g.fd_order);
  return out;
}

inline std::vector<double> dyy(const GridSpec& g, const std::vector<double>& a) {
  std::vector<double> out(a.size());
  for (int i = 0; i < g.ns; ++i)
    d2(a.data() + g.index(i, 0), out.data() + g.index(i, 0), g.ny, 1, g.dy(), g.fd_order);
  return out;
}

}  // namespace fd

/// Lagrange interpolation weights on equispaced nodes x0 + k h, k = 0..m-1.
inline std::vector<double> lagrange_weights(double x, double x0, double h, int m) {
  std::vector<double> w(m, 1.0);
  const double xi = (x - x0) / h;
  for (int k = 0; k < m; ++k)
    for (int q = 0; q < m; ++q)
      if (q != k) w[k] *= (xi - q) / static_cast<double>(k - q);
  return w;
}

/// First index of an m-point stencil around x on an N-node axis, clamped inside.
inline int stencil_start(double x, double x0, double h, int N, int m) {
  int k = static_cast<int>(std::floor((x - x0) / h)) - (m / 2 - 1);
  if (k < 0) k = 0;
  if (k > N - m) k = N - m;
  return k;
}

/// Node index where coordinate c falls on the axis, if it lies on a node.
inline int snap_index(double c, double c0, double h, int N, double tol = 1e-9) {
  const double x = (c - c0) / h;
  const long k = std::lround(x);
  if (std::abs(x - static_cast<double>(k)) > tol * std::max(1.0, std::abs(x)) || k < 0 || k > N - 1)
    return -1;
  return static_cast<int>(k);
}

}  // namespace uclab
