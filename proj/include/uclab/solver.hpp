#pragma once

// Mode-reduced wave evolution for  box phi +/- V |phi|^{p-1} phi = 0  in (t, r),
// exact reference solutions and the compactly supported potential counterexample.

#include <array>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "uclab/closed_form.hpp"
#include "uclab/error.hpp"
#include "uclab/field.hpp"
#include "uclab/geometry.hpp"
#include "uclab/grid.hpp"
#include "uclab/weights.hpp"

namespace uclab {

struct CauchyData {
  int ell = 0;
  std::function<double(double)> phi0;  // phi(0, r)
  std::function<double(double)> phi1;  // d_t phi(0, r)
  double support_radius = 0.0;         // both profiles vanish for r >= support_radius
};

/// Right-hand side term sign * V(t, r) |phi|^{p-1} phi.
struct WaveEquation {
  std::function<double(double, double)> V;  // empty for the free equation
  int sign = 1;
  double p = 1.0;

  static WaveEquation free() { return {}; }
  static WaveEquation with(const Potential& pot, int sign, double p) {
    require(sign == 1 || sign == -1, ErrorCode::invalid_input, "sign must be +1 or -1");
    require(p >= 1.0, ErrorCode::invalid_input, "power nonlinearity needs p >= 1");
    WaveEquation e;
    e.V = [pot](double t, double r) { return pot.value(0.5 * (t - r), 0.5 * (t + r)); };
    e.sign = sign;
    e.p = p;
    return e;
  }
  bool linear() const { return !V || p == 1.0; }
  double source(double t, double r, double phi) const {
    if (!V) return 0.0;
    const double m = p == 1.0 ? phi : std::pow(std::abs(phi), p - 1.0) * phi;
    return sign * V(t, r) * m;
  }
};

struct SolverOptions {
  double dr = 0.01;
  double dt = 0.0;            // 0 selects 0.5 dr / sqrt(1 + lambda)
  double R = 0.0;             // outer radius, 0 selects the smallest causally safe value
  double store_radius = 0.0;  // radius of retained time levels, 0 selects what the output needs
};

/// Time levels of a run, cell-centered at r_j = (j + 1/2) dr.
struct Evolution {
  int n = 3;
  int ell = 0;
  double dr = 0.0, dt = 0.0, R = 0.0;
  int cells = 0;            // total cells
  int stored = 0;           // cells retained per level
  int k_min = 0, k_max = 0;  // time index range, t = k dt
  std::vector<double> data;  // (k - k_min) * stored + j
  std::vector<double> energy_forward;  // staggered energy per forward step

  double r_at(int j) const { return (j + 0.5) * dr; }
  double at(int k, int j) const { return data[static_cast<std::size_t>(k - k_min) * stored + j]; }

  /// Six-point Lagrange interpolation in t and r.
  double sample(double t, double r) const {
    constexpr int m = 6;
    const int nt = k_max - k_min + 1;
    const double t0 = k_min * dt, r0 = 0.5 * dr;
    require(t >= t0 - 1e-12 && t <= k_max * dt + 1e-12 && r <= r_at(stored - 1) && r >= 0.0,
            ErrorCode::domain_too_small, "sample point outside stored evolution");
    const int kt = stencil_start(t, t0, dt, nt, m);
    const int kr = stencil_start(r, r0, dr, stored, m);
    const auto wt = lagrange_weights(t, t0 + kt * dt, dt, m);
    const auto wr = lagrange_weights(r, r0 + kr * dr, dr, m);
    double acc = 0.0;
    for (int a = 0; a < m; ++a) {
      double row = 0.0;
      for (int b = 0; b < m; ++b) row += wr[b] * at(k_min + kt + a, kr + b);
      acc += wt[a] * row;
    }
    return acc;
  }
};

namespace detail {

struct RadialOperator {
  int n;
  double lambda, dr;
  std::vector<double> coef_lo, coef_hi, vol;

  RadialOperator(int n_, double lambda_, double dr_, int J) : n(n_), lambda(lambda_), dr(dr_) {
    coef_lo.resize(J), coef_hi.resize(J), vol.resize(J);
    for (int j = 0; j < J; ++j) {
      vol[j] = (std::pow(j + 1.0, n) - std::pow(static_cast<double>(j), n)) * std::pow(dr, n) / n;
      const double a_lo = j == 0 ? 0.0 : std::pow(j * dr, n - 1);
      const double a_hi = std::pow((j + 1) * dr, n - 1);
      coef_lo[j] = a_lo / (dr * vol[j]);
      coef_hi[j] = a_hi / (dr * vol[j]);
    }
  }

  /// Volume-weighted Laplacian minus lambda / r^2, Dirichlet zero beyond the last cell.
  void apply(const std::vector<double>& x, std::vector<double>& out) const {
    const int J = static_cast<int>(x.size());
    for (int j = 0; j < J; ++j) {
      const double xm = j > 0 ? x[j - 1] : 0.0;
      const double xp = j + 1 < J ? x[j + 1] : 0.0;
      const double r = (j + 0.5) * dr;
      out[j] = coef_hi[j] * (xp - x[j]) - coef_lo[j] * (x[j] - xm) - lambda * x[j] / (r * r);
    }
  }
};

}  // namespace detail

inline Evolution evolve(const WaveEquation& eq, const CauchyData& data, double t_min, double t_max, int n,
                        double r_needed, const SolverOptions& opt = {}) {
  Dimension{n};
  require(t_min <= 0.0 && t_max >= 0.0, ErrorCode::invalid_input, "time range must contain t = 0");
  require(data.phi0 && data.phi1, ErrorCode::invalid_input, "Cauchy data needs both profiles");
  require(data.support_radius > 0.0, ErrorCode::invalid_input, "support radius must be positive");
  require(eq.linear() || data.ell == 0, ErrorCode::mode_not_supported, "power nonlinearity requires ell = 0");
  require(opt.dr > 0.0, ErrorCode::invalid_input, "dr must be positive");
  const double lambda = angular_eigenvalue(data.ell, n);
  const double dr = opt.dr;
  const double dt = opt.dt > 0.0 ? opt.dt : 0.5 * dr / std::sqrt(1.0 + lambda);
  if (dt > 0.9 * dr / std::sqrt(1.0 + lambda)) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds 0.9 dr" << (lambda > 0 ? " / sqrt(1 + lambda)" : "") << " with dr = " << dr;
    throw Error(ErrorCode::unstable_step, os.str());
  }
  const double T = std::max(-t_min, t_max);
  const double reach = data.support_radius + T * (dr / dt);
  const double R = opt.R > 0.0 ? opt.R : std::max(reach, r_needed) + 8.0 * dr;
  if (R < reach + dr || R < r_needed + 4.0 * dr) {
    std::ostringstream os;
    os << "outer radius " << R << " is reached by the numerical domain of dependence (" << reach << ")";
    throw Error(ErrorCode::domain_too_small, os.str());
  }
  const int J = static_cast<int>(std::ceil(R / dr));
  const double store_r = opt.store_radius > 0.0 ? opt.store_radius : r_needed + 8.0 * dr;
  const int S = std::min(J, static_cast<int>(std::ceil(store_r / dr)) + 1);
  const int kf = static_cast<int>(std::ceil(t_max / dt - 1e-9)) + (t_max > 0 ? 3 : 0);
  const int kb = static_cast<int>(std::ceil(-t_min / dt - 1e-9)) + (t_min < 0 ? 3 : 0);

  Evolution ev;
  ev.n = n, ev.ell = data.ell, ev.dr = dr, ev.dt = dt, ev.R = J * dr, ev.cells = J, ev.stored = S;
  ev.k_min = -kb, ev.k_max = kf;
  ev.data.assign(static_cast<std::size_t>(kf + kb + 1) * S, 0.0);

  detail::RadialOperator L(n, lambda, dr, J);
  std::vector<double> phi0(J), phi1(J);
  for (int j = 0; j < J; ++j) {
    const double r = (j + 0.5) * dr;
    phi0[j] = data.phi0(r);
    phi1[j] = data.phi1(r);
  }
  auto store = [&](int k, const std::vector<double>& x) {
    std::copy(x.begin(), x.begin() + S, ev.data.begin() + static_cast<std::ptrdiff_t>(k - ev.k_min) * S);
  };
  store(0, phi0);

  std::vector<double> Lx(J);
  auto rhs = [&](double t, const std::vector<double>& x, std::vector<double>& out) {
    L.apply(x, out);
    if (eq.V)
      for (int j = 0; j < J; ++j) out[j] += eq.source(t, (j + 0.5) * dr, x[j]);
  };
  auto energy = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    // 1/2 |(b - a)/dt|^2 - 1/2 <b, A a>, A the full linear(ized) operator at time t
    rhs(t, a, Lx);
    double kin = 0.0, pot = 0.0;
    for (int j = 0; j < J; ++j) {
      const double w = (b[j] - a[j]) / dt;
      kin += L.vol[j] * w * w;
      pot += L.vol[j] * b[j] * Lx[j];
    }
    return 0.5 * kin - 0.5 * pot;
  };

  for (int dir : {1, -1}) {
    const int steps = dir > 0 ? kf : kb;
    if (steps == 0) continue;
    const double h = dir * dt;
    std::vector<double> prev = phi0, cur(J), next(J);
    rhs(0.0, phi0, Lx);
    for (int j = 0; j < J; ++j) cur[j] = phi0[j] + h * phi1[j] + 0.5 * h * h * Lx[j];
    store(dir, cur);
    if (dir > 0) ev.energy_forward.push_back(energy(prev, cur, 0.0));
    for (int k = 1; k < steps; ++k) {
      rhs(k * h, cur, Lx);
      for (int j = 0; j < J; ++j) next[j] = 2.0 * cur[j] - prev[j] + h * h * Lx[j];
      std::swap(prev, cur);
      std::swap(cur, next);
      store(dir * (k + 1), cur);
      if (dir > 0) ev.energy_forward.push_back(energy(prev, cur, k * h));
    }
  }
  return ev;
}

/// Largest r and |t| over the exterior-region grid.
inline std::array<double, 3> grid_extent(const GridSpec& g) {
  double rmax = 0.0, tmin = 0.0, tmax = 0.0;
  for (int i = 0; i < g.ns; ++i)
    for (int j : {0, g.ny - 1}) {
      rmax = std::max(rmax, g.r(i, j));
      tmin = std::min(tmin, g.t(i, j));
      tmax = std::max(tmax, g.t(i, j));
    }
  return {rmax, tmin, tmax};
}

/// Resample an evolution onto an exterior grid.
inline ScalarField resample(const Evolution& ev, const GridSpec& g) {
  require(ev.n == g.n && ev.ell == g.ell, ErrorCode::invalid_input, "evolution and grid disagree on n or ell");
  std::vector<double> vals(g.size());
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) vals[g.index(i, j)] = ev.sample(g.t(i, j), g.r(i, j));
  return ScalarField(g, std::move(vals));
}

inline ScalarField solve(const WaveEquation& eq, const CauchyData& data, const GridSpec& g,
                         const SolverOptions& opt = {}) {
  require(data.ell == g.ell, ErrorCode::invalid_input, "Cauchy data mode differs from grid mode");
  const auto ext = grid_extent(g);
  const Evolution ev = evolve(eq, data, ext[1], ext[2], g.n, ext[0], opt);
  return resample(ev, g);
}

// ------------------------------------------------------------ exact solutions

/// Smooth bump supported on [c - w, c + w].
struct BumpProfile {
  double center = 3.0;
  double width = 2.0;
  double amplitude = 1.0;

  template <class T>
  T operator()(const T& x) const {
    const double z0 = (value_of(x) - center) / width;
    if (std::abs(z0) >= 1.0) return T(0.0) * x;
    const T z = (x - center) / width;
    using std::exp;
    return amplitude * exp(1.0 - 1.0 / (1.0 - z * z));
  }
  double derivative(double x) const {
    const double z = (x - center) / width;
    if (std::abs(z) >= 1.0) return 0.0;
    const double q = 1.0 - z * z;
    return (*this)(x) * (-2.0 * z / (q * q)) / width;
  }
};

/// Gaussian profile amplitude exp(-((x - center)/width)^2); smooth but not compactly supported.
struct GaussianProfile {
  double center = 3.0;
  double width = 1.0;
  double amplitude = 1.0;

  template <class T>
  T operator()(const T& x) const {
    using std::exp;
    const T z = (x - center) / width;
    return amplitude * exp(-(z * z));
  }
  double derivative(double x) const {
    const double z = (x - center) / width;
    return -2.0 * z / width * (*this)(x);
  }
};

/// phi(t, r) = [g(t - r) - g(t + r)] / r for n = 3, l = 0, as a closed form in (u, v).
template <class Profile>
ClosedForm exact_dalembert(Profile g) {
  return make_closed_form([g](auto u, auto v) { return (g(2.0 * u) - g(2.0 * v)) / (v - u); });
}

inline double dalembert_value(const BumpProfile& g, double t, double r) {
  if (r < 1e-8) return -2.0 * g.derivative(t);
  return (g(t - r) - g(t + r)) / r;
}

/// Cauchy data of the d'Alembert solution generated by g.
inline CauchyData dalembert_data(const BumpProfile& g) {
  CauchyData d;
  d.ell = 0;
  d.phi0 = [g](double r) { return dalembert_value(g, 0.0, r); };
  d.phi1 = [g](double r) {
    if (r < 1e-8) return 0.0;
    return (g.derivative(-r) - g.derivative(r)) / r;
  };
  d.support_radius = std::abs(g.center) + g.width;
  return d;
}

/// r^{-(n-2+l)}, a static harmonic multipole.
inline ClosedForm static_multipole(int n, int ell) {
  Dimension{n};
  require(ell >= 0, ErrorCode::invalid_input, "ell must be nonnegative");
  require(n >= 3 || ell >= 1, ErrorCode::invalid_input, "n = 2 multipoles need ell >= 1");
  const double k = -(n - 2.0 + ell);
  return make_closed_form([k](auto u, auto v) {
    using std::pow;
    return pow(v - u, k);
  });
}

// ------------------------------------------------------------ radiation field

struct RadiationWeighted {
  ScalarField weighted;
  std::vector<double> slice_f;    // f on each s line
  std::vector<double> slice_sup;  // sup |R(phi)| on that line
};

inline RadiationWeighted radiation_weight(const ScalarField& fld, int n) {
  const GridSpec& g = fld.grid();
  std::vector<double> w(g.size());
  RadiationWeighted out{ScalarField::zero(g), {}, {}};
  for (int i = 0; i < g.ns; ++i) {
    double m = 0.0;
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double q = std::pow((1.0 + std::abs(g.u(i, j))) * (1.0 + std::abs(g.v(i, j))), 0.5 * (n - 1));
      w[k] = q * fld.values()[k];
      m = std::max(m, std::abs(w[k]));
    }
    out.slice_f.push_back(g.f(i));
    out.slice_sup.push_back(m);
  }
  out.weighted = ScalarField(g, std::move(w));
  return out;
}

// ------------------------------------------------------------ counterexample

struct BridgeSpec {
  double r0 = 1.0;
  double r1 = 2.0;
};

/// Positive beta = r^{q+} (r < r0), r^{q-} (r > r1), quintic in log beta between,
/// and U = (-beta'' - (n-1) beta'/r + a beta / r^2) / beta.
struct CounterexampleBundle {
  int n = 3;
  double a = 0.0;
  double q_plus = 0.0, q_minus = 0.0;
  int ell = -1;  // l with l(l+n-2) = a, or -1
  BridgeSpec bridge;
  std::array<double, 6> c{};  // log beta = sum c_k x^k, x = r - r0

  /// log beta and its first two r-derivatives.
  template <class T>
  std::array<T, 3> log_beta(const T& r) const {
    const double rv = value_of(r);
    using std::log;
    if (rv <= bridge.r0) return {q_plus * log(r), q_plus / r, -q_plus / (r * r)};
    if (rv >= bridge.r1) return {q_minus * log(r), q_minus / r, -q_minus / (r * r)};
    const T x = r - bridge.r0;
    T L = T(c[5]) + 0.0 * x, L1 = T(5.0 * c[5]) + 0.0 * x, L2 = T(20.0 * c[5]) + 0.0 * x;
    for (int k = 4; k >= 0; --k) L = L * x + c[k];
    for (int k = 4; k >= 1; --k) L1 = L1 * x + k * c[k];
    for (int k = 4; k >= 2; --k) L2 = L2 * x + k * (k - 1) * c[k];
    return {L, L1, L2};
  }

  template <class T>
  T beta(const T& r) const {
    using std::exp;
    return exp(log_beta(r)[0]);
  }

  /// Closed-form potential; identically zero outside the bridge interval.
  double U(double r) const {
    if (r <= bridge.r0 || r >= bridge.r1) return 0.0;
    const auto L = log_beta(r);
    return -(L[2] + L[1] * L[1]) - (n - 1) * L[1] / r + a / (r * r);
  }

  /// (Delta + U) psi for psi = beta Y with angular eigenvalue a, from closed-form derivatives.
  double residual(double r) const {
    const auto L = log_beta(r);
    const double b = std::exp(L[0]);
    const double b1 = L[1] * b, b2 = (L[2] + L[1] * L[1]) * b;
    return b2 + (n - 1) * b1 / r - a * b / (r * r) + U(r) * b;
  }

  /// Static field beta(r) on the exterior region.
  ClosedForm field() const {
    const CounterexampleBundle self = *this;
    return make_closed_form([self](auto u, auto v) { return self.beta(v - u); });
  }

  /// The potential as a closed form in (u, v), for use as V in the linear equation box phi + U phi = 0.
  std::function<double(double, double)> potential() const {
    const CounterexampleBundle self = *this;
    return [self](double u, double v) { return self.U(v - u); };
  }
};

inline CounterexampleBundle counterexample_build(int n, double a, BridgeSpec bridge = {}) {
  Dimension{n};
  require(a > 0.0, ErrorCode::invalid_input, "counterexample needs a > 0");
  require(bridge.r0 > 0.0 && bridge.r1 > bridge.r0, ErrorCode::invalid_input, "bridge needs 0 < r0 < r1");
  CounterexampleBundle b;
  b.n = n;
  b.a = a;
  b.bridge = bridge;
  const double disc = std::sqrt((n - 2.0) * (n - 2.0) + 4.0 * a);
  b.q_plus = (-(n - 2.0) + disc) / 2.0;
  b.q_minus = (-(n - 2.0) - disc) / 2.0;
  for (int l = 0; l <= 1000; ++l) {
    const double e = angular_eigenvalue(l, n);
    if (std::abs(e - a) < 1e-12 * std::max(1.0, a)) b.ell = l;
    if (e > a) break;
  }
  // Quintic Hermite data for log beta at both ends.
  const double r0 = bridge.r0, r1 = bridge.r1, H = r1 - r0;
  const double y0 = b.q_plus * std::log(r0), d0 = b.q_plus / r0, e0 = -b.q_plus / (r0 * r0);
  const double y1 = b.q_minus * std::log(r1), d1 = b.q_minus / r1, e1 = -b.q_minus / (r1 * r1);
  b.c[0] = y0;
  b.c[1] = d0;
  b.c[2] = 0.5 * e0;
  // Remaining c3, c4, c5 from the three end conditions at x = H.
  const double R0 = y1 - (b.c[0] + b.c[1] * H + b.c[2] * H * H);
  const double R1 = d1 - (b.c[1] + 2.0 * b.c[2] * H);
  const double R2 = e1 - 2.0 * b.c[2];
  const double H2 = H * H, H3 = H2 * H;
  b.c[3] = (20.0 * R0 - 8.0 * R1 * H + R2 * H2) / (2.0 * H3);
  b.c[4] = (-15.0 * R0 + 7.0 * R1 * H - R2 * H2) / (H3 * H);
  b.c[5] = (12.0 * R0 - 6.0 * R1 * H + R2 * H2) / (2.0 * H3 * H2);
  return b;
}

}  // namespace uclab
