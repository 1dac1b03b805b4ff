#pragma once

// Estimate checks: the pointwise identity and inequality, the integrated split and
// nonlinear Carleman estimates, boundary-limit experiments, the induced potential,
// and the uniqueness pipeline that replays the proof term by term.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "uclab/currents.hpp"
#include "uclab/error.hpp"
#include "uclab/field.hpp"
#include "uclab/fit.hpp"
#include "uclab/grid.hpp"
#include "uclab/nonlinearity.hpp"
#include "uclab/quadrature.hpp"
#include "uclab/weights.hpp"

namespace uclab {

enum class Status { pass, fail, inconclusive };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::fail: return "fail";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

struct CheckRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  double residual = 0.0;
  double tolerance = 0.0;
  double order = std::numeric_limits<double>::quiet_NaN();
  Status status = Status::inconclusive;
  std::string detail;
  std::vector<std::pair<std::string, double>> values;

  bool passed() const { return status == Status::pass; }
};

using FieldFactory = std::function<ScalarField(const GridSpec&)>;

inline FieldFactory factory_of(const ClosedForm& form) {
  return [form](const GridSpec& g) { return ScalarField::sample(g, form); };
}

// ------------------------------------------------------------ pointwise identity

/// Nodal sides of  L S_*psi = 2F'|S_*psi|^2 + (fF'G + H) psi^2 + B + div P
/// and the inequality margin  |L|^2/(8|F'|) - [(f|F'|G - H) psi^2 - B - div P].
struct IdentityNodal {
  GridSpec grid;
  std::vector<double> lhs, rhs, residual, margin;
  std::vector<double> magnitude;  // sum of the absolute values of all terms
  std::vector<double> divP, bulkB;
  CurrentField P;
};

inline IdentityNodal identity_nodal(const ScalarField& fld, const Reparametrization& rep, const NonlinearityU& U,
                                    int n, DerivativeMode mode = DerivativeMode::automatic) {
  const GridSpec& g = fld.grid();
  IdentityNodal out{g, {}, {}, {}, {}, {}, {}, {}, current_general(fld, rep, U, n, mode)};
  out.divP = divergence(out.P, n);
  out.bulkB = bulk_b(fld, rep, U, n, mode).values();
  const auto& d = fld.derivatives(mode);
  const double lam = angular_eigenvalue(g.ell, n);
  const std::size_t N = g.size();
  out.lhs.resize(N), out.rhs.resize(N), out.residual.resize(N), out.margin.resize(N), out.magnitude.resize(N);
  for (int i = 0; i < g.ns; ++i) {
    const double f = g.f(i);
    const WeightEval w = rep.eval(f);
    const GH gh_ = gh(rep, f);
    const double eF = std::exp(-w.F);
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j);
      const Local l = d.at(k);
      const double psi = eF * l.phi;
      const double Ss = eF * (scaling_local(l, u, v) - f * w.dF * l.phi) + (n - 1) / 4.0 * psi;
      const double L = eF * (box_local(l, u, v, n, lam) + U.at(u, v, l.phi).Udot);
      out.lhs[k] = L * Ss;
      const double t1 = 2.0 * w.dF * Ss * Ss, t2 = (f * w.dF * gh_.G + gh_.H) * psi * psi;
      out.rhs[k] = t1 + t2 + out.bulkB[k] + out.divP[k];
      out.magnitude[k] =
          std::abs(out.lhs[k]) + std::abs(t1) + std::abs(t2) + std::abs(out.bulkB[k]) + std::abs(out.divP[k]);
      out.residual[k] = out.lhs[k] - out.rhs[k];
      const double aF = std::abs(w.dF);
      out.margin[k] = L * L / (8.0 * aF) - ((f * aF * gh_.G - gh_.H) * psi * psi - out.bulkB[k] - out.divP[k]);
    }
  }
  return out;
}

/// Node window of a region (or the whole grid) shrunk by `skip` layers on every side.
/// A negative `skip` means the nodes whose nested stencils (the divergence of a current
/// built from differenced data) are central throughout: fd_order layers.
inline GridWindow interior_window(const GridSpec& g, const std::optional<AdmissibleRegion>& reg, int skip = -1) {
  if (skip < 0) skip = g.fd_order;
  GridWindow w = reg ? window_of(g, *reg) : GridWindow{0, g.ns - 1, 0, g.ny - 1};
  w.i0 = std::max(w.i0, skip), w.i1 = std::min(w.i1, g.ns - 1 - skip);
  w.j0 = std::max(w.j0, skip), w.j1 = std::min(w.j1, g.ny - 1 - skip);
  require(w.i1 >= w.i0 && w.j1 >= w.j0, ErrorCode::grid_too_coarse, "no interior nodes left in the region");
  return w;
}

struct ResidualSup {
  double residual = 0.0;
  double scale = 0.0;  // sup of the summed term magnitudes
  double relative() const { return scale > 0.0 ? residual / scale : residual; }
};

inline ResidualSup sup_over(const IdentityNodal& id, const GridWindow& w) {
  ResidualSup r;
  for (int i = w.i0; i <= w.i1; ++i)
    for (int j = w.j0; j <= w.j1; ++j) {
      const std::size_t k = id.grid.index(i, j);
      r.residual = std::max(r.residual, std::abs(id.residual[k]));
      r.scale = std::max(r.scale, id.magnitude[k]);
    }
  return r;
}

struct IdentityOptions {
  std::vector<int> levels{1, 2, 4};  // refinement factors applied to the base grid
  int edge_layers = -1;
  double order_lo = 1.5, order_hi = 4.5;
  double closed_form_bound = 1e-6;  // relative residual required at the finest level for closed forms
  double noise_floor = 1e-11;       // relative residual treated as round-off
  DerivativeMode mode = DerivativeMode::automatic;
};

/// Identity residual over interior nodes with a convergence study. Residuals are
/// measured relative to the largest summed term magnitude, since the identity is
/// quadratic in the field.
inline CheckRecord identity_residual(const FieldFactory& make, const GridSpec& base, const Reparametrization& rep,
                                     const NonlinearityU& U, int n, const std::optional<AdmissibleRegion>& reg = {},
                                     const IdentityOptions& opt = {}) {
  CheckRecord rec;
  rec.name = "identity_residual";
  std::vector<double> h, e;
  bool closed = false;
  double abs_finest = 0.0, scale = 0.0;
  for (int lv : opt.levels) {
    const GridSpec g = base.refined(lv);
    const ScalarField fld = make(g);
    closed = fld.has_closed_form();
    const IdentityNodal id = identity_nodal(fld, rep, U, n, opt.mode);
    const ResidualSup s = sup_over(id, interior_window(g, reg, opt.edge_layers));
    h.push_back(g.ds());
    e.push_back(s.relative());
    abs_finest = s.residual;
    scale = s.scale;
    rec.values.emplace_back("relative_residual_N" + std::to_string(g.ns), s.relative());
  }
  rec.residual = e.back();
  rec.order = observed_order(h, e, opt.noise_floor);
  rec.tolerance = closed ? opt.closed_form_bound : opt.noise_floor;
  rec.values.emplace_back("absolute_residual", abs_finest);
  rec.values.emplace_back("scale", scale);
  std::ostringstream os;
  os << rep.name() << ", U = " << U.name() << (closed ? ", closed form" : ", sampled");
  if (e.back() <= opt.noise_floor) {
    rec.status = Status::pass;
    os << "; residual at round-off";
  } else if (std::isnan(rec.order)) {
    rec.status = Status::inconclusive;
    os << "; fewer than two levels above the noise floor";
  } else {
    const bool order_ok = rec.order >= opt.order_lo && rec.order <= opt.order_hi;
    const bool bound_ok = !closed || e.back() < opt.closed_form_bound;
    rec.status = order_ok && bound_ok ? Status::pass : Status::fail;
    os << "; order " << rec.order;
  }
  rec.margin = rec.tolerance - rec.residual;
  rec.detail = os.str();
  return rec;
}

/// Single-grid identity residual, relative to the term magnitudes.
inline CheckRecord identity_residual(const ScalarField& fld, const Reparametrization& rep, const NonlinearityU& U,
                                     int n, const std::optional<AdmissibleRegion>& reg = {}, int edge_layers = -1) {
  const IdentityNodal id = identity_nodal(fld, rep, U, n);
  const ResidualSup s = sup_over(id, interior_window(fld.grid(), reg, edge_layers));
  CheckRecord rec;
  rec.name = "identity_residual";
  rec.residual = s.relative();
  rec.values = {{"absolute_residual", s.residual}, {"scale", s.scale}};
  rec.status = Status::inconclusive;
  rec.detail = "single grid, no order fit";
  return rec;
}

inline CheckRecord pointwise_inequality(const ScalarField& fld, const Reparametrization& rep, const NonlinearityU& U,
                                        int n, const std::optional<AdmissibleRegion>& reg = {}, int edge_layers = -1) {
  const IdentityNodal id = identity_nodal(fld, rep, U, n);
  const GridWindow w = interior_window(fld.grid(), reg, edge_layers);
  const ResidualSup s = sup_over(id, w);
  CheckRecord rec;
  rec.name = "pointwise_inequality";
  rec.margin = std::numeric_limits<double>::infinity();
  for (int i = w.i0; i <= w.i1; ++i)
    for (int j = w.j0; j <= w.j1; ++j) rec.margin = std::min(rec.margin, id.margin[fld.grid().index(i, j)]);
  rec.residual = s.residual;
  rec.tolerance = 2.0 * s.residual + 1e-14 * std::max(1.0, s.scale);
  rec.status = rec.margin >= -rec.tolerance ? Status::pass : Status::fail;
  std::ostringstream os;
  os << rep.name() << ": min margin " << rec.margin << " vs identity residual " << s.residual;
  rec.detail = os.str();
  return rec;
}

// ------------------------------------------------------------ split Carleman estimate

struct SplitConstants {
  double C = 0.0;  // largest C with C b^2 p f^{2(a-+b)} f^{+-p-1} <= (f|F'|G - H) e^{-2F}
  double K = 0.0;  // smallest K with |F'|^{-1} e^{-2F} / 8 <= K a^{-1} f^{2(a-+b)} f
};

inline SplitConstants calibrate_split(const SplitWeightParams& q, const std::vector<double>& f_low,
                                      const std::vector<double>& f_high) {
  require(q.b > 0.0, ErrorCode::invalid_weight_params, "calibration needs b > 0");
  SplitConstants c{std::numeric_limits<double>::infinity(), 0.0};
  auto visit = [&](double f, bool low) {
    const Reparametrization rep = low ? Reparametrization::split_low(q) : Reparametrization::split_high(q);
    const WeightEval w = rep.eval(f);
    const GH x = gh_closed(rep, f);
    const double aF = std::abs(w.dF);
    // e^{-2F} / f^{2(a -+ b)} = exp(+-2 (b/p) f^{-+p}), kept in closed form against overflow
    const double ratio_w = std::exp(2.0 * (q.b / q.p) * std::pow(f, low ? q.p : -q.p));
    const double bulk = (f * aF * x.G - x.H) * ratio_w / (q.b * q.b * q.p * std::pow(f, low ? q.p - 1.0 : -q.p - 1.0));
    const double wave = ratio_w * q.a / (8.0 * aF * f);
    c.C = std::min(c.C, bulk);
    c.K = std::max(c.K, wave);
  };
  for (double f : f_low) visit(f, true);
  for (double f : f_high) visit(f, false);
  return c;
}

/// min(beta - p, p) as it enters the potential bound.
inline double potential_gap(double beta, double p) { return std::min(beta - p, p); }

/// Largest B for which K a^{-1} f |V|^2 <= C b^2 p f^{-+p-1} under |V| <= B p m min(f^{-1+p/2}, f^{-1-p/2}).
inline double admissible_B(const SplitConstants& c, const SplitWeightParams& q, double beta) {
  const double m = potential_gap(beta, q.p);
  require(m > 0.0, ErrorCode::invalid_input, "need 0 < p < beta");
  return (q.b / m) * std::sqrt(c.C * q.a / (c.K * q.p));
}

struct SplitCheck {
  CheckRecord low, high, cancellation;
  SplitConstants constants;
};

namespace detail {

inline CurrentField split_current_full(const ScalarField& fld, const SplitWeightParams& q, bool low, int n) {
  return build_current(
      fld, n, DerivativeMode::automatic, [&](double f) { return split_coefficients(q, low, f, n); },
      [](double, double, double) { return 0.0; });
}

inline std::vector<double> f_nodes(const GridSpec& g, const GridWindow& w) {
  std::vector<double> out;
  for (int i = w.i0; i <= w.i1; ++i) out.push_back(g.f(i));
  return out;
}

}  // namespace detail

inline SplitCheck carleman_split_check(const ScalarField& fld, const SplitWeightParams& params,
                                       const AdmissibleRegion& region_low, const AdmissibleRegion& region_high, int n) {
  const SplitWeightParams q = validate_params(params.a, params.b, params.p);
  const GridSpec& g = fld.grid();
  if (std::abs(region_low.omega - 1.0) > 1e-12 || std::abs(region_high.rho - 1.0) > 1e-12)
    throw Error(ErrorCode::region_mismatch, "low region must end and high region must start at f = 1");
  if (std::abs(region_low.sigma - region_high.sigma) > 1e-12 * region_low.sigma ||
      std::abs(region_low.tau - region_high.tau) > 1e-12 * region_low.tau)
    throw Error(ErrorCode::region_mismatch, "low and high regions must share their h-cutoffs");
  const GridWindow wl = window_of(g, region_low), wh = window_of(g, region_high);

  SplitCheck out;
  out.constants = calibrate_split(q, detail::f_nodes(g, wl), detail::f_nodes(g, wh));
  const SplitConstants& c = out.constants;
  const auto& d = fld.derivatives();
  const double lam = angular_eigenvalue(g.ell, n);

  auto run = [&](bool low, const AdmissibleRegion& reg, const GridWindow& w) {
    const Reparametrization rep = low ? Reparametrization::split_low(q) : Reparametrization::split_high(q);
    const CurrentField P = detail::split_current_full(fld, q, low, n);
    const auto divP = divergence(P, n);
    const IdentityNodal id = identity_nodal(fld, rep, NonlinearityU::zero(), n);
    const double e = 2.0 * (low ? q.a - q.b : q.a + q.b);
    const double pe = low ? q.p - 1.0 : -q.p - 1.0;
    std::vector<double> lhs_d(g.size(), 0.0), wave_d(g.size(), 0.0), res_d(g.size(), 0.0);
    for (int i = w.i0; i <= w.i1; ++i)
      for (int j = w.j0; j <= w.j1; ++j) {
        const std::size_t k = g.index(i, j);
        const double f = g.f(i);
        const double bx = box_local(d.at(k), g.u(i, j), g.v(i, j), n, lam);
        lhs_d[k] = std::pow(f, e + pe) * d.phi[k] * d.phi[k];
        wave_d[k] = std::pow(f, e) * f * bx * bx;
        res_d[k] = std::abs(id.residual[k]);
      }
    CheckRecord r;
    r.name = low ? "carleman_low" : "carleman_high";
    const double bsum = boundary_sum(P, reg, n);
    r.lhs = c.C * q.b * q.b * q.p * integrate_bulk(g, lhs_d, reg, n);
    r.rhs = c.K / q.a * integrate_bulk(g, wave_d, reg, n) + bsum;
    r.margin = r.rhs - r.lhs;
    const double quad = std::abs(integrate_bulk(g, divP, reg, n) - bsum);
    r.residual = integrate_bulk(g, res_d, reg, n);
    r.tolerance = r.residual + quad + 1e-12 * std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
    r.status = r.margin >= -r.tolerance ? Status::pass : Status::fail;
    r.values = {{"C", c.C}, {"K", c.K}, {"boundary_sum", bsum}, {"quadrature_error", quad}};
    std::ostringstream os;
    os << "C b^2 p bulk " << r.lhs << " <= wave + flux " << r.rhs;
    r.detail = os.str();
    return r;
  };
  out.low = run(true, region_low, wl);
  out.high = run(false, region_high, wh);

  // Flux of P^- and P^+ through f = 1.
  const CurrentField Pl = detail::split_current_full(fld, q, true, n);
  const CurrentField Ph = detail::split_current_full(fld, q, false, n);
  const auto Pfl = contract(Pl, Direction::f).values(), Pfh = contract(Ph, Direction::f).values();
  const int i1 = wl.i1;
  const auto wy = gregory_weights(wl.j1 - wl.j0 + 1, g.dy());
  NeumaierSum fl, fh;
  double nodal = 0.0, scale = 0.0;
  for (int j = wl.j0; j <= wl.j1; ++j) {
    const std::size_t k = g.index(i1, j);
    const double rr = std::pow(g.r(i1, j), n - 1);
    fl += wy[j - wl.j0] * Pfl[k] * rr;
    fh += wy[j - wl.j0] * Pfh[k] * rr;
    nodal = std::max({nodal, std::abs(Pl.P_u[k] - Ph.P_u[k]), std::abs(Pl.P_v[k] - Ph.P_v[k])});
    scale = std::max({scale, std::abs(Pl.P_u[k]), std::abs(Pl.P_v[k])});
  }
  CheckRecord& cr = out.cancellation;
  cr.name = "flux_cancellation_f1";
  cr.lhs = fl.value();
  cr.rhs = fh.value();
  cr.residual = std::abs(fl.value() - fh.value());
  cr.tolerance = 1e-10 * std::max(1.0, std::abs(fl.value()));
  cr.margin = cr.tolerance - cr.residual;
  cr.status = cr.residual <= cr.tolerance && nodal <= 1e-10 * std::max(1.0, scale) ? Status::pass : Status::fail;
  cr.values = {{"nodal_max_difference", nodal}};
  cr.detail = "P^- and P^+ fluxes through f = 1";
  return out;
}

// ------------------------------------------------------------ nonlinear Carleman estimate

inline CheckRecord carleman_nl_check(const ScalarField& fld, double a, int sign, double p, const Potential& V,
                                     const AdmissibleRegion& reg, int n) {
  require(a > 0.0, ErrorCode::invalid_input, "a must be positive");
  const NonlinearityU U = NonlinearityU::power(sign, p, V);
  U.require_mode(fld.grid().ell);
  const GridSpec& g = fld.grid();
  const GridWindow w = window_of(g, reg);
  const auto& d = fld.derivatives();
  const double lam = angular_eigenvalue(g.ell, n);

  int pos = 0, neg = 0;
  double gmin = std::numeric_limits<double>::infinity();
  std::vector<double> lhs_d(g.size(), 0.0), wave_d(g.size(), 0.0), res_d(g.size(), 0.0);
  const Reparametrization rep = Reparametrization::power_log(a);
  const IdentityNodal id = identity_nodal(fld, rep, U, n);
  for (int i = w.i0; i <= w.i1; ++i)
    for (int j = w.j0; j <= w.j1; ++j) {
      const std::size_t k = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j), f = g.f(i);
      const PotentialSample ps = V.at(u, v);
      const double gam = sign * gamma_from_log_derivative(ps.D, a, p, n);
      (gam > 0.0 ? pos : neg)++;
      gmin = std::min(gmin, gam);
      const double fa = std::pow(f, 2.0 * a);
      lhs_d[k] = fa * ps.V * gam * std::pow(std::abs(d.phi[k]), p + 1.0) / (p + 1.0);
      const double bv = box_local(d.at(k), u, v, n, lam) + U.at(u, v, d.phi[k]).Udot;
      wave_d[k] = fa * f * bv * bv;
      res_d[k] = std::abs(id.residual[k]);
    }
  if (pos > 0 && neg > 0) {
    std::ostringstream os;
    os << "sign * Gamma_V changes sign on the region (" << pos << " positive, " << neg << " nonpositive nodes)";
    throw Error(ErrorCode::gamma_sign_indefinite, os.str());
  }
  const CurrentField P = current_nl(fld, a, sign, p, V, n);
  const double bsum = boundary_sum(P, reg, n);
  CheckRecord r;
  r.name = "carleman_nonlinear";
  r.lhs = integrate_bulk(g, lhs_d, reg, n);
  r.rhs = integrate_bulk(g, wave_d, reg, n) / (8.0 * a) + bsum;
  r.margin = r.rhs - r.lhs;
  const double quad = std::abs(integrate_bulk(g, divergence(P, n), reg, n) - bsum);
  r.residual = integrate_bulk(g, res_d, reg, n);
  r.tolerance = r.residual + quad + 1e-12 * std::max({1.0, std::abs(r.lhs), std::abs(r.rhs)});
  r.values = {{"min_sign_gamma", gmin}, {"boundary_sum", bsum}, {"quadrature_error", quad}};
  std::ostringstream os;
  if (pos == 0) {
    r.status = Status::inconclusive;
    os << "vacuous: sign * Gamma_V <= 0 everywhere";
  } else {
    r.status = r.margin >= -r.tolerance ? Status::pass : Status::fail;
    os << "weighted |phi|^{p+1} bulk " << r.lhs << " <= wave + flux " << r.rhs;
  }
  r.detail = os.str();
  return r;
}

// ------------------------------------------------------------ boundary-limit experiments

enum class LimitKind { sigma_to_zero, tau_to_infinity, rho_to_zero, omega_to_infinity };

inline const char* to_string(LimitKind k) {
  switch (k) {
    case LimitKind::sigma_to_zero: return "sigma->0";
    case LimitKind::tau_to_infinity: return "tau->inf";
    case LimitKind::rho_to_zero: return "rho->0";
    case LimitKind::omega_to_infinity: return "omega->inf";
  }
  return "?";
}

struct LimitSequenceSpec {
  LimitKind which = LimitKind::tau_to_infinity;
  double start = 1.0;
  double ratio = 2.0;
  int count = 6;
  double expected_slope = 0.0;   // predicted d log I / d log(parameter)
  double weight_exponent = 0.0;  // alpha (rho) or beta (omega): integrand f^{-1/2 + exponent} |Psi|
  int fit_points = 4;
  double relative_tolerance = 0.10;

  void validate() const {
    require(ratio > 1.0, ErrorCode::invalid_input, "sequence ratio must exceed 1");
    require(count >= 4, ErrorCode::insufficient_sequence, "sequence needs at least 4 points");
    require(start > 0.0, ErrorCode::invalid_input, "sequence start must be positive");
    require(fit_points >= 2 && fit_points <= count, ErrorCode::invalid_input, "bad fit window");
  }
  double param(int k) const {
    const bool up = which == LimitKind::tau_to_infinity || which == LimitKind::omega_to_infinity;
    return up ? start * std::pow(ratio, k) : start / std::pow(ratio, k);
  }
};

struct LimitResult {
  CheckRecord record;
  std::vector<double> params, values;
  double slope = std::numeric_limits<double>::quiet_NaN();
};

/// Fixed cutoffs: (rho, omega) for cone sequences, (sigma, tau) for hyperboloid sequences.
inline LimitResult boundary_limit_experiment(const Integrand& psi, const LimitSequenceSpec& spec,
                                             const AdmissibleRegion& fixed, int n, const QuadratureOptions& quad = {}) {
  spec.validate();
  LimitResult out;
  for (int k = 0; k < spec.count; ++k) {
    const double x = spec.param(k);
    double val = 0.0;
    switch (spec.which) {
      case LimitKind::sigma_to_zero:
      case LimitKind::tau_to_infinity:
        val = integrate_cone(x, fixed.rho, fixed.omega, [&](double u, double v) { return std::abs(psi(u, v)); }, n,
                             quad);
        break;
      case LimitKind::rho_to_zero:
      case LimitKind::omega_to_infinity:
        val = integrate_hyperboloid(
            x, fixed.sigma, fixed.tau,
            [&](double u, double v) { return std::pow(-u * v, -0.5 + spec.weight_exponent) * std::abs(psi(u, v)); },
            n, quad);
        break;
    }
    out.params.push_back(x);
    out.values.push_back(val);
  }
  CheckRecord& r = out.record;
  r.name = std::string("limit_") + to_string(spec.which);
  const bool all_zero = std::all_of(out.values.begin(), out.values.end(), [](double v) { return v == 0.0; });
  if (all_zero) {
    r.status = Status::pass;
    r.detail = "integrand vanishes identically";
    return out;
  }
  int usable = 0;
  for (double v : out.values) usable += (std::isfinite(v) && v > 0.0) ? 1 : 0;
  if (usable < 4) throw Error(ErrorCode::insufficient_sequence, "fewer than 4 usable sequence points");
  out.slope = loglog_tail_slope(out.params, out.values, spec.fit_points);
  r.lhs = out.slope;
  r.rhs = spec.expected_slope;
  r.residual = std::abs(out.slope - spec.expected_slope);
  r.tolerance = spec.relative_tolerance * std::abs(spec.expected_slope);
  r.margin = r.tolerance - r.residual;
  r.status = r.residual <= r.tolerance ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "fitted slope " << out.slope << ", predicted " << spec.expected_slope;
  r.detail = os.str();
  return out;
}

// ------------------------------------------------------------ induced potential

struct InducedPotential {
  ScalarField V;                // -box phi / phi, zero at masked nodes
  std::vector<char> masked;     // |phi| below the floor
  std::vector<char> violated;   // |V| exceeds B p min(beta-p, p) min(f^{-1+p/2}, f^{-1-p/2})
  std::size_t n_masked = 0, n_violated = 0;
  double max_ratio = 0.0;       // sup |V| / envelope over unmasked nodes
};

inline InducedPotential induced_potential(const ScalarField& fld, double B, double p, double beta,
                                          double floor = 1e-12) {
  require(p > 0.0 && p < beta, ErrorCode::invalid_input, "need 0 < p < beta");
  require(B > 0.0, ErrorCode::invalid_input, "B must be positive");
  const GridSpec& g = fld.grid();
  const ScalarField bx = box(fld);
  const double cut = floor * std::max(fld.sup_abs(), std::numeric_limits<double>::min());
  InducedPotential out{ScalarField::zero(g), std::vector<char>(g.size(), 0), std::vector<char>(g.size(), 0)};
  std::vector<double> V(g.size(), 0.0);
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double phi = fld.values()[k];
      if (!(std::abs(phi) > cut)) {
        out.masked[k] = 1;
        ++out.n_masked;
        continue;
      }
      V[k] = -bx.values()[k] / phi;
      const double env = B * potential_envelope(g.f(i), beta, p);
      const double ratio = std::abs(V[k]) / env;
      out.max_ratio = std::max(out.max_ratio, ratio);
      if (ratio > 1.0 + 1e-12) {
        out.violated[k] = 1;
        ++out.n_violated;
      }
    }
  if (2 * out.n_masked > g.size()) {
    std::ostringstream os;
    os << out.n_masked << " of " << g.size() << " nodes have |phi| below the floor";
    throw Error(ErrorCode::mostly_masked, os.str());
  }
  out.V = ScalarField(g, std::move(V));
  return out;
}

// ------------------------------------------------------------ uniqueness pipeline

/// |box phi| <= |V| |phi| with V obeying the bound for some (B, beta, p).
struct LinearProblem {
  std::function<double(double, double)> V;  // empty means V = 0
  double beta = 3.0;
  double p = 1.0;
};

/// box phi +/- V |phi|^{p-1} phi = 0 with the power-log weight of exponent a.
struct NonlinearProblem {
  int sign = 1;
  double p = 1.0;
  Potential V;
  double a = 0.1;
};

struct PipelineOptions {
  double rho0 = 0.5, omega0 = 2.0;     // starting f-cutoffs
  double sigma0 = 0.5, tau0 = 2.0;     // starting h-cutoffs
  double sigma_far = 1e-12, tau_far = 1e12;  // h-cutoffs held while f-cutoffs move
  double ratio = 2.0;
  int count = 6;
  int fit_points = 4;
  double slope_tolerance = 0.05;
  double zero_floor = 1e-200;
  QuadratureOptions quad{32, 48, ModeFactor::normalized};
  std::vector<double> potential_samples_f;  // extra f-values for calibration; grid nodes are always used
};

struct TrackedTerm {
  std::string name;
  std::string limit;
  std::vector<double> params, values;
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool vanishing = true;
  bool favorable_sign = false;  // discarded because of its sign
};

struct PipelineReport {
  std::string verdict;
  std::string named;  // term or hypothesis named by the verdict, empty when the bulk is forced to 0
  std::vector<TrackedTerm> terms;
  std::vector<CheckRecord> checks;
  std::vector<std::pair<std::string, double>> constants;
};

/// Weight parameters a = (beta + p)/4, b = min(beta - p, 8p)/16 and the constants
/// C, K, B calibrated over log-spaced f in [f_lo, f_hi] plus any extra nodes.
struct LinearCalibration {
  SplitWeightParams q;
  SplitConstants constants;
  double B_admissible = 0.0;
};

inline LinearCalibration calibrate_linear(double beta, double p, double f_lo, double f_hi,
                                          const std::vector<double>& extra = {}, int samples = 64) {
  require(p > 0.0 && p < beta, ErrorCode::invalid_input, "need 0 < p < beta");
  require(0.0 < f_lo && f_lo <= 1.0 && f_hi >= 1.0, ErrorCode::invalid_input, "calibration range must contain f = 1");
  LinearCalibration out;
  out.q = validate_params(beta / 4.0 + p / 4.0, std::min(beta - p, 8.0 * p) / 16.0, p);
  std::vector<double> fl, fh;
  for (int k = 0; k <= samples; ++k) {
    fl.push_back(std::exp(std::log(f_lo) * (1.0 - static_cast<double>(k) / samples)));
    fh.push_back(std::exp(std::log(f_hi) * static_cast<double>(k) / samples));
  }
  for (double f : extra) (f <= 1.0 ? fl : fh).push_back(f);
  out.constants = calibrate_split(out.q, fl, fh);
  out.B_admissible = admissible_B(out.constants, out.q, beta);
  return out;
}

namespace detail {

inline void classify_term(TrackedTerm& t, bool increasing, const PipelineOptions& o) {
  double mx = 0.0;
  for (double v : t.values) mx = std::max(mx, std::abs(v));
  if (mx <= o.zero_floor) {
    t.vanishing = true;
    return;
  }
  std::vector<double> xs, ys;
  for (std::size_t k = t.values.size() - o.fit_points; k < t.values.size(); ++k) {
    if (t.values[k] == 0.0) continue;
    xs.push_back(std::log(t.params[k]));
    ys.push_back(std::log(std::abs(t.values[k])));
  }
  if (xs.size() < 2) {
    t.vanishing = true;  // decayed to exact zero along the tail
    return;
  }
  t.slope = ls_slope(xs, ys);
  t.vanishing = increasing ? t.slope < -o.slope_tolerance : t.slope > o.slope_tolerance;
}

template <class Eval>
TrackedTerm track(const std::string& name, LimitKind which, double start, const PipelineOptions& o, Eval eval) {
  TrackedTerm t;
  t.name = name;
  t.limit = to_string(which);
  const bool up = which == LimitKind::tau_to_infinity || which == LimitKind::omega_to_infinity;
  for (int k = 0; k < o.count; ++k) {
    const double x = up ? start * std::pow(o.ratio, k) : start / std::pow(o.ratio, k);
    t.params.push_back(x);
    t.values.push_back(eval(x));
  }
  classify_term(t, up, o);
  return t;
}

inline std::string verdict_from(PipelineReport& rep) {
  for (const auto& t : rep.terms)
    if (!t.vanishing && !t.favorable_sign) {
      rep.named = t.name;
      return "non-vanishing boundary term " + t.name + " (" + t.limit + ")";
    }
  rep.named.clear();
  return "bulk forced to 0";
}

}  // namespace detail

inline PipelineReport uniqueness_pipeline(const ScalarField& fld, const LinearProblem& prob,
                                          const PipelineOptions& o = {}) {
  const int n = fld.grid().n;
  const GridSpec& g = fld.grid();
  require(prob.p > 0.0 && prob.p < prob.beta, ErrorCode::invalid_input, "need 0 < p < beta");
  const double f_lo = o.rho0 / std::pow(o.ratio, o.count - 1), f_hi = o.omega0 * std::pow(o.ratio, o.count - 1);
  std::vector<double> extra;
  for (int i = 0; i < g.ns; ++i) extra.push_back(g.f(i));
  const LinearCalibration cal = calibrate_linear(prob.beta, prob.p, f_lo, f_hi, extra);
  const double a = cal.q.a, b = cal.q.b;
  const SplitWeightParams& q = cal.q;
  const SplitConstants& c = cal.constants;
  const double B_adm = cal.B_admissible;
  PipelineReport rep;

  double B_req = 0.0;
  if (prob.V)
    for (int i = 0; i < g.ns; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const double env = potential_envelope(g.f(i), prob.beta, prob.p);
        B_req = std::max(B_req, std::abs(prob.V(g.u(i, j), g.v(i, j))) / env);
      }
  rep.constants = {{"a", a}, {"b", b}, {"C", c.C}, {"K", c.K}, {"B_admissible", B_adm}, {"B_required", B_req}};

  CheckRecord hyp;
  hyp.name = "potential_bound";
  hyp.lhs = B_req;
  hyp.rhs = B_adm;
  hyp.margin = B_adm - B_req;
  hyp.status = B_req <= B_adm ? Status::pass : Status::fail;
  hyp.detail = "required B against the largest absorbable B";
  rep.checks.push_back(hyp);
  if (B_req > B_adm) {
    std::ostringstream os;
    os << "potential bound violated: B = " << B_req << " exceeds admissible " << B_adm;
    rep.verdict = os.str();
    rep.named = "potential_bound";
    return rep;
  }

  const int ell = g.ell;
  const double lam = angular_eigenvalue(ell, n);
  auto P_at = [&, lam](double u, double v, bool low) {
    const Local l = fld.local(u, v);
    return assemble_current(l, u, v, n, lam, split_coefficients(q, low, -u * v, n), 0.0);
  };
  auto flux_f = [&](double omega, double s0, double s1, bool low) {
    return integrate_hyperboloid(
        omega, s0, s1, [&](double u, double v) { return P_at(u, v, low).dot_grad_f(u, v) / std::sqrt(-u * v); }, n,
        o.quad);
  };
  auto flux_h = [&](double tau, double r0, double r1, bool low) {
    return integrate_cone(
        tau, r0, r1, [&](double u, double v) { return P_at(u, v, low).u2_dot_grad_h(u, v) / std::sqrt(-u * v); }, n,
        o.quad);
  };

  rep.terms.push_back(detail::track("I1", LimitKind::omega_to_infinity, o.omega0, o,
                                    [&](double w) { return flux_f(w, o.sigma_far, o.tau_far, false); }));
  rep.terms.push_back(detail::track("I2", LimitKind::rho_to_zero, o.rho0, o,
                                    [&](double r) { return -flux_f(r, o.sigma_far, o.tau_far, true); }));
  rep.terms.push_back(detail::track("J1", LimitKind::tau_to_infinity, o.tau0, o,
                                    [&](double t) { return flux_h(t, o.rho0, 1.0, true); }));
  rep.terms.push_back(detail::track("J2", LimitKind::sigma_to_zero, o.sigma0, o,
                                    [&](double s) { return -flux_h(s, o.rho0, 1.0, true); }));
  rep.terms.push_back(detail::track("J3", LimitKind::tau_to_infinity, o.tau0, o,
                                    [&](double t) { return flux_h(t, 1.0, o.omega0, false); }));
  rep.terms.push_back(detail::track("J4", LimitKind::sigma_to_zero, o.sigma0, o,
                                    [&](double s) { return -flux_h(s, 1.0, o.omega0, false); }));

  // Summed estimate on the starting region, with the f = 1 fluxes cancelled.
  {
    const AdmissibleRegion low(o.rho0, 1.0, o.sigma0, o.tau0), high(1.0, o.omega0, o.sigma0, o.tau0);
    auto bulk = [&](const AdmissibleRegion& reg, bool lw) {
      const double e = 2.0 * (lw ? a - b : a + b), pe = lw ? prob.p - 1.0 : -prob.p - 1.0;
      const double L = integrate_bulk(
          reg, [&](double u, double v) { const double ph = fld.local(u, v).phi; return std::pow(-u * v, e + pe) * ph * ph; },
          n, o.quad);
      const double W = integrate_bulk(
          reg,
          [&](double u, double v) {
            const double bx = box_local(fld.local(u, v), u, v, n, lam);
            return std::pow(-u * v, e) * (-u * v) * bx * bx;
          },
          n, o.quad);
      return std::make_pair(L, W);
    };
    const auto [Ll, Wl] = bulk(low, true);
    const auto [Lh, Wh] = bulk(high, false);
    const double bnd = flux_f(o.omega0, o.sigma0, o.tau0, false) - flux_f(o.rho0, o.sigma0, o.tau0, true) +
                       flux_h(o.tau0, o.rho0, 1.0, true) + flux_h(o.tau0, 1.0, o.omega0, false) -
                       flux_h(o.sigma0, o.rho0, 1.0, true) - flux_h(o.sigma0, 1.0, o.omega0, false);
    CheckRecord s;
    s.name = "summed_estimate";
    s.lhs = c.C * b * b * prob.p * (Ll + Lh);
    s.rhs = c.K / a * (Wl + Wh) + bnd;
    s.margin = s.rhs - s.lhs;
    s.tolerance = 1e-8 * std::max({1.0, std::abs(s.lhs), std::abs(s.rhs)});
    s.status = s.margin >= -s.tolerance ? Status::pass : Status::fail;
    s.detail = "split estimate summed over both regions";
    rep.checks.push_back(s);
  }
  rep.verdict = detail::verdict_from(rep);
  return rep;
}

inline PipelineReport uniqueness_pipeline(const ScalarField& fld, const NonlinearProblem& prob,
                                          const PipelineOptions& o = {}) {
  const int n = fld.grid().n;
  const GridSpec& g = fld.grid();
  const NonlinearityU U = NonlinearityU::power(prob.sign, prob.p, prob.V);
  U.require_mode(g.ell);
  PipelineReport rep;
  rep.constants = {{"a", prob.a}};

  int bad = 0;
  double gmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double gam = prob.sign * gamma_v(prob.V, prob.a, prob.p, g.point(i, j), n);
      gmin = std::min(gmin, gam);
      if (!(gam > 0.0)) ++bad;
    }
  CheckRecord hyp;
  hyp.name = "gamma_sign";
  hyp.lhs = gmin;
  hyp.margin = gmin;
  hyp.status = bad == 0 ? Status::pass : Status::fail;
  hyp.detail = "sign * Gamma_V > 0 on the sampled nodes";
  rep.checks.push_back(hyp);
  if (bad > 0) {
    rep.verdict = "nonlinear bulk sign violated: sign * Gamma_V <= 0 at " + std::to_string(bad) + " nodes";
    rep.named = "gamma_sign";
    return rep;
  }

  const double lam = angular_eigenvalue(g.ell, n);
  auto P_at = [&, lam](double u, double v) {
    const Local l = fld.local(u, v);
    return assemble_current(l, u, v, n, lam, nl_coefficients(prob.a, -u * v, n), U.at(u, v, l.phi).U);
  };
  // Potential part of P.grad f: f^{2a} f U.
  auto zf = [&](double u, double v) {
    const double f = -u * v;
    return std::pow(f, 2.0 * prob.a) * f * U.at(u, v, fld.local(u, v).phi).U / std::sqrt(f);
  };
  auto hyp_int = [&](double w, auto fn) { return integrate_hyperboloid(w, o.sigma_far, o.tau_far, fn, n, o.quad); };
  auto derivative_part = [&](double u, double v) { return P_at(u, v).dot_grad_f(u, v) / std::sqrt(-u * v) - zf(u, v); };
  auto hflux = [&](double u, double v) { return P_at(u, v).u2_dot_grad_h(u, v) / std::sqrt(-u * v); };

  rep.terms.push_back(detail::track("I1", LimitKind::omega_to_infinity, o.omega0, o,
                                    [&](double w) { return hyp_int(w, derivative_part); }));
  rep.terms.push_back(detail::track("I2", LimitKind::rho_to_zero, o.rho0, o,
                                    [&](double r) { return -hyp_int(r, derivative_part); }));
  rep.terms.push_back(detail::track("J1", LimitKind::tau_to_infinity, o.tau0, o, [&](double t) {
    return integrate_cone(t, o.rho0, o.omega0, hflux, n, o.quad);
  }));
  rep.terms.push_back(detail::track("J2", LimitKind::sigma_to_zero, o.sigma0, o, [&](double s) {
    return -integrate_cone(s, o.rho0, o.omega0, hflux, n, o.quad);
  }));
  TrackedTerm z1 = detail::track("Z1", LimitKind::omega_to_infinity, o.omega0, o, [&](double w) { return hyp_int(w, zf); });
  TrackedTerm z2 = detail::track("Z2", LimitKind::rho_to_zero, o.rho0, o, [&](double r) { return -hyp_int(r, zf); });
  // Defocusing: Z1 <= 0 may be dropped. Focusing: Z2 <= 0 may be dropped.
  (prob.sign < 0 ? z1 : z2).favorable_sign = true;
  rep.terms.push_back(z1);
  rep.terms.push_back(z2);
  rep.verdict = detail::verdict_from(rep);
  return rep;
}

}  // namespace uclab
