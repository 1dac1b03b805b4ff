#pragma once

// Boundary currents P^F, P^+/-, P^{+/-V}, the bulk term B_U^F, contractions
// with grad f and grad h, divergence, and the boundary-bound lemmas.
//
// All quadratic angular terms are sphere averages over one normalized mode:
// int Y^2 = 1 and int |grad Y|^2 = l(l+n-2). For l = 0 the convention Y = 1
// is used instead, which keeps power nonlinearities exact.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "uclab/error.hpp"
#include "uclab/field.hpp"
#include "uclab/grid.hpp"
#include "uclab/nonlinearity.hpp"
#include "uclab/weights.hpp"

namespace uclab {

struct CurrentField {
  GridSpec grid;
  std::vector<double> P_u, P_v;
};

struct CurrentLocal {
  double P_u = 0.0;
  double P_v = 0.0;

  double dot_grad_f(double u, double v) const { return 0.5 * (u * P_u + v * P_v); }
  double u2_dot_grad_h(double u, double v) const { return 0.5 * (u * P_u - v * P_v); }
};

/// Coefficients of the generic four-term current at one value of f:
///   E [T(grad f, .) + U df + c1 phi dphi + c0 phi^2 df].
struct CurrentCoefficients {
  double E = 1.0;   // e^{-2F}
  double c1 = 0.0;  // (n-1)/4 - f F'
  double c0 = 0.0;  // (f F' - (n-1)/4) F' - G/2
};

inline CurrentLocal assemble_current(const Local& l, double u, double v, int n, double lambda,
                                     const CurrentCoefficients& c, double U) {
  const double r = v - u;
  const double S = 0.5 * (u * l.pu + v * l.pv);
  const double inner = -l.pu * l.pv + lambda * l.phi * l.phi / (r * r);  // grad phi . grad phi, averaged
  const double fu = -v, fv = -u;
  CurrentLocal P;
  P.P_u = c.E * (S * l.pu - 0.5 * fu * inner + fu * U + c.c1 * l.phi * l.pu + c.c0 * fu * l.phi * l.phi);
  P.P_v = c.E * (S * l.pv - 0.5 * fv * inner + fv * U + c.c1 * l.phi * l.pv + c.c0 * fv * l.phi * l.phi);
  (void)n;
  return P;
}

inline CurrentCoefficients general_coefficients(const Reparametrization& rep, double f, int n) {
  const WeightEval w = rep.eval(f);
  const double G = gh(rep, f).G;
  const double fF = f * w.dF;
  return {std::exp(-2.0 * w.F), (n - 1) / 4.0 - fF, (fF - (n - 1) / 4.0) * w.dF - 0.5 * G};
}

/// Zero-order coefficient written with the literal b p f^{-/+p-1} of the split theorem.
inline CurrentCoefficients split_coefficients(const SplitWeightParams& q, bool low, double f, int n) {
  const Reparametrization rep = low ? Reparametrization::split_low(q) : Reparametrization::split_high(q);
  const WeightEval w = rep.eval(f);
  const double fF = f * w.dF;
  const double g = q.b * q.p * std::pow(f, low ? q.p - 1.0 : -q.p - 1.0);
  return {std::exp(-2.0 * w.F), (n - 1) / 4.0 - fF, (fF - (n - 1) / 4.0) * w.dF - 0.5 * g};
}

inline CurrentCoefficients nl_coefficients(double a, double f, int n) {
  const double c = (n - 1) / 4.0 + a;
  return {std::pow(f, 2.0 * a), c, a * c / f};
}

namespace detail {

inline void require_inward(const Reparametrization& rep, const GridSpec& g) {
  for (int i = 0; i < g.ns; ++i) {
    const double f = g.f(i);
    const double d = rep.eval(f).dF;
    if (!(d < 0.0)) {
      std::ostringstream os;
      os << rep.name() << " has F' = " << d << " >= 0 at f = " << f;
      throw Error(ErrorCode::not_inward_directed, os.str());
    }
  }
}

template <class Coef, class UFn>
CurrentField build_current(const ScalarField& fld, int n, DerivativeMode mode, Coef coef, UFn uval) {
  const GridSpec& g = fld.grid();
  const FieldDerivatives& d = fld.derivatives(mode);
  const double lam = angular_eigenvalue(g.ell, n);
  CurrentField P{g, std::vector<double>(g.size()), std::vector<double>(g.size())};
  for (int i = 0; i < g.ns; ++i) {
    const CurrentCoefficients c = coef(g.f(i));
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j);
      const Local l = d.at(k);
      const CurrentLocal cl = assemble_current(l, u, v, n, lam, c, uval(u, v, l.phi));
      P.P_u[k] = cl.P_u;
      P.P_v[k] = cl.P_v;
    }
  }
  return P;
}

}  // namespace detail

inline CurrentField current_general(const ScalarField& fld, const Reparametrization& rep, const NonlinearityU& U,
                                    int n, DerivativeMode mode = DerivativeMode::automatic) {
  U.require_mode(fld.grid().ell);
  detail::require_inward(rep, fld.grid());
  return detail::build_current(
      fld, n, mode, [&](double f) { return general_coefficients(rep, f, n); },
      [&](double u, double v, double phi) { return U.at(u, v, phi).U; });
}

enum class Branch { low, high };

inline void require_branch_range(Branch br, const GridSpec& g) {
  const double tol = 1e-12;
  if (br == Branch::low && g.s1 > tol)
    throw Error(ErrorCode::range_mismatch, "low branch needs the grid inside f <= 1");
  if (br == Branch::high && g.s0 < -tol)
    throw Error(ErrorCode::range_mismatch, "high branch needs the grid inside f >= 1");
}

inline CurrentField current_split(const ScalarField& fld, const SplitWeightParams& q, Branch br, int n,
                                  DerivativeMode mode = DerivativeMode::automatic) {
  require_branch_range(br, fld.grid());
  const SplitWeightParams v = validate_params(q.a, q.b, q.p);
  return detail::build_current(
      fld, n, mode, [&](double f) { return split_coefficients(v, br == Branch::low, f, n); },
      [](double, double, double) { return 0.0; });
}

inline CurrentField current_nl(const ScalarField& fld, double a, int sign, double p, const Potential& V, int n,
                               DerivativeMode mode = DerivativeMode::automatic) {
  const NonlinearityU U = NonlinearityU::power(sign, p, V);
  U.require_mode(fld.grid().ell);
  return detail::build_current(
      fld, n, mode, [&](double f) { return nl_coefficients(a, f, n); },
      [&](double u, double v, double phi) { return U.at(u, v, phi).U; });
}

/// B_U^F = E[c1 U'(phi) phi - S_Q U - 2((n+1)/4 - f F') U].
inline double bulk_local(double E, double fF, int n, const USample& s, double phi) {
  return E * (((n - 1) / 4.0 - fF) * s.Udot * phi - s.SU - 2.0 * ((n + 1) / 4.0 - fF) * s.U);
}

/// Closed form -B = +/- f^{2a} V Gamma_V |phi|^{p+1} / (p+1) for the power-log weight.
inline double nonlinear_bulk_closed(double u, double v, double phi, double a, int sign, double p,
                                    const Potential& V, int n) {
  const PotentialSample ps = V.at(u, v);
  const double f = -u * v;
  const double gam = gamma_from_log_derivative(ps.D, a, p, n);
  return -(sign * std::pow(f, 2.0 * a) * ps.V * gam * std::pow(std::abs(phi), p + 1.0) / (p + 1.0));
}

inline ScalarField bulk_b(const ScalarField& fld, const Reparametrization& rep, const NonlinearityU& U, int n,
                          DerivativeMode mode = DerivativeMode::automatic) {
  U.require_mode(fld.grid().ell);
  const GridSpec& g = fld.grid();
  const auto& d = fld.derivatives(mode);
  std::vector<double> out(g.size(), 0.0);
  if (U.is_zero()) return ScalarField(g, std::move(out));
  const bool check = rep.kind() == WeightKind::power_log;
  for (int i = 0; i < g.ns; ++i) {
    const WeightEval w = rep.eval(g.f(i));
    const double E = std::exp(-2.0 * w.F), fF = g.f(i) * w.dF;
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j);
      out[k] = bulk_local(E, fF, n, U.at(u, v, d.phi[k]), d.phi[k]);
      if (check) {
        const double ref = nonlinear_bulk_closed(u, v, d.phi[k], rep.a(), U.sign(), U.p(), U.potential(), n);
        const double scale = std::max({std::abs(ref), std::abs(out[k]), 1e-300});
        if (std::abs(out[k] - ref) > 1e-10 * scale) {
          std::ostringstream os;
          os << "bulk term " << out[k] << " disagrees with Gamma_V form " << ref;
          throw Error(ErrorCode::domain_error, os.str());
        }
      }
    }
  }
  return ScalarField(g, std::move(out));
}

enum class Direction { f, h };

/// P . grad f, or u^2 P . grad h.
inline ScalarField contract(const CurrentField& P, Direction dir) {
  const GridSpec& g = P.grid;
  std::vector<double> out(g.size());
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const CurrentLocal c{P.P_u[k], P.P_v[k]};
      out[k] = dir == Direction::f ? c.dot_grad_f(g.u(i, j), g.v(i, j)) : c.u2_dot_grad_h(g.u(i, j), g.v(i, j));
    }
  return ScalarField(g, std::move(out));
}

/// Divergence in flux form on the (s, y) grid:
///   div P = [d_s P_f + d_y P_h + (n-1)/2 (P_f + (t/r) P_h)] / f,
/// with P_f = P . grad f and P_h = u^2 P . grad h.
inline std::vector<double> divergence(const CurrentField& P, int n) {
  const GridSpec& g = P.grid;
  const auto Pf = contract(P, Direction::f).values();
  const auto Ph = contract(P, Direction::h).values();
  const auto dPf = fd::ds(g, Pf);
  const auto dPh = fd::dy(g, Ph);
  std::vector<double> out(g.size());
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double t = g.t(i, j), r = g.r(i, j);
      out[k] = (dPf[k] + dPh[k] + 0.5 * (n - 1) * (Pf[k] + (t / r) * Ph[k])) / g.f(i);
    }
  return out;
}

/// The same divergence written literally in null coordinates,
///   (2 r^{n-1})^{-1} [d_u(2 r^{n-1} P^u) + d_v(2 r^{n-1} P^v)],  P^u = -P_v/2, P^v = -P_u/2,
/// with d_u = (d_s - d_y)/u and d_v = (d_s + d_y)/v applied by differencing.
inline std::vector<double> divergence_null_form(const CurrentField& P, int n) {
  const GridSpec& g = P.grid;
  std::vector<double> Wu(g.size()), Wv(g.size());
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double w = 2.0 * std::pow(g.r(i, j), n - 1);
      Wu[k] = w * (-0.5 * P.P_v[k]);
      Wv[k] = w * (-0.5 * P.P_u[k]);
    }
  const auto Wu_s = fd::ds(g, Wu), Wu_y = fd::dy(g, Wu);
  const auto Wv_s = fd::ds(g, Wv), Wv_y = fd::dy(g, Wv);
  std::vector<double> out(g.size());
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j);
      const double w = 2.0 * std::pow(g.r(i, j), n - 1);
      out[k] = ((Wu_s[k] - Wu_y[k]) / u + (Wv_s[k] + Wv_y[k]) / v) / w;
    }
  return out;
}

/// The expansion of P^+/- . grad f and u^2 P^+/- . grad h written out in the proof
/// of the boundary lemma, reimplemented term by term. Its zero-order term carries
/// +b p f^{-/+p}/2 where contracting the defining current gives -b p f^{-/+p}/2.
struct ExpansionLocal {
  double f_term = 0.0;
  double h_term = 0.0;
};

inline ExpansionLocal proof_expansion_local(const Local& l, double u, double v, int n, double lambda,
                                            const SplitWeightParams& q, bool low) {
  const Reparametrization rep = low ? Reparametrization::split_low(q) : Reparametrization::split_high(q);
  const double f = -u * v, r = v - u;
  const WeightEval w = rep.eval(f);
  const double E = std::exp(-2.0 * w.F), fF = f * w.dF;
  const double A = u * l.pu, B = v * l.pv;
  const double c1 = (n - 1) / 4.0 - fF;
  const double ang = lambda * l.phi * l.phi / (r * r);
  ExpansionLocal e;
  e.f_term = 0.25 * E * (A * A + B * B) - 0.5 * E * f * ang + 0.5 * E * c1 * l.phi * (A + B) -
             E * (c1 * fF - 0.5 * q.b * q.p * std::pow(f, low ? q.p : -q.p)) * l.phi * l.phi;
  e.h_term = 0.25 * E * (A * A - B * B) + 0.5 * E * c1 * l.phi * (A - B);
  return e;
}

/// Current whose f-contraction reproduces the proof expansion: the generic
/// current with +G/2 in place of -G/2.
inline CurrentField current_expansion_variant(const ScalarField& fld, const Reparametrization& rep,
                                              const NonlinearityU& U, int n,
                                              DerivativeMode mode = DerivativeMode::automatic) {
  U.require_mode(fld.grid().ell);
  return detail::build_current(
      fld, n, mode,
      [&](double f) {
        CurrentCoefficients c = general_coefficients(rep, f, n);
        c.c0 += gh(rep, f).G;
        return c;
      },
      [&](double u, double v, double phi) { return U.at(u, v, phi).U; });
}

// ------------------------------------------------------------ boundary bounds

struct BoundMargin {
  std::string name;
  double K_min = 0.0;  // smallest K making the bound hold at every node
  double margin = std::numeric_limits<double>::infinity();  // min over nodes of K*rhs - lhs at the supplied K
  bool holds = true;
};

struct BoundReport {
  std::vector<BoundMargin> bounds;
  double K_min = 0.0;
  bool holds = true;
};

namespace detail {

inline void accumulate_bound(BoundMargin& b, double lhs, double rhs_unit, double K) {
  if (lhs > 0.0) {
    const double need = rhs_unit > 0.0 ? lhs / rhs_unit : std::numeric_limits<double>::infinity();
    b.K_min = std::max(b.K_min, need);
  }
  const double m = K * rhs_unit - lhs;
  b.margin = std::min(b.margin, m);
  if (m < -1e-12 * std::max(1.0, std::abs(lhs))) b.holds = false;
}

inline BoundReport finish(std::vector<BoundMargin> v) {
  BoundReport r;
  for (auto& b : v) {
    r.K_min = std::max(r.K_min, b.K_min);
    r.holds = r.holds && b.holds;
  }
  r.bounds = std::move(v);
  return r;
}

}  // namespace detail

/// One-sided bounds on -P^-.grad f, |u^2 P^-.grad h| (f < 1) and P^+.grad f,
/// |u^2 P^+.grad h| (f > 1), at every grid node.
inline BoundReport boundary_bound_check(const ScalarField& fld, const SplitWeightParams& q, int n, double K,
                                        DerivativeMode mode = DerivativeMode::automatic) {
  require(K > 0.0, ErrorCode::invalid_input, "K must be positive");
  const GridSpec& g = fld.grid();
  const auto& d = fld.derivatives(mode);
  const double lam = angular_eigenvalue(g.ell, n);
  const double na2 = (n + q.a) * (n + q.a);
  std::vector<BoundMargin> b(4);
  b[0].name = "low_f";
  b[1].name = "low_h";
  b[2].name = "high_f";
  b[3].name = "high_h";
  for (int i = 0; i < g.ns; ++i) {
    const double f = g.f(i);
    for (int low = 0; low < 2; ++low) {
      if (low ? f > 1.0 : f < 1.0) continue;
      const CurrentCoefficients c = split_coefficients(q, low, f, n);
      const double wgt = std::pow(f, 2.0 * (low ? q.a - q.b : q.a + q.b));
      for (int j = 0; j < g.ny; ++j) {
        const std::size_t k = g.index(i, j);
        const double u = g.u(i, j), v = g.v(i, j), r = v - u;
        const Local l = d.at(k);
        const CurrentLocal P = assemble_current(l, u, v, n, lam, c, 0.0);
        const double A = u * l.pu, B = v * l.pv;
        const double ang = lam * l.phi * l.phi / (r * r);
        const double deriv = wgt * (A * A + B * B + na2 * l.phi * l.phi);
        if (low) {
          detail::accumulate_bound(b[0], -P.dot_grad_f(u, v), wgt * (f * ang + na2 * l.phi * l.phi), K);
          detail::accumulate_bound(b[1], std::abs(P.u2_dot_grad_h(u, v)), deriv, K);
        } else {
          detail::accumulate_bound(b[2], P.dot_grad_f(u, v), deriv, K);
          detail::accumulate_bound(b[3], std::abs(P.u2_dot_grad_h(u, v)), deriv, K);
        }
      }
    }
  }
  return detail::finish(std::move(b));
}

/// Bounds on P^{+/-V}: the f-contraction from above and below (each shifted by
/// the potential flux) and the h-contraction in absolute value.
inline BoundReport boundary_bound_check_nl(const ScalarField& fld, double a, int sign, double p, const Potential& V,
                                           int n, double K, DerivativeMode mode = DerivativeMode::automatic) {
  require(K > 0.0, ErrorCode::invalid_input, "K must be positive");
  const NonlinearityU U = NonlinearityU::power(sign, p, V);
  U.require_mode(fld.grid().ell);
  const GridSpec& g = fld.grid();
  const auto& d = fld.derivatives(mode);
  const double lam = angular_eigenvalue(g.ell, n);
  const double na2 = (n + a) * (n + a);
  std::vector<BoundMargin> b(3);
  b[0].name = "nl_f_upper";
  b[1].name = "nl_f_lower";
  b[2].name = "nl_h";
  for (int i = 0; i < g.ns; ++i) {
    const double f = g.f(i);
    const CurrentCoefficients c = nl_coefficients(a, f, n);
    const double wgt = std::pow(f, 2.0 * a);
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j), r = v - u;
      const Local l = d.at(k);
      const USample us = U.at(u, v, l.phi);
      const CurrentLocal P = assemble_current(l, u, v, n, lam, c, us.U);
      const double A = u * l.pu, B = v * l.pv;
      const double ang = lam * l.phi * l.phi / (r * r);
      const double flux = wgt * f * us.U;  // +/- f^{2a} f V |phi|^{p+1}/(p+1)
      const double deriv = wgt * (A * A + B * B + na2 * l.phi * l.phi);
      detail::accumulate_bound(b[0], P.dot_grad_f(u, v) - flux, deriv, K);
      detail::accumulate_bound(b[1], -P.dot_grad_f(u, v) + flux, wgt * (f * ang + na2 * l.phi * l.phi), K);
      detail::accumulate_bound(b[2], std::abs(P.u2_dot_grad_h(u, v)), deriv, K);
    }
  }
  return detail::finish(std::move(b));
}

}  // namespace uclab
