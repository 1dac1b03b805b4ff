#pragma once

// Single-mode fields phi = phi_hat(u, v) Y_l on (s, y) grids, and the
// operators d_u, d_v, box, S, S_* and conjugation by a weight.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "uclab/closed_form.hpp"
#include "uclab/error.hpp"
#include "uclab/grid.hpp"
#include "uclab/nonlinearity.hpp"
#include "uclab/weights.hpp"

namespace uclab {

enum class DerivativeMode { automatic, finite_difference };

/// Nodewise phi and its null derivatives.
struct FieldDerivatives {
  std::vector<double> phi, pu, pv, puv, puu, pvv;

  Local at(std::size_t k) const { return {phi[k], pu[k], pv[k], puv[k], puu[k], pvv[k]}; }
};

class ScalarField {
 public:
  ScalarField() = default;

  ScalarField(GridSpec grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    grid_.validate();
    require(values_.size() == grid_.size(), ErrorCode::invalid_input, "value count does not match grid");
    for (double x : values_) require(std::isfinite(x), ErrorCode::invalid_input, "field values must be finite");
  }

  static ScalarField sample(const GridSpec& grid, ClosedForm form) {
    grid.validate();
    std::vector<double> vals(grid.size());
    for (int i = 0; i < grid.ns; ++i)
      for (int j = 0; j < grid.ny; ++j) vals[grid.index(i, j)] = form.value(grid.u(i, j), grid.v(i, j));
    ScalarField fld(grid, std::move(vals));
    fld.form_ = std::move(form);
    return fld;
  }

  template <class G>
  static ScalarField from_function(const GridSpec& grid, G g) {
    return sample(grid, make_closed_form(std::move(g)));
  }

  static ScalarField zero(const GridSpec& grid) {
    return from_function(grid, [](auto u, auto v) { return 0.0 * u + 0.0 * v; });
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double at(int i, int j) const { return values_[grid_.index(i, j)]; }
  bool has_closed_form() const { return static_cast<bool>(form_); }
  const ClosedForm& closed_form() const { return form_; }

  /// Same data without the closed form, so every derivative is differenced.
  ScalarField grid_only() const { return ScalarField(grid_, values_); }

  const FieldDerivatives& derivatives(DerivativeMode mode = DerivativeMode::automatic) const {
    auto& c = ensure_cache();
    if (mode == DerivativeMode::automatic && has_closed_form()) {
      std::call_once(c.exact_once, [&] { c.exact = exact_derivatives(); });
      return c.exact;
    }
    std::call_once(c.fd_once, [&] { c.fd = fd_derivatives(); });
    return c.fd;
  }

  /// Value and derivatives anywhere: closed form if present, else 6x6 Lagrange
  /// interpolation of the differenced data inside the grid.
  Local local(double u, double v) const {
    if (has_closed_form()) return form_.local(u, v);
    const HyperbolicPair fh = hyperbolic(u, v);
    const double s = std::log(fh.f), y = std::log(fh.h);
    const double tol = 1e-12;
    if (s < grid_.s0 - tol || s > grid_.s1 + tol || y < grid_.y0 - tol || y > grid_.y1 + tol) {
      std::ostringstream os;
      os << "point (f, h) = (" << fh.f << ", " << fh.h << ") lies outside the field grid";
      throw Error(ErrorCode::region_out_of_grid, os.str());
    }
    const FieldDerivatives& d = derivatives();
    const int m = 6;
    const int i0 = stencil_start(s, grid_.s0, grid_.ds(), grid_.ns, m);
    const int j0 = stencil_start(y, grid_.y0, grid_.dy(), grid_.ny, m);
    const auto ws = lagrange_weights(s, grid_.s(i0), grid_.ds(), m);
    const auto wy = lagrange_weights(y, grid_.y(j0), grid_.dy(), m);
    Local out;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        const double w = ws[a] * wy[b];
        const std::size_t k = grid_.index(i0 + a, j0 + b);
        out.phi += w * d.phi[k];
        out.pu += w * d.pu[k];
        out.pv += w * d.pv[k];
        out.puv += w * d.puv[k];
        out.puu += w * d.puu[k];
        out.pvv += w * d.pvv[k];
      }
    return out;
  }

  double sup_abs() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
  }

 private:
  struct Cache {
    std::once_flag exact_once, fd_once;
    FieldDerivatives exact, fd;
  };

  Cache& ensure_cache() const { return *cache_; }

  FieldDerivatives exact_derivatives() const {
    FieldDerivatives d;
    const std::size_t N = grid_.size();
    d.phi.resize(N), d.pu.resize(N), d.pv.resize(N), d.puv.resize(N), d.puu.resize(N), d.pvv.resize(N);
    for (int i = 0; i < grid_.ns; ++i)
      for (int j = 0; j < grid_.ny; ++j) {
        const std::size_t k = grid_.index(i, j);
        const Local l = form_.local(grid_.u(i, j), grid_.v(i, j));
        d.phi[k] = l.phi, d.pu[k] = l.pu, d.pv[k] = l.pv, d.puv[k] = l.puv, d.puu[k] = l.puu, d.pvv[k] = l.pvv;
      }
    return d;
  }

  FieldDerivatives fd_derivatives() const {
    FieldDerivatives d;
    const auto ps = fd::ds(grid_, values_);
    const auto py = fd::dy(grid_, values_);
    const auto pss = fd::dss(grid_, values_);
    const auto pyy = fd::dyy(grid_, values_);
    const auto psy = fd::ds(grid_, py);
    const std::size_t N = grid_.size();
    d.phi = values_;
    d.pu.resize(N), d.pv.resize(N), d.puv.resize(N), d.puu.resize(N), d.pvv.resize(N);
    for (int i = 0; i < grid_.ns; ++i)
      for (int j = 0; j < grid_.ny; ++j) {
        const std::size_t k = grid_.index(i, j);
        const double u = grid_.u(i, j), v = grid_.v(i, j), f = -u * v;
        d.pu[k] = (ps[k] - py[k]) / u;
        d.pv[k] = (ps[k] + py[k]) / v;
        d.puv[k] = -(pss[k] - pyy[k]) / f;
        d.puu[k] = (pss[k] - 2.0 * psy[k] + pyy[k] - u * d.pu[k]) / (u * u);
        d.pvv[k] = (pss[k] + 2.0 * psy[k] + pyy[k] - v * d.pv[k]) / (v * v);
      }
    return d;
  }

  GridSpec grid_;
  std::vector<double> values_;
  ClosedForm form_;
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// a phi + b chi, keeping the closed form when both operands have one.
inline ScalarField combine(double a, const ScalarField& phi, double b, const ScalarField& chi) {
  require(phi.grid().same_nodes(chi.grid()), ErrorCode::invalid_input, "fields live on different grids");
  if (phi.has_closed_form() && chi.has_closed_form()) {
    ClosedForm A = phi.closed_form(), B = chi.closed_form();
    ClosedForm c;
    c.value = [=](double u, double v) { return a * A.value(u, v) + b * B.value(u, v); };
    c.jet = [=](const Jet2& u, const Jet2& v) { return a * A.jet(u, v) + b * B.jet(u, v); };
    return ScalarField::sample(phi.grid(), c);
  }
  std::vector<double> out(phi.values().size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a * phi.values()[k] + b * chi.values()[k];
  return ScalarField(phi.grid(), std::move(out));
}

namespace detail {

template <class Op>
ScalarField nodewise(const ScalarField& fld, DerivativeMode mode, Op op) {
  const GridSpec& g = fld.grid();
  const FieldDerivatives& d = fld.derivatives(mode);
  std::vector<double> out(g.size());
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      out[k] = op(g.u(i, j), g.v(i, j), d.at(k));
    }
  return ScalarField(g, std::move(out));
}

}  // namespace detail

inline double box_local(const Local& l, double u, double v, int n, double lambda) {
  const double r = v - u;
  return -l.puv + (n - 1) / (2.0 * r) * (l.pv - l.pu) - lambda * l.phi / (r * r);
}

inline double scaling_local(const Local& l, double u, double v) { return 0.5 * (u * l.pu + v * l.pv); }

inline ScalarField diff_u(const ScalarField& fld, DerivativeMode mode = DerivativeMode::automatic) {
  return detail::nodewise(fld, mode, [](double, double, const Local& l) { return l.pu; });
}

inline ScalarField diff_v(const ScalarField& fld, DerivativeMode mode = DerivativeMode::automatic) {
  return detail::nodewise(fld, mode, [](double, double, const Local& l) { return l.pv; });
}

inline ScalarField box(const ScalarField& fld, int n, int ell, DerivativeMode mode = DerivativeMode::automatic) {
  Dimension{n};
  require(ell >= 0, ErrorCode::invalid_input, "angular mode must be >= 0");
  const double lam = angular_eigenvalue(ell, n);
  return detail::nodewise(fld, mode, [&](double u, double v, const Local& l) { return box_local(l, u, v, n, lam); });
}

inline ScalarField box(const ScalarField& fld, DerivativeMode mode = DerivativeMode::automatic) {
  return box(fld, fld.grid().n, fld.grid().ell, mode);
}

inline ScalarField scaling(const ScalarField& fld, DerivativeMode mode = DerivativeMode::automatic) {
  return detail::nodewise(fld, mode, [](double u, double v, const Local& l) { return scaling_local(l, u, v); });
}

inline ScalarField scaling_star(const ScalarField& fld, int n, DerivativeMode mode = DerivativeMode::automatic) {
  const double c = (n - 1) / 4.0;
  return detail::nodewise(fld, mode,
                          [c](double u, double v, const Local& l) { return scaling_local(l, u, v) + c * l.phi; });
}

/// The field phi = e^{F(f)}, whose conjugate is psi = 1.
inline ScalarField unit_conjugate(const GridSpec& g, const Reparametrization& rep) {
  ClosedForm c;
  c.value = [rep](double u, double v) { return std::exp(rep.eval(-u * v).F); };
  c.jet = [rep](const Jet2& u, const Jet2& v) { return exp(rep.jet_of(-(u * v))); };
  return ScalarField::sample(g, c);
}

/// psi = e^{-F(f)} phi.
inline ScalarField conjugate(const ScalarField& fld, const Reparametrization& rep) {
  const GridSpec& g = fld.grid();
  std::vector<double> out(g.size());
  for (int i = 0; i < g.ns; ++i) {
    const double w = std::exp(-rep.eval(g.f(i)).F);
    if (!std::isfinite(w) || w == 0.0) {
      std::ostringstream os;
      os << "e^{-F} = " << w << " at f = " << g.f(i) << " for " << rep.name();
      throw Error(ErrorCode::weight_overflow, os.str());
    }
    for (int j = 0; j < g.ny; ++j) out[g.index(i, j)] = w * fld.at(i, j);
  }
  if (fld.has_closed_form() && rep.has_second()) {
    const ClosedForm base = fld.closed_form();
    ClosedForm c;
    c.value = [base, rep](double u, double v) { return std::exp(-rep.eval(-u * v).F) * base.value(u, v); };
    c.jet = [base, rep](const Jet2& u, const Jet2& v) { return exp(-rep.jet_of(-(u * v))) * base.jet(u, v); };
    ScalarField res = ScalarField::sample(g, c);
    return res;
  }
  return ScalarField(g, std::move(out));
}

/// Negated weight, for undoing a conjugation.
inline Reparametrization negated(const Reparametrization& rep) {
  return Reparametrization::custom([rep](double f) { return -rep.eval(f).F; },
                                   [rep](double f) { return -rep.eval(f).dF; },
                                   [rep](double f) { return -rep.eval(f).ddF; },
                                   [rep](double f) { return -rep.third(f); }, "-" + rep.name());
}

struct ResidualField {
  ScalarField residual;
  double sup = 0.0;
};

/// e^{-F} box_U(e^F psi) evaluated directly minus its expansion
/// box psi + 2F' S_* psi + (f F'^2 - G) psi + e^{-F} U'(phi).
inline ResidualField conjugated_wave_residual(const ScalarField& phi, const Reparametrization& rep,
                                              const NonlinearityU& U, int n, int ell,
                                              DerivativeMode mode = DerivativeMode::automatic) {
  U.require_mode(ell);
  const GridSpec& g = phi.grid();
  const ScalarField psi = conjugate(phi, rep);
  const FieldDerivatives& dp = phi.derivatives(mode);
  const FieldDerivatives& dq = psi.derivatives(mode);
  const double lam = angular_eigenvalue(ell, n);
  std::vector<double> out(g.size());
  double sup = 0.0;
  for (int i = 0; i < g.ns; ++i) {
    const double f = g.f(i);
    const WeightEval w = rep.eval(f);
    const double G = gh(rep, f).G;
    const double E = std::exp(-w.F);
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j);
      const Local lp = dp.at(k), lq = dq.at(k);
      const double Ud = U.at(u, v, lp.phi).Udot;
      const double direct = E * (box_local(lp, u, v, n, lam) + Ud);
      const double Sstar = scaling_local(lq, u, v) + (n - 1) / 4.0 * lq.phi;
      const double expanded =
          box_local(lq, u, v, n, lam) + 2.0 * w.dF * Sstar + (f * w.dF * w.dF - G) * lq.phi + E * Ud;
      out[k] = direct - expanded;
      sup = std::max(sup, std::abs(out[k]));
    }
  }
  return {ScalarField(g, std::move(out)), sup};
}

inline void write_csv(const ScalarField& fld, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::io_error, "cannot open " + path);
  os << "u,v,f,h,value\n" << std::setprecision(17);
  const GridSpec& g = fld.grid();
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j)
      os << g.u(i, j) << ',' << g.v(i, j) << ',' << g.f(i) << ',' << g.h(j) << ',' << fld.at(i, j) << '\n';
  if (!os) throw Error(ErrorCode::io_error, "write failed for " + path);
}

}  // namespace uclab
