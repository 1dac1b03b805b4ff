#pragma once

// Command execution: builds fields, weights and nonlinearities from a RunConfig and
// runs the matching checks into a VerificationReport.

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "uclab/config.hpp"
#include "uclab/decay.hpp"
#include "uclab/fit.hpp"
#include "uclab/report.hpp"
#include "uclab/solver.hpp"
#include "uclab/verifier.hpp"

namespace uclab {

// ------------------------------------------------------------ builders

inline GridSpec make_grid(const RunConfig& c) {
  return GridSpec::over(c.grid.region(), c.n, c.grid.ell, c.grid.ns, c.grid.ny, c.grid.fd_order);
}

inline Reparametrization make_weight(const WeightConfig& w) {
  if (w.kind == "power_log") return Reparametrization::power_log(w.a);
  const SplitWeightParams q = validate_params(w.a, w.b, w.p);
  return w.kind == "split_low" ? Reparametrization::split_low(q) : Reparametrization::split_high(q);
}

inline Potential make_potential(const PotentialConfig& v) {
  if (v.kind == "power_f") return Potential::f_power(v.value, v.c);
  return Potential::constant(v.value);
}

inline NonlinearityU make_nonlinearity(const NonlinearityConfig& u) {
  if (u.kind == "zero") return NonlinearityU::zero();
  return NonlinearityU::power(u.sign, u.p, make_potential(u.V));
}

inline WaveEquation make_equation(const NonlinearityConfig& u) {
  if (u.kind == "zero") return WaveEquation::free();
  return WaveEquation::with(make_potential(u.V), u.sign, u.p);
}

/// Gaussian bump in (s, y); with `randomize` the centre is drawn from the seed.
inline ClosedForm log_bump(const FieldConfig& f, std::uint64_t seed) {
  double s0 = f.s0, y0 = f.y0;
  if (f.randomize) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-0.5, 0.5);
    s0 = d(rng);
    y0 = d(rng);
  }
  const double w2 = f.width * f.width;
  return make_closed_form([s0, y0, w2](auto u, auto v) {
    using std::exp;
    using std::log;
    const auto s = log(-(u * v)) - s0;
    const auto y = log(-(v / u)) - y0;
    return exp(-(s * s + y * y) / w2);
  });
}

inline ClosedForm dalembert_form(const FieldConfig& f) {
  if (f.profile == "bump") return exact_dalembert(BumpProfile{f.center, f.profile_width, f.amplitude});
  return exact_dalembert(GaussianProfile{f.center, f.profile_width, f.amplitude});
}

/// Cauchy data for the solver: compact bump radial profile at t = 0, at rest.
inline CauchyData bump_data(const FieldConfig& f, int ell) {
  const BumpProfile b{f.center, f.profile_width, f.amplitude};
  CauchyData d;
  d.ell = ell;
  d.phi0 = [b](double r) { return b(r); };
  d.phi1 = [](double) { return 0.0; };
  d.support_radius = f.center + f.profile_width;
  return d;
}

/// Builds the configured field on any grid with the configured n and ell.
inline FieldFactory make_field(const RunConfig& c) {
  const FieldConfig& f = c.field;
  if (f.kind == "zero") return [](const GridSpec& g) { return ScalarField::zero(g); };
  if (f.kind == "constant") {
    const double k = f.value;
    return factory_of(make_closed_form([k](auto u, auto) { return 0.0 * u + k; }));
  }
  if (f.kind == "psi_one") {
    const Reparametrization rep = make_weight(c.weight);
    return [rep](const GridSpec& g) { return unit_conjugate(g, rep); };
  }
  if (f.kind == "bump") return factory_of(log_bump(f, c.seed));
  if (f.kind == "dalembert") {
    if (c.n != 3 || c.grid.ell != 0) throw Error(ErrorCode::config_error, "field.kind: dalembert needs n = 3, ell = 0");
    return factory_of(dalembert_form(f));
  }
  if (f.kind == "multipole") return factory_of(static_multipole(c.n, c.grid.ell));
  if (f.kind == "counterexample") {
    const CounterexampleBundle b = counterexample_build(c.n, f.a);
    if (b.ell != c.grid.ell)
      throw Error(ErrorCode::config_error, "grid.ell: counterexample with a = " + std::to_string(f.a) +
                                               " needs ell = " + std::to_string(b.ell));
    return factory_of(b.field());
  }
  // solver: resolution follows the grid
  const WaveEquation eq = make_equation(c.nonlinearity);
  const CauchyData data = bump_data(f, c.grid.ell);
  const double dr0 = c.solve.dr;
  const int ns0 = c.grid.ns;
  return [eq, data, dr0, ns0](const GridSpec& g) {
    SolverOptions so;
    so.dr = dr0 * (ns0 - 1) / (g.ns - 1);
    return solve(eq, data, g, so);
  };
}

/// The potential the linear pipeline checks: the counterexample's U or the configured V.
inline LinearProblem make_linear_problem(const RunConfig& c) {
  LinearProblem lp;
  lp.beta = c.pipeline.beta;
  lp.p = c.pipeline.p;
  if (c.field.kind == "counterexample") {
    lp.V = counterexample_build(c.n, c.field.a).potential();
  } else if (c.nonlinearity.kind == "power") {
    const Potential V = make_potential(c.nonlinearity.V);
    lp.V = [V](double u, double v) { return V.value(u, v); };
  }
  return lp;
}

inline CheckRecord error_record(const std::string& name, const Error& e) {
  CheckRecord r;
  r.name = name;
  r.status = Status::fail;
  r.detail = std::string(to_string(e.code())) + ": " + e.what();
  return r;
}

// ------------------------------------------------------------ reusable check groups

inline std::vector<CheckRecord> identity_checks(const FieldFactory& make, const GridSpec& g,
                                                const Reparametrization& rep, const NonlinearityU& U, int n,
                                                const std::vector<int>& levels, const std::string& prefix) {
  IdentityOptions o;
  o.levels = levels;
  CheckRecord id = identity_residual(make, g, rep, U, n, std::nullopt, o);
  CheckRecord pw = pointwise_inequality(make(g.refined(levels.back())), rep, U, n);
  id.name = prefix + "identity";
  pw.name = prefix + "pointwise";
  return {id, pw};
}

struct SplitStudy {
  std::vector<CheckRecord> records;
  std::vector<SplitConstants> constants;
};

/// Split estimate at each refinement level, plus the stability of C and K across levels.
inline SplitStudy split_checks(const FieldFactory& make, const GridSpec& g, const SplitWeightParams& q,
                               const std::vector<int>& levels, const std::string& prefix,
                               double stability = 0.10) {
  const AdmissibleRegion all = region_of(g);
  const AdmissibleRegion lo(all.rho, 1.0, all.sigma, all.tau), hi(1.0, all.omega, all.sigma, all.tau);
  SplitStudy out;
  for (int lv : levels) {
    const GridSpec gl = g.refined(lv);
    const SplitCheck sc = carleman_split_check(make(gl), q, lo, hi, g.n);
    const std::string tag = "_N" + std::to_string(gl.ns);
    for (CheckRecord r : {sc.low, sc.high, sc.cancellation}) {
      r.name = prefix + r.name + tag;
      out.records.push_back(r);
    }
    out.constants.push_back(sc.constants);
  }
  CheckRecord st;
  st.name = prefix + "constant_stability";
  const SplitConstants& c0 = out.constants.front();
  double dev = 0.0;
  for (const auto& c : out.constants)
    dev = std::max({dev, std::abs(c.C - c0.C) / c0.C, std::abs(c.K - c0.K) / c0.K});
  st.residual = dev;
  st.tolerance = stability;
  st.margin = stability - dev;
  st.status = dev <= stability ? Status::pass : Status::fail;
  st.values = {{"C", c0.C}, {"K", c0.K}};
  st.detail = "relative spread of C and K over refinement levels";
  out.records.push_back(st);
  return out;
}

/// Whether (sign, p) lies in the branch where sign * Gamma_V > 0 is predicted for V = 1:
/// focusing subconformal or defocusing conformal/superconformal.
inline bool admissible_branch(int sign, double p, int n) {
  const double conformal = 1.0 + 4.0 / (n - 1);
  return sign > 0 ? p < conformal : p >= conformal;
}

inline CheckRecord gamma_branch_check(const GridSpec& g, const Potential& V, int sign, double p, double a, int n) {
  const bool predicted = admissible_branch(sign, p, n);
  int agree = 0, total = 0;
  double gmin = std::numeric_limits<double>::infinity(), gmax = -gmin;
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double gam = sign * gamma_v(V, a, p, g.point(i, j), n);
      gmin = std::min(gmin, gam), gmax = std::max(gmax, gam);
      agree += ((gam > 0.0) == predicted) ? 1 : 0;
      ++total;
    }
  CheckRecord r;
  r.name = "gamma_branch";
  r.lhs = gmin;
  r.rhs = gmax;
  r.residual = total - agree;
  r.status = agree == total ? Status::pass : Status::fail;
  std::ostringstream os;
  os << (predicted ? "predicted sign * Gamma_V > 0" : "predicted sign * Gamma_V <= 0") << "; " << agree << "/" << total
     << " nodes agree";
  r.detail = os.str();
  return r;
}

struct LimitStudy {
  std::vector<CheckRecord> records;
  std::vector<Series> series;
};

inline LimitStudy limit_checks(const LimitsConfig& L, int n, const std::string& prefix = "") {
  const double d = L.delta;
  const Integrand psi_r = [n, d](double u, double v) { return std::pow(1.0 + v - u, -(n - 1 + d)); };
  const Integrand psi_rf = [n, d](double u, double v) { return std::pow((v - u) - u * v, -(n - 1 + d)); };
  const QuadratureOptions quad{L.nodes, L.panels, ModeFactor::normalized};
  struct Job {
    LimitKind kind;
    double start, slope, weight;
    const Integrand* psi;
  };
  const Job jobs[] = {{LimitKind::tau_to_infinity, L.tau0, -0.5 * d, 0.0, &psi_r},
                      {LimitKind::sigma_to_zero, L.sigma0, 0.5 * d, 0.0, &psi_r},
                      {LimitKind::rho_to_zero, L.rho0, L.alpha, L.alpha, &psi_r},
                      {LimitKind::omega_to_infinity, L.omega0, L.beta - d, L.beta, &psi_rf}};
  const AdmissibleRegion fixed(L.f_lo, L.f_hi, 1e-12, 1e12);
  LimitStudy out;
  for (const Job& j : jobs) {
    LimitSequenceSpec s;
    s.which = j.kind;
    s.start = j.start;
    s.ratio = L.ratio;
    s.count = L.count;
    s.expected_slope = j.slope;
    s.weight_exponent = j.weight;
    s.fit_points = L.fit_points;
    s.relative_tolerance = L.relative_tolerance;
    LimitResult res = boundary_limit_experiment(*j.psi, s, fixed, n, quad);
    res.record.name = prefix + res.record.name;
    Series ser{res.record.name, {}};
    for (std::size_t k = 0; k < res.params.size(); ++k) ser.points.emplace_back(res.params[k], res.values[k]);
    out.records.push_back(res.record);
    out.series.push_back(ser);
  }
  return out;
}

struct CounterexampleStudy {
  CounterexampleBundle bundle;
  std::vector<CheckRecord> records;
  Series tail;
};

inline CounterexampleStudy counterexample_checks(int n, double a, double k, std::optional<GridSpec> grid = {}) {
  CounterexampleStudy out;
  out.bundle = counterexample_build(n, a);
  const CounterexampleBundle& b = out.bundle;

  CheckRecord ex;
  ex.name = "counterexample_exponents";
  ex.lhs = b.q_plus;
  ex.rhs = b.q_minus;
  ex.values = {{"q_plus", b.q_plus}, {"q_minus", b.q_minus}, {"requested_order", k}};
  ex.margin = -b.q_minus - k;
  ex.status = -b.q_minus > k ? Status::pass : Status::fail;
  ex.detail = "decay order |q_-| against the requested k";
  out.records.push_back(ex);

  CheckRecord res;
  res.name = "counterexample_residual";
  for (int i = 0; i <= 2000; ++i) res.residual = std::max(res.residual, std::abs(b.residual(1.0 + i / 2000.0)));
  res.tolerance = 1e-10;
  res.margin = res.tolerance - res.residual;
  res.status = res.residual < res.tolerance ? Status::pass : Status::fail;
  res.detail = "sup |(Delta + U) psi| over the bridge [1, 2]";
  out.records.push_back(res);

  CheckRecord sup;
  sup.name = "counterexample_support";
  int nonzero = 0;
  for (int i = 1; i <= 1000; ++i) {
    const double r_in = i / 1001.0, r_out = 2.0 + i * 0.1;
    nonzero += (b.U(r_in) != 0.0) + (b.U(r_out) != 0.0);
  }
  double umax = 0.0;
  for (int i = 0; i <= 1000; ++i) umax = std::max(umax, std::abs(b.U(1.0 + i / 1000.0)));
  sup.residual = nonzero;
  sup.values = {{"sup_U_on_bridge", umax}};
  sup.status = nonzero == 0 ? Status::pass : Status::fail;
  sup.detail = "U vanishes identically outside [1, 2]";
  out.records.push_back(sup);

  std::vector<double> rs, bs;
  out.tail.name = "counterexample_tail";
  for (int i = 0; i <= 32; ++i) {
    const double r = 4.0 * std::pow(25.0, i / 32.0);
    rs.push_back(r);
    bs.push_back(b.beta(r));
    out.tail.points.emplace_back(r, b.beta(r));
  }
  CheckRecord fit;
  fit.name = "counterexample_decay_fit";
  fit.lhs = loglog_tail_slope(rs, bs, rs.size());
  fit.rhs = b.q_minus;
  fit.residual = std::abs(fit.lhs - fit.rhs);
  fit.tolerance = 0.01 * std::abs(b.q_minus);
  fit.margin = fit.tolerance - fit.residual;
  fit.status = fit.residual <= fit.tolerance ? Status::pass : Status::fail;
  fit.detail = "slope of log psi against log r on [4, 100]";
  out.records.push_back(fit);

  if (grid) {
    GridSpec g = *grid;
    g.ell = b.ell;
    const ScalarField fld = ScalarField::sample(g, b.field());
    const ScalarField bx = box(fld);
    const auto U = b.potential();
    CheckRecord st;
    st.name = "counterexample_static";
    double scale = 0.0;
    for (int i = 0; i < g.ns; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const std::size_t q = g.index(i, j);
        const double lhs = bx.values()[q] + U(g.u(i, j), g.v(i, j)) * fld.values()[q];
        st.residual = std::max(st.residual, std::abs(lhs));
        scale = std::max(scale, std::abs(bx.values()[q]));
      }
    st.tolerance = 1e-9 * std::max(1.0, scale);
    st.margin = st.tolerance - st.residual;
    st.status = st.residual <= st.tolerance ? Status::pass : Status::fail;
    st.detail = "box phi + U phi for the static extension";
    out.records.push_back(st);
  }
  return out;
}

struct SolverStudy {
  std::vector<CheckRecord> records;
  Series errors;
};

/// Convergence against the exact d'Alembert solution for the compact bump, and exact
/// zeros outside the numerical domain of dependence.
inline SolverStudy solver_checks(const GridSpec& grid, const BumpProfile& g, double dr0, int levels, double lo,
                                 double hi) {
  SolverStudy out;
  const ClosedForm ex = exact_dalembert(g);
  std::vector<double> hs, es;
  out.errors.name = "solver_error";
  for (int k = 0; k < levels; ++k) {
    SolverOptions o;
    o.dr = dr0 / std::pow(2.0, k);
    const ScalarField f = solve(WaveEquation::free(), dalembert_data(g), grid, o);
    double e = 0.0;
    for (int i = 0; i < grid.ns; ++i)
      for (int j = 0; j < grid.ny; ++j) {
        const double d = f.at(i, j) - ex.value(grid.u(i, j), grid.v(i, j));
        e += d * d;
      }
    e = std::sqrt(e / grid.size());
    hs.push_back(o.dr);
    es.push_back(e);
    out.errors.points.emplace_back(o.dr, e);
  }
  CheckRecord ord;
  ord.name = "solver_order";
  ord.order = observed_order(hs, es, 0.0);
  ord.residual = es.back();
  ord.lhs = lo;
  ord.rhs = hi;
  ord.margin = std::min(ord.order - lo, hi - ord.order);
  ord.status = ord.order >= lo && ord.order <= hi ? Status::pass : Status::fail;
  std::ostringstream os;
  os << "RMS error against the exact solution, order " << ord.order;
  ord.detail = os.str();
  out.records.push_back(ord);

  const CauchyData data = dalembert_data(g);
  SolverOptions o;
  o.dr = dr0;
  const auto ext = grid_extent(grid);
  const double T = std::max(-ext[1], ext[2]);
  o.R = data.support_radius + 2.0 * T * 2.0 + 1.0;  // dt = dr / 2: two cells per unit time
  o.store_radius = o.R - 1e-9;
  const Evolution ev = evolve(WaveEquation::free(), data, ext[1], ext[2], grid.n, ext[0], o);
  long untouched = 0, violations = 0;
  for (int k = ev.k_min; k <= ev.k_max; ++k)
    for (int j = 0; j < ev.stored; ++j)
      if (ev.r_at(j) > data.support_radius + (std::abs(k) + 1) * ev.dr) {
        ++untouched;
        violations += ev.at(k, j) != 0.0;
      }
  CheckRecord fs;
  fs.name = "solver_finite_speed";
  fs.residual = violations;
  fs.values = {{"untouched_nodes", static_cast<double>(untouched)}};
  fs.status = violations == 0 && untouched > 0 ? Status::pass : Status::fail;
  fs.detail = "exact zeros beyond one cell per step from the data support";
  out.records.push_back(fs);
  return out;
}

inline CheckRecord verdict_record(const PipelineReport& rep, const std::string& expect, const std::string& name) {
  CheckRecord r;
  r.name = name;
  r.detail = rep.verdict;
  if (expect.empty()) {
    r.status = Status::inconclusive;
  } else {
    const std::string got = rep.named.empty() ? "bulk" : rep.named;
    r.status = got == expect ? Status::pass : Status::fail;
    r.detail += " (expected " + expect + ")";
  }
  return r;
}

inline void add_pipeline(VerificationReport& out, const PipelineReport& rep, const std::string& prefix) {
  for (CheckRecord c : rep.checks) {
    c.name = prefix + c.name;
    out.add(c);
  }
  for (const auto& t : rep.terms) {
    Series s{prefix + "term_" + t.name, {}};
    for (std::size_t k = 0; k < t.params.size(); ++k) s.points.emplace_back(t.params[k], t.values[k]);
    out.series.push_back(s);
  }
  for (const auto& [k, v] : rep.constants) out.constants.emplace_back(prefix + k, v);
}

// ------------------------------------------------------------ commands

inline VerificationReport run_command(const RunConfig& c) {
  VerificationReport out;
  out.command = c.command;
  out.config = c.raw;
  out.timestamp = utc_timestamp();
  const GridSpec g = make_grid(c);

  if (c.command == "verify-identity") {
    const FieldFactory make = make_field(c);
    out.add(identity_checks(make, g, make_weight(c.weight), make_nonlinearity(c.nonlinearity), c.n, c.refine, ""));
    Series s{"identity_convergence", {}};
    const CheckRecord& id = out.records.front();
    for (std::size_t k = 0; k < c.refine.size() && k < id.values.size(); ++k)
      s.points.emplace_back(static_cast<double>(g.refined(c.refine[k]).ns), id.values[k].second);
    out.series.push_back(s);
  } else if (c.command == "verify-carleman") {
    const SplitWeightParams q = validate_params(c.weight.a, c.weight.b, c.weight.p);
    const SplitStudy st = split_checks(make_field(c), g, q, c.refine, "");
    out.add(st.records);
    out.constants = {{"C", st.constants.front().C}, {"K", st.constants.front().K}};
  } else if (c.command == "verify-nl") {
    require(c.nonlinearity.kind == "power", ErrorCode::config_error, "nonlinearity.kind: verify-nl needs 'power'");
    const Potential V = make_potential(c.nonlinearity.V);
    const int sign = c.nonlinearity.sign;
    const double p = c.nonlinearity.p, a = c.pipeline.a;
    out.add(gamma_branch_check(g, V, sign, p, a, c.n));
    try {
      out.add(carleman_nl_check(make_field(c)(g), a, sign, p, V, c.grid.region(), c.n));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::gamma_sign_indefinite) throw;
      out.add(error_record("carleman_nonlinear", e));
    }
  } else if (c.command == "limits") {
    LimitStudy ls = limit_checks(c.limits, c.n);
    out.add(ls.records);
    out.series = ls.series;
  } else if (c.command == "counterexample") {
    CounterexampleStudy cs = counterexample_checks(c.n, c.field.a, c.field.k, g);
    out.add(cs.records);
    out.series.push_back(cs.tail);
    out.constants = {{"q_plus", cs.bundle.q_plus}, {"q_minus", cs.bundle.q_minus}};
  } else if (c.command == "solve") {
    require(c.n == 3 && c.grid.ell == 0, ErrorCode::config_error, "n: solve compares against n = 3, ell = 0");
    const BumpProfile prof{c.field.center, c.field.profile_width, c.field.amplitude};
    SolverStudy ss = solver_checks(g, prof, c.solve.dr, c.solve.levels, c.solve.order_lo, c.solve.order_hi);
    out.add(ss.records);
    out.series.push_back(ss.errors);
  } else if (c.command == "pipeline") {
    const ScalarField fld = make_field(c)(g);
    PipelineReport rep;
    if (c.pipeline.mode == "linear") {
      rep = uniqueness_pipeline(fld, make_linear_problem(c));
    } else {
      require(c.nonlinearity.kind == "power", ErrorCode::config_error,
              "nonlinearity.kind: nonlinear pipeline needs 'power'");
      rep = uniqueness_pipeline(
          fld, NonlinearProblem{c.nonlinearity.sign, c.nonlinearity.p, make_potential(c.nonlinearity.V), c.pipeline.a});
    }
    add_pipeline(out, rep, "");
    out.add(verdict_record(rep, c.pipeline.expect, "verdict"));
  } else {
    throw Error(ErrorCode::config_error, "command: '" + c.command + "' is not runnable here");
  }
  out.sort();
  return out;
}

}  // namespace uclab
