#pragma once

// The acceptance battery: ten criteria, each a group of CheckRecords. Criteria run as
// independent jobs and merge in criterion order.

#include <cmath>
#include <functional>
#include <future>
#include <sstream>
#include <string>
#include <vector>

#include "uclab/run.hpp"

namespace uclab {

struct BatteryOptions {
  int base_nodes = 129;
  std::vector<int> levels{1, 2, 4};
  std::uint64_t seed = 0;
  bool parallel = true;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  std::vector<CheckRecord> records;
  std::vector<Series> series;
  std::string summary;

  bool passed() const {
    if (records.empty()) return false;
    for (const auto& r : records)
      if (r.status != Status::pass) return false;
    return true;
  }
};

namespace battery {

inline const AdmissibleRegion& square() {
  static const AdmissibleRegion r(0.1, 10.0, 0.1, 10.0);
  return r;
}

inline SplitWeightParams split_params() { return validate_params(1.0, 0.1, 0.5); }

inline std::vector<std::pair<std::string, Reparametrization>> weights() {
  const SplitWeightParams q = split_params();
  return {{"power_log", Reparametrization::power_log(1.0)},
          {"split_low", Reparametrization::split_low(q)},
          {"split_high", Reparametrization::split_high(q)}};
}

/// zero, constant, psi = 1 conjugate under `rep`, (s, y) Gaussian bump, d'Alembert solution.
inline std::vector<std::pair<std::string, FieldFactory>> fields(const Reparametrization& rep, std::uint64_t seed) {
  FieldConfig bump;
  bump.randomize = true;
  FieldConfig dal;
  return {{"zero", [](const GridSpec& g) { return ScalarField::zero(g); }},
          {"constant", factory_of(make_closed_form([](auto u, auto) { return 0.0 * u + 1.0; }))},
          {"psi_one", [rep](const GridSpec& g) { return unit_conjugate(g, rep); }},
          {"bump", factory_of(log_bump(bump, seed))},
          {"dalembert", factory_of(dalembert_form(dal))}};
}

inline std::string count_line(const std::vector<CheckRecord>& rs) {
  int pass = 0;
  for (const auto& r : rs) pass += r.status == Status::pass;
  std::ostringstream os;
  os << pass << "/" << rs.size() << " checks pass";
  return os.str();
}

inline std::string first_failure(const std::vector<CheckRecord>& rs) {
  for (const auto& r : rs)
    if (r.status != Status::pass) return "; first failure " + r.name + " (" + to_string(r.status) + "): " + r.detail;
  return "";
}

// Independent surface oracles: integrate Psi r^{n-1} |gamma'|_g along a curve gamma = (t, r)
// in the quotient plane, with |gamma'|_g from the Minkowski metric.
inline double curve_integral(const std::function<std::pair<double, double>(double)>& gamma,
                             const std::function<std::pair<double, double>(double)>& dgamma, double l0, double l1,
                             const Integrand& psi, int n) {
  return gauss_composite(
      [&](double l) {
        const auto [t, r] = gamma(l);
        const auto [dt, dr] = dgamma(l);
        const NullPair q = null_from_rect(t, r);
        return psi(q.u, q.v) * std::pow(r, n - 1) * std::sqrt(std::abs(dr * dr - dt * dt));
      },
      {l0, l1}, 400);
}

inline double hyperboloid_oracle(double omega, double sigma, double tau, const Integrand& psi, int n) {
  const double R = 2.0 * std::sqrt(omega);
  auto th = [](double h) { return std::asinh(0.5 * (std::sqrt(h) - 1.0 / std::sqrt(h))); };
  return curve_integral([R](double a) { return std::make_pair(R * std::sinh(a), R * std::cosh(a)); },
                        [R](double a) { return std::make_pair(R * std::cosh(a), R * std::sinh(a)); }, th(sigma),
                        th(tau), psi, n);
}

inline double cone_oracle(double tau, double rho, double omega, const Integrand& psi, int n) {
  const double c = (tau - 1.0) / (tau + 1.0);
  const double k = 2.0 / std::sqrt(1.0 - c * c);  // r = k sqrt(f) on the cone
  return curve_integral([c](double x) { return std::make_pair(c * std::exp(x), std::exp(x)); },
                        [c](double x) { return std::make_pair(c * std::exp(x), std::exp(x)); },
                        std::log(k * std::sqrt(rho)), std::log(k * std::sqrt(omega)), psi, n);
}

inline CheckRecord relative_match(const std::string& name, double value, double reference, double tol) {
  CheckRecord r;
  r.name = name;
  r.lhs = value;
  r.rhs = reference;
  r.residual = std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
  r.tolerance = tol;
  r.margin = tol - r.residual;
  r.status = r.residual <= tol ? Status::pass : Status::fail;
  return r;
}

// ------------------------------------------------------------ criteria

inline CriterionResult identity_battery(const BatteryOptions& o, bool pointwise) {
  CriterionResult c;
  c.id = pointwise ? 2 : 1;
  c.title = pointwise ? "pointwise inequality" : "divergence identity";
  const GridSpec base = GridSpec::over(square(), 3, 0, o.base_nodes, o.base_nodes);
  const NonlinearityU Us[] = {NonlinearityU::zero(), NonlinearityU::power(1, 1.0, Potential::constant(1.0))};
  for (const auto& [wn, rep] : weights())
    for (const auto& U : Us)
      for (const auto& [fn, make] : fields(rep, o.seed)) {
        const std::string tag = fn + "/" + wn + "/" + (U.is_zero() ? "U0" : "Upow");
        CheckRecord r;
        if (pointwise) {
          r = pointwise_inequality(make(base.refined(o.levels.back())), rep, U, 3);
        } else {
          IdentityOptions io;
          io.levels = o.levels;
          r = identity_residual(make, base, rep, U, 3, std::nullopt, io);
        }
        r.name = tag;
        c.records.push_back(r);
      }
  c.summary = count_line(c.records) + first_failure(c.records);
  return c;
}

inline CriterionResult split_battery(const BatteryOptions& o) {
  CriterionResult c;
  c.id = 3;
  c.title = "split Carleman estimate";
  const GridSpec base = GridSpec::over(square(), 3, 0, o.base_nodes, o.base_nodes);
  const SplitWeightParams q = split_params();
  const std::vector<int> levels{o.levels.front(), o.levels.size() > 1 ? o.levels[1] : o.levels.front() * 2};
  double C = 0.0, K = 0.0;
  for (const auto& [fn, make] : fields(Reparametrization::split_low(q), o.seed)) {
    SplitStudy st = split_checks(make, base, q, levels, fn + "/");
    c.records.insert(c.records.end(), st.records.begin(), st.records.end());
    C = st.constants.front().C, K = st.constants.front().K;
  }
  std::ostringstream os;
  os << count_line(c.records) << "; C = " << C << ", K = " << K << first_failure(c.records);
  c.summary = os.str();
  return c;
}

inline CriterionResult nonlinear_battery(const BatteryOptions& o) {
  CriterionResult c;
  c.id = 4;
  c.title = "nonlinear Carleman estimate";
  const AdmissibleRegion reg(0.1, 10.0, 0.2, 5.0);
  const GridSpec g = GridSpec::over(reg, 3, 0, o.base_nodes, o.base_nodes);
  const double a = 0.1;
  struct Case {
    int sign;
    double p;
  };
  for (const Case cs : {Case{1, 1.0}, Case{1, 2.0}, Case{-1, 3.0}}) {
    const Potential V = Potential::constant(1.0);
    const std::string tag = std::string(cs.sign > 0 ? "+" : "-") + std::to_string(static_cast<int>(cs.p));
    CheckRecord gb = gamma_branch_check(g, V, cs.sign, cs.p, a, 3);
    gb.name = tag + "/gamma_branch";
    c.records.push_back(gb);
    FieldConfig fc;
    fc.center = 2.0, fc.profile_width = 1.5, fc.amplitude = 0.5;
    SolverOptions so;
    so.dr = 0.02 * 128.0 / (g.ns - 1);
    const ScalarField fld = solve(WaveEquation::with(V, cs.sign, cs.p), bump_data(fc, 0), g, so);
    try {
      CheckRecord r = carleman_nl_check(fld, a, cs.sign, cs.p, V, reg, 3);
      r.name = tag + "/carleman_nonlinear";
      c.records.push_back(r);
    } catch (const Error& e) {
      c.records.push_back(error_record(tag + "/carleman_nonlinear", e));
    }
  }
  c.summary = count_line(c.records) + first_failure(c.records);
  return c;
}

inline CriterionResult coarea_battery(const BatteryOptions&) {
  CriterionResult c;
  c.id = 5;
  c.title = "coarea and inversion";
  const int n = 3;
  const Integrand bump = [](double u, double v) {
    const double t = u + v, r = v - u;
    return std::exp(-(t - 0.3) * (t - 0.3) - (r - 2.0) * (r - 2.0));
  };
  const Integrand one = [](double, double) { return 1.0; };
  const QuadratureOptions q{128, 8, ModeFactor::normalized};
  for (double w : {0.25, 1.0, 9.0}) {
    const std::string tag = "omega=" + std::to_string(w).substr(0, 4);
    const double direct = integrate_hyperboloid(w, 0.05, 20.0, bump, n, q);
    c.records.push_back(relative_match("hyperboloid/" + tag, direct, hyperboloid_oracle(w, 0.05, 20.0, bump, n), 1e-6));
    c.records.push_back(relative_match("inverted/" + tag, integrate_hyperboloid_inverted(w, 0.05, 20.0, bump, n, q),
                                       direct, 1e-6));
  }
  for (double tau : {0.5, 1.0, 3.0}) {
    const std::string tag = "tau=" + std::to_string(tau).substr(0, 3);
    c.records.push_back(relative_match("cone/bump/" + tag, integrate_cone(tau, 0.2, 5.0, bump, n, q),
                                       cone_oracle(tau, 0.2, 5.0, bump, n), 1e-6));
    c.records.push_back(relative_match("cone/one/" + tag, integrate_cone(tau, 0.9, 1.1, one, n, q),
                                       cone_oracle(tau, 0.9, 1.1, one, n), 1e-6));
  }
  c.summary = count_line(c.records) + first_failure(c.records);
  return c;
}

inline CriterionResult limits_battery(const BatteryOptions&) {
  CriterionResult c;
  c.id = 6;
  c.title = "boundary-limit slopes";
  LimitStudy ls = limit_checks(LimitsConfig{}, 3);
  c.records = ls.records;
  c.series = ls.series;
  std::ostringstream os;
  os << count_line(c.records) << "; slopes";
  for (const auto& r : c.records) os << " " << r.name.substr(6) << "=" << r.lhs;
  os << first_failure(c.records);
  c.summary = os.str();
  return c;
}

inline CriterionResult counterexample_battery(const BatteryOptions& o) {
  CriterionResult c;
  c.id = 7;
  c.title = "counterexample";
  const CounterexampleStudy cs =
      counterexample_checks(3, 6.0, 2.5, GridSpec::over(square(), 3, 0, o.base_nodes, o.base_nodes));
  c.records = cs.records;
  CheckRecord ex;
  ex.name = "counterexample_q_values";
  ex.lhs = cs.bundle.q_plus;
  ex.rhs = cs.bundle.q_minus;
  ex.status = cs.bundle.q_plus == 2.0 && cs.bundle.q_minus == -3.0 ? Status::pass : Status::fail;
  ex.detail = "q_+ = 2 and q_- = -3 exactly for n = 3, a = 6";
  c.records.push_back(ex);
  c.series.push_back(cs.tail);
  std::ostringstream os;
  os << count_line(c.records) << "; q = (" << cs.bundle.q_plus << ", " << cs.bundle.q_minus << ")"
     << first_failure(c.records);
  c.summary = os.str();
  return c;
}

inline CriterionResult pipeline_battery(const BatteryOptions& o) {
  CriterionResult c;
  c.id = 8;
  c.title = "pipeline discrimination";
  const int N0 = (o.base_nodes - 1) / 2 + 1;
  const CounterexampleBundle cb = counterexample_build(3, 6.0);
  struct Case {
    std::string name, expect;
    int ell;
    std::function<ScalarField(const GridSpec&)> make;
    LinearProblem lp;
  };
  LinearProblem base_lp;
  LinearProblem ce_lp;
  ce_lp.V = cb.potential();
  const std::vector<Case> cases{
      {"zero", "bulk", 0, [](const GridSpec& g) { return ScalarField::zero(g); }, base_lp},
      {"dipole", "I1", 1, factory_of(static_multipole(3, 1)), base_lp},
      {"counterexample", "potential_bound", cb.ell, factory_of(cb.field()), ce_lp}};
  for (const Case& k : cases) {
    std::string named[2];
    for (int lv = 0; lv < 2; ++lv) {
      const int N = lv == 0 ? N0 : 2 * N0 - 1;
      const GridSpec g = GridSpec::over(square(), 3, k.ell, N, N);
      const PipelineReport rep = uniqueness_pipeline(k.make(g), k.lp);
      CheckRecord v = verdict_record(rep, k.expect, k.name + "/verdict_N" + std::to_string(N));
      named[lv] = rep.named;
      c.records.push_back(v);
      if (lv == 0)
        for (const auto& t : rep.terms) {
          Series s{k.name + "_" + t.name, {}};
          for (std::size_t i = 0; i < t.params.size(); ++i) s.points.emplace_back(t.params[i], t.values[i]);
          c.series.push_back(s);
        }
    }
    CheckRecord st;
    st.name = k.name + "/refinement_stable";
    st.status = named[0] == named[1] ? Status::pass : Status::fail;
    st.detail = "'" + named[0] + "' vs '" + named[1] + "'";
    c.records.push_back(st);
  }
  c.summary = count_line(c.records) + first_failure(c.records);
  return c;
}

inline CriterionResult falsifiability_battery(const BatteryOptions& o) {
  CriterionResult c;
  c.id = 9;
  c.title = "falsifiability";
  const int n = 3;
  const double beta = 1.0, p = 0.5;
  const AdmissibleRegion reg(0.01, 100.0, 0.01, 100.0);
  const GridSpec g = GridSpec::over(reg, n, 0, o.base_nodes, o.base_nodes);
  const LinearCalibration cal = calibrate_linear(beta, p, reg.rho, reg.omega);
  const double e = 0.5 * (n - 1 + beta);
  const std::vector<std::pair<std::string, ClosedForm>> fs{
      {"weighted_power", make_closed_form([e](auto u, auto v) { return pow(1.0 + (v - u) - u * v, -e); })},
      {"modulated", make_closed_form([e](auto u, auto v) {
         return pow(2.0 + (v - u) - u * v, -e - 0.5) * (1.5 + 0.5 * (v + u) / (1.0 + v - u));
       })},
      {"gaussian", make_closed_form([](auto u, auto v) {
         const auto r = v - u, t = v + u;
         return exp(-(r * r + t * t) / 8.0);
       })}};
  for (const auto& [name, form] : fs) {
    const ScalarField fld = ScalarField::sample(g, form);
    const DecayReport d = decay_functionals(fld, beta);
    CheckRecord r;
    r.name = name;
    try {
      const InducedPotential ip = induced_potential(fld, cal.B_admissible, p, beta);
      r.lhs = ip.max_ratio;
      r.rhs = 1.0;
      r.residual = static_cast<double>(ip.n_violated);
      r.values = {{"violating_nodes", static_cast<double>(ip.n_violated)},
                  {"masked_nodes", static_cast<double>(ip.n_masked)},
                  {"decay_trend", d.truncation_trend},
                  {"B_admissible", cal.B_admissible}};
      r.status = d.consistent && ip.n_violated > 0 ? Status::pass : Status::fail;
      std::ostringstream os;
      os << "decay " << d.status() << ", " << ip.n_violated << " nodes violate the potential bound";
      r.detail = os.str();
    } catch (const Error& err) {
      r = error_record(name, err);
    }
    c.records.push_back(r);
  }
  c.summary = count_line(c.records) + first_failure(c.records);
  return c;
}

inline CriterionResult solver_battery(const BatteryOptions& o) {
  CriterionResult c;
  c.id = 10;
  c.title = "solver";
  const GridSpec g = GridSpec::over(square(), 3, 0, o.base_nodes, o.base_nodes);
  SolverStudy ss = solver_checks(g, BumpProfile{3.0, 2.0, 1.0}, 0.04, 3, 1.7, 2.3);
  c.records = ss.records;
  c.series.push_back(ss.errors);
  std::ostringstream os;
  os << count_line(c.records) << "; order " << c.records.front().order << first_failure(c.records);
  c.summary = os.str();
  return c;
}

}  // namespace battery

inline std::vector<CriterionResult> run_battery(const BatteryOptions& o = {}) {
  using Job = std::function<CriterionResult()>;
  const std::vector<Job> jobs{
      [o] { return battery::identity_battery(o, false); }, [o] { return battery::identity_battery(o, true); },
      [o] { return battery::split_battery(o); },           [o] { return battery::nonlinear_battery(o); },
      [o] { return battery::coarea_battery(o); },          [o] { return battery::limits_battery(o); },
      [o] { return battery::counterexample_battery(o); },  [o] { return battery::pipeline_battery(o); },
      [o] { return battery::falsifiability_battery(o); },  [o] { return battery::solver_battery(o); }};
  auto guarded = [](const Job& job, int id) {
    try {
      return job();
    } catch (const std::exception& e) {
      CriterionResult c;
      c.id = id;
      c.title = "criterion " + std::to_string(id);
      CheckRecord r;
      r.name = "exception";
      r.status = Status::fail;
      r.detail = e.what();
      c.records.push_back(r);
      c.summary = std::string("aborted: ") + e.what();
      return c;
    }
  };
  std::vector<CriterionResult> out;
  if (o.parallel) {
    std::vector<std::future<CriterionResult>> fut;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      fut.push_back(std::async(std::launch::async, guarded, jobs[i], static_cast<int>(i + 1)));
    for (auto& f : fut) out.push_back(f.get());
  } else {
    for (std::size_t i = 0; i < jobs.size(); ++i) out.push_back(guarded(jobs[i], static_cast<int>(i + 1)));
  }
  return out;
}

inline VerificationReport battery_report(const std::vector<CriterionResult>& results, const Json& config = {}) {
  VerificationReport rep;
  rep.command = "battery";
  rep.config = config.is_null() ? Json::object() : config;
  rep.timestamp = utc_timestamp();
  for (const auto& c : results) {
    const std::string prefix = "ac" + std::string(c.id < 10 ? "0" : "") + std::to_string(c.id) + "/";
    for (CheckRecord r : c.records) {
      r.name = prefix + r.name;
      rep.add(r);
    }
    for (Series s : c.series) {
      s.name = prefix + s.name;
      rep.series.push_back(s);
    }
  }
  rep.sort();
  return rep;
}

}  // namespace uclab
