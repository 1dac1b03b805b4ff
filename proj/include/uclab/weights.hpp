#pragma once

// Reparametrizations F(f), the derived G_F = -(f F')' and H_F = (f G_F)'/2,
// positivity envelopes, potentials and the nonlinear coefficient Gamma_V.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "uclab/closed_form.hpp"
#include "uclab/error.hpp"
#include "uclab/geometry.hpp"
#include "uclab/grid.hpp"

namespace uclab {

struct SplitWeightParams {
  double a = 0.0;
  double b = 0.0;
  double p = 0.0;
  double half_a_gap = 0.0;  // a/2 - b, positive
  double lemma_gap = 0.0;   // a - b - p/2 - b, positive
};

inline SplitWeightParams validate_params(double a, double b, double p) {
  auto fail = [&](const std::string& what) {
    std::ostringstream os;
    os << "(a, b, p) = (" << a << ", " << b << ", " << p << "): " << what;
    throw Error(ErrorCode::invalid_weight_params, os.str());
  };
  if (!(a > 0.0)) fail("requires a > 0");
  if (!(p > 0.0 && p < 2.0 * a)) fail("requires 0 < p < 2a");
  const double cap = 0.25 * std::min(2.0 * a - p, 4.0 * p);
  if (!(b >= 0.0)) fail("requires b >= 0");
  if (!(b < cap)) {
    std::ostringstream os;
    os << "requires b < min(2a - p, 4p)/4 = " << cap;
    fail(os.str());
  }
  return {a, b, p, 0.5 * a - b, a - b - 0.5 * p - b};
}

struct WeightEval {
  double F = 0.0;
  double dF = 0.0;
  double ddF = 0.0;
};

enum class WeightKind { power_log, split_low, split_high, custom };

class Reparametrization {
 public:
  using Fn = std::function<double(double)>;

  static Reparametrization power_log(double a) {
    require(a > 0.0, ErrorCode::invalid_weight_params, "power-log weight requires a > 0");
    Reparametrization w;
    w.kind_ = WeightKind::power_log;
    w.params_ = {a, 0.0, 0.0, 0.5 * a, a};
    return w;
  }

  static Reparametrization split_low(const SplitWeightParams& q) {
    Reparametrization w;
    w.kind_ = WeightKind::split_low;
    w.params_ = validate_params(q.a, q.b, q.p);
    return w;
  }

  static Reparametrization split_high(const SplitWeightParams& q) {
    Reparametrization w;
    w.kind_ = WeightKind::split_high;
    w.params_ = validate_params(q.a, q.b, q.p);
    return w;
  }

  /// Derivatives beyond the first are optional; missing ones raise MissingDerivative on use.
  static Reparametrization custom(Fn F, Fn dF, Fn ddF = nullptr, Fn dddF = nullptr, std::string name = "custom") {
    Reparametrization w;
    w.kind_ = WeightKind::custom;
    w.F_ = std::move(F);
    w.dF_ = std::move(dF);
    w.ddF_ = std::move(ddF);
    w.dddF_ = std::move(dddF);
    w.name_ = std::move(name);
    return w;
  }

  WeightKind kind() const { return kind_; }
  const SplitWeightParams& params() const { return params_; }
  double a() const { return params_.a; }

  std::string name() const {
    std::ostringstream os;
    switch (kind_) {
      case WeightKind::power_log: os << "PowerLog(" << params_.a << ")"; break;
      case WeightKind::split_low: os << "SplitLow(" << params_.a << "," << params_.b << "," << params_.p << ")"; break;
      case WeightKind::split_high: os << "SplitHigh(" << params_.a << "," << params_.b << "," << params_.p << ")"; break;
      case WeightKind::custom: os << name_; break;
    }
    return os.str();
  }

  bool has_second() const { return kind_ != WeightKind::custom || static_cast<bool>(ddF_); }
  bool has_third() const { return kind_ != WeightKind::custom || static_cast<bool>(dddF_); }

  WeightEval eval(double f) const {
    if (!(f > 0.0)) {
      std::ostringstream os;
      os << "weight evaluated at f = " << f;
      throw Error(ErrorCode::domain_error, os.str());
    }
    if (kind_ == WeightKind::custom) {
      WeightEval e{F_(f), dF_(f), 0.0};
      e.ddF = ddF_ ? ddF_(f) : std::numeric_limits<double>::quiet_NaN();
      return e;
    }
    const auto d = log_derivatives(f);
    return {d[0], d[1] / f, (d[2] - d[1]) / (f * f)};
  }

  double third(double f) const {
    if (kind_ == WeightKind::custom) {
      require(static_cast<bool>(dddF_), ErrorCode::missing_derivative,
              "custom weight '" + name_ + "' has no third derivative");
      return dddF_(f);
    }
    const auto d = log_derivatives(f);
    return (d[3] - 3.0 * d[2] + 2.0 * d[1]) / (f * f * f);
  }

  /// theta^k F for k = 0..3 with theta = f d/df, for the built-in kinds. The log
  /// terms are linear in log f, so the higher entries carry only the power terms.
  std::array<double, 4> log_derivatives(double f) const {
    const double a = params_.a, b = params_.b, p = params_.p;
    const double L = std::log(f);
    switch (kind_) {
      case WeightKind::power_log: return {-a * L, -a, 0.0, 0.0};
      case WeightKind::split_low: {
        const double fp = std::pow(f, p);
        return {-(a - b) * L - (b / p) * fp, -(a - b) - b * fp, -b * p * fp, -b * p * p * fp};
      }
      case WeightKind::split_high: {
        const double fm = std::pow(f, -p);
        return {-(a + b) * L - (b / p) * fm, -(a + b) + b * fm, -b * p * fm, b * p * p * fm};
      }
      case WeightKind::custom: break;
    }
    throw Error(ErrorCode::missing_derivative, "custom weight '" + name_ + "' has no log-derivatives");
  }

  /// F(f(u, v)) as a jet, by the chain rule through the closed-form derivatives.
  Jet2 jet_of(const Jet2& fj) const {
    require(has_second(), ErrorCode::missing_derivative, "weight '" + name() + "' has no second derivative");
    const WeightEval e = eval(fj.v);
    return detail::chain(fj, e.F, e.dF, e.ddF);
  }

 private:
  WeightKind kind_ = WeightKind::power_log;
  SplitWeightParams params_{};
  Fn F_, dF_, ddF_, dddF_;
  std::string name_;
};

inline WeightEval eval_weight(const Reparametrization& rep, double f) { return rep.eval(f); }

struct GH {
  double G = 0.0;
  double H = 0.0;
};

/// G = -(f F')' and H = (G + f G')/2 from the derivative evaluator.
inline GH gh(const Reparametrization& rep, double f) {
  require(rep.has_second(), ErrorCode::missing_derivative,
          "weight '" + rep.name() + "' has no second derivative");
  if (rep.kind() != WeightKind::custom) {
    rep.eval(f);
    // G = -theta^2 F / f and H = -theta^3 F / (2f), free of the F' + f F'' cancellation
    const auto d = rep.log_derivatives(f);
    return {-d[2] / f, -0.5 * d[3] / f};
  }
  const WeightEval e = rep.eval(f);
  const double G = -(e.dF + f * e.ddF);
  const double dG = -(2.0 * e.ddF + f * rep.third(f));
  return {G, 0.5 * (G + f * dG)};
}

/// Closed forms G = b p f^{-/+p - 1}, H = +/- b p^2 f^{-/+p - 1} / 2 for the split weights.
inline GH gh_closed(const Reparametrization& rep, double f) {
  const auto& q = rep.params();
  switch (rep.kind()) {
    case WeightKind::power_log: return {0.0, 0.0};
    case WeightKind::split_low: {
      const double g = q.b * q.p * std::pow(f, q.p - 1.0);
      return {g, 0.5 * q.p * g};
    }
    case WeightKind::split_high: {
      const double g = q.b * q.p * std::pow(f, -q.p - 1.0);
      return {g, -0.5 * q.p * g};
    }
    case WeightKind::custom: return gh(rep, f);
  }
  return {};
}

struct EnvelopeReport {
  bool holds = true;
  int samples = 0;
  double worst_lower = std::numeric_limits<double>::infinity();  // min of e^{-F}/f^k - 1
  double worst_upper = std::numeric_limits<double>::infinity();  // min of e - e^{-F}/f^k
  double worst_bracket = std::numeric_limits<double>::infinity();
  std::vector<double> failing;
};

inline EnvelopeReport envelope_check(const Reparametrization& rep, const std::vector<double>& f_samples) {
  const bool low = rep.kind() == WeightKind::split_low;
  require(low || rep.kind() == WeightKind::split_high, ErrorCode::range_mismatch,
          "envelopes are stated for the split weights only");
  const auto& q = rep.params();
  const double k = low ? q.a - q.b : q.a + q.b;
  EnvelopeReport rep_out;
  for (double f : f_samples) {
    if (low ? !(f > 0.0 && f <= 1.0) : !(f >= 1.0 && std::isfinite(f))) {
      std::ostringstream os;
      os << "sample f = " << f << " outside " << (low ? "(0, 1]" : "[1, inf)");
      throw Error(ErrorCode::range_mismatch, os.str());
    }
    const WeightEval e = rep.eval(f);
    // log-space ratio avoids overflow for extreme samples
    const double lr = -e.F - k * std::log(f);
    const double lower = std::expm1(lr);
    const double upper = 1.0 - lr;  // log e - log ratio
    double bracket;
    if (low)
      bracket = std::min(e.dF - (-q.a / f), (-(q.a - q.b) / f) - e.dF);
    else
      bracket = std::min(e.dF - (-(q.a + q.b) / f), (-q.a / f) - e.dF);
    const bool ok = lower > 0.0 && upper >= 0.0 &&
                    (low ? (e.dF >= -q.a / f && e.dF < -(q.a - q.b) / f)
                         : (e.dF > -(q.a + q.b) / f && e.dF <= -q.a / f));
    rep_out.worst_lower = std::min(rep_out.worst_lower, lower);
    rep_out.worst_upper = std::min(rep_out.worst_upper, upper);
    rep_out.worst_bracket = std::min(rep_out.worst_bracket, bracket);
    if (!ok) {
      rep_out.holds = false;
      rep_out.failing.push_back(f);
    }
    ++rep_out.samples;
  }
  return rep_out;
}

struct BulkCoefficient {
  double value = 0.0;
  double bound = 0.0;
  bool degenerate = false;  // b = 0: G = H = 0
  bool holds = true;
};

inline BulkCoefficient bulk_coefficient(const Reparametrization& rep, double f) {
  const bool low = rep.kind() == WeightKind::split_low;
  const bool high = rep.kind() == WeightKind::split_high;
  const auto& q = rep.params();
  BulkCoefficient out;
  if (rep.kind() == WeightKind::power_log) {
    out.degenerate = true;
    return out;
  }
  require(low || high, ErrorCode::range_mismatch, "bulk coefficient bound is stated for split weights");
  if (low) require(f > 0.0 && f <= 1.0, ErrorCode::range_mismatch, "SplitLow bulk coefficient needs f in (0, 1]");
  if (high) require(f >= 1.0, ErrorCode::range_mismatch, "SplitHigh bulk coefficient needs f >= 1");
  const WeightEval e = rep.eval(f);
  const GH g = gh_closed(rep, f);
  out.value = f * std::abs(e.dF) * g.G - g.H;
  out.bound = q.b * q.b * q.p * std::pow(f, low ? q.p - 1.0 : -q.p - 1.0);
  out.degenerate = q.b == 0.0;
  out.holds = out.degenerate || (out.value > out.bound && out.bound > 0.0);
  return out;
}

// ---------------------------------------------------------------- potentials

struct PotentialSample {
  double V = 0.0;
  double D = 0.0;  // (u d_u + v d_v) log V
};

class Potential {
 public:
  Potential() = default;

  static Potential constant(double c) {
    Potential P;
    P.form_ = make_closed_form([c](auto u, auto v) { return 0.0 * u + 0.0 * v + c; });
    P.name_ = "const(" + fmt(c) + ")";
    P.sup_ = std::abs(c);
    return P;
  }

  /// c f^k; its scaling log-derivative is 2k.
  static Potential f_power(double c, double k) {
    Potential P;
    P.form_ = make_closed_form([c, k](auto u, auto v) { return c * pow(-u * v, k); });
    P.name_ = fmt(c) + "*f^" + fmt(k);
    return P;
  }

  static Potential from(ClosedForm V, std::string name, std::optional<double> sup = std::nullopt) {
    Potential P;
    P.form_ = std::move(V);
    P.name_ = std::move(name);
    P.sup_ = sup;
    return P;
  }

  /// Supplies the scaling log-derivative in closed form instead of by differentiation.
  Potential& with_log_derivative(std::function<double(double, double)> D) {
    D_ = std::move(D);
    return *this;
  }

  PotentialSample at(double u, double v) const {
    const Local l = form_.local(u, v);
    PotentialSample s{l.phi, 0.0};
    s.D = D_ ? D_(u, v) : (u * l.pu + v * l.pv) / l.phi;
    return s;
  }

  double value(double u, double v) const { return form_.value(u, v); }
  const ClosedForm& form() const { return form_; }
  const std::string& name() const { return name_; }
  std::optional<double> sup_bound() const { return sup_; }

 private:
  static std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
  }
  ClosedForm form_;
  std::function<double(double, double)> D_;
  std::string name_;
  std::optional<double> sup_;
};

inline double gamma_from_log_derivative(double D, double a, double p, int n) {
  const double c = (n - 1 + 4.0 * a) / 4.0;
  return 0.5 * D - c * (p - 1.0 - 4.0 / (n - 1 + 4.0 * a));
}

inline double gamma_v(const Potential& V, double a, double p, const SpacetimePoint& q, int n) {
  Dimension{n};
  const PotentialSample s = V.at(q.u(), q.v());
  if (!(s.V > 0.0)) {
    std::ostringstream os;
    os << "V = " << s.V << " at (u, v) = (" << q.u() << ", " << q.v() << ")";
    throw Error(ErrorCode::invalid_potential, os.str());
  }
  return gamma_from_log_derivative(s.D, a, p, n);
}

/// The admissible envelope B p min(beta - p, p) min(f^{-1+p/2}, f^{-1-p/2}), without B.
inline double potential_envelope(double f, double beta, double p) {
  return p * std::min(beta - p, p) * std::min(std::pow(f, -1.0 + 0.5 * p), std::pow(f, -1.0 - 0.5 * p));
}

struct ConditionFlag {
  bool holds = true;
  double margin = std::numeric_limits<double>::infinity();  // worst sampled margin
  double at_f = 0.0;
  double at_h = 0.0;
};

struct PotentialClassification {
  bool positive = true;
  ConditionFlag finite_order;  // |V| <= B p min(beta-p, p) min(...)
  ConditionFlag strong_mono;
  ConditionFlag focusing_mono;
  ConditionFlag defocusing_mono;
  double required_B = 0.0;  // smallest B making the finite-order bound hold on the samples
  int samples = 0;
};

/// Samples the grid nodes plus a refinement ring of 33 lines across f = 1.
inline PotentialClassification classify_potential(const Potential& V, double beta, double p, double B, double mu,
                                                  const GridSpec& grid) {
  require(p > 0.0 && p < beta, ErrorCode::invalid_input, "finite-order bound needs 0 < p < beta");
  const int n = grid.n;
  const double strong_floor = -2.0 + mu;
  const double foc_floor = -0.5 * (n - 1) * (1.0 + 4.0 / (n - 1) - p) + mu;
  const double defoc_cap = 0.5 * (n - 1) * (p - 1.0 - 4.0 / (n - 1));
  PotentialClassification c;
  auto visit = [&](double s, double y) {
    const double u = -std::exp(0.5 * (s - y)), v = std::exp(0.5 * (s + y));
    const double f = -u * v, h = -v / u;
    const PotentialSample ps = V.at(u, v);
    ++c.samples;
    auto upd = [&](ConditionFlag& fl, double m, bool strict) {
      if (m < fl.margin) {
        fl.margin = m;
        fl.at_f = f;
        fl.at_h = h;
      }
      if (strict ? !(m > 0.0) : !(m >= 0.0)) fl.holds = false;
    };
    if (!(ps.V > 0.0)) c.positive = false;
    const double env = potential_envelope(f, beta, p);
    c.required_B = std::max(c.required_B, std::abs(ps.V) / env);
    upd(c.finite_order, B * env - std::abs(ps.V), false);
    upd(c.strong_mono, ps.D - strong_floor, true);
    upd(c.focusing_mono, ps.D - foc_floor, true);
    upd(c.defocusing_mono, defoc_cap - ps.D, false);
  };
  for (int i = 0; i < grid.ns; ++i)
    for (int j = 0; j < grid.ny; ++j) visit(grid.s(i), grid.y(j));
  if (grid.s0 < 0.0 && grid.s1 > 0.0) {
    const double w = grid.ds();
    for (int k = -16; k <= 16; ++k)
      for (int j = 0; j < grid.ny; ++j) visit(k * w / 16.0, grid.y(j));
  }
  if (!c.positive) {
    c.strong_mono.holds = c.focusing_mono.holds = c.defocusing_mono.holds = false;
  }
  return c;
}

}  // namespace uclab
