#pragma once

// Sampled decay functionals over the exterior grid and their trend as the
// truncation radius grows. A flat trend is "consistent", a growing one "violated".

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "uclab/error.hpp"
#include "uclab/field.hpp"
#include "uclab/fit.hpp"
#include "uclab/weights.hpp"

namespace uclab {

struct FocusingSpec {
  Potential V;
  double p = 1.0;
  std::optional<double> exponent;  // weight exponent, default (n-1+beta)/(p+1)
};

struct DecayOptions {
  int levels = 6;             // nested truncations r <= R_max 2^{-(levels-1-k)}
  int fit_points = 4;         // slope over the last fit_points levels
  double flat_tolerance = 0.05;
};

struct DecayReport {
  double beta = 0.0;
  double sup_derivative = 0.0;
  double sup_angular = 0.0;
  double sup_field = 0.0;
  std::optional<double> sup_focusing;
  std::vector<double> radii;
  std::vector<std::vector<double>> level_sups;  // per level: derivative, angular, field[, focusing]
  std::vector<double> trend;                    // per functional
  double truncation_trend = 0.0;                // largest of trend
  bool consistent = true;

  std::string status() const { return consistent ? "consistent" : "violated"; }
};

/// The weight [(1+|u|)(1+|v|)] equals 1 + r + f on the exterior region.
inline DecayReport decay_functionals(const ScalarField& fld, double beta, const std::optional<FocusingSpec>& foc = {},
                                     const DecayOptions& opt = {}) {
  require(beta >= 0.0, ErrorCode::invalid_input, "beta must be nonnegative");
  require(opt.levels >= opt.fit_points && opt.fit_points >= 2, ErrorCode::invalid_input, "bad truncation levels");
  const GridSpec& g = fld.grid();
  const int n = g.n;
  const auto& d = fld.derivatives();
  const double lam = angular_eigenvalue(g.ell, n);
  const double e = 0.5 * (n - 1 + beta);
  double focus_e = 0.0, focus_p = 1.0;
  if (foc) {
    focus_p = foc->p;
    focus_e = foc->exponent ? *foc->exponent : (n - 1 + beta) / (foc->p + 1.0);
  }
  const int F = foc ? 4 : 3;

  double rmax = 0.0;
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) rmax = std::max(rmax, g.r(i, j));

  DecayReport rep;
  rep.beta = beta;
  const int K = opt.levels;
  for (int k = 0; k < K; ++k) rep.radii.push_back(rmax * std::pow(2.0, -(K - 1 - k)));
  rep.level_sups.assign(K, std::vector<double>(F, 0.0));

  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t idx = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j), r = v - u, f = -u * v;
      const double w = 1.0 + r + f;
      double val[4] = {0, 0, 0, 0};
      val[0] = std::pow(w, e) * (std::abs(u * d.pu[idx]) + std::abs(v * d.pv[idx]));
      if (f < 1.0) val[1] = std::pow(w, e) * std::sqrt(f) * std::sqrt(lam) * std::abs(d.phi[idx]) / r;
      val[2] = std::pow(w, e) * std::abs(d.phi[idx]);
      if (foc && f > 1.0) {
        const double V = foc->V.value(u, v);
        val[3] = std::pow(w, focus_e) * std::pow(f * std::max(V, 0.0), 1.0 / (focus_p + 1.0)) * std::abs(d.phi[idx]);
      }
      for (int k = 0; k < K; ++k)
        if (r <= rep.radii[k] * (1.0 + 1e-12))
          for (int q = 0; q < F; ++q) rep.level_sups[k][q] = std::max(rep.level_sups[k][q], val[q]);
    }
  const auto& top = rep.level_sups.back();
  rep.sup_derivative = top[0];
  rep.sup_angular = top[1];
  rep.sup_field = top[2];
  if (foc) rep.sup_focusing = top[3];

  for (int q = 0; q < F; ++q) {
    std::vector<double> lx, ly;
    for (int k = K - opt.fit_points; k < K; ++k)
      if (rep.level_sups[k][q] > 0.0) {
        lx.push_back(std::log(rep.radii[k]));
        ly.push_back(std::log(rep.level_sups[k][q]));
      }
    const double s = lx.size() >= 2 ? ls_slope(lx, ly) : 0.0;
    rep.trend.push_back(s);
  }
  rep.truncation_trend = *std::max_element(rep.trend.begin(), rep.trend.end());
  rep.consistent = rep.truncation_trend <= opt.flat_tolerance;
  return rep;
}

}  // namespace uclab
