#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"
#include "uclab/decay.hpp"
#include "uclab/field.hpp"
#include "uclab/fit.hpp"
#include "uclab/solver.hpp"

using namespace uclab;

namespace {

GridSpec grid_over(double lo, double hi, int N, int n = 3, int ell = 0) {
  return GridSpec::over(AdmissibleRegion(lo, hi, lo, hi), n, ell, N, N);
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

double max_diff(const ScalarField& a, const std::function<double(double, double)>& ref) {
  const GridSpec& g = a.grid();
  double m = 0.0;
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) m = std::max(m, std::abs(a.at(i, j) - ref(g.u(i, j), g.v(i, j))));
  return m;
}

// Gaussian in (log f, log h).
ClosedForm log_gaussian(double s0, double y0, double w) {
  return make_closed_form([=](auto u, auto v) {
    using std::exp, std::log;
    const auto s = log(-(u * v)) - s0;
    const auto y = log(-(v / u)) - y0;
    return exp(-(s * s + y * y) / (w * w));
  });
}

// Box in (t, r) by fourth-order central differences of the value function:
// -phi_tt + phi_rr + (n-1)/r phi_r - lambda phi / r^2.
double box_tr(const std::function<double(double, double)>& phi_tr, double t, double r, int n, double lambda) {
  const double e = 1e-3;
  auto d1 = [&](auto g) { return (g(-2) - 8 * g(-1) + 8 * g(1) - g(2)) / (12 * e); };
  auto d2 = [&](auto g) { return (-g(-2) + 16 * g(-1) - 30 * g(0) + 16 * g(1) - g(2)) / (12 * e * e); };
  const double ptt = d2([&](int k) { return phi_tr(t + k * e, r); });
  const double prr = d2([&](int k) { return phi_tr(t, r + k * e); });
  const double pr = d1([&](int k) { return phi_tr(t, r + k * e); });
  return -ptt + prr + (n - 1) / r * pr - lambda * phi_tr(t, r) / (r * r);
}

}  // namespace

TEST(Diff, ConstantGivesZero) {
  const auto g = grid_over(0.1, 10.0, 33);
  const auto c = ScalarField::from_function(g, [](auto u, auto v) { return 0.0 * u + 0.0 * v + 2.5; });
  for (auto mode : {DerivativeMode::automatic, DerivativeMode::finite_difference}) {
    EXPECT_LE(diff_u(c, mode).sup_abs(), 1e-12);
    EXPECT_LE(diff_v(c, mode).sup_abs(), 1e-12);
  }
}

TEST(Diff, LinearInU) {
  const auto g = grid_over(0.5, 2.0, 257);
  const auto phi = ScalarField::from_function(g, [](auto u, auto v) { return u + 0.0 * v; });
  EXPECT_LE(max_diff(diff_u(phi), [](double, double) { return 1.0; }), 1e-14);
  EXPECT_LE(max_diff(diff_u(phi, DerivativeMode::finite_difference), [](double, double) { return 1.0; }), 1e-10);
  EXPECT_LE(diff_v(phi, DerivativeMode::finite_difference).sup_abs(), 1e-10);
}

TEST(Diff, FourthOrderConvergence) {
  std::vector<double> h, e;
  for (int N : {33, 65, 129, 257}) {
    const auto g = grid_over(0.2, 5.0, N);
    const auto phi = ScalarField::from_function(g, [](auto u, auto v) {
      using std::sin, std::cos;
      return sin(u) * cos(v);
    });
    const double err_u = max_diff(diff_u(phi, DerivativeMode::finite_difference),
                                  [](double u, double v) { return std::cos(u) * std::cos(v); });
    const double err_v = max_diff(diff_v(phi, DerivativeMode::finite_difference),
                                  [](double u, double v) { return -std::sin(u) * std::sin(v); });
    h.push_back(g.ds());
    e.push_back(std::max(err_u, err_v));
  }
  const double order = observed_order(h, e, 0.0);
  EXPECT_GE(order, 3.5);
  EXPECT_LE(order, 4.5);
}

TEST(Diff, CoarseGridRejected) {
  EXPECT_UCLAB_ERROR(GridSpec(3, 0, 0.0, 1.0, 7, 0.0, 1.0, 16), ErrorCode::grid_too_coarse);
}

TEST(Box, SphericalFreeWaveExactForm) {
  const auto g = grid_over(0.1, 10.0, 65);
  const auto phi = ScalarField::sample(g, exact_dalembert(GaussianProfile{-3.0, 1.0, 1.0}));
  EXPECT_LE(box(phi).sup_abs(), 1e-10 * phi.sup_abs());
}

TEST(Box, SphericalFreeWaveFiniteDifferenceOrder) {
  std::vector<double> h, e;
  for (int N : {65, 129, 257}) {
    const auto g = grid_over(0.1, 10.0, N);
    const auto phi = ScalarField::sample(g, exact_dalembert(GaussianProfile{-3.0, 1.0, 1.0}));
    h.push_back(g.ds());
    e.push_back(box(phi, DerivativeMode::finite_difference).sup_abs());
  }
  const double order = observed_order(h, e, 0.0);
  EXPECT_GE(order, 3.5);
  EXPECT_LE(order, 4.5);
}

TEST(Box, StaticMultipoles) {
  for (int ell : {0, 1, 2}) {
    const auto g = grid_over(0.1, 10.0, 33, 3, ell);
    const auto phi = ScalarField::sample(g, static_multipole(3, ell));
    double scale = 0.0;
    for (int i = 0; i < g.ns; ++i)
      for (int j = 0; j < g.ny; ++j) scale = std::max(scale, std::abs(phi.at(i, j)) / std::pow(g.r(i, j), 2));
    EXPECT_LE(box(phi).sup_abs(), 1e-12 * scale) << "ell = " << ell;
  }
}

TEST(Box, NullFormMatchesRectangularForm) {
  for (int ell : {0, 2}) {
    const auto g = grid_over(0.3, 3.0, 9, 4, ell);
    const auto form = log_gaussian(0.2, -0.1, 0.8);
    const auto phi = ScalarField::sample(g, form);
    const auto bx = box(phi);
    const auto phi_tr = [&](double t, double r) { return form.value(0.5 * (t - r), 0.5 * (t + r)); };
    for (int i = 0; i < g.ns; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const double ref = box_tr(phi_tr, g.t(i, j), g.r(i, j), 4, g.lambda());
        EXPECT_NEAR(bx.at(i, j), ref, 1e-6 * std::max(1.0, std::abs(ref)));
      }
  }
}

TEST(Scaling, Examples) {
  const auto g = grid_over(0.1, 10.0, 17);
  const auto f = ScalarField::from_function(g, [](auto u, auto v) { return -(u * v); });
  const auto Sf = scaling(f);
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) EXPECT_LE(rel_err(Sf.at(i, j), g.f(i)), 1e-14);

  const auto one = ScalarField::from_function(g, [](auto u, auto v) { return 0.0 * u * v + 1.0; });
  EXPECT_LE(max_diff(scaling_star(one, 3), [](double, double) { return 0.5; }), 1e-15);

  const auto hf = ScalarField::from_function(g, [](auto u, auto v) { return -(v / u); });
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) EXPECT_LE(std::abs(scaling(hf).at(i, j)), 1e-13 * g.h(j));
}

TEST(Conjugate, Examples) {
  const auto g = grid_over(0.1, 10.0, 17);
  const auto phi = ScalarField::sample(g, log_gaussian(0.0, 0.0, 1.0));
  const auto zero = Reparametrization::custom([](double) { return 0.0; }, [](double) { return 0.0; },
                                              [](double) { return 0.0; }, [](double) { return 0.0; });
  const auto same = conjugate(phi, zero);
  for (std::size_t k = 0; k < phi.values().size(); ++k) EXPECT_EQ(same.values()[k], phi.values()[k]);

  const double a = 0.7;
  const auto one = ScalarField::from_function(g, [](auto u, auto v) { return 0.0 * u * v + 1.0; });
  const auto psi = conjugate(one, Reparametrization::power_log(a));
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) EXPECT_LE(rel_err(psi.at(i, j), std::pow(g.f(i), a)), 1e-14);
}

TEST(Conjugate, OverflowDetected) {
  const auto g = grid_over(1e-5, 1e5, 17);
  const auto one = ScalarField::from_function(g, [](auto u, auto v) { return 0.0 * u * v + 1.0; });
  EXPECT_UCLAB_ERROR(conjugate(one, Reparametrization::power_log(1000.0)), ErrorCode::weight_overflow);
}

TEST(ConjugatedWaveResidual, ZeroField) {
  const auto g = grid_over(0.1, 10.0, 33);
  const auto r = conjugated_wave_residual(ScalarField::zero(g), Reparametrization::power_log(1.0),
                                          NonlinearityU::zero(), 3, 0, DerivativeMode::finite_difference);
  EXPECT_EQ(r.sup, 0.0);
}

TEST(ConjugatedWaveResidual, UnitConjugateConverges) {
  const auto rep = Reparametrization::split_low(validate_params(1.0, 0.1, 0.5));
  std::vector<double> h, e;
  for (int N : {33, 65, 129}) {
    const auto g = grid_over(0.1, 1.0, N);
    const auto phi = unit_conjugate(g, rep);
    EXPECT_LE(conjugated_wave_residual(phi, rep, NonlinearityU::zero(), 3, 0).sup, 1e-10);
    h.push_back(g.ds());
    e.push_back(conjugated_wave_residual(phi, rep, NonlinearityU::zero(), 3, 0, DerivativeMode::finite_difference).sup);
  }
  const double order = observed_order(h, e, 0.0);
  EXPECT_GE(order, 1.5);
  EXPECT_LE(order, 4.5);
  EXPECT_LT(e.back(), e.front());
}

TEST(ConjugatedWaveResidual, GaussianBumpOrder) {
  const auto rep = Reparametrization::power_log(0.5);
  std::vector<double> h, e;
  for (int N : {33, 65, 129}) {
    const auto g = grid_over(0.1, 10.0, N);
    const auto phi = ScalarField::sample(g, log_gaussian(0.3, -0.2, 1.0)).grid_only();
    h.push_back(g.ds());
    e.push_back(conjugated_wave_residual(phi, rep, NonlinearityU::zero(), 3, 0).sup);
  }
  const double order = observed_order(h, e, 0.0);
  EXPECT_GE(order, 1.5);
  EXPECT_LE(order, 4.5);
}

TEST(ConjugatedWaveResidual, PowerNonlinearityRequiresSphericalMode) {
  const auto g = grid_over(0.1, 10.0, 17, 3, 1);
  const auto U = NonlinearityU::power(1, 3.0, Potential::constant(1.0));
  EXPECT_UCLAB_ERROR(conjugated_wave_residual(ScalarField::zero(g), Reparametrization::power_log(1.0), U, 3, 1),
                     ErrorCode::mode_not_supported);
}

TEST(ScalarField, SampledValuesMatchClosedForm) {
  const auto g = grid_over(0.1, 10.0, 33);
  const auto form = log_gaussian(0.1, 0.2, 0.9);
  const auto phi = ScalarField::sample(g, form);
  EXPECT_LE(max_diff(phi, form.value), 1e-12);
  EXPECT_UCLAB_ERROR(ScalarField(g, std::vector<double>(g.size() - 1, 0.0)), ErrorCode::invalid_input);
  std::vector<double> bad(g.size(), 0.0);
  bad[5] = NAN;
  EXPECT_UCLAB_ERROR(ScalarField(g, bad), ErrorCode::invalid_input);
}

TEST(DecayFunctionals, SaturatingProfile) {
  const double beta = 1.0;
  const int n = 3;
  const double e = 0.5 * (n - 1 + beta);
  const auto g = grid_over(0.01, 1e3, 129);
  const auto phi = ScalarField::from_function(g, [e](auto u, auto v) {
    using std::pow;
    return pow(1.0 + (v - u) - u * v, -e);
  });
  const auto rep = decay_functionals(phi, beta);
  EXPECT_NEAR(rep.sup_field, 1.0, 1e-12);
  EXPECT_NEAR(rep.trend[2], 0.0, 1e-12);
  for (const auto& lv : rep.level_sups) EXPECT_NEAR(lv[2], 1.0, 1e-12);
}

TEST(DecayFunctionals, OutgoingWave) {
  const auto g = grid_over(1e-2, 1e4, 257);
  const auto phi = ScalarField::sample(g, exact_dalembert(BumpProfile{-3.0, 2.0, 1.0}));
  const auto flat = decay_functionals(phi, 0.0);
  EXPECT_TRUE(std::isfinite(flat.sup_field));
  EXPECT_GT(flat.sup_field, 0.0);
  EXPECT_TRUE(flat.consistent) << "trend " << flat.truncation_trend;

  const auto grow = decay_functionals(phi, 0.5);
  EXPECT_FALSE(grow.consistent);
  for (std::size_t k = 1; k < grow.level_sups.size(); ++k)
    EXPECT_GT(grow.level_sups[k][2], grow.level_sups[k - 1][2]);
}

TEST(DecayFunctionals, MultipoleDivergesAboveTwiceEll) {
  // near h = 1 the truncation radius tracks f, so the levels reach toward spacelike infinity
  const auto g = GridSpec::over(AdmissibleRegion(1e-2, 1e4, 0.5, 2.0), 3, 1, 129, 33);
  const auto phi = ScalarField::sample(g, static_multipole(3, 1));
  EXPECT_GT(decay_functionals(phi, 2.0).truncation_trend, 0.05);
}

TEST(RadiationWeight, Examples) {
  const auto g = grid_over(1e-2, 1e4, 129);
  EXPECT_EQ(max_abs(radiation_weight(ScalarField::zero(g), 3).slice_sup), 0.0);

  const auto wave = radiation_weight(ScalarField::sample(g, exact_dalembert(BumpProfile{-3.0, 2.0, 1.0})), 3);
  const double top = *std::max_element(wave.slice_sup.begin(), wave.slice_sup.end());
  EXPECT_LT(top, 10.0);
  EXPECT_LE(wave.slice_sup.back(), 1.1 * wave.slice_sup[wave.slice_sup.size() / 2]);

  // r^{-2} on f = const: (1 + |u| + |v| + f) / (|u| + |v|)^2 peaks at h = 1 with value (1 + sqrt f)^2 / (4f)
  const auto g1 = grid_over(1e-2, 1e4, 129, 3, 1);
  const auto mp = radiation_weight(ScalarField::sample(g1, static_multipole(3, 1)), 3);
  for (std::size_t k = 0; k < mp.slice_f.size(); ++k) {
    const double peak = std::pow(1.0 + std::sqrt(mp.slice_f[k]), 2) / (4.0 * mp.slice_f[k]);
    EXPECT_LE(mp.slice_sup[k], peak * (1.0 + 1e-12));
    EXPECT_GE(mp.slice_sup[k], 0.99 * peak);
  }
  EXPECT_NEAR(mp.slice_sup.back(), 0.25, 0.01);
}
