#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"
#include "uclab/currents.hpp"

using namespace uclab;

namespace {

GridSpec grid_over(double f0, double f1, double h0, double h1, int N, int n = 3, int ell = 0) {
  return GridSpec::over(AdmissibleRegion(f0, f1, h0, h1), n, ell, N, N);
}

ClosedForm log_gaussian(double s0, double y0, double w, double amp = 1.0) {
  return make_closed_form([=](auto u, auto v) {
    using std::exp, std::log;
    const auto s = log(-(u * v)) - s0;
    const auto y = log(-(v / u)) - y0;
    return amp * exp(-(s * s + y * y) / (w * w));
  });
}

ClosedForm wavy() {
  return make_closed_form([](auto u, auto v) {
    using std::sin, std::cos, std::exp;
    return sin(0.7 * u + 0.3) * cos(0.4 * v) + exp(0.1 * u * v);
  });
}

ScalarField constant(const GridSpec& g, double c) {
  return ScalarField::from_function(g, [c](auto u, auto v) { return 0.0 * u * v + c; });
}

// Current from its tensor definition with the inverse metric of -4 du dv and
// derivatives by central differences of the value function:
//   e^{-2F}[grad f(phi) dphi - df |grad phi|^2 / 2 + c1 phi dphi + c0 phi^2 df],
//   c1 = (n-1)/4 - f F', c0 = (f F' - (n-1)/4) F' - G/2, averaged over one mode.
struct OracleWeight {
  double F, dF, G;
};

std::array<double, 2> oracle_current(const ClosedForm& phi, double u, double v, int n, double lambda,
                                     const OracleWeight& w) {
  const double e = 1e-4 * std::min(-u, v);
  auto val = [&](double du, double dv) { return phi.value(u + du, v + dv); };
  const double p = val(0, 0);
  const double pu = (val(-2 * e, 0) - 8 * val(-e, 0) + 8 * val(e, 0) - val(2 * e, 0)) / (12 * e);
  const double pv = (val(0, -2 * e) - 8 * val(0, -e) + 8 * val(0, e) - val(0, 2 * e)) / (12 * e);
  const double ginv[2][2] = {{0.0, -0.5}, {-0.5, 0.0}};
  const double df[2] = {-v, -u}, dphi[2] = {pu, pv};
  double grad_f_phi = 0.0, grad_phi_sq = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      grad_f_phi += ginv[a][b] * df[a] * dphi[b];
      grad_phi_sq += ginv[a][b] * dphi[a] * dphi[b];
    }
  const double r = v - u, f = -u * v;
  grad_phi_sq += lambda * p * p / (r * r);
  const double c1 = (n - 1) / 4.0 - f * w.dF;
  const double c0 = (f * w.dF - (n - 1) / 4.0) * w.dF - 0.5 * w.G;
  const double E = std::exp(-2.0 * w.F);
  std::array<double, 2> P{};
  for (int a = 0; a < 2; ++a)
    P[a] = E * (grad_f_phi * dphi[a] - 0.5 * df[a] * grad_phi_sq + c1 * p * dphi[a] + c0 * p * p * df[a]);
  return P;
}

}  // namespace

TEST(CurrentGeneral, ZeroField) {
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17);
  const auto P = current_general(ScalarField::zero(g), Reparametrization::power_log(1.0), NonlinearityU::zero(), 3);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(P.P_u[k], 0.0);
    EXPECT_EQ(P.P_v[k], 0.0);
  }
}

TEST(CurrentGeneral, UnitFieldAtMatchingLevel) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  const auto g = grid_over(0.25, 1.0, 0.5, 2.0, 17);
  const auto P = current_general(constant(g, 1.0), Reparametrization::split_low(q), NonlinearityU::zero(), 3);
  const auto Pf = contract(P, Direction::f), Ph = contract(P, Direction::h);
  const int top = g.ns - 1;
  for (int j = 0; j < g.ny; ++j) {
    EXPECT_LE(rel_err(Pf.at(top, j), 1.475 * std::exp(0.4)), 1e-14);
    EXPECT_NEAR(Pf.at(top, j), 2.2004, 1e-4);
  }
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) EXPECT_LE(std::abs(Ph.at(i, j)), 1e-14 * std::abs(Pf.at(i, j)));
}

TEST(CurrentGeneral, MatchesTensorDefinition) {
  const double a = 1.0, b = 0.1, p = 0.5;
  const auto rep = Reparametrization::split_low(validate_params(a, b, p));
  for (int ell : {0, 2}) {
    const auto g = grid_over(0.2, 1.0, 0.3, 3.0, 9, 3, ell);
    const auto form = wavy();
    const auto P = current_general(ScalarField::sample(g, form), rep, NonlinearityU::zero(), 3);
    for (int i = 0; i < g.ns; ++i)
      for (int j = 0; j < g.ny; ++j) {
        const double f = g.f(i);
        const OracleWeight w{-(a - b) * std::log(f) - b / p * std::pow(f, p), -(a - b) / f - b * std::pow(f, p - 1.0),
                             b * p * std::pow(f, p - 1.0)};
        const auto ref = oracle_current(form, g.u(i, j), g.v(i, j), 3, g.lambda(), w);
        const std::size_t k = g.index(i, j);
        const double scale = std::max(std::abs(ref[0]), std::abs(ref[1]));
        EXPECT_NEAR(P.P_u[k], ref[0], 1e-8 * scale);
        EXPECT_NEAR(P.P_v[k], ref[1], 1e-8 * scale);
      }
  }
}

TEST(CurrentGeneral, OutwardWeightRejected) {
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17);
  const auto outward = Reparametrization::custom([](double f) { return std::log(f); }, [](double f) { return 1 / f; },
                                                 [](double f) { return -1 / (f * f); },
                                                 [](double f) { return 2 / (f * f * f); });
  EXPECT_UCLAB_ERROR(current_general(constant(g, 1.0), outward, NonlinearityU::zero(), 3),
                     ErrorCode::not_inward_directed);
}

TEST(CurrentGeneral, QuadraticInField) {
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17, 3, 1);
  const auto rep = Reparametrization::power_log(0.8);
  const auto phi = ScalarField::sample(g, wavy());
  const auto P1 = current_general(phi, rep, NonlinearityU::zero(), 3);
  for (double alpha : {-2.0, 0.3, 7.0}) {
    std::vector<double> scaled(phi.values());
    for (double& x : scaled) x *= alpha;
    const auto Pa =
        current_general(ScalarField(g, scaled), rep, NonlinearityU::zero(), 3, DerivativeMode::finite_difference);
    const auto P1fd = current_general(phi, rep, NonlinearityU::zero(), 3, DerivativeMode::finite_difference);
    for (std::size_t k = 0; k < g.size(); ++k) {
      EXPECT_LE(std::abs(Pa.P_u[k] - alpha * alpha * P1fd.P_u[k]), 1e-12 * alpha * alpha * std::abs(P1fd.P_u[k]) + 1e-300);
      EXPECT_LE(std::abs(Pa.P_v[k] - alpha * alpha * P1fd.P_v[k]), 1e-12 * alpha * alpha * std::abs(P1fd.P_v[k]) + 1e-300);
    }
  }
  (void)P1;
}

TEST(Contract, StressEnergyOfLinearField) {
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 9);
  const auto phi = ScalarField::from_function(g, [](auto u, auto v) { return u + 0.0 * v; });
  const auto& d = phi.derivatives();
  for (int i = 0; i < g.ns; ++i) {
    const double E = std::exp(0.6 * std::log(g.f(i)));
    for (int j = 0; j < g.ny; ++j) {
      const double u = g.u(i, j), v = g.v(i, j);
      const auto P = assemble_current(d.at(g.index(i, j)), u, v, 3, 0.0, {E, 0.0, 0.0}, 0.0);
      EXPECT_LE(rel_err(P.dot_grad_f(u, v), 0.25 * E * u * u), 1e-14);
      EXPECT_LE(rel_err(P.u2_dot_grad_h(u, v), 0.25 * E * u * u), 1e-14);
      EXPECT_GE(P.u2_dot_grad_h(u, v), 0.0);
    }
  }
}

TEST(CurrentSplit, AgreesWithGeneralCurrent) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  const auto form = log_gaussian(0.1, 0.2, 1.3);
  for (Branch br : {Branch::low, Branch::high}) {
    const bool low = br == Branch::low;
    const auto g = low ? grid_over(0.05, 1.0, 0.2, 5.0, 33, 3, 1) : grid_over(1.0, 20.0, 0.2, 5.0, 33, 3, 1);
    const auto phi = ScalarField::sample(g, form);
    const auto Ps = current_split(phi, q, br, 3);
    const auto Pg = current_general(phi, low ? Reparametrization::split_low(q) : Reparametrization::split_high(q),
                                    NonlinearityU::zero(), 3);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double scale = std::max({std::abs(Pg.P_u[k]), std::abs(Pg.P_v[k]), 1e-300});
      EXPECT_LE(std::abs(Ps.P_u[k] - Pg.P_u[k]), 1e-12 * scale);
      EXPECT_LE(std::abs(Ps.P_v[k] - Pg.P_v[k]), 1e-12 * scale);
    }
  }
}

TEST(CurrentSplit, MatchingAcrossUnitLevel) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> c(-0.5, 0.5), wd(0.6, 1.5);
  const auto q = validate_params(1.3, 0.2, 0.7);
  const auto gl = grid_over(0.1, 1.0, 0.2, 5.0, 17, 3, 2);
  const auto gh_ = grid_over(1.0, 10.0, 0.2, 5.0, 17, 3, 2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto form = log_gaussian(c(rng), c(rng), wd(rng), 1.0 + c(rng));
    const auto Pl = current_split(ScalarField::sample(gl, form), q, Branch::low, 3);
    const auto Ph = current_split(ScalarField::sample(gh_, form), q, Branch::high, 3);
    for (int j = 0; j < gl.ny; ++j) {
      const std::size_t kl = gl.index(gl.ns - 1, j), kh = gh_.index(0, j);
      const double scale = std::max(std::abs(Pl.P_u[kl]), std::abs(Pl.P_v[kl]));
      EXPECT_LE(std::abs(Pl.P_u[kl] - Ph.P_u[kh]), 1e-13 * scale);
      EXPECT_LE(std::abs(Pl.P_v[kl] - Ph.P_v[kh]), 1e-13 * scale);
    }
  }
}

TEST(CurrentSplit, BranchRangeEnforced) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  const auto g = grid_over(0.5, 2.0, 0.5, 2.0, 17);
  EXPECT_UCLAB_ERROR(current_split(constant(g, 1.0), q, Branch::low, 3), ErrorCode::range_mismatch);
  EXPECT_UCLAB_ERROR(current_split(constant(g, 1.0), q, Branch::high, 3), ErrorCode::range_mismatch);
}

TEST(CurrentNl, ReducesToPowerLogWithLinearPotential) {
  const double a = 0.4;
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17, 3, 1);
  const auto phi = ScalarField::sample(g, wavy());
  for (int sign : {1, -1}) {
    const auto Pn = current_nl(phi, a, sign, 1.0, Potential::constant(1.0), 3);
    const auto Pg = current_general(phi, Reparametrization::power_log(a),
                                    NonlinearityU::power(sign, 1.0, Potential::constant(1.0)), 3);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double scale = std::max(std::abs(Pg.P_u[k]), std::abs(Pg.P_v[k]));
      EXPECT_LE(std::abs(Pn.P_u[k] - Pg.P_u[k]), 1e-12 * scale);
      EXPECT_LE(std::abs(Pn.P_v[k] - Pg.P_v[k]), 1e-12 * scale);
    }
  }
}

TEST(CurrentNl, SignFlipIsThePotentialFlux) {
  const double a = 0.3, p = 3.0, c = 2.0;
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17);
  const auto phi = ScalarField::sample(g, wavy());
  const auto Pp = current_nl(phi, a, 1, p, Potential::constant(c), 3);
  const auto Pm = current_nl(phi, a, -1, p, Potential::constant(c), 3);
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const std::size_t k = g.index(i, j);
      const double u = g.u(i, j), v = g.v(i, j);
      const double flux = 2.0 / (p + 1.0) * std::pow(g.f(i), 2.0 * a) * c * std::pow(std::abs(phi.at(i, j)), p + 1.0);
      const double scale = std::max({std::abs(Pp.P_u[k]), std::abs(Pp.P_v[k]), std::abs(flux * v)});
      EXPECT_NEAR(Pp.P_u[k] - Pm.P_u[k], flux * -v, 1e-13 * scale);
      EXPECT_NEAR(Pp.P_v[k] - Pm.P_v[k], flux * -u, 1e-13 * scale);
    }
  const auto zero = current_nl(ScalarField::zero(g), a, 1, p, Potential::constant(c), 3);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(zero.P_u[k], 0.0);
}

TEST(CurrentNl, HigherPowerNeedsSphericalMode) {
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17, 3, 1);
  EXPECT_UCLAB_ERROR(current_nl(ScalarField::zero(g), 0.3, 1, 3.0, Potential::constant(1.0), 3),
                     ErrorCode::mode_not_supported);
  EXPECT_UCLAB_ERROR(bulk_b(ScalarField::zero(g), Reparametrization::power_log(0.3),
                            NonlinearityU::power(1, 2.0, Potential::constant(1.0)), 3),
                     ErrorCode::mode_not_supported);
}

TEST(BulkB, Examples) {
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17);
  const auto phi = ScalarField::sample(g, wavy());
  const auto rep = Reparametrization::split_low(validate_params(1.0, 0.1, 0.5));
  const auto gz = grid_over(0.1, 1.0, 0.1, 10.0, 17);
  EXPECT_EQ(bulk_b(ScalarField::sample(gz, wavy()), rep, NonlinearityU::zero(), 3).sup_abs(), 0.0);

  const double a = 0.35;
  const auto B = bulk_b(phi, Reparametrization::power_log(a), NonlinearityU::power(1, 1.0, Potential::constant(1.0)), 3);
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double want = 0.5 * std::pow(g.f(i), 2.0 * a) * phi.at(i, j) * phi.at(i, j);
      EXPECT_LE(rel_err(-B.at(i, j), want), 1e-12);
    }
  EXPECT_EQ(bulk_b(ScalarField::zero(g), Reparametrization::power_log(a),
                   NonlinearityU::power(1, 1.0, Potential::constant(1.0)), 3)
                .sup_abs(),
            0.0);
}

TEST(BulkB, PowerLogClosedFormForVaryingPotential) {
  const double a = 0.2, p = 3.0;
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17);
  const auto phi = ScalarField::sample(g, log_gaussian(0.0, 0.3, 1.0));
  const auto V = Potential::f_power(1.5, -0.5);
  const auto B = bulk_b(phi, Reparametrization::power_log(a), NonlinearityU::power(-1, p, V), 3);
  for (int i = 0; i < g.ns; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const double u = g.u(i, j), v = g.v(i, j);
      const double gam = gamma_v(V, a, p, SpacetimePoint(u, v), 3);
      const double want = -std::pow(g.f(i), 2.0 * a) * V.value(u, v) * gam *
                          std::pow(std::abs(phi.at(i, j)), p + 1.0) / (p + 1.0);
      EXPECT_NEAR(-B.at(i, j), want, 1e-10 * std::abs(want) + 1e-300);
    }
}

TEST(BoundaryBound, ZeroFieldHoldsForAnyK) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 17);
  for (double K : {1e-6, 1.0}) {
    const auto r = boundary_bound_check(ScalarField::zero(g), q, 3, K);
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.K_min, 0.0);
  }
  EXPECT_TRUE(boundary_bound_check_nl(ScalarField::zero(g), 0.2, 1, 3.0, Potential::constant(1.0), 3, 1.0).holds);
  EXPECT_UCLAB_ERROR(boundary_bound_check(ScalarField::zero(g), q, 3, 0.0), ErrorCode::invalid_input);
}

TEST(BoundaryBound, CalibratedConstantStableUnderRefinement) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> c(-0.7, 0.7);
  for (int trial = 0; trial < 3; ++trial) {
    const auto form = log_gaussian(c(rng), c(rng), 1.0 + 0.5 * c(rng));
    std::vector<double> K;
    for (int N : {33, 65, 129}) {
      const auto g = grid_over(0.1, 10.0, 0.1, 10.0, N);
      const auto r = boundary_bound_check(ScalarField::sample(g, form), q, 3, 1.0);
      ASSERT_TRUE(std::isfinite(r.K_min));
      K.push_back(r.K_min);
    }
    EXPECT_LE(std::abs(K[2] - K[1]), 0.1 * K[2]);
    EXPECT_LE(std::abs(K[1] - K[0]), 0.1 * K[2]);
    const auto g = grid_over(0.1, 10.0, 0.1, 10.0, 65);
    EXPECT_TRUE(boundary_bound_check(ScalarField::sample(g, form), q, 3, K[2] * 1.01).holds);
  }
}

TEST(BoundaryBound, HContractionIgnoresAngularEnergy) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  const auto form = log_gaussian(0.2, -0.3, 1.1);
  const auto r0 = boundary_bound_check(ScalarField::sample(grid_over(0.1, 10.0, 0.1, 10.0, 33, 3, 0), form), q, 3, 1.0);
  const auto r2 = boundary_bound_check(ScalarField::sample(grid_over(0.1, 10.0, 0.1, 10.0, 33, 3, 2), form), q, 3, 1.0);
  for (std::size_t b : {1u, 3u}) {
    EXPECT_EQ(r0.bounds[b].name, r2.bounds[b].name);
    EXPECT_LE(rel_err(r2.bounds[b].K_min, r0.bounds[b].K_min), 1e-12);
    EXPECT_LE(std::abs(r2.bounds[b].margin - r0.bounds[b].margin), 1e-12 * r0.bounds[b].K_min);
  }
  EXPECT_NE(r0.bounds[0].margin, r2.bounds[0].margin);
}
