#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "uclab/grid.hpp"
#include "uclab/weights.hpp"

using namespace uclab;

namespace {

SplitWeightParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ua(0.2, 3.0), unit(0.01, 0.99);
  for (;;) {
    const double a = ua(rng);
    const double p = unit(rng) * 2.0 * a;
    const double cap = 0.25 * std::min(2.0 * a - p, 4.0 * p);
    const double b = unit(rng) * cap;
    if (b > 0.0) return validate_params(a, b, p);
  }
}

GridSpec square_grid(int N = 33) { return GridSpec::over(AdmissibleRegion(0.1, 10.0, 0.1, 10.0), 3, 0, N, N); }

}  // namespace

TEST(ValidateParams, Examples) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  EXPECT_NEAR(q.a - q.b - 0.5 * q.p, 0.65, 1e-15);
  EXPECT_GT(q.a - q.b - 0.5 * q.p, q.b);
  EXPECT_NO_THROW(validate_params(1.0, 0.0, 0.5));
  try {
    validate_params(1.0, 0.5, 0.5);
    FAIL() << "b = 0.5 accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_weight_params);
    EXPECT_NE(std::string(e.what()).find("0.375"), std::string::npos) << e.what();
  }
  EXPECT_UCLAB_ERROR(validate_params(1.0, 0.1, 2.0), ErrorCode::invalid_weight_params);
  EXPECT_UCLAB_ERROR(validate_params(-1.0, 0.1, 0.5), ErrorCode::invalid_weight_params);
  EXPECT_UCLAB_ERROR(validate_params(1.0, -0.1, 0.5), ErrorCode::invalid_weight_params);
}

TEST(EvalWeight, Examples) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  const auto lo = eval_weight(Reparametrization::split_low(q), 1.0);
  const auto hi = eval_weight(Reparametrization::split_high(q), 1.0);
  EXPECT_NEAR(lo.F, -0.2, 1e-15);
  EXPECT_NEAR(lo.dF, -1.0, 1e-15);
  EXPECT_NEAR(hi.F, -0.2, 1e-15);
  EXPECT_NEAR(hi.dF, -1.0, 1e-15);
  for (double a : {0.3, 2.0})
    for (double f : {1e-3, 0.7, 40.0}) {
      const auto e = eval_weight(Reparametrization::power_log(a), f);
      EXPECT_LE(rel_err(e.ddF, a / (f * f)), 1e-15);
      EXPECT_LE(rel_err(e.dF, -a / f), 1e-15);
      EXPECT_LE(rel_err(e.F, -a * std::log(f)), 1e-15);
    }
  EXPECT_UCLAB_ERROR(eval_weight(Reparametrization::power_log(1.0), 0.0), ErrorCode::domain_error);
  EXPECT_UCLAB_ERROR(eval_weight(Reparametrization::split_low(q), -1.0), ErrorCode::domain_error);
}

TEST(GH, Examples) {
  for (double f : {0.01, 1.0, 30.0}) {
    const auto g = gh(Reparametrization::power_log(0.7), f);
    EXPECT_NEAR(g.G, 0.0, 1e-14 / (f * f));
    EXPECT_NEAR(g.H, 0.0, 1e-14 / (f * f));
  }
  const auto low = Reparametrization::split_low(validate_params(1.0, 0.1, 0.5));
  EXPECT_NEAR(gh(low, 0.25).G, 0.1, 1e-14);
  EXPECT_NEAR(gh(low, 1.0).H, 0.0125, 1e-15);
  const auto custom = Reparametrization::custom([](double f) { return -std::log(f); }, [](double f) { return -1 / f; });
  EXPECT_UCLAB_ERROR(gh(custom, 1.0), ErrorCode::missing_derivative);
}

TEST(EnvelopeCheck, Examples) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  const auto low = Reparametrization::split_low(q), high = Reparametrization::split_high(q);
  const auto e1 = envelope_check(low, {1.0});
  EXPECT_TRUE(e1.holds);
  const double ratio = std::exp(-eval_weight(low, 1.0).F);
  EXPECT_NEAR(ratio, std::exp(0.2), 1e-15);
  EXPECT_GT(ratio, 1.0);
  EXPECT_LE(ratio, std::exp(1.0));

  const auto d = eval_weight(low, 0.01);
  EXPECT_GE(d.dF, -100.0);
  EXPECT_LT(d.dF, -90.0);
  EXPECT_TRUE(envelope_check(low, {0.01}).holds);

  const double r100 = std::exp(-eval_weight(high, 100.0).F) / std::pow(100.0, 1.1);
  EXPECT_GT(r100, 1.0);
  EXPECT_LE(r100, std::exp(1.0));
  EXPECT_TRUE(envelope_check(high, {100.0}).holds);

  EXPECT_UCLAB_ERROR(envelope_check(low, {2.0}), ErrorCode::range_mismatch);
  EXPECT_UCLAB_ERROR(envelope_check(high, {0.5}), ErrorCode::range_mismatch);
  EXPECT_UCLAB_ERROR(envelope_check(Reparametrization::power_log(1.0), {1.0}), ErrorCode::range_mismatch);
}

TEST(BulkCoefficient, Examples) {
  const auto q = validate_params(1.0, 0.1, 0.5);
  const auto lo = bulk_coefficient(Reparametrization::split_low(q), 1.0);
  EXPECT_NEAR(lo.value, 0.0375, 1e-15);
  EXPECT_NEAR(lo.bound, 0.005, 1e-16);
  EXPECT_TRUE(lo.holds);
  const auto hi = bulk_coefficient(Reparametrization::split_high(q), 1.0);
  EXPECT_NEAR(hi.value, 0.0625, 1e-15);
  EXPECT_TRUE(hi.holds);
  const auto z = bulk_coefficient(Reparametrization::split_low(validate_params(1.0, 0.0, 0.5)), 0.5);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_TRUE(z.degenerate);
  EXPECT_UCLAB_ERROR(bulk_coefficient(Reparametrization::split_low(q), 2.0), ErrorCode::range_mismatch);
}

TEST(GammaV, Examples) {
  const auto one = Potential::constant(1.0);
  const SpacetimePoint q(-0.7, 3.0);
  for (int n : {2, 3, 6})
    for (double a : {0.05, 1.0, 4.0}) EXPECT_NEAR(gamma_v(one, a, 1.0, q, n), 1.0, 1e-14);
  EXPECT_NEAR(gamma_v(one, 0.1, 3.0, q, 3), -0.2, 1e-14);
  for (double c : {-1.5, 0.5, 2.0}) {
    const double shift = gamma_v(Potential::f_power(2.0, c), 0.3, 2.0, q, 3) - gamma_v(one, 0.3, 2.0, q, 3);
    EXPECT_NEAR(shift, c, 1e-12);
  }
  EXPECT_UCLAB_ERROR(gamma_v(Potential::constant(-1.0), 0.1, 1.0, q, 3), ErrorCode::invalid_potential);
}

TEST(ClassifyPotential, ConstantIsStronglyMonotone) {
  const double mu = 0.5;
  const auto c = classify_potential(Potential::constant(1.0), 3.0, 1.0, 1.0, mu, square_grid());
  EXPECT_TRUE(c.strong_mono.holds);
  EXPECT_NEAR(c.strong_mono.margin, 2.0 - mu, 1e-14);
}

TEST(ClassifyPotential, SaturatingPotential) {
  const double beta = 3.0, p = 1.0, B = 2.0;
  const double eps = B * p * std::min(beta - p, p);
  const auto V = Potential::from(make_closed_form([eps, p](auto u, auto v) {
                                   using std::pow;
                                   const auto f = -(u * v);
                                   return value_of(f) < 1.0 ? eps * pow(f, -1.0 + 0.5 * p) : eps * pow(f, -1.0 - 0.5 * p);
                                 }),
                                 "saturating");
  const auto c = classify_potential(V, beta, p, B, 0.1, square_grid());
  EXPECT_TRUE(c.finite_order.holds);
  EXPECT_NEAR(c.finite_order.margin, 0.0, 1e-12);
  EXPECT_NEAR(c.required_B, B, 1e-12);
  EXPECT_FALSE(classify_potential(V, beta, p, 0.99 * B, 0.1, square_grid()).finite_order.holds);
}

TEST(ClassifyPotential, FocusingSubconformal) {
  const auto one = Potential::constant(1.0);
  const auto ok = classify_potential(one, 3.0, 2.0, 1.0, 0.5, square_grid());
  EXPECT_TRUE(ok.focusing_mono.holds);
  EXPECT_NEAR(ok.focusing_mono.margin, 0.5, 1e-14);
  EXPECT_FALSE(classify_potential(one, 3.0, 2.0, 1.0, 1.5, square_grid()).focusing_mono.holds);
}

TEST(WeightInvariants, MatchingAtOne) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const auto q = random_params(rng);
    const auto lo = Reparametrization::split_low(q), hi = Reparametrization::split_high(q);
    const auto a = eval_weight(lo, 1.0), b = eval_weight(hi, 1.0);
    EXPECT_LE(std::abs(a.F - b.F), 1e-14);
    EXPECT_LE(std::abs(a.dF - b.dF), 1e-14);
    EXPECT_LE(std::abs(gh(lo, 1.0).G - gh(hi, 1.0).G), 1e-14);
  }
}

TEST(WeightInvariants, GHAgainstClosedForms) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lf(std::log(1e-3), std::log(1e3));
  for (int k = 0; k < 200; ++k) {
    const auto q = random_params(rng);
    const double f = std::exp(lf(rng));
    for (bool low : {true, false}) {
      const auto rep = low ? Reparametrization::split_low(q) : Reparametrization::split_high(q);
      const double g = q.b * q.p * std::pow(f, low ? q.p - 1.0 : -q.p - 1.0);
      const double h = (low ? 0.5 : -0.5) * q.p * g;
      const auto got = gh(rep, f);
      EXPECT_LE(rel_err(got.G, g), 1e-12) << "f = " << f;
      EXPECT_LE(rel_err(got.H, h), 1e-12) << "f = " << f;
    }
  }
}

TEST(WeightInvariants, BulkCoefficientExceedsBound) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> lf(0.0, std::log(1e3));
  for (int k = 0; k < 200; ++k) {
    const auto q = random_params(rng);
    const double t = lf(rng);
    EXPECT_TRUE(bulk_coefficient(Reparametrization::split_low(q), std::exp(-t)).holds);
    EXPECT_TRUE(bulk_coefficient(Reparametrization::split_high(q), std::exp(t)).holds);
  }
}
