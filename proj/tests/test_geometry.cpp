#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "uclab/geometry.hpp"

using namespace uclab;

TEST(NullFromRect, Examples) {
  auto a = null_from_rect(0.0, 2.0);
  EXPECT_DOUBLE_EQ(a.u, -1.0);
  EXPECT_DOUBLE_EQ(a.v, 1.0);
  auto b = null_from_rect(3.0, 5.0);
  EXPECT_DOUBLE_EQ(b.u, -1.0);
  EXPECT_DOUBLE_EQ(b.v, 4.0);
  auto c = null_from_rect(0.0, 0.0);
  EXPECT_EQ(c.u, 0.0);
  EXPECT_EQ(c.v, 0.0);
  EXPECT_UCLAB_ERROR(null_from_rect(1.0, -0.5), ErrorCode::invalid_input);
}

TEST(Hyperbolic, Examples) {
  auto a = hyperbolic(-1.0, 1.0);
  EXPECT_DOUBLE_EQ(a.f, 1.0);
  EXPECT_DOUBLE_EQ(a.h, 1.0);
  auto b = hyperbolic(-2.0, 2.0);
  EXPECT_DOUBLE_EQ(b.f, 4.0);
  EXPECT_DOUBLE_EQ(b.h, 1.0);
  auto c = hyperbolic(-1.0, 4.0);
  EXPECT_DOUBLE_EQ(c.f, 4.0);
  EXPECT_DOUBLE_EQ(c.h, 4.0);
  EXPECT_UCLAB_ERROR(hyperbolic(0.0, 1.0), ErrorCode::outside_exterior_region);
  EXPECT_UCLAB_ERROR(hyperbolic(-1.0, -1.0), ErrorCode::outside_exterior_region);
}

TEST(PointFromFh, Examples) {
  auto a = point_from_fh(4.0, 1.0);
  EXPECT_DOUBLE_EQ(a.u(), -2.0);
  EXPECT_DOUBLE_EQ(a.v(), 2.0);
  EXPECT_DOUBLE_EQ(a.r(), 4.0);
  EXPECT_DOUBLE_EQ(a.t(), 0.0);
  auto b = point_from_fh(1.0, 1.0);
  EXPECT_DOUBLE_EQ(b.r(), 2.0);
  EXPECT_DOUBLE_EQ(b.t(), 0.0);
  auto c = point_from_fh(1.0, 4.0);
  EXPECT_DOUBLE_EQ(c.u(), -0.5);
  EXPECT_DOUBLE_EQ(c.v(), 2.0);
  EXPECT_DOUBLE_EQ(c.r(), 2.5);
  EXPECT_DOUBLE_EQ(c.t(), 1.5);
  EXPECT_UCLAB_ERROR(point_from_fh(0.0, 1.0), ErrorCode::invalid_input);
  EXPECT_UCLAB_ERROR(point_from_fh(1.0, -2.0), ErrorCode::invalid_input);
}

TEST(MetricData, Examples) {
  for (int n : {2, 3, 5}) {
    auto m = metric_data(SpacetimePoint(-1.0, 1.0), n);
    EXPECT_NEAR(m.grad_f_sq, 1.0, 1e-15);
    EXPECT_EQ(m.grad_f_grad_h, 0.0);
    EXPECT_DOUBLE_EQ(m.box_f, 0.5 * (n + 1));
  }
  EXPECT_DOUBLE_EQ(metric_data(SpacetimePoint(-0.3, 7.0), 3).box_f, 2.0);
  EXPECT_NEAR(metric_data(SpacetimePoint(-2.0, 2.0), 3).grad_h_sq, -0.25, 1e-15);
  EXPECT_UCLAB_ERROR(metric_data(SpacetimePoint(1.0, 2.0), 3), ErrorCode::outside_exterior_region);
}

TEST(MetricData, VolumeDensity) {
  const SpacetimePoint q(-0.5, 2.0);
  EXPECT_DOUBLE_EQ(metric_data(q, 3).volume_density, 2.0 * 2.5 * 2.5);
  EXPECT_DOUBLE_EQ(metric_data(q, 2).volume_density, 2.0 * 2.5);
}

TEST(Invert, Examples) {
  auto a = invert(SpacetimePoint(-1.0, 1.0));
  EXPECT_DOUBLE_EQ(a.u(), -1.0);
  EXPECT_DOUBLE_EQ(a.v(), 1.0);
  auto b = invert(SpacetimePoint(-2.0, 2.0));
  EXPECT_DOUBLE_EQ(b.u(), -0.5);
  EXPECT_DOUBLE_EQ(b.v(), 0.5);
  EXPECT_DOUBLE_EQ(b.f(), 0.25);
  EXPECT_DOUBLE_EQ(invert(SpacetimePoint(-1.0, 4.0)).h(), 4.0);
}

TEST(GeometryInvariants, RandomPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lg(-8.0, 8.0);
  for (int k = 0; k < 2000; ++k) {
    const double u = -std::exp(lg(rng)), v = std::exp(lg(rng));
    const SpacetimePoint q(u, v);
    const SpacetimePoint back = point_from_fh(q.f(), q.h());
    EXPECT_LE(rel_err(back.u(), u), 1e-12);
    EXPECT_LE(rel_err(back.v(), v), 1e-12);

    const SpacetimePoint iq = invert(q);
    EXPECT_LE(std::abs(iq.f() * q.f() - 1.0), 1e-12);
    const SpacetimePoint twice = invert(iq);
    EXPECT_LE(rel_err(twice.u(), u), 1e-14);
    EXPECT_LE(rel_err(twice.v(), v), 1e-14);

    EXPECT_LE(std::abs(metric_data(q, 3).grad_f_grad_h), 1e-15 * v / -u);
    EXPECT_LE(rel_err(metric_data(q, 3).grad_f_sq, q.f()), 1e-14);
    EXPECT_LE(rel_err(metric_data(q, 4).grad_h_sq, -q.f() / (u * u * u * u)), 1e-13);
  }
}

TEST(AdmissibleRegion, OpenMembership) {
  const AdmissibleRegion reg(0.5, 2.0, 0.5, 2.0);
  EXPECT_TRUE(reg.contains(point_from_fh(1.0, 1.0)));
  EXPECT_FALSE(reg.contains(point_from_fh(2.0, 1.0)));
  EXPECT_TRUE(reg.contains(point_from_fh(2.0, 1.0), 1e-9));
  EXPECT_UCLAB_ERROR(AdmissibleRegion(2.0, 1.0, 0.5, 2.0), ErrorCode::invalid_input);
  EXPECT_UCLAB_ERROR(AdmissibleRegion(0.5, 2.0, 0.5, INFINITY), ErrorCode::invalid_input);
}
