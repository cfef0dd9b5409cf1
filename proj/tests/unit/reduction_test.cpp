#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "zeno/errors.hpp"
#include "zeno/reduction.hpp"

using namespace zeno;

namespace {

constexpr double pi = std::numbers::pi;

ReductionPlan quick_rectangle() {
  ReductionPlan p;
  p.family = RectangleToInterval{pi, {0.3, 0.25, 0.2}, 1, 3};
  p.zeno.run_transverse = false;
  p.zeno.negative_control = false;
  return p;
}

}  // namespace

TEST(Superselection, GapLawAndErrors) {
  EXPECT_DOUBLE_EQ(superselection_gap(1.0, 1, 2), 1.5 * pi * pi);
  EXPECT_LT(superselection_gap(1.0, 2, 1), 0.0);
  EXPECT_THROW(superselection_gap(1.0, 2, 2), StructuralError);
  EXPECT_THROW(superselection_gap(0.0, 1, 2), StructuralError);
}

TEST(LimitOrder, StepsRespectTargetAndBudget) {
  ZenoSettings s;
  const double e = 0.5 * pi * pi / (0.1 * 0.1);
  const long N = limit_order_steps(5e-4, e, s, {}, "b=0.1");
  EXPECT_LE(5e-4 / N * e, kLimitOrderRatio);
  EXPECT_LE(N, s.max_steps);
  s.max_steps = 10;
  try {
    limit_order_steps(1.0, e, s, {}, "b=0.1");
    FAIL() << "expected a guard violation";
  } catch (const GuardViolation& g) {
    EXPECT_NE(std::string(g.what()).find("b=0.1"), std::string::npos);
  }
}

TEST(ReductionPlan, Validation) {
  auto p = quick_rectangle();
  EXPECT_NO_THROW(p.validate());
  p.family = RectangleToInterval{pi, {0.1, 0.2, 0.05}, 1, 3};
  EXPECT_THROW(p.validate(), StructuralError);
  p.family = AnnulusToCircle{1.0, {0.1, 0.05}, {0}};
  EXPECT_THROW(p.validate(), StructuralError);
  p.family = AnnulusToCircle{1.0, {0.1, 0.05, 0.02}, {}};
  EXPECT_THROW(p.validate(), StructuralError);
  p = quick_rectangle();
  p.zeno.target_ratio = 0.5;
  EXPECT_THROW(p.validate(), StructuralError);
}

TEST(Reduction, RectangleRegularizedLimitIsTheInterval) {
  const auto r = reduce(quick_rectangle());
  ASSERT_EQ(r.limits.size(), 3u);
  for (const auto& l : r.limits) EXPECT_NEAR(l.fit.c0, l.target, 1e-9 * (1 + std::abs(l.target)));
  EXPECT_NEAR(r.limits[0].target, 0.5, 1e-12);  // n^2/2 on [0, pi]
  for (const auto& p : r.points) EXPECT_LE(p.guard_ratio, kLimitOrderRatio);
  EXPECT_FALSE(r.gaps.empty());
}

TEST(Reduction, EnergyShiftIsAGauge) {
  auto p = quick_rectangle();
  const auto a = reduce(p);
  p.energy_shift = 3.75;
  const auto b = reduce(p);
  for (std::size_t k = 0; k < a.limits.size(); ++k) {
    EXPECT_NEAR(b.limits[k].fit.c0 - a.limits[k].fit.c0, 3.75, 1e-9);
    EXPECT_NEAR(b.limits[k].target - a.limits[k].target, 3.75, 1e-12);
  }
  EXPECT_NEAR(b.limits[2].fit.c0 - b.limits[0].fit.c0, a.limits[2].fit.c0 - a.limits[0].fit.c0, 1e-9);
}

TEST(Reduction, CircleOffsetMatchesRadialOracle) {
  ReductionPlan p;
  p.family = AnnulusToCircle{2.0, {0.2, 0.1, 0.05, 0.025}, {0, 2}};
  const auto r = reduce(p);
  EXPECT_NEAR(r.offset, -1.0 / (8 * 4.0), 0.05 / 32);
  EXPECT_FALSE(std::isnan(r.limits[0].drop_coarsest_shift));
  EXPECT_LE(r.limits[0].drop_coarsest_shift, 1e-3);
  // The thinnest rung against a dense radial solve.
  const double dr = 0.025;
  const double fd = oracle::radial_fd_eigs(0.0, 2.0 - dr / 2, 2.0 + dr / 2, 1200, 1)[0];
  const auto& top = r.points.back();
  EXPECT_NEAR(top.raw_energies[0], fd, 5e-6 * fd);
}

TEST(Reduction, SphereOffsetVanishesWithUnits) {
  ReductionPlan p;
  p.family = ShellToSphere{1.0, {0.1, 0.05, 0.02}, {0, 1, 3}};
  p.units = {0.5, 2.0};
  const auto r = reduce(p);
  EXPECT_NEAR(r.offset, 0.0, r.offset_tolerance);
  for (const auto& l : r.limits)
    EXPECT_NEAR(l.target, p.units.kinetic_prefactor() * l.label * (l.label + 1), 1e-12);
}

TEST(Reduction, TransverseRunStaysInSector) {
  const double b = 0.3;
  const double e1 = 0.5 * pi * pi / (b * b);
  const double t = 0.02;
  const long N = 20000;
  const auto run = transverse_zeno_run(b, 1, t, N, 512);
  EXPECT_LE(t / N * e1, kLimitOrderRatio);
  EXPECT_GT(run.final_norm, 0.9);
  EXPECT_LT(run.cross_sector, 0.05);
  EXPECT_EQ(run.cross_sector_mode % 2, 1);  // parity keeps even modes out
}
