#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "zeno/errors.hpp"
#include "zeno/propagator.hpp"

using namespace zeno;

namespace {

constexpr double pi = std::numbers::pi;

// Free Gaussian packet with width s0 and momentum k0, exact at time t.
Complex gaussian(double x, double t, double s0, double k0, double hbar, double mass) {
  const Complex a(s0 * s0, hbar * t / (2 * mass));
  const Complex pre = std::pow(2 * pi, -0.25) * std::sqrt(s0 / a);
  const Complex arg = -(x - hbar * k0 * t / mass) * (x - hbar * k0 * t / mass) / (4.0 * a) +
                      Complex(0, 1) * k0 * (x - hbar * k0 * t / (2 * mass));
  return pre * std::exp(arg);
}

}  // namespace

TEST(Propagator, FftFriendlySizes) {
  EXPECT_EQ(fft_friendly_size(1), 1u);
  EXPECT_EQ(fft_friendly_size(11), 12u);
  EXPECT_EQ(fft_friendly_size(97), 98u);
  EXPECT_EQ(fft_friendly_size(1025), 1029u);
}

TEST(Propagator, GaussianPacketMatchesAnalytic) {
  for (const PhysicalUnits u : {PhysicalUnits{1.0, 1.0}, PhysicalUnits{0.7, 2.5}}) {
    const Grid g = Grid::cube(1, -10.0, 20.0, 512);
    const double s0 = 0.6, k0 = 2.0, t = 0.8;
    const auto psi = WaveFunction::sample(g, [&](const Point& x) { return gaussian(x[0], 0.0, s0, k0, u.hbar, u.mass); });
    const SpectralPropagatorPlan plan(g, t, u);
    const auto out = crop(evolve_free(psi, t, plan), g);
    const auto ref = WaveFunction::sample(g, [&](const Point& x) { return gaussian(x[0], t, s0, k0, u.hbar, u.mass); });
    EXPECT_LT(distance(out, ref), 1e-9);
  }
}

TEST(Propagator, UnitaryAndGroupProperty) {
  std::mt19937 rng(3);
  std::normal_distribution<double> n;
  const Grid g = Grid::cube(2, 0.0, 1.0, 24);
  const SpectralPropagatorPlan plan(g, 0.02);
  WaveFunction psi(plan.grid());
  for (auto& a : psi.amplitudes()) a = {n(rng), n(rng)};
  const double n0 = psi.norm();
  const auto ab = evolve_free(evolve_free(psi, 0.007, plan), 0.011, plan);
  const auto once = evolve_free(psi, 0.018, plan);
  EXPECT_NEAR(ab.norm(), n0, 1e-12 * n0);
  EXPECT_LT(distance(ab, once), 1e-11 * n0);
  const auto back = evolve_free(once, -0.018, plan);
  EXPECT_LT(distance(back, psi), 1e-11 * n0);
}

TEST(Propagator, MatchesDensePlaneWaveSum) {
  const Grid g = Grid::cube(1, 0.0, 1.0, 40);
  const SpectralPropagatorPlan plan(g, 0.01);
  const auto& pg = plan.grid();
  const auto U = oracle::periodic_free_evolution(pg.size(), pg.axis(0).spacing(), 0.01);
  const auto psi = WaveFunction::sample(pg, [](const Point& x) { return Complex(std::exp(-40 * (x[0] - 0.5) * (x[0] - 0.5)), 0); });
  oracle::VectorC v(static_cast<Eigen::Index>(pg.size()));
  for (std::size_t j = 0; j < pg.size(); ++j) v(static_cast<Eigen::Index>(j)) = psi.amplitudes()[j];
  const oracle::VectorC w = U * v;
  const auto out = evolve_free(psi, 0.01, plan);
  for (std::size_t j = 0; j < pg.size(); ++j) EXPECT_NEAR(std::abs(w(static_cast<Eigen::Index>(j)) - out.amplitudes()[j]), 0.0, 1e-12);
}

TEST(Propagator, GuardAndPadding) {
  const Grid g = Grid::cube(1, 0.0, 1.0, 64);
  const SpectralPropagatorPlan plan(g, 0.05);
  EXPECT_TRUE(plan.grid().nests(g));
  EXPECT_GE(plan.guard_margin(0.05), SpectralPropagatorPlan::kGuardConstant - 1e-12);
  EXPECT_GE(plan.tau_max(), 0.05);
  EXPECT_NO_THROW(plan.check_guard(-0.05));
  EXPECT_THROW(plan.check_guard(4 * plan.tau_max()), GuardViolation);
  WaveFunction psi(plan.grid());
  EXPECT_THROW(plan.apply(psi.amplitudes(), 4 * plan.tau_max()), GuardViolation);
}

TEST(Propagator, PhaseCacheAndCounters) {
  const SpectralPropagatorPlan plan(Grid::cube(1, 0.0, 1.0, 32), 0.01);
  WaveFunction psi(plan.grid());
  psi.amplitudes()[3] = 1.0;
  plan.apply(psi.amplitudes(), 0.01);
  plan.apply(psi.amplitudes(), 0.01);
  const auto c = plan.counters();
  EXPECT_EQ(c.transforms, 4u);
  EXPECT_EQ(c.cache_misses, 1u);
  EXPECT_EQ(c.cache_hits, 1u);
  EXPECT_EQ(plan.phases(0.01).get(), plan.phases(0.01).get());
}

TEST(Propagator, KernelQuadratureApproachesSpectral) {
  // Smooth, well-resolved packet: the oscillatory quadrature converges with refinement.
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t pts : {128, 256, 512}) {
    const Grid g = Grid::cube(1, -6.0, 12.0, pts);
    const auto psi = WaveFunction::sample(g, [](const Point& x) { return Complex(std::exp(-x[0] * x[0]), 0); });
    const auto k = kernel_evolve(psi, 0.05);
    const auto s = crop(evolve_free(psi, 0.05, SpectralPropagatorPlan(g, 0.05)), g);
    const double err = distance(k, s);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(Propagator, KernelRejectsZeroTau) {
  const auto psi = WaveFunction::sample(Grid::cube(1, 0, 1, 16), [](const Point&) { return Complex(1, 0); });
  EXPECT_THROW(kernel_evolve(psi, 0.0), StructuralError);
}
