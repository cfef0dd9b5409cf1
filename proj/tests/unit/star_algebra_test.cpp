#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "zeno/errors.hpp"
#include "zeno/star_algebra.hpp"

using namespace zeno;

namespace {

MatrixC random_matrix(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatrixC m(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) m(i, j) = {g(rng), g(rng)};
  return m;
}

OperatorMatrix random_subspace_projector(Eigen::Index n, Eigen::Index r, std::mt19937_64& rng) {
  Eigen::HouseholderQR<MatrixC> qr(random_matrix(n, rng));
  const MatrixC Q = qr.householderQ() * MatrixC::Identity(n, r);
  return OperatorMatrix(Q * Q.adjoint(), OperatorBasis::grid, true);
}

}  // namespace

TEST(StarProduct, AssociativeForArbitraryProjectors) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 25; ++trial) {
    const auto P = random_subspace_projector(24, 1 + static_cast<Eigen::Index>(rng() % 23), rng);
    const OperatorMatrix A(random_matrix(24, rng)), B(random_matrix(24, rng)), C(random_matrix(24, rng));
    const MatrixC l = star_product(star_product(A, B, P), C, P).values;
    const MatrixC r = star_product(A, star_product(B, C, P), P).values;
    EXPECT_LT((l - r).norm(), 1e-12 * l.norm());
  }
}

TEST(StarProduct, CompressionIsHomomorphismWithUnitP) {
  std::mt19937_64 rng(23);
  const auto P = random_subspace_projector(20, 7, rng);
  const OperatorMatrix A(random_matrix(20, rng)), B(random_matrix(20, rng));
  const auto h = homomorphism_check(A, B, P);
  EXPECT_LT(h.defect_star, 1e-12 * h.reference);
  EXPECT_GT(h.defect_plain, 1e-3 * h.reference);
  const MatrixC unit = star_product(project(A, P), P, P).values;
  EXPECT_LT((unit - project(A, P).values).norm(), 1e-12 * unit.norm());
}

TEST(StarProduct, UnitAndIdentityCases) {
  std::mt19937_64 rng(1);
  const auto P = random_subspace_projector(12, 5, rng);
  EXPECT_LT((star_product(P, P, P).values - P.values).norm(), 1e-12);
  const OperatorMatrix A(random_matrix(12, rng)), B(random_matrix(12, rng));
  const OperatorMatrix I(MatrixC::Identity(12, 12), OperatorBasis::grid, true);
  EXPECT_LT((star_product(A, B, I).values - A.values * B.values).norm(), 1e-12 * (A.values * B.values).norm());
  const auto h = homomorphism_check(A, B, I);
  EXPECT_LT(h.defect_plain, 1e-12 * h.reference);
  EXPECT_LT(h.defect_star, 1e-12 * h.reference);
  EXPECT_THROW(star_product(A, OperatorMatrix(random_matrix(6, rng)), P), StructuralError);
}

TEST(Operators, PositionCommutesWithMaskMomentumDoesNot) {
  const Grid g({Axis{-0.5, 2.0, 64}});
  const auto P = mask_projector(characteristic_mask(Domain(Interval{0.0, 1.0}), g));
  const auto x = position_operator(g), p = momentum_operator(g);
  const auto hx = homomorphism_check(x, x, P);
  EXPECT_LT(hx.defect_plain, 1e-12 * hx.reference);
  const auto hp = homomorphism_check(p, p, P);
  EXPECT_GT(hp.defect_plain, 0.01 * hp.reference);
  EXPECT_LT((p.values - p.values.adjoint()).norm(), 1e-12);
}

TEST(Operators, FreeEvolutionMatrixIsUnitary) {
  const SpectralPropagatorPlan plan(Grid::cube(1, 0.0, 1.0, 16), 1e-3);
  const auto U = free_evolution_matrix(plan, 1e-3).values;
  const MatrixC I = MatrixC::Identity(U.rows(), U.cols());
  EXPECT_LT((U.adjoint() * U - I).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SmoothedProjector, DominatesHardMaskWithinUnitRange) {
  const Grid g({Axis{-0.2, 1.4, 4000}});
  const Domain d(Interval{0.0, 1.0});
  for (const auto prof : {RampProfile::linear, RampProfile::raised_cosine})
    for (int N : {2, 8, 32}) {
      const auto pn = smoothed_projector(d, g, N, prof);
      EXPECT_DOUBLE_EQ(pn.width, 1.0 / (N * N));
      for (std::size_t i = 0; i < g.size(); ++i) {
        EXPECT_GE(pn.values[i], pn.hard[i]);
        EXPECT_LE(pn.values[i], 1.0);
        EXPECT_GE(pn.values[i], 0.0);
      }
    }
}

TEST(SmoothedProjector, SaturatesToHardMaskBelowOneCell) {
  const Grid g({Axis{-0.2, 1.4, 200}});
  const auto pn = smoothed_projector(Domain(Interval{0.0, 1.0}), g, 1000);
  EXPECT_TRUE(pn.saturated);
  EXPECT_EQ(pn.values, pn.hard);
}

TEST(SmoothedProjector, RaisedCosineAlsoFirstOrder) {
  const Grid fine({Axis{-0.3, 1.6, 200000}});
  const auto psi = WaveFunction::sample(fine, [](const Point& x) { return Complex(std::cos(x[0]), 0.0); });
  const auto law = projector_law(Domain(Interval{0.0, 1.0}), psi, {4, 8, 16, 32, 64}, RampProfile::raised_cosine);
  EXPECT_NEAR(-law.fit.slope, 1.0, 0.1);
}

TEST(Commutator, AngularCommutesFreeDoesNot) {
  const Annulus an{1.0, 2.0};
  EXPECT_LE(automorphism_case(an, 0.3, {}, PolarGridSpec{16, 32, 1.25}), 1e-10);
  const auto c = commutator_contrast(an, Grid::cube(2, -2.5, 5.0, 24), {1e-3, 3e-3, 1e-2}, {}, PolarGridSpec{16, 32, 1.25});
  ASSERT_EQ(c.free.size(), 3u);
  EXPECT_GT(c.free[0], 0.0);
  EXPECT_GT(c.free[2], c.free[0]);
  EXPECT_GT(c.free_fit.slope, 0.0);
}

TEST(StepDefect, GrowsWithTau) {
  const Grid g({Axis{-0.5, 2.0, 48}});
  const Domain d(Interval{0.0, 1.0});
  const double a = star_step_defect(d, g, 1e-4), b = star_step_defect(d, g, 1e-2);
  EXPECT_GE(a, 0.0);
  EXPECT_GT(b, a);
}
