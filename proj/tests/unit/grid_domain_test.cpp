#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "zeno/domain.hpp"
#include "zeno/errors.hpp"
#include "zeno/labels.hpp"
#include "zeno/units.hpp"

using namespace zeno;

namespace {

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const StructuralError& e) {
    return e.field();
  }
  return "<no throw>";
}

}  // namespace

TEST(Grid, CoordinatesAndMeasure) {
  const Grid g({Axis{-1.0, 2.0, 16}, Axis{0.0, 1.0, 8}});
  EXPECT_EQ(g.size(), 128u);
  EXPECT_DOUBLE_EQ(g.cell_measure(), 0.125 * 0.125);
  const auto p = g.coords(g.flatten({3, 5, 0}));
  EXPECT_DOUBLE_EQ(p[0], -1.0 + 3 * 0.125);
  EXPECT_DOUBLE_EQ(p[1], 5 * 0.125);
}

TEST(Grid, FlattenRoundTrips) {
  const Grid g({Axis{0, 1, 9}, Axis{0, 1, 10}, Axis{0, 1, 11}});
  for (std::size_t i = 0; i < g.size(); i += 7) EXPECT_EQ(g.flatten(g.unflatten(i)), i);
}

TEST(Grid, RejectsTooFewPoints) {
  EXPECT_EQ(field_of([] { Grid({Axis{0, 1, 4}}); }), "grid.points");
  EXPECT_EQ(field_of([] { Grid({Axis{0, -1, 16}}); }), "grid.extent");
}

TEST(Grid, PaddedNestsOriginal) {
  const Grid g = Grid::cube(2, 0.0, 1.0, 16);
  const Grid p = g.padded({4, 4, 0});
  EXPECT_TRUE(p.nests(g));
  EXPECT_FALSE(g.nests(p));
  EXPECT_EQ(p.axis(0).points, 24u);
  EXPECT_DOUBLE_EQ(p.axis(0).origin, -0.25);
}

TEST(WaveFunction, EmbedCropRoundTripRandom) {
  std::mt19937 rng(7);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t pts = 8 + rng() % 24;
    const Grid g = Grid::cube(1 + static_cast<int>(rng() % 2), 0.0, 1.0, pts);
    WaveFunction psi(g);
    for (auto& a : psi.amplitudes()) a = {n(rng), n(rng)};
    const Grid big = g.padded({rng() % 5, rng() % 5, 0});
    const auto lifted = embed(psi, big);
    EXPECT_NEAR(lifted.norm(), psi.norm(), 1e-12 * psi.norm());
    EXPECT_EQ(distance(crop(lifted, g), psi), 0.0);
  }
}

TEST(WaveFunction, InnerProductIsConjugateLinearInFirst) {
  const Grid g = Grid::cube(1, 0.0, 1.0, 32);
  const auto a = WaveFunction::sample(g, [](const Point& x) { return Complex(x[0], 1.0); });
  const auto b = WaveFunction::sample(g, [](const Point& x) { return Complex(1.0, -x[0] * x[0]); });
  const Complex s(0.3, -1.7);
  const Complex lhs = inner_product(s * a, b);
  const Complex rhs = std::conj(s) * inner_product(a, b);
  EXPECT_NEAR(std::abs(lhs - rhs), 0.0, 1e-13);
  EXPECT_NEAR(inner_product(a, a).real(), a.norm() * a.norm(), 1e-12);
}

TEST(Domain, ValidationNamesField) {
  EXPECT_EQ(field_of([] { Domain(Annulus{-1.0, 2.0}); }), "domain.r1");
  EXPECT_EQ(field_of([] { Domain(Annulus{2.0, 1.0}); }), "domain.r2");
  EXPECT_EQ(field_of([] { Domain(Rectangle{0.0, 1.0}); }), "domain.a");
  EXPECT_EQ(field_of([] { Domain(Interval{1.0, 1.0}); }), "domain.x1");
}

TEST(Domain, MeasureAndMembership) {
  const Domain ann(Annulus{1.0, 2.0});
  EXPECT_NEAR(ann.measure(), 3.0 * std::numbers::pi, 1e-12);
  EXPECT_TRUE(ann.contains({1.5, 0.0, 0.0}));
  EXPECT_FALSE(ann.contains({0.5, 0.0, 0.0}));
  EXPECT_FALSE(ann.contains({2.0, 0.0, 0.0}));  // boundary counts as outside
  EXPECT_NEAR(ann.distance_outside({3.0, 0.0, 0.0}), 1.0, 1e-12);
  EXPECT_NEAR(ann.distance_outside({0.25, 0.0, 0.0}), 0.75, 1e-12);
  const Domain shell(Shell{1.0, 2.0});
  EXPECT_NEAR(shell.measure(), 4.0 / 3.0 * std::numbers::pi * 7.0, 1e-12);
}

TEST(Domain, CharacteristicMaskAreaConverges) {
  const Domain ann(Annulus{1.0, 2.0});
  double prev = 1.0;
  for (std::size_t pts : {64, 128, 256}) {
    const Grid g = Grid::cube(2, -2.5, 5.0, pts);
    const auto chi = characteristic_mask(ann, g);
    double area = 0.0;
    for (double c : chi) area += c;
    area *= g.cell_measure();
    const double err = std::abs(area - ann.measure()) / ann.measure();
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(Domain, BoundaryFractionOnRectangle) {
  const Domain r(Rectangle{1.0, 1.0});
  const auto f = r.boundary_fraction({0.95, 0.5, 0.0}, 0, +1, 0.1);
  ASSERT_TRUE(f.has_value());
  EXPECT_NEAR(*f, 0.5, 1e-12);
}

TEST(Domain, LoadsPgmMask) {
  const auto path = std::filesystem::temp_directory_path() / "zeno_mask_test.pgm";
  {
    std::ofstream out(path);
    out << "P2\n# square\n12 12\n255\n";
    for (int i = 0; i < 12; ++i) {
      for (int j = 0; j < 12; ++j) out << ((i >= 2 && i < 10 && j >= 2 && j < 10) ? 255 : 0) << ' ';
      out << '\n';
    }
  }
  const Mask m = load_pgm(path, 0.0, 0.0, 0.1);
  EXPECT_EQ(m.grid.size(), 144u);
  const Domain d(m);
  EXPECT_NEAR(d.measure(), 64 * 0.01, 1e-12);
  EXPECT_TRUE(d.contains({0.5, 0.5, 0.0}));
  EXPECT_FALSE(d.contains({0.05, 0.05, 0.0}));
  std::filesystem::remove(path);
}

TEST(Domain, RejectsMalformedPgm) {
  const auto path = std::filesystem::temp_directory_path() / "zeno_bad_mask.pgm";
  { std::ofstream(path) << "P7\n1 1\n255\n0\n"; }
  EXPECT_EQ(field_of([&] { load_pgm(path, 0, 0, 0.1); }), "domain.pgm");
  std::filesystem::remove(path);
}

TEST(Labels, ValidateAndPrint) {
  EXPECT_NO_THROW(QuantumNumberLabel::shell(1, 2, -2).validate());
  EXPECT_EQ(field_of([] { QuantumNumberLabel::shell(1, 1, 2).validate(); }), "label.m");
  EXPECT_EQ(field_of([] { QuantumNumberLabel::rectangle(0, 1).validate(); }), "label.n");
  EXPECT_NE(QuantumNumberLabel::rectangle(1, 2).str(), QuantumNumberLabel::rectangle(2, 1).str());
  EXPECT_LT(QuantumNumberLabel::interval(1), QuantumNumberLabel::interval(2));
}

TEST(Units, Validation) {
  EXPECT_DOUBLE_EQ((PhysicalUnits{2.0, 0.5}).kinetic_prefactor(), 4.0);
  EXPECT_EQ(field_of([] { PhysicalUnits{0.0, 1.0}.validate(); }), "units.hbar");
  EXPECT_EQ(field_of([] { PhysicalUnits{1.0, -1.0}.validate(); }), "units.mass");
}
