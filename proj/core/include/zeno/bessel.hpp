#pragma once

namespace zeno {

/// Bessel function of the first kind J_nu(x), real order nu >= 0, x >= 0.
double bessel_j(double nu, double x);
/// Bessel function of the second kind Y_nu(x), real order nu >= 0, x > 0.
double bessel_y(double nu, double x);

/// Spherical Bessel functions j_l(x), y_l(x), l >= 0.
double sph_bessel_j(int l, double x);
double sph_bessel_y(int l, double x);

namespace detail {

/// Argument where evaluation switches from the power series to the
/// large-argument expansion.
inline constexpr double kBesselCrossover = 20.0;

/// Ascending series for J_nu, accumulated in long double. nu may be
/// negative and non-integer.
double bessel_j_series(double nu, double x);

/// Hankel asymptotic expansion; returns J_nu and Y_nu together.
struct BesselPair {
  double j = 0.0;
  double y = 0.0;
};
BesselPair bessel_jy_asymptotic(double nu, double x);

}  // namespace detail

}  // namespace zeno
