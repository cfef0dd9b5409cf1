#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace zeno {

using Complex = std::complex<double>;
using Point = std::array<double, 3>;

/// One uniform axis: nodes at origin + i * spacing for i in [0, points).
struct Axis {
  double origin = 0.0;
  double extent = 1.0;
  std::size_t points = 8;

  double spacing() const { return extent / static_cast<double>(points); }
  double coord(std::size_t i) const { return origin + static_cast<double>(i) * spacing(); }
  double last() const { return coord(points - 1); }
  bool operator==(const Axis&) const = default;
};

/// Uniform Cartesian grid in 1, 2 or 3 dimensions. Storage order is
/// row-major with the last axis fastest, matching FFTW.
class Grid {
 public:
  static constexpr std::size_t kMinPoints = 8;

  explicit Grid(std::vector<Axis> axes);
  static Grid cube(int dim, double origin, double extent, std::size_t points);

  int dim() const { return static_cast<int>(axes_.size()); }
  const Axis& axis(int a) const { return axes_.at(static_cast<std::size_t>(a)); }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t size() const { return size_; }
  /// Product of spacings: the uniform quadrature weight.
  double cell_measure() const;

  std::array<std::size_t, 3> shape() const;
  std::array<std::size_t, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<std::size_t, 3>& idx) const;
  Point coords(std::size_t flat) const;

  /// Same spacing, extended by whole cells on both sides of every axis.
  Grid padded(const std::array<std::size_t, 3>& cells_per_side) const;
  /// True when every node of `inner` coincides with a node of this grid.
  bool nests(const Grid& inner) const;

  bool operator==(const Grid&) const = default;

 private:
  std::vector<Axis> axes_;
  std::size_t size_ = 0;
};

/// Complex field sampled on a grid.
class WaveFunction {
 public:
  explicit WaveFunction(Grid grid);
  WaveFunction(Grid grid, std::vector<Complex> amplitudes);

  static WaveFunction sample(Grid grid, const std::function<Complex(const Point&)>& f);

  const Grid& grid() const { return grid_; }
  std::span<const Complex> amplitudes() const { return amps_; }
  std::span<Complex> amplitudes() { return amps_; }
  std::size_t size() const { return amps_.size(); }

  /// Quadrature norm sqrt(sum |psi_i|^2 * cell measure).
  double norm() const;
  bool all_finite() const;

  WaveFunction& operator*=(Complex s);
  WaveFunction& operator+=(const WaveFunction& other);
  WaveFunction& operator-=(const WaveFunction& other);

 private:
  Grid grid_;
  std::vector<Complex> amps_;
};

WaveFunction operator*(Complex s, WaveFunction psi);
WaveFunction operator+(WaveFunction a, const WaveFunction& b);
WaveFunction operator-(WaveFunction a, const WaveFunction& b);

/// <phi, psi> with uniform weights; conjugate-linear in phi.
Complex inner_product(const WaveFunction& phi, const WaveFunction& psi);

/// Zero-extends `psi` onto a grid that nests its grid.
WaveFunction embed(const WaveFunction& psi, const Grid& target);
/// Restricts `psi` to a nested subgrid.
WaveFunction crop(const WaveFunction& psi, const Grid& target);

/// L2 distance ||a - b||.
double distance(const WaveFunction& a, const WaveFunction& b);

}  // namespace zeno
