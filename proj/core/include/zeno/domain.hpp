#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "zeno/grid.hpp"

namespace zeno {

struct Interval {
  double x0 = 0.0;
  double x1 = 1.0;
};

/// [0,a] x [0,b].
struct Rectangle {
  double a = 1.0;
  double b = 1.0;
};

/// r1 < |x| < r2 in the plane, centered at the origin.
struct Annulus {
  double r1 = 1.0;
  double r2 = 2.0;
};

/// r1 < |x| < r2 in three dimensions, centered at the origin.
struct Shell {
  double r1 = 1.0;
  double r2 = 2.0;
};

/// Raster region on a grid; nonzero cells are inside.
struct Mask {
  Grid grid = Grid::cube(2, 0.0, 1.0, 8);
  std::vector<std::uint8_t> cells;
};

enum class DomainKind { interval, rectangle, annulus, shell, mask };

std::string to_string(DomainKind kind);

class Domain {
 public:
  using Shape = std::variant<Interval, Rectangle, Annulus, Shell, Mask>;

  explicit Domain(Shape shape);

  DomainKind kind() const { return static_cast<DomainKind>(shape_.index()); }
  int dim() const;
  const Shape& shape() const { return shape_; }
  template <class T>
  const T& as() const { return std::get<T>(shape_); }

  /// Strict membership with a tolerance of 1e-9 of the domain scale, so
  /// nodes lying on the boundary count as outside.
  bool contains(const Point& p) const;

  /// Euclidean distance from p to the closure of the domain; 0 inside.
  double distance_outside(const Point& p) const;

  /// For an inside point p and its neighbor p + dir*h e_axis that is
  /// outside, the fraction of h at which the segment crosses the
  /// boundary. Empty for raster masks.
  std::optional<double> boundary_fraction(const Point& p, int axis, int dir, double h) const;

  /// Lower and upper corners of the bounding box.
  std::pair<Point, Point> bounding_box() const;

  /// Lebesgue measure (length, area or volume).
  double measure() const;

  /// True for analytic kinds with a smooth boundary description.
  bool analytic() const { return kind() != DomainKind::mask; }

 private:
  Shape shape_;
};

/// 0/1 field on `grid` marking nodes inside the domain.
std::vector<double> characteristic_mask(const Domain& domain, const Grid& grid);

/// Inside cells with at least one outside 4-neighbor (2D) or 2d-neighbor
/// in general, as flat indices into `grid`.
std::vector<std::size_t> boundary_cells(const Domain& domain, const Grid& grid);

/// Checks the mask has at least one cell whose full neighborhood is inside.
void validate_mask(const Mask& mask);

/// Loads a P2 or P5 graymap as a mask on a grid with the given origin and
/// cell size. Rows map to axis 0 top to bottom, columns to axis 1.
Mask load_pgm(const std::filesystem::path& path, double origin_x, double origin_y, double spacing);

}  // namespace zeno
