#include "zeno/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "zeno/errors.hpp"

namespace zeno {

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::interval: return "interval";
    case DomainKind::rectangle: return "rectangle";
    case DomainKind::annulus: return "annulus";
    case DomainKind::shell: return "shell";
    case DomainKind::mask: return "mask";
  }
  return "unknown";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double radius(const Point& p, int dim) {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += p[static_cast<std::size_t>(a)] * p[static_cast<std::size_t>(a)];
  return std::sqrt(s);
}

// Nearest node of the mask grid to p, if p sits on a node.
std::optional<std::size_t> mask_node(const Mask& m, const Point& p) {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (int a = 0; a < m.grid.dim(); ++a) {
    const Axis& ax = m.grid.axis(a);
    const double u = (p[static_cast<std::size_t>(a)] - ax.origin) / ax.spacing();
    const double r = std::round(u);
    if (std::abs(u - r) > 1e-6 || r < 0.0 || r >= static_cast<double>(ax.points)) return std::nullopt;
    idx[static_cast<std::size_t>(a)] = static_cast<std::size_t>(r);
  }
  return m.grid.flatten(idx);
}

// Neighbor of flat index i along axis a (dir = +-1), if on the grid.
std::optional<std::size_t> neighbor(const Grid& g, std::size_t i, int a, int dir) {
  auto idx = g.unflatten(i);
  auto& c = idx[static_cast<std::size_t>(a)];
  if (dir < 0 && c == 0) return std::nullopt;
  if (dir > 0 && c + 1 >= g.axis(a).points) return std::nullopt;
  c = dir < 0 ? c - 1 : c + 1;
  return g.flatten(idx);
}

// Smallest s in (0, 1] with |p + s d| = r.
std::optional<double> sphere_crossing(const Point& p, const Point& d, double r, int dim) {
  double a = 0.0, b = 0.0, c = -r * r;
  for (int k = 0; k < dim; ++k) {
    const auto u = static_cast<std::size_t>(k);
    a += d[u] * d[u];
    b += 2.0 * p[u] * d[u];
    c += p[u] * p[u];
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  std::optional<double> best;
  for (double s : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
    if (s > 0.0 && s <= 1.0 + 1e-12 && (!best || s < *best)) best = s;
  }
  return best;
}

}  // namespace

Domain::Domain(Shape shape) : shape_(std::move(shape)) {
  std::visit(overloaded{
                 [](const Interval& s) {
                   if (!(s.x1 > s.x0)) throw StructuralError("interval needs x1 > x0", "domain.x1");
                 },
                 [](const Rectangle& s) {
                   if (!(s.a > 0.0)) throw StructuralError("rectangle side a must be positive", "domain.a");
                   if (!(s.b > 0.0)) throw StructuralError("rectangle side b must be positive", "domain.b");
                 },
                 [](const Annulus& s) {
                   if (!(s.r1 >= 0.0)) throw StructuralError("annulus r1 must be nonnegative", "domain.r1");
                   if (!(s.r2 > s.r1)) throw StructuralError("annulus needs r2 > r1", "domain.r2");
                 },
                 [](const Shell& s) {
                   if (!(s.r1 >= 0.0)) throw StructuralError("shell r1 must be nonnegative", "domain.r1");
                   if (!(s.r2 > s.r1)) throw StructuralError("shell needs r2 > r1", "domain.r2");
                 },
                 [](const Mask& m) { validate_mask(m); },
             },
             shape_);
}

int Domain::dim() const {
  return std::visit(overloaded{
                        [](const Interval&) { return 1; },
                        [](const Rectangle&) { return 2; },
                        [](const Annulus&) { return 2; },
                        [](const Shell&) { return 3; },
                        [](const Mask& m) { return m.grid.dim(); },
                    },
                    shape_);
}

bool Domain::contains(const Point& p) const {
  return std::visit(overloaded{
                        [&](const Interval& s) {
                          const double e = 1e-9 * (s.x1 - s.x0);
                          return p[0] > s.x0 + e && p[0] < s.x1 - e;
                        },
                        [&](const Rectangle& s) {
                          const double ea = 1e-9 * s.a, eb = 1e-9 * s.b;
                          return p[0] > ea && p[0] < s.a - ea && p[1] > eb && p[1] < s.b - eb;
                        },
                        [&](const Annulus& s) {
                          const double r = radius(p, 2), e = 1e-9 * s.r2;
                          return r > s.r1 + e && r < s.r2 - e;
                        },
                        [&](const Shell& s) {
                          const double r = radius(p, 3), e = 1e-9 * s.r2;
                          return r > s.r1 + e && r < s.r2 - e;
                        },
                        [&](const Mask& m) {
                          auto i = mask_node(m, p);
                          return i.has_value() && m.cells[*i] != 0;
                        },
                    },
                    shape_);
}

double Domain::distance_outside(const Point& p) const {
  return std::visit(
      overloaded{
          [&](const Interval& s) { return std::max({s.x0 - p[0], p[0] - s.x1, 0.0}); },
          [&](const Rectangle& s) {
            const double dx = std::max({-p[0], p[0] - s.a, 0.0});
            const double dy = std::max({-p[1], p[1] - s.b, 0.0});
            return std::hypot(dx, dy);
          },
          [&](const Annulus& s) {
            const double r = radius(p, 2);
            return std::max({s.r1 - r, r - s.r2, 0.0});
          },
          [&](const Shell& s) {
            const double r = radius(p, 3);
            return std::max({s.r1 - r, r - s.r2, 0.0});
          },
          [&](const Mask& m) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m.cells.size(); ++i) {
              if (!m.cells[i]) continue;
              const Point q = m.grid.coords(i);
              double d2 = 0.0;
              for (int a = 0; a < m.grid.dim(); ++a) {
                const double d = p[static_cast<std::size_t>(a)] - q[static_cast<std::size_t>(a)];
                d2 += d * d;
              }
              best = std::min(best, d2);
            }
            return std::sqrt(best);
          },
      },
      shape_);
}

std::optional<double> Domain::boundary_fraction(const Point& p, int axis, int dir, double h) const {
  const auto ax = static_cast<std::size_t>(axis);
  auto clamp01 = [](double s) { return std::clamp(s, 0.0, 1.0); };
  return std::visit(
      overloaded{
          [&](const Interval& s) -> std::optional<double> {
            return clamp01(dir > 0 ? (s.x1 - p[0]) / h : (p[0] - s.x0) / h);
          },
          [&](const Rectangle& s) -> std::optional<double> {
            const double hi = ax == 0 ? s.a : s.b;
            return clamp01(dir > 0 ? (hi - p[ax]) / h : p[ax] / h);
          },
          [&](const Annulus& s) -> std::optional<double> {
            Point d{0.0, 0.0, 0.0};
            d[ax] = dir * h;
            auto a = sphere_crossing(p, d, s.r1, 2);
            auto b = sphere_crossing(p, d, s.r2, 2);
            if (a && b) return std::min(*a, *b);
            return a ? a : b;
          },
          [&](const Shell& s) -> std::optional<double> {
            Point d{0.0, 0.0, 0.0};
            d[ax] = dir * h;
            auto a = sphere_crossing(p, d, s.r1, 3);
            auto b = sphere_crossing(p, d, s.r2, 3);
            if (a && b) return std::min(*a, *b);
            return a ? a : b;
          },
          [&](const Mask&) -> std::optional<double> { return std::nullopt; },
      },
      shape_);
}

std::pair<Point, Point> Domain::bounding_box() const {
  return std::visit(overloaded{
                        [](const Interval& s) { return std::pair{Point{s.x0, 0, 0}, Point{s.x1, 0, 0}}; },
                        [](const Rectangle& s) { return std::pair{Point{0, 0, 0}, Point{s.a, s.b, 0}}; },
                        [](const Annulus& s) {
                          return std::pair{Point{-s.r2, -s.r2, 0}, Point{s.r2, s.r2, 0}};
                        },
                        [](const Shell& s) {
                          return std::pair{Point{-s.r2, -s.r2, -s.r2}, Point{s.r2, s.r2, s.r2}};
                        },
                        [](const Mask& m) {
                          Point lo{0, 0, 0}, hi{0, 0, 0};
                          for (int a = 0; a < m.grid.dim(); ++a) {
                            lo[static_cast<std::size_t>(a)] = m.grid.axis(a).origin;
                            hi[static_cast<std::size_t>(a)] = m.grid.axis(a).last();
                          }
                          return std::pair{lo, hi};
                        },
                    },
                    shape_);
}

double Domain::measure() const {
  constexpr double pi = std::numbers::pi;
  return std::visit(overloaded{
                        [](const Interval& s) { return s.x1 - s.x0; },
                        [](const Rectangle& s) { return s.a * s.b; },
                        [](const Annulus& s) { return pi * (s.r2 * s.r2 - s.r1 * s.r1); },
                        [](const Shell& s) { return 4.0 / 3.0 * pi * (std::pow(s.r2, 3) - std::pow(s.r1, 3)); },
                        [](const Mask& m) {
                          std::size_t n = 0;
                          for (auto c : m.cells) n += c != 0;
                          return static_cast<double>(n) * m.grid.cell_measure();
                        },
                    },
                    shape_);
}

std::vector<double> characteristic_mask(const Domain& domain, const Grid& grid) {
  if (domain.dim() != grid.dim())
    throw StructuralError("domain dimension " + std::to_string(domain.dim()) + " does not match grid dimension " +
                              std::to_string(grid.dim()),
                          "grid");
  if (domain.kind() == DomainKind::mask) {
    const Mask& m = domain.as<Mask>();
    if (m.grid == grid) {
      std::vector<double> out(m.cells.size());
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = m.cells[i] ? 1.0 : 0.0;
      return out;
    }
    if (!grid.nests(m.grid)) throw StructuralError("mask raster is not aligned with the grid", "grid");
  } else {
    const auto [lo, hi] = domain.bounding_box();
    for (int a = 0; a < grid.dim(); ++a) {
      const Axis& ax = grid.axis(a);
      const double tol = 1e-9 * ax.extent + ax.spacing();
      if (lo[static_cast<std::size_t>(a)] < ax.origin - tol || hi[static_cast<std::size_t>(a)] > ax.last() + tol)
        throw StructuralError("domain extends outside the grid on axis " + std::to_string(a), "grid");
    }
  }
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = domain.contains(grid.coords(i)) ? 1.0 : 0.0;
  return out;
}

std::vector<std::size_t> boundary_cells(const Domain& domain, const Grid& grid) {
  const auto chi = characteristic_mask(domain, grid);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (chi[i] == 0.0) continue;
    bool edge = false;
    for (int a = 0; a < grid.dim() && !edge; ++a)
      for (int dir : {-1, 1}) {
        auto j = neighbor(grid, i, a, dir);
        if (!j || chi[*j] == 0.0) edge = true;
      }
    if (edge) out.push_back(i);
  }
  return out;
}

void validate_mask(const Mask& m) {
  if (m.cells.size() != m.grid.size())
    throw StructuralError("mask raster size does not match its grid", "domain.mask");
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    if (!m.cells[i]) continue;
    bool full = true;
    for (int a = 0; a < m.grid.dim() && full; ++a)
      for (int dir : {-1, 1}) {
        auto j = neighbor(m.grid, i, a, dir);
        if (!j || !m.cells[*j]) full = false;
      }
    if (full) return;
  }
  throw StructuralError("mask has no interior cell with a fully inside neighborhood", "domain.mask");
}

namespace {

// Next whitespace-delimited token of a PGM header, skipping comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  in >> tok;
  return tok;
}

}  // namespace

Mask load_pgm(const std::filesystem::path& path, double origin_x, double origin_y, double spacing) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError("cannot open mask file " + path.string(), "domain.pgm");
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw StructuralError("not a P2/P5 graymap: " + path.string(), "domain.pgm");
  std::size_t width = 0, height = 0;
  int maxval = 0;
  try {
    width = std::stoul(pgm_token(in));
    height = std::stoul(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw StructuralError("malformed graymap header in " + path.string(), "domain.pgm");
  }
  if (maxval <= 0 || maxval > 65535) throw StructuralError("bad graymap maxval", "domain.pgm");
  if (!(spacing > 0.0)) throw StructuralError("mask spacing must be positive", "domain.spacing");

  std::vector<std::uint8_t> cells(width * height);
  if (magic == "P2") {
    for (auto& c : cells) {
      int v = 0;
      if (!(in >> v)) throw StructuralError("graymap ends early", "domain.pgm");
      c = v != 0;
    }
  } else {
    in.get();
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(cells.size() * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw StructuralError("graymap ends early", "domain.pgm");
    for (std::size_t i = 0; i < cells.size(); ++i)
      cells[i] = bytes == 1 ? raw[i] != 0 : (raw[2 * i] | raw[2 * i + 1]) != 0;
  }

  Grid grid({Axis{origin_x, spacing * static_cast<double>(height), height},
             Axis{origin_y, spacing * static_cast<double>(width), width}});
  Mask m{std::move(grid), std::move(cells)};
  validate_mask(m);
  return m;
}

}  // namespace zeno
