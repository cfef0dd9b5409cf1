#include "zeno/grid.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "zeno/errors.hpp"
#include "zeno/units.hpp"

namespace zeno {

void PhysicalUnits::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) throw StructuralError("hbar must be positive", "units.hbar");
  if (!(mass > 0.0) || !std::isfinite(mass)) throw StructuralError("mass must be positive", "units.mass");
}

Grid::Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 3) throw StructuralError("grid dimension must be 1, 2 or 3", "grid");
  size_ = 1;
  for (std::size_t a = 0; a < axes_.size(); ++a) {
    const Axis& ax = axes_[a];
    if (ax.points < kMinPoints)
      throw StructuralError("grid needs at least 8 points per axis", "grid.points");
    if (!(ax.extent > 0.0) || !std::isfinite(ax.extent) || !std::isfinite(ax.origin))
      throw StructuralError("grid extent must be positive and finite", "grid.extent");
    size_ *= ax.points;
  }
}

Grid Grid::cube(int dim, double origin, double extent, std::size_t points) {
  return Grid(std::vector<Axis>(static_cast<std::size_t>(dim), Axis{origin, extent, points}));
}

double Grid::cell_measure() const {
  double w = 1.0;
  for (const Axis& ax : axes_) w *= ax.spacing();
  return w;
}

std::array<std::size_t, 3> Grid::shape() const {
  std::array<std::size_t, 3> s{1, 1, 1};
  for (std::size_t a = 0; a < axes_.size(); ++a) s[a] = axes_[a].points;
  return s;
}

std::array<std::size_t, 3> Grid::unflatten(std::size_t flat) const {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (int a = dim() - 1; a >= 0; --a) {
    const std::size_t n = axes_[static_cast<std::size_t>(a)].points;
    idx[static_cast<std::size_t>(a)] = flat % n;
    flat /= n;
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<std::size_t, 3>& idx) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes_.size(); ++a) flat = flat * axes_[a].points + idx[a];
  return flat;
}

Point Grid::coords(std::size_t flat) const {
  const auto idx = unflatten(flat);
  Point p{0.0, 0.0, 0.0};
  for (std::size_t a = 0; a < axes_.size(); ++a) p[a] = axes_[a].coord(idx[a]);
  return p;
}

Grid Grid::padded(const std::array<std::size_t, 3>& cells_per_side) const {
  std::vector<Axis> out = axes_;
  for (std::size_t a = 0; a < out.size(); ++a) {
    const double h = axes_[a].spacing();
    const std::size_t p = cells_per_side[a];
    out[a].origin -= static_cast<double>(p) * h;
    out[a].points += 2 * p;
    out[a].extent = static_cast<double>(out[a].points) * h;
  }
  return Grid(std::move(out));
}

namespace {

// Offset (in cells) of `inner`'s first node inside `outer`, if aligned.
std::optional<std::size_t> axis_offset(const Axis& outer, const Axis& inner) {
  const double h = outer.spacing();
  if (std::abs(inner.spacing() - h) > 1e-12 * h) return std::nullopt;
  const double shift = (inner.origin - outer.origin) / h;
  const double rounded = std::round(shift);
  if (std::abs(shift - rounded) > 1e-7 || rounded < 0.0) return std::nullopt;
  const auto off = static_cast<std::size_t>(rounded);
  if (off + inner.points > outer.points) return std::nullopt;
  return off;
}

std::array<std::size_t, 3> nested_offsets(const Grid& outer, const Grid& inner) {
  if (outer.dim() != inner.dim()) throw StructuralError("grid dimension mismatch", "grid");
  std::array<std::size_t, 3> off{0, 0, 0};
  for (int a = 0; a < outer.dim(); ++a) {
    auto o = axis_offset(outer.axis(a), inner.axis(a));
    if (!o) throw StructuralError("grids are not nested (spacing or alignment differs)", "grid");
    off[static_cast<std::size_t>(a)] = *o;
  }
  return off;
}

}  // namespace

bool Grid::nests(const Grid& inner) const {
  if (dim() != inner.dim()) return false;
  for (int a = 0; a < dim(); ++a)
    if (!axis_offset(axis(a), inner.axis(a))) return false;
  return true;
}

WaveFunction::WaveFunction(Grid grid) : grid_(std::move(grid)), amps_(grid_.size(), Complex{}) {}

WaveFunction::WaveFunction(Grid grid, std::vector<Complex> amplitudes)
    : grid_(std::move(grid)), amps_(std::move(amplitudes)) {
  if (amps_.size() != grid_.size())
    throw StructuralError("amplitude count " + std::to_string(amps_.size()) +
                          " does not match grid size " + std::to_string(grid_.size()));
  if (!all_finite()) throw NumericalError("wavefunction has non-finite entries");
}

WaveFunction WaveFunction::sample(Grid grid, const std::function<Complex(const Point&)>& f) {
  WaveFunction psi(std::move(grid));
  for (std::size_t i = 0; i < psi.size(); ++i) psi.amps_[i] = f(psi.grid_.coords(i));
  if (!psi.all_finite()) throw NumericalError("sampled wavefunction has non-finite entries");
  return psi;
}

double WaveFunction::norm() const {
  double s = 0.0;
  for (const Complex& c : amps_) s += std::norm(c);
  return std::sqrt(s * grid_.cell_measure());
}

bool WaveFunction::all_finite() const {
  for (const Complex& c : amps_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

WaveFunction& WaveFunction::operator*=(Complex s) {
  for (Complex& c : amps_) c *= s;
  return *this;
}

WaveFunction& WaveFunction::operator+=(const WaveFunction& other) {
  if (!(grid_ == other.grid_)) throw StructuralError("grid mismatch in wavefunction sum");
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] += other.amps_[i];
  return *this;
}

WaveFunction& WaveFunction::operator-=(const WaveFunction& other) {
  if (!(grid_ == other.grid_)) throw StructuralError("grid mismatch in wavefunction difference");
  for (std::size_t i = 0; i < amps_.size(); ++i) amps_[i] -= other.amps_[i];
  return *this;
}

WaveFunction operator*(Complex s, WaveFunction psi) { return psi *= s; }
WaveFunction operator+(WaveFunction a, const WaveFunction& b) { return a += b; }
WaveFunction operator-(WaveFunction a, const WaveFunction& b) { return a -= b; }

Complex inner_product(const WaveFunction& phi, const WaveFunction& psi) {
  if (!(phi.grid() == psi.grid())) throw StructuralError("inner product of fields on different grids");
  const auto a = phi.amplitudes();
  const auto b = psi.amplitudes();
  Complex s{};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s * phi.grid().cell_measure();
}

WaveFunction embed(const WaveFunction& psi, const Grid& target) {
  const auto off = nested_offsets(target, psi.grid());
  WaveFunction out(target);
  const Grid& src = psi.grid();
  auto dst = out.amplitudes();
  const auto in = psi.amplitudes();
  for (std::size_t i = 0; i < src.size(); ++i) {
    auto idx = src.unflatten(i);
    for (std::size_t a = 0; a < 3; ++a) idx[a] += off[a];
    dst[target.flatten(idx)] = in[i];
  }
  return out;
}

WaveFunction crop(const WaveFunction& psi, const Grid& target) {
  const auto off = nested_offsets(psi.grid(), target);
  WaveFunction out(target);
  auto dst = out.amplitudes();
  const auto in = psi.amplitudes();
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto idx = target.unflatten(i);
    for (std::size_t a = 0; a < 3; ++a) idx[a] += off[a];
    dst[i] = in[psi.grid().flatten(idx)];
  }
  return out;
}

double distance(const WaveFunction& a, const WaveFunction& b) { return (a - b).norm(); }

}  // namespace zeno
