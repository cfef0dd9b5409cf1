#include "zeno/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "zeno/bessel.hpp"
#include "zeno/errors.hpp"

namespace zeno {

namespace {

constexpr double kPi = std::numbers::pi;

void sort_entries(std::vector<SpectralEntry>& entries) {
  std::stable_sort(entries.begin(), entries.end(), [](const SpectralEntry& a, const SpectralEntry& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.label < b.label;
  });
}

double max_gram_deviation(const MatrixC& g) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < g.rows(); ++i)
    for (Eigen::Index j = 0; j < g.cols(); ++j) d = std::max(d, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return d;
}

// Gauss-Legendre nodes and weights on [-1, 1].
std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = -z;
    x[static_cast<std::size_t>(n - 1 - i)] = z;
    w[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(n - 1 - i)] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return {x, w};
}

// Composite Gauss-Legendre quadrature of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b, int panels = 64) {
  static const auto rule = gauss_legendre(16);
  const double h = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (std::size_t i = 0; i < rule.first.size(); ++i) s += rule.second[i] * f(mid + 0.5 * h * rule.first[i]);
  }
  return 0.5 * h * s;
}

}  // namespace

std::string to_string(SpectrumSource source) {
  return source == SpectrumSource::analytic ? "analytic" : "fd-oracle";
}

SpectralBasis::SpectralBasis(Domain domain, SpectrumSource source, std::vector<SpectralEntry> entries)
    : domain_(std::move(domain)), source_(source), entries_(std::move(entries)) {
  for (const auto& e : entries_) {
    e.label.validate();
    if (!std::isfinite(e.energy)) throw NumericalError("non-finite energy for mode " + e.label.str());
    if (!(e.field.grid() == entries_.front().field.grid()))
      throw StructuralError("basis fields must share one grid");
  }
  sort_entries(entries_);
}

std::vector<double> SpectralBasis::energies() const {
  std::vector<double> e;
  e.reserve(entries_.size());
  for (const auto& x : entries_) e.push_back(x.energy);
  return e;
}

std::optional<std::size_t> SpectralBasis::find(const QuantumNumberLabel& label) const {
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].label == label) return i;
  return std::nullopt;
}

MatrixC SpectralBasis::gram() const {
  const auto m = static_cast<Eigen::Index>(entries_.size());
  if (m == 0) return MatrixC(0, 0);
  const Grid& g = entries_.front().field.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  MatrixC F(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto a = entries_[static_cast<std::size_t>(j)].field.amplitudes();
    F.col(j) = Eigen::Map<const VectorC>(a.data(), n);
  }
  MatrixC G = F.adjoint() * F * g.cell_measure();
  if (!entries_.empty() && entries_.front().label.family == LabelFamily::shell) {
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto& a = entries_[static_cast<std::size_t>(i)].label;
        const auto& b = entries_[static_cast<std::size_t>(j)].label;
        if (a.l != b.l || a.m != b.m) G(i, j) = 0.0;
      }
  }
  return G;
}

SpectralBasis lowdin_orthonormalize(const SpectralBasis& basis) {
  const MatrixC S = basis.gram();
  Eigen::SelfAdjointEigenSolver<MatrixC> es(S);
  if (es.info() != Eigen::Success) throw NumericalError("Gram matrix eigensolve failed");
  if (es.eigenvalues().minCoeff() <= 1e-12) throw NumericalError("basis fields are linearly dependent");
  const MatrixC Sinv = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                       es.eigenvectors().adjoint();
  const Grid& g = basis.entries_.front().field.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto m = static_cast<Eigen::Index>(basis.size());
  MatrixC F(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto a = basis.entries_[static_cast<std::size_t>(j)].field.amplitudes();
    F.col(j) = Eigen::Map<const VectorC>(a.data(), n);
  }
  const MatrixC Fo = F * Sinv;
  std::vector<SpectralEntry> out;
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& e = basis.entries_[static_cast<std::size_t>(j)];
    out.push_back({e.label, e.energy, WaveFunction(g, std::vector<Complex>(Fo.col(j).data(), Fo.col(j).data() + n))});
  }
  SpectralBasis r(basis.domain_, basis.source_, std::move(out));
  r.norm_ = basis.norm_;
  r.norm_.orthonormalized = true;
  r.norm_.gram_deviation = max_gram_deviation(r.gram());
  return r;
}

double rectangle_energy(double a, double b, int n, int m, PhysicalUnits units) {
  return units.kinetic_prefactor() * kPi * kPi * (n * n / (a * a) + m * m / (b * b));
}

double interval_energy(double length, int n, PhysicalUnits units) {
  return units.kinetic_prefactor() * kPi * kPi * n * n / (length * length);
}

SpectralBasis interval_modes(double x0, double x1, int n_max, const Grid& grid, PhysicalUnits units) {
  units.validate();
  Domain dom(Interval{x0, x1});
  if (grid.dim() != 1) throw StructuralError("interval modes need a 1D grid", "grid");
  if (n_max < 1) throw StructuralError("n_max must be positive", "n_max");
  const auto chi = characteristic_mask(dom, grid);
  const double L = x1 - x0;
  std::vector<SpectralEntry> entries;
  for (int n = 1; n <= n_max; ++n) {
    WaveFunction f(grid);
    auto a = f.amplitudes();
    for (std::size_t i = 0; i < grid.size(); ++i)
      a[i] = chi[i] * std::sqrt(2.0 / L) * std::sin(n * kPi * (grid.coords(i)[0] - x0) / L);
    entries.push_back({QuantumNumberLabel::interval(n), interval_energy(L, n, units), std::move(f)});
  }
  SpectralBasis b(dom, SpectrumSource::analytic, std::move(entries));
  b.normalization().gram_deviation = max_gram_deviation(b.gram());
  return b;
}

SpectralBasis rectangle_modes(double a, double b, int n_max, int m_max, const Grid& grid, PhysicalUnits units) {
  units.validate();
  Domain dom(Rectangle{a, b});
  if (grid.dim() != 2) throw StructuralError("rectangle modes need a 2D grid", "grid");
  if (n_max < 1 || m_max < 1) throw StructuralError("mode bounds must be positive", "n_max");
  const auto chi = characteristic_mask(dom, grid);
  const double norm = 2.0 / std::sqrt(a * b);
  std::vector<SpectralEntry> entries;
  double bmax = 0.0;
  for (int n = 1; n <= n_max; ++n)
    for (int m = 1; m <= m_max; ++m) {
      WaveFunction f(grid);
      auto amp = f.amplitudes();
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const Point p = grid.coords(i);
        amp[i] = chi[i] * norm * std::sin(n * kPi * p[0] / a) * std::sin(m * kPi * p[1] / b);
      }
      // Boundary samples of the closed-form field.
      for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        bmax = std::max({bmax, std::abs(norm * std::sin(n * kPi) * std::sin(m * kPi * s)),
                         std::abs(norm * std::sin(n * kPi * s) * std::sin(m * kPi))});
      }
      entries.push_back({QuantumNumberLabel::rectangle(n, m), rectangle_energy(a, b, n, m, units), std::move(f)});
    }
  SpectralBasis basis(dom, SpectrumSource::analytic, std::move(entries));
  basis.normalization().gram_deviation = max_gram_deviation(basis.gram());
  basis.normalization().boundary_max = bmax;
  return basis;
}

double bessel_cross_product(double l, double k, double r1, double r2) {
  if (!(r1 > 0.0))
    throw StructuralError("cross product needs r1 > 0; the r1 -> 0 limit excludes s-wave disk modes", "r1");
  if (!(k > 0.0)) throw StructuralError("cross product needs k > 0", "k");
  return bessel_j(l, k * r1) * bessel_y(l, k * r2) - bessel_j(l, k * r2) * bessel_y(l, k * r1);
}

double sph_bessel_cross_product(int l, double k, double r1, double r2) {
  if (!(r1 > 0.0)) throw StructuralError("cross product needs r1 > 0", "r1");
  if (!(k > 0.0)) throw StructuralError("cross product needs k > 0", "k");
  return sph_bessel_j(l, k * r1) * sph_bessel_y(l, k * r2) - sph_bessel_j(l, k * r2) * sph_bessel_y(l, k * r1);
}

RootScan find_roots(const std::function<double(double)>& f, double r1, double r2, std::size_t count, double k_max) {
  const double dr = std::abs(r2 - r1);
  const double step = kPi / (4.0 * dr);
  if (k_max <= 0.0) k_max = (static_cast<double>(count) + 2.0) * kPi / dr + 200.0 / std::max(r1, r2);
  RootScan scan;
  scan.k_lo = 1e-3 * step;
  double k0 = scan.k_lo, f0 = f(k0);
  while (scan.roots.size() < count && k0 < k_max) {
    const double k1 = k0 + step, f1 = f(k1);
    if (f1 == 0.0) {
      scan.roots.push_back(k1);
      ++scan.sign_changes;
      // Step past the exact zero so it is not counted twice.
      k0 = k1 + 1e-9 * step;
      f0 = f(k0);
      continue;
    }
    if ((f0 < 0.0) != (f1 < 0.0)) {
      ++scan.sign_changes;
      double lo = k0, hi = k1, flo = f0;
      while (hi - lo > 1e-14 * hi) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      scan.roots.push_back(0.5 * (lo + hi));
    }
    k0 = k1;
    f0 = f1;
  }
  scan.k_hi = k0;
  if (scan.roots.size() < count) {
    std::ostringstream os;
    os << "root finder found " << scan.roots.size() << " of " << count << " sign changes in [" << scan.k_lo << ", "
       << scan.k_hi << "]";
    throw NumericalError(os.str());
  }
  return scan;
}

std::vector<double> annulus_wavenumbers(double l, double r1, double r2, int n_max) {
  if (!(r1 > 0.0)) throw StructuralError("annulus modes need r1 > 0", "r1");
  if (!(r2 > r1)) throw StructuralError("annulus modes need r2 > r1", "r2");
  return find_roots([&](double k) { return bessel_cross_product(l, k, r1, r2); }, r1, r2,
                    static_cast<std::size_t>(n_max))
      .roots;
}

std::vector<double> shell_wavenumbers(int l, double r1, double r2, int n_max) {
  if (!(r1 > 0.0)) throw StructuralError("shell modes need r1 > 0", "r1");
  if (!(r2 > r1)) throw StructuralError("shell modes need r2 > r1", "r2");
  return find_roots([&](double k) { return sph_bessel_cross_product(l, k, r1, r2); }, r1, r2,
                    static_cast<std::size_t>(n_max))
      .roots;
}

double AnnulusRadial::operator()(double r) const {
  return scale * (bessel_j(l, k * r) * bessel_y(l, k * r1) - bessel_j(l, k * r1) * bessel_y(l, k * r));
}

AnnulusRadial annulus_radial(double l, double k, double r1, double r2) {
  AnnulusRadial f{l, k, r1, r2, 1.0};
  const double jy1 = bessel_y(l, k * r1), jj1 = bessel_j(l, k * r1);
  // Z(x) = J_l(x) Y_l(k r1) - J_l(k r1) Y_l(x) and its x-derivative.
  auto z = [&](double x) { return bessel_j(l, x) * jy1 - jj1 * bessel_y(l, x); };
  auto dz = [&](double x) {
    const double dj = l / x * bessel_j(l, x) - bessel_j(l + 1, x);
    const double dy = l / x * bessel_y(l, x) - bessel_y(l + 1, x);
    return dj * jy1 - jj1 * dy;
  };
  // int r Z(kr)^2 dr = [r^2/2 (Z'^2 + (1 - l^2/(kr)^2) Z^2)] between r1 and r2.
  auto prim = [&](double r) {
    const double x = k * r, zz = z(x), d = dz(x);
    return 0.5 * r * r * (d * d + (1.0 - l * l / (x * x)) * zz * zz);
  };
  const double n2 = prim(r2) - prim(r1);
  if (!(n2 > 0.0)) throw NumericalError("annulus radial normalization is not positive");
  f.scale = 1.0 / std::sqrt(n2);
  if (dz(k * r1) < 0.0) f.scale = -f.scale;
  return f;
}

SpectralBasis annulus_modes(double r1, double r2, int l_max, int n_max, const Grid& grid, PhysicalUnits units) {
  units.validate();
  if (!(r1 > 0.0)) throw StructuralError("annulus modes need r1 > 0", "domain.r1");
  Domain dom(Annulus{r1, r2});
  if (grid.dim() != 2) throw StructuralError("annulus modes need a 2D grid", "grid");
  if (l_max < 0 || n_max < 1) throw StructuralError("mode bounds out of range", "l_max");
  const auto chi = characteristic_mask(dom, grid);
  std::vector<SpectralEntry> entries;
  double bmax = 0.0;
  for (int la = 0; la <= l_max; ++la) {
    const auto ks = annulus_wavenumbers(la, r1, r2, n_max);
    for (int n = 1; n <= n_max; ++n) {
      const double k = ks[static_cast<std::size_t>(n - 1)];
      const AnnulusRadial rad = annulus_radial(la, k, r1, r2);
      bmax = std::max({bmax, std::abs(rad(r1)), std::abs(rad(r2))});
      std::vector<double> radial(grid.size(), 0.0);
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (chi[i] != 0.0) {
          const Point p = grid.coords(i);
          radial[i] = rad(std::hypot(p[0], p[1]));
        }
      const double E = units.kinetic_prefactor() * k * k;
      for (int l : la == 0 ? std::vector<int>{0} : std::vector<int>{-la, la}) {
        WaveFunction f(grid);
        auto amp = f.amplitudes();
        for (std::size_t i = 0; i < grid.size(); ++i) {
          if (chi[i] == 0.0) continue;
          const Point p = grid.coords(i);
          amp[i] = radial[i] * std::polar(1.0 / std::sqrt(2.0 * kPi), l * std::atan2(p[1], p[0]));
        }
        entries.push_back({QuantumNumberLabel::annulus(n, l), E, std::move(f)});
      }
    }
  }
  SpectralBasis basis(dom, SpectrumSource::analytic, std::move(entries));
  basis.normalization().gram_deviation = max_gram_deviation(basis.gram());
  basis.normalization().boundary_max = bmax;
  return basis;
}

SpectralBasis shell_radial_modes(double r1, double r2, int l_max, int n_max, std::size_t radial_points,
                                 PhysicalUnits units) {
  units.validate();
  if (!(r1 > 0.0)) throw StructuralError("shell modes need r1 > 0", "domain.r1");
  Domain dom(Shell{r1, r2});
  if (l_max < 0 || n_max < 1) throw StructuralError("mode bounds out of range", "l_max");
  const Grid rgrid({Axis{r1, r2 - r1, radial_points}});
  std::vector<SpectralEntry> entries;
  double bmax = 0.0;
  for (int l = 0; l <= l_max; ++l) {
    const auto ks = shell_wavenumbers(l, r1, r2, n_max);
    for (int n = 1; n <= n_max; ++n) {
      const double k = ks[static_cast<std::size_t>(n - 1)];
      const double y1 = sph_bessel_y(l, k * r1), j1 = sph_bessel_j(l, k * r1);
      auto A = [&](double r) { return r * (sph_bessel_j(l, k * r) * y1 - j1 * sph_bessel_y(l, k * r)); };
      const int panels = 32 + 8 * n;
      double scale = 1.0 / std::sqrt(integrate([&](double r) { return A(r) * A(r); }, r1, r2, panels));
      if (A(r1 + 1e-6 * (r2 - r1)) < 0.0) scale = -scale;
      bmax = std::max({bmax, std::abs(scale * A(r1)), std::abs(scale * A(r2))});
      WaveFunction f(rgrid);
      auto amp = f.amplitudes();
      for (std::size_t i = 0; i < rgrid.size(); ++i) amp[i] = scale * A(rgrid.coords(i)[0]);
      const double E = units.kinetic_prefactor() * k * k;
      for (int m = -l; m <= l; ++m) entries.push_back({QuantumNumberLabel::shell(n, l, m), E, f});
    }
  }
  SpectralBasis basis(dom, SpectrumSource::analytic, std::move(entries));
  basis.normalization().gram_deviation = max_gram_deviation(basis.gram());
  basis.normalization().boundary_max = bmax;
  basis.normalization().weight = "radial";
  return basis;
}

std::vector<SectorLevel> sector_levels(double r1, double r2, double alpha, int j_max, int n_max,
                                       PhysicalUnits units) {
  units.validate();
  if (!(alpha > 0.0) || alpha > 2.0 * kPi) throw StructuralError("sector opening must be in (0, 2 pi]", "alpha");
  std::vector<SectorLevel> out;
  for (int j = 1; j <= j_max; ++j) {
    const double mu = j * kPi / alpha;
    const auto ks = annulus_wavenumbers(mu, r1, r2, n_max);
    for (int n = 1; n <= n_max; ++n) {
      const double k = ks[static_cast<std::size_t>(n - 1)];
      out.push_back({n, j, mu, units.kinetic_prefactor() * k * k});
    }
  }
  std::sort(out.begin(), out.end(), [](const SectorLevel& a, const SectorLevel& b) { return a.energy < b.energy; });
  return out;
}

AngularBasis angular_modes(AngularFamily family, int l_max, std::size_t points) {
  if (l_max < 0) throw StructuralError("l_max must be >= 0", "l_max");
  AngularBasis b;
  b.family = family;
  if (family == AngularFamily::circle) {
    b.grid = Grid({Axis{0.0, 2.0 * kPi, points}});
    const double h = b.grid.axis(0).spacing();
    b.weights.assign(points, h);
    for (int l = -l_max; l <= l_max; ++l) {
      std::vector<Complex> v(points);
      for (std::size_t i = 0; i < points; ++i) v[i] = std::polar(1.0 / std::sqrt(2.0 * kPi), l * b.grid.coords(i)[0]);
      b.l.push_back(l);
      b.m.push_back(0);
      b.eigenvalue.push_back(static_cast<double>(l) * l);
      b.values.push_back(std::move(v));
    }
    return b;
  }
  const double ht = kPi / static_cast<double>(points);
  b.grid = Grid({Axis{0.5 * ht, kPi, points}, Axis{0.0, 2.0 * kPi, 2 * points}});
  const double hp = b.grid.axis(1).spacing();
  b.weights.resize(b.grid.size());
  for (std::size_t i = 0; i < b.grid.size(); ++i) b.weights[i] = std::sin(b.grid.coords(i)[0]) * ht * hp;
  for (int l = 0; l <= l_max; ++l)
    for (int m = -l; m <= l; ++m) {
      std::vector<Complex> v(b.grid.size());
      const double sgn = (m < 0 && (-m) % 2 == 1) ? -1.0 : 1.0;
      for (std::size_t i = 0; i < b.grid.size(); ++i) {
        const Point p = b.grid.coords(i);
        const double leg = std::sph_legendre(static_cast<unsigned>(l), static_cast<unsigned>(std::abs(m)), p[0]);
        v[i] = sgn * leg * std::polar(1.0, m * p[1]);
      }
      b.l.push_back(l);
      b.m.push_back(m);
      b.eigenvalue.push_back(static_cast<double>(l) * (l + 1));
      b.values.push_back(std::move(v));
    }
  return b;
}

}  // namespace zeno
