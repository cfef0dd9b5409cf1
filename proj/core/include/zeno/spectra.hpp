#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zeno/domain.hpp"
#include "zeno/grid.hpp"
#include "zeno/labels.hpp"
#include "zeno/linalg.hpp"
#include "zeno/units.hpp"

namespace zeno {

enum class SpectrumSource { analytic, fd_oracle };

std::string to_string(SpectrumSource source);

/// How well the sampled fields satisfy the basis contract.
struct NormalizationRecord {
  double gram_deviation = 0.0;     // max |<psi_i, psi_j> - delta_ij|
  double boundary_max = 0.0;       // max |psi| at boundary samples (analytic)
  bool orthonormalized = false;    // Loewdin step applied
  std::string weight = "cartesian";  // "cartesian" or "radial" (A = r R, plain dr)
};

struct SpectralEntry {
  QuantumNumberLabel label;
  double energy = 0.0;
  WaveFunction field;
};

/// Dirichlet eigenpairs of a domain, sorted by energy.
class SpectralBasis {
 public:
  SpectralBasis(Domain domain, SpectrumSource source, std::vector<SpectralEntry> entries);

  const Domain& domain() const { return domain_; }
  SpectrumSource source() const { return source_; }
  std::size_t size() const { return entries_.size(); }
  const SpectralEntry& operator[](std::size_t i) const { return entries_.at(i); }
  const std::vector<SpectralEntry>& entries() const { return entries_; }
  std::vector<double> energies() const;
  std::optional<std::size_t> find(const QuantumNumberLabel& label) const;

  /// Quadrature Gram matrix. Shell entries with different (l, m) are
  /// orthogonal through their angular parts and are reported as such.
  MatrixC gram() const;

  const NormalizationRecord& normalization() const { return norm_; }
  NormalizationRecord& normalization() { return norm_; }

 private:
  friend SpectralBasis lowdin_orthonormalize(const SpectralBasis&);
  Domain domain_;
  SpectrumSource source_;
  std::vector<SpectralEntry> entries_;
  NormalizationRecord norm_;
};

/// Replaces the fields by S^{-1/2}-combinations so the Gram matrix is the
/// identity; labels and energies are kept.
SpectralBasis lowdin_orthonormalize(const SpectralBasis& basis);

// ---- analytic families ---------------------------------------------------

double rectangle_energy(double a, double b, int n, int m, PhysicalUnits units = {});
double interval_energy(double length, int n, PhysicalUnits units = {});

SpectralBasis interval_modes(double x0, double x1, int n_max, const Grid& grid, PhysicalUnits units = {});
SpectralBasis rectangle_modes(double a, double b, int n_max, int m_max, const Grid& grid, PhysicalUnits units = {});

/// J_l(k r1) Y_l(k r2) - J_l(k r2) Y_l(k r1) for real order l >= 0.
double bessel_cross_product(double l, double k, double r1, double r2);
/// j_l(k r1) y_l(k r2) - j_l(k r2) y_l(k r1).
double sph_bessel_cross_product(int l, double k, double r1, double r2);

struct RootScan {
  std::vector<double> roots;
  double k_lo = 0.0;
  double k_hi = 0.0;
  std::size_t sign_changes = 0;
};

/// Brackets sign changes of f on a uniform scan with step pi / (4 (r2 - r1))
/// and bisects each to 1e-14 relative. Stops after `count` roots or at k_max.
RootScan find_roots(const std::function<double(double)>& f, double r1, double r2, std::size_t count,
                    double k_max = 0.0);

/// First n_max wavenumbers of the annulus sector with angular index l.
std::vector<double> annulus_wavenumbers(double l, double r1, double r2, int n_max);
std::vector<double> shell_wavenumbers(int l, double r1, double r2, int n_max);

/// Radial profile psi_{nl}(r) with unit weight-r norm on [r1, r2].
struct AnnulusRadial {
  double l = 0.0;
  double k = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double scale = 1.0;
  double operator()(double r) const;
};
AnnulusRadial annulus_radial(double l, double k, double r1, double r2);

/// Annulus modes psi_{nl}(r) e^{i l theta} / sqrt(2 pi) for |l| <= l_max.
SpectralBasis annulus_modes(double r1, double r2, int l_max, int n_max, const Grid& grid, PhysicalUnits units = {});

/// Shell modes in the radial A = r R representation on a uniform radial grid
/// over [r1, r2); one entry per (n, l, m).
SpectralBasis shell_radial_modes(double r1, double r2, int l_max, int n_max, std::size_t radial_points = 2048,
                                 PhysicalUnits units = {});

/// Energies of the Dirichlet sector r1 < r < r2, 0 < theta < alpha; the
/// angular orders are the real numbers mu_j = j pi / alpha.
struct SectorLevel {
  int n = 0;
  int j = 0;
  double mu = 0.0;
  double energy = 0.0;
};
std::vector<SectorLevel> sector_levels(double r1, double r2, double alpha, int j_max, int n_max,
                                       PhysicalUnits units = {});

enum class AngularFamily { circle, sphere };

/// Angular eigenfunctions sampled on their own grid: theta in [0, 2 pi) for
/// the circle, (theta, phi) cell centers on [0, pi] x [0, 2 pi) for the sphere.
struct AngularBasis {
  AngularFamily family = AngularFamily::circle;
  Grid grid = Grid::cube(1, 0.0, 1.0, 8);
  std::vector<int> l;
  std::vector<int> m;
  std::vector<double> eigenvalue;  // l^2 or l(l+1)
  std::vector<std::vector<Complex>> values;
  /// Angular measure per node: h for the circle, sin(theta) h_theta h_phi for the sphere.
  std::vector<double> weights;
};

AngularBasis angular_modes(AngularFamily family, int l_max, std::size_t points = 256);

// ---- finite-difference oracle ---------------------------------------------

struct FdOptions {
  /// Use exact boundary crossings for analytic domains (second order).
  bool ghost_boundary = true;
  std::size_t dense_limit = 2000;
  int block_size = 4;
  int max_blocks = 200;
  double tolerance = 1e-10;
  unsigned seed = 12345;
};

struct FdDiagnostics {
  std::size_t unknowns = 0;
  bool dense = false;
  int lanczos_steps = 0;
  double max_residual = 0.0;  // max ||H x - E x|| / E over returned pairs
};

/// Lowest `count` eigenpairs of the discrete Dirichlet Laplacian (scaled by
/// hbar^2 / 2M) on the nodes of `grid` inside `domain`.
SpectralBasis fd_dirichlet_eigs(const Domain& domain, const Grid& grid, std::size_t count, PhysicalUnits units = {},
                                const FdOptions& options = {}, FdDiagnostics* diagnostics = nullptr);

}  // namespace zeno
