#pragma once

#include <string>
#include <vector>

#include "zeno/domain.hpp"
#include "zeno/fit.hpp"
#include "zeno/grid.hpp"
#include "zeno/linalg.hpp"
#include "zeno/propagator.hpp"
#include "zeno/spectra.hpp"
#include "zeno/units.hpp"

namespace zeno {

enum class OperatorBasis { grid, spectral };

struct OperatorMatrix {
  MatrixC values;
  OperatorBasis basis = OperatorBasis::grid;
  bool hermitian = false;  // claimed; validate() checks it

  OperatorMatrix() = default;
  OperatorMatrix(MatrixC m, OperatorBasis b = OperatorBasis::grid, bool herm = false)
      : values(std::move(m)), basis(b), hermitian(herm) {}

  Eigen::Index dim() const { return values.rows(); }
  void validate() const;
};

/// A P B.
OperatorMatrix star_product(const OperatorMatrix& A, const OperatorMatrix& B, const OperatorMatrix& P);

/// P A P.
OperatorMatrix project(const OperatorMatrix& A, const OperatorMatrix& P);

struct HomomorphismDefect {
  double defect_plain = 0.0;  // ||P(AB)P - (PAP)(PBP)||
  double defect_star = 0.0;   // ||P(A*B)P - (PAP)*(PBP)||
  double reference = 0.0;     // ||PABP||
};

/// Operator norms by power iteration (1e-10 relative).
HomomorphismDefect homomorphism_check(const OperatorMatrix& A, const OperatorMatrix& B, const OperatorMatrix& P);

/// Diagonal projector with ones at `indices`.
OperatorMatrix coordinate_projector(Eigen::Index dim, const std::vector<Eigen::Index>& indices);
/// Diagonal projector from a characteristic function.
OperatorMatrix mask_projector(const std::vector<double>& chi);
/// Orthogonal projector onto the first `rank` basis fields, in grid coordinates.
OperatorMatrix basis_projector(const SpectralBasis& basis, std::size_t rank);
/// Position x on a 1D grid.
OperatorMatrix position_operator(const Grid& grid);
/// Momentum -i hbar d/dx by central differences with zero boundary values.
OperatorMatrix momentum_operator(const Grid& grid, PhysicalUnits units = {});
/// Dense U(tau) on the periodic plan grid, one column per unit vector.
OperatorMatrix free_evolution_matrix(const SpectralPropagatorPlan& plan, double tau);

enum class RampProfile { linear, raised_cosine };

std::string to_string(RampProfile profile);

struct SmoothedProjector {
  Grid grid;
  std::vector<double> values;
  std::vector<double> hard;  // the characteristic function it dominates
  int N = 1;
  double w0 = 1.0;
  double width = 0.0;  // w0 / N^2 unless clamped
  RampProfile profile = RampProfile::linear;
  bool saturated = false;  // width clamped to one cell
};

/// Equals 1 on the domain and ramps to 0 over w0 / N^2 outside it.
SmoothedProjector smoothed_projector(const Domain& domain, const Grid& grid, int N,
                                     RampProfile profile = RampProfile::linear, double w0 = 1.0);

/// ||(P_N - P) psi||.
double projector_error(const SmoothedProjector& pn, const WaveFunction& psi);

struct ProjectorLaw {
  std::vector<int> n;
  std::vector<double> error;
  std::vector<bool> saturated;
  PowerFit fit;  // error vs N; the exponent is -fit.slope
};

ProjectorLaw projector_law(const Domain& domain, const WaveFunction& psi, const std::vector<int>& n_ladder,
                           RampProfile profile = RampProfile::linear, double w0 = 1.0);

struct PolarGridSpec {
  std::size_t rings = 64;
  std::size_t angles = 128;
  double r_max_factor = 1.25;  // r_max = factor * r2
};

/// ||[U_ang(t), P]|| for the annulus characteristic function on a polar grid,
/// with U_ang generated by L_z^2 / 2 M r^2 ring by ring.
double automorphism_case(const Annulus& annulus, double t, PhysicalUnits units = {}, PolarGridSpec spec = {});

/// ||[U(t), P]|| for the full free evolution on a Cartesian plan grid.
double free_commutator_defect(const Domain& domain, const Grid& grid, double t, PhysicalUnits units = {});

struct CommutatorContrast {
  std::vector<double> t;
  std::vector<double> angular;
  std::vector<double> free;
  PowerFit free_fit;  // free defect vs t
};

CommutatorContrast commutator_contrast(const Annulus& annulus, const Grid& grid, const std::vector<double>& ts,
                                       PhysicalUnits units = {}, PolarGridSpec spec = {});

/// ||P U(tau) P - (P U(tau/2) P) * (P U(tau/2) P)||: how far one free step is
/// from respecting the star product. Dense, small grids only.
double star_step_defect(const Domain& domain, const Grid& grid, double tau, PhysicalUnits units = {});

}  // namespace zeno
