#pragma once

#include <optional>
#include <string>
#include <vector>

#include "zeno/domain.hpp"
#include "zeno/fit.hpp"
#include "zeno/grid.hpp"
#include "zeno/propagator.hpp"
#include "zeno/spectra.hpp"

namespace zeno {

/// P U(tau) P on the grid of a propagator plan.
class ZenoStepper {
 public:
  ZenoStepper(Domain domain, SpectralPropagatorPlan plan);

  const Domain& domain() const { return domain_; }
  const SpectralPropagatorPlan& plan() const { return plan_; }
  /// Characteristic function of the domain on the plan grid.
  const std::vector<double>& projector() const { return chi_; }

  void project(std::span<Complex> data) const;
  void step(std::span<Complex> data, double tau) const;
  /// Lifts a field onto the plan grid (zero extension) without projecting.
  WaveFunction lift(const WaveFunction& psi) const;

 private:
  Domain domain_;
  SpectralPropagatorPlan plan_;
  std::vector<double> chi_;
};

/// P U(tau) P psi on a plan padded for tau. The result lives on the padded grid.
WaveFunction zeno_step(const WaveFunction& psi, double tau, const Domain& domain, PhysicalUnits units = {});
WaveFunction zeno_step(const WaveFunction& psi, double tau, const ZenoStepper& stepper);

struct ZenoRunConfig {
  Domain domain;
  PhysicalUnits units;
  double t = 1.0;
  std::vector<int> n_ladder;
  /// Grid of the initial state; the propagator pads around it.
  Grid grid;
  WaveFunction initial;
  /// Dirichlet basis used to build the reference evolution.
  std::optional<SpectralBasis> reference;

  void validate() const;
};

struct ZenoRun {
  WaveFunction state;              // V_N(t) psi0 on the padded grid
  std::vector<double> step_norms;  // norm after each step
  std::size_t padded_points = 0;
  double guard_margin = 0.0;
};

/// (P U(t/N) P)^N psi0. A fresh plan padded for t/N is used unless one is given.
ZenoRun zeno_evolve(const ZenoRunConfig& config, int N, const ZenoStepper* stepper = nullptr);

struct MatrixElementTable {
  std::vector<QuantumNumberLabel> labels;
  std::vector<double> energies;
  std::vector<double> taus;
  std::vector<MatrixC> G;  // one matrix per tau
  std::vector<MatrixC> R;  // G - delta (1 - i E tau / hbar)
  PhysicalUnits units;
};

/// G_mn(tau) = <Psi_m, P U(tau) P Psi_n> over the basis. The basis must be
/// orthonormal to 1e-8 on its grid.
MatrixElementTable matrix_elements(const SpectralBasis& basis, const std::vector<double>& taus, const Domain& domain,
                                   PhysicalUnits units = {});

/// Log-log fit of |R_nn| (diagonal) or |G_mn| (off-diagonal) against tau.
PowerFit short_time_fit(const MatrixElementTable& table, std::size_t m, std::size_t n, double floor = 1e-14);

/// ||Q U(tau) P psi|| with Q = 1 - P. psi must already be projected.
double leakage(const WaveFunction& psi, double tau, const Domain& domain, PhysicalUnits units = {});
double leakage(const WaveFunction& psi, double tau, const ZenoStepper& stepper);

/// ||Q U(tau) P|| as an operator, assembled column by column on a small grid.
double leakage_operator_norm(const ZenoStepper& stepper, double tau);

struct ConvergencePoint {
  int N = 0;
  double fidelity = 0.0;             // |<Psi_ref(t), V_N psi0>|
  double normalized_fidelity = 0.0;  // fidelity / ||V_N psi0||
  double residual = 0.0;             // ||V_N psi0 - Psi_ref(t)||
  double phase = 0.0;                // arg <psi0, V_N psi0>
  double norm = 0.0;                 // ||V_N psi0||
  double norm_loss = 0.0;            // 1 - ||V_N psi0||
  bool monotone = true;              // step norms nonincreasing
  double guard_margin = 0.0;
  std::size_t padded_points = 0;
  double seconds = 0.0;
  /// <Psi_k, V_N psi0> for every reference mode present in psi0.
  std::vector<Complex> mode_amplitudes;
};

struct ConvergenceReport {
  double t = 0.0;
  std::vector<QuantumNumberLabel> tracked_modes;
  std::vector<Complex> initial_amplitudes;
  double projection_deficit = 0.0;
  std::vector<ConvergencePoint> points;
  PowerFit residual_fit;   // residual vs N
  PowerFit norm_loss_fit;  // norm loss vs N
  double wall_seconds = 0.0;
  std::uint64_t transforms = 0;

  bool residual_strictly_decreasing() const;
};

/// Runs the N ladder and compares against sum_n e^{-i E_n t / hbar} <Psi_n, psi0> Psi_n.
/// `jobs` bounds how many ladder points run concurrently.
ConvergenceReport convergence_experiment(const ZenoRunConfig& config, int jobs = 1);

}  // namespace zeno
