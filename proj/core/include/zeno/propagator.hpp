#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "zeno/grid.hpp"
#include "zeno/linalg.hpp"
#include "zeno/units.hpp"

namespace zeno {

struct PropagatorCounters {
  std::uint64_t transforms = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
};

/// Free evolution exp(-i H tau / hbar) on a periodic box that embeds an
/// interior region with a guard band. Copies share one immutable plan.
class SpectralPropagatorPlan {
 public:
  static constexpr double kGuardConstant = 8.0;

  /// Pads `interior` so that taus with |tau| <= tau_max satisfy the guard.
  /// Axis sizes are rounded up to FFT-friendly lengths.
  SpectralPropagatorPlan(const Grid& interior, double tau_max, PhysicalUnits units = {});
  /// Uses `computational` as is; it must nest `interior`.
  SpectralPropagatorPlan(Grid computational, Grid interior, PhysicalUnits units = {});

  const Grid& grid() const;
  const Grid& interior() const;
  const PhysicalUnits& units() const;

  /// Smallest L_pad / L_domain over the axes.
  double padding_factor() const;
  /// Smallest (L_pad - L_domain) / sqrt(hbar |tau| / M) over the axes.
  double guard_margin(double tau) const;
  /// Largest |tau| the guard allows.
  double tau_max() const;
  /// Throws GuardViolation when |tau| exceeds tau_max().
  void check_guard(double tau) const;

  /// exp(-i hbar |k|^2 tau / 2M) per mode, cached by the bit pattern of tau.
  std::shared_ptr<const std::vector<Complex>> phases(double tau) const;

  /// In-place U(tau) on amplitudes laid out on grid().
  void apply(std::span<Complex> data, double tau) const;

  PropagatorCounters counters() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

/// U(tau) psi. psi may live on the plan grid or on any grid it nests; the
/// result is always on the plan grid.
WaveFunction evolve_free(const WaveFunction& psi, double tau, const SpectralPropagatorPlan& plan);

/// Dense Gaussian propagator sampled between the nodes of one grid,
/// including the cell measure of the source.
struct KernelMatrix {
  Grid grid;
  double tau = 0.0;
  MatrixC values;
};

/// Limit on the node count accepted by the dense kernel routines.
inline constexpr std::size_t kKernelMaxPoints = 4096;

KernelMatrix kernel_matrix(const Grid& grid, double tau, PhysicalUnits units = {});

/// Quadrature of the free kernel against psi on psi's own grid.
WaveFunction kernel_evolve(const WaveFunction& psi, double tau, PhysicalUnits units = {});

/// Smallest 2^a 3^b 5^c 7^d not below n.
std::size_t fft_friendly_size(std::size_t n);

}  // namespace zeno
