#pragma once

namespace zeno {

/// Reduced Planck constant and particle mass. Every formula in the library
/// keeps both symbolic so unit sweeps stay testable.
struct PhysicalUnits {
  double hbar = 1.0;
  double mass = 1.0;

  /// hbar^2 / 2M, the prefactor of the kinetic energy.
  double kinetic_prefactor() const { return hbar * hbar / (2.0 * mass); }
  void validate() const;
};

}  // namespace zeno
