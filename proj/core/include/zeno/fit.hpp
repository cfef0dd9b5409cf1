#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace zeno {

/// y ~ C x^slope fitted by least squares on log-log axes.
struct PowerFit {
  double slope = 0.0;
  double intercept = 0.0;  // log C
  double r2 = 0.0;
  std::size_t used = 0;     // points above the noise floor
  bool accepted = false;    // r2 >= kMinR2 and used >= 3

  static constexpr double kMinR2 = 0.98;
};

/// Points with y below `floor` are dropped as numerically unresolved.
PowerFit fit_power_law(std::span<const double> x, std::span<const double> y, double floor = 1e-10);

/// y ~ c0 + c1 x + c2 x^2 by least squares.
struct QuadraticFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double rms_residual = 0.0;
  double max_residual = 0.0;
};

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y);

/// y ~ c0 + c1 x by least squares.
struct LinearFit {
  double c0 = 0.0;
  double c1 = 0.0;
  double c0_stderr = 0.0;
  double rms_residual = 0.0;
};

LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

}  // namespace zeno
