#include "zeno/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "zeno/errors.hpp"

namespace zeno {

namespace {

void check_sizes(std::span<const double> x, std::span<const double> y, std::size_t min_points) {
  if (x.size() != y.size()) throw StructuralError("fit abscissa and ordinate lengths differ");
  if (x.size() < min_points)
    throw StructuralError("fit needs at least " + std::to_string(min_points) + " points");
}

}  // namespace

PowerFit fit_power_law(std::span<const double> x, std::span<const double> y, double floor) {
  if (x.size() != y.size()) throw StructuralError("fit abscissa and ordinate lengths differ");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > floor) || !std::isfinite(y[i])) continue;
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  PowerFit f;
  f.used = lx.size();
  if (f.used < 2) return f;
  const auto n = static_cast<double>(f.used);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < f.used; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < f.used; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.accepted = f.used >= 3 && f.r2 >= PowerFit::kMinR2;
  return f;
}

QuadraticFit fit_quadratic(std::span<const double> x, std::span<const double> y) {
  check_sizes(x, y, 3);
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    A(i, 0) = 1.0;
    A(i, 1) = xi;
    A(i, 2) = xi * xi;
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(b);
  const Eigen::VectorXd r = A * c - b;
  QuadraticFit f{c(0), c(1), c(2), std::sqrt(r.squaredNorm() / static_cast<double>(n)), r.cwiseAbs().maxCoeff()};
  return f;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  check_sizes(x, y, 2);
  const auto n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericalError("linear fit with identical abscissae");
  LinearFit f;
  f.c1 = sxy / sxx;
  f.c0 = my - f.c1 * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.c0 + f.c1 * x[i]);
    ss += r * r;
  }
  f.rms_residual = std::sqrt(ss / n);
  if (x.size() > 2) {
    const double s2 = ss / (n - 2.0);
    f.c0_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

}  // namespace zeno
