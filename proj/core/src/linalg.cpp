#include "zeno/linalg.hpp"

#include <cmath>

namespace zeno {

NormEstimate operator_norm(const MatrixC& A, double rel_tol, int max_iter) {
  return operator_norm([&](const VectorC& v) -> VectorC { return A * v; },
                       [&](const VectorC& v) -> VectorC { return A.adjoint() * v; }, A.cols(), rel_tol, max_iter);
}

NormEstimate operator_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Eigen::Index n, double rel_tol,
                           int max_iter) {
  NormEstimate est;
  if (n == 0) {
    est.converged = true;
    return est;
  }
  // Deterministic start vector with no special symmetry.
  VectorC v(n);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = {1.0 + 0.37 * std::sin(1.3 * static_cast<double>(i)), 0.21 * std::cos(0.7 * static_cast<double>(i))};
  v.normalize();
  double prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    VectorC w = apply_adjoint(apply(v));
    const double lambda = w.norm();
    est.iterations = it;
    if (lambda == 0.0) {
      est.value = 0.0;
      est.converged = true;
      return est;
    }
    v = w / lambda;
    est.value = std::sqrt(lambda);
    if (it > 1 && std::abs(lambda - prev) <= rel_tol * lambda) {
      est.converged = true;
      break;
    }
    prev = lambda;
  }
  return est;
}

}  // namespace zeno
