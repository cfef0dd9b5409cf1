#pragma once

#include <Eigen/Dense>
#include <functional>

namespace zeno {

using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

struct NormEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Largest singular value by power iteration on A^H A, stopping when
/// successive estimates agree to `rel_tol`.
NormEstimate operator_norm(const MatrixC& A, double rel_tol = 1e-10, int max_iter = 10000);

using LinearMap = std::function<VectorC(const VectorC&)>;

/// Matrix-free variant: `apply` and `apply_adjoint` act on vectors of length n.
NormEstimate operator_norm(const LinearMap& apply, const LinearMap& apply_adjoint, Eigen::Index n,
                           double rel_tol = 1e-10, int max_iter = 10000);

}  // namespace zeno
