#pragma once

// Independent reference computations for the tests. None of these call the
// library numerics they are used to check.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
using MatrixC = Eigen::MatrixXcd;
using VectorC = Eigen::VectorXcd;

/// Free evolution on a periodic 1D box of n nodes with spacing h, written as
/// a literal sum over plane waves.
MatrixC periodic_free_evolution(std::size_t n, double h, double tau, double hbar = 1.0, double mass = 1.0);

/// (P U P)^N as an explicit matrix power; chi is the 0/1 diagonal of P.
MatrixC dense_zeno_power(const MatrixC& U, const std::vector<double>& chi, int N);

/// Nodes strictly inside (x0, x1), with a relative tolerance.
std::vector<double> interval_indicator(double origin, double h, std::size_t n, double x0, double x1);

/// J_l(k a) Y_l(k b) - J_l(k b) Y_l(k a) from the standard library.
double cylinder_cross(double l, double k, double a, double b);
/// j_l(k a) y_l(k b) - j_l(k b) y_l(k a) from the standard library.
double sphere_cross(int l, double k, double a, double b);

/// First `count` sign changes of f on (0, k_max], refined by bisection.
std::vector<double> bracket_roots(const std::function<double(double)>& f, double dk, std::size_t count,
                                  double k_max);

/// Lowest eigenvalues of -u'' + (l^2 - 1/4) u / r^2 on (r1, r2), u = 0 at
/// both ends, by a dense second-order finite-difference matrix (the radial
/// part of the Dirichlet Laplacian on an annulus, in units with hbar^2/2M = 1/2
/// factored out, so E = lambda / 2).
std::vector<double> radial_fd_eigs(double l, double r1, double r2, std::size_t nodes, std::size_t count);

/// Eigenvalues of -d^2/dtheta^2 on a periodic ring of n nodes by finite
/// differences, sorted.
std::vector<double> ring_laplacian_eigs(std::size_t n);

}  // namespace oracle
