#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "zeno/errors.hpp"
#include "zeno/spectra.hpp"

namespace zeno {

namespace {

constexpr double kMinFraction = 1e-3;

struct Discretization {
  Eigen::SparseMatrix<double> H;
  std::vector<std::size_t> nodes;  // unknown -> grid node
};

Discretization build_operator(const Domain& domain, const Grid& grid, PhysicalUnits units, bool ghost) {
  const auto chi = characteristic_mask(domain, grid);
  std::vector<long> index(grid.size(), -1);
  Discretization d;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (chi[i] != 0.0) {
      index[i] = static_cast<long>(d.nodes.size());
      d.nodes.push_back(i);
    }
  const auto n = static_cast<Eigen::Index>(d.nodes.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (2 * static_cast<std::size_t>(grid.dim()) + 1));
  const double c = units.kinetic_prefactor();
  const bool use_ghost = ghost && domain.analytic();
  for (Eigen::Index u = 0; u < n; ++u) {
    const std::size_t node = d.nodes[static_cast<std::size_t>(u)];
    const auto idx = grid.unflatten(node);
    const Point p = grid.coords(node);
    double diag = 0.0;
    for (int a = 0; a < grid.dim(); ++a) {
      const double h = grid.axis(a).spacing();
      const double w = c / (h * h);
      for (int dir : {-1, 1}) {
        auto nb = idx;
        auto& k = nb[static_cast<std::size_t>(a)];
        const bool on_grid = dir < 0 ? k > 0 : k + 1 < grid.axis(a).points;
        long j = -1;
        if (on_grid) {
          k = dir < 0 ? k - 1 : k + 1;
          j = index[grid.flatten(nb)];
        }
        if (j >= 0) {
          diag += w;
          trip.emplace_back(u, j, -w);
          continue;
        }
        // Outside neighbor: Dirichlet value at the crossing, linear ghost.
        double theta = 1.0;
        if (use_ghost) {
          if (auto f = domain.boundary_fraction(p, a, dir, h)) theta = std::max(*f, kMinFraction);
        }
        diag += w / theta;
      }
    }
    trip.emplace_back(u, u, diag);
  }
  d.H.resize(n, n);
  d.H.setFromTriplets(trip.begin(), trip.end());
  return d;
}

struct EigenPairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  int steps = 0;
};

EigenPairs dense_solve(const Eigen::SparseMatrix<double>& H, std::size_t count) {
  const Eigen::MatrixXd D(H);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
  if (es.info() != Eigen::Success) throw NumericalError("dense Dirichlet eigensolve failed");
  const auto k = static_cast<Eigen::Index>(count);
  return {es.eigenvalues().head(k), es.eigenvectors().leftCols(k), 0};
}

// Block Lanczos with full reorthogonalization on H^{-1} (shift zero, H is
// positive definite), so the wanted lowest energies are the extreme Ritz
// values of the inverse.
EigenPairs lanczos_solve(const Eigen::SparseMatrix<double>& H, std::size_t count, const FdOptions& opt) {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
  if (ldlt.info() != Eigen::Success) throw NumericalError("sparse LDLT factorization failed");
  const Eigen::Index n = H.rows();
  const Eigen::Index b = opt.block_size;
  const auto want = static_cast<Eigen::Index>(count);

  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> gauss;
  auto random_block = [&] {
    Eigen::MatrixXd R(n, b);
    for (Eigen::Index j = 0; j < b; ++j)
      for (Eigen::Index i = 0; i < n; ++i) R(i, j) = gauss(rng);
    return R;
  };

  std::vector<Eigen::MatrixXd> Q;
  std::vector<Eigen::MatrixXd> A, B;  // B[j] couples block j+1 to block j
  auto orthogonalize = [&](Eigen::MatrixXd& W) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& Qk : Q) W.noalias() -= Qk * (Qk.transpose() * W);
  };
  {
    Eigen::MatrixXd R = random_block();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(R);
    Q.push_back(qr.householderQ() * Eigen::MatrixXd::Identity(n, b));
  }

  Eigen::VectorXd theta;
  Eigen::MatrixXd S;
  int steps = 0;
  bool converged = false;
  double worst = 0.0;
  for (int j = 0; j < opt.max_blocks; ++j) {
    Eigen::MatrixXd W(n, b);
    for (Eigen::Index c = 0; c < b; ++c) W.col(c) = ldlt.solve(Q[static_cast<std::size_t>(j)].col(c));
    ++steps;
    Eigen::MatrixXd Aj = Q[static_cast<std::size_t>(j)].transpose() * W;
    Aj = 0.5 * (Aj + Aj.transpose()).eval();
    A.push_back(Aj);
    orthogonalize(W);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(W);
    Eigen::MatrixXd Qn = qr.householderQ() * Eigen::MatrixXd::Identity(n, b);
    Eigen::MatrixXd Bj = Qn.transpose() * W;
    // Rank loss means an invariant subspace was found; continue with fresh
    // directions orthogonal to everything so far.
    if (Bj.diagonal().cwiseAbs().minCoeff() < 1e-12 * std::max(1.0, Aj.norm())) {
      Eigen::MatrixXd R = random_block();
      orthogonalize(R);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr2(R);
      Qn = qr2.householderQ() * Eigen::MatrixXd::Identity(n, b);
      orthogonalize(Qn);
      Bj = Qn.transpose() * W;
    }
    B.push_back(Bj);
    Q.push_back(Qn);

    const Eigen::Index m = b * (j + 1);
    if (m < want + 2 * b || (j % 3 != 2 && j + 1 < opt.max_blocks)) continue;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k <= j; ++k) {
      T.block(k * b, k * b, b, b) = A[static_cast<std::size_t>(k)];
      if (k < j) {
        T.block((k + 1) * b, k * b, b, b) = B[static_cast<std::size_t>(k)];
        T.block(k * b, (k + 1) * b, b, b) = B[static_cast<std::size_t>(k)].transpose();
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    // Ascending; wanted are the largest.
    theta = es.eigenvalues().tail(want).reverse();
    S = es.eigenvectors().rightCols(want).rowwise().reverse();
    worst = 0.0;
    for (Eigen::Index i = 0; i < want; ++i) {
      const double res = (Bj * S.col(i).tail(b)).norm();
      worst = std::max(worst, res / std::abs(theta(i)));
    }
    if (worst <= opt.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "block Lanczos did not converge: " << steps << " block steps, " << n << " unknowns, worst Ritz residual "
       << worst << " > " << opt.tolerance;
    throw NumericalError(os.str());
  }
  const Eigen::Index m = S.rows();
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, want);
  for (Eigen::Index k = 0; k * b < m; ++k) X.noalias() += Q[static_cast<std::size_t>(k)] * S.middleRows(k * b, b);
  Eigen::VectorXd E(want);
  for (Eigen::Index i = 0; i < want; ++i) {
    X.col(i).normalize();
    E(i) = X.col(i).dot(H * X.col(i));
  }
  return {E, X, steps};
}

}  // namespace

SpectralBasis fd_dirichlet_eigs(const Domain& domain, const Grid& grid, std::size_t count, PhysicalUnits units,
                                const FdOptions& options, FdDiagnostics* diagnostics) {
  units.validate();
  if (count == 0) throw StructuralError("eigenpair count must be positive", "count");
  const Discretization d = build_operator(domain, grid, units, options.ghost_boundary);
  const std::size_t n = d.nodes.size();
  if (count > n / 4)
    throw StructuralError("requested " + std::to_string(count) + " eigenpairs but only " + std::to_string(n) +
                              " interior cells (limit is a quarter)",
                          "count");
  const bool dense = n < options.dense_limit;
  EigenPairs ep = dense ? dense_solve(d.H, count) : lanczos_solve(d.H, count, options);

  double max_res = 0.0;
  const double scale = 1.0 / std::sqrt(grid.cell_measure());
  std::vector<SpectralEntry> entries;
  for (std::size_t k = 0; k < count; ++k) {
    const auto c = static_cast<Eigen::Index>(k);
    const Eigen::VectorXd x = ep.vectors.col(c).normalized();
    const double E = ep.values(c);
    max_res = std::max(max_res, (d.H * x - E * x).norm() / std::abs(E));
    // Fix the sign so the largest component is positive.
    Eigen::Index imax = 0;
    x.cwiseAbs().maxCoeff(&imax);
    const double sgn = x(imax) < 0.0 ? -1.0 : 1.0;
    WaveFunction f(grid);
    auto amp = f.amplitudes();
    for (std::size_t u = 0; u < n; ++u) amp[d.nodes[u]] = sgn * scale * x(static_cast<Eigen::Index>(u));
    entries.push_back({QuantumNumberLabel::mask(static_cast<int>(k) + 1), E, std::move(f)});
  }
  if (max_res > 1e-6) {
    std::ostringstream os;
    os << "Dirichlet eigenpairs failed the residual check: max relative residual " << max_res;
    throw NumericalError(os.str());
  }
  if (diagnostics) *diagnostics = {n, dense, ep.steps, max_res};
  SpectralBasis basis(domain, SpectrumSource::fd_oracle, std::move(entries));
  const Eigen::MatrixXd G = ep.vectors.transpose() * ep.vectors;
  basis.normalization().gram_deviation =
      (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
  return basis;
}

}  // namespace zeno
