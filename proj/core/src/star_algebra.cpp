#include "zeno/star_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "zeno/errors.hpp"

namespace zeno {

namespace {

using std::numbers::pi;

void check_conformable(const OperatorMatrix& a, const OperatorMatrix& b, const char* what) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols() || a.values.rows() != a.values.cols()) {
    std::ostringstream os;
    os << what << ": dimension mismatch " << a.values.rows() << "x" << a.values.cols() << " vs " << b.values.rows()
       << "x" << b.values.cols();
    throw StructuralError(os.str(), "dimension");
  }
}

double norm2(const MatrixC& m) { return operator_norm(m).value; }

}  // namespace

void OperatorMatrix::validate() const {
  if (values.rows() != values.cols()) throw StructuralError("operator matrix must be square", "values");
  if (!values.allFinite()) throw StructuralError("operator matrix has non-finite entries", "values");
  if (hermitian) {
    const double scale = std::max(values.cwiseAbs().maxCoeff(), 1.0);
    if ((values - values.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw StructuralError("operator claimed Hermitian is not", "hermitian");
  }
}

OperatorMatrix star_product(const OperatorMatrix& A, const OperatorMatrix& B, const OperatorMatrix& P) {
  check_conformable(A, B, "star product");
  check_conformable(A, P, "star product");
  return {A.values * P.values * B.values, A.basis};
}

OperatorMatrix project(const OperatorMatrix& A, const OperatorMatrix& P) {
  check_conformable(A, P, "projection");
  return {P.values * A.values * P.values, A.basis, A.hermitian && P.hermitian};
}

HomomorphismDefect homomorphism_check(const OperatorMatrix& A, const OperatorMatrix& B, const OperatorMatrix& P) {
  check_conformable(A, B, "homomorphism check");
  check_conformable(A, P, "homomorphism check");
  const MatrixC& p = P.values;
  const MatrixC pap = p * A.values * p;
  const MatrixC pbp = p * B.values * p;
  HomomorphismDefect d;
  d.defect_plain = norm2(p * (A.values * B.values) * p - pap * pbp);
  d.defect_star = norm2(p * (A.values * p * B.values) * p - pap * p * pbp);
  d.reference = norm2(p * A.values * B.values * p);
  return d;
}

OperatorMatrix coordinate_projector(Eigen::Index dim, const std::vector<Eigen::Index>& indices) {
  MatrixC P = MatrixC::Zero(dim, dim);
  for (auto i : indices) {
    if (i < 0 || i >= dim) throw StructuralError("projector index out of range", "indices");
    P(i, i) = 1.0;
  }
  return {std::move(P), OperatorBasis::grid, true};
}

OperatorMatrix mask_projector(const std::vector<double>& chi) {
  const auto n = static_cast<Eigen::Index>(chi.size());
  MatrixC P = MatrixC::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) P(i, i) = chi[static_cast<std::size_t>(i)];
  return {std::move(P), OperatorBasis::grid, true};
}

OperatorMatrix basis_projector(const SpectralBasis& basis, std::size_t rank) {
  if (rank == 0 || rank > basis.size()) throw StructuralError("projector rank out of range", "rank");
  const Grid& g = basis[0].field.grid();
  const auto n = static_cast<Eigen::Index>(g.size());
  const double w = std::sqrt(g.cell_measure());
  MatrixC V(n, static_cast<Eigen::Index>(rank));
  for (std::size_t j = 0; j < rank; ++j) {
    const auto a = basis[j].field.amplitudes();
    for (Eigen::Index i = 0; i < n; ++i) V(i, static_cast<Eigen::Index>(j)) = a[static_cast<std::size_t>(i)] * w;
  }
  return {V * V.adjoint(), OperatorBasis::grid, true};
}

OperatorMatrix position_operator(const Grid& grid) {
  if (grid.dim() != 1) throw StructuralError("position operator needs a 1D grid", "grid");
  const auto n = static_cast<Eigen::Index>(grid.size());
  MatrixC X = MatrixC::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) X(i, i) = grid.axis(0).coord(static_cast<std::size_t>(i));
  return {std::move(X), OperatorBasis::grid, true};
}

OperatorMatrix momentum_operator(const Grid& grid, PhysicalUnits units) {
  if (grid.dim() != 1) throw StructuralError("momentum operator needs a 1D grid", "grid");
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double h = grid.axis(0).spacing();
  const Complex c(0.0, -units.hbar / (2.0 * h));
  MatrixC Pm = MatrixC::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    Pm(i, i + 1) = c;
    Pm(i + 1, i) = -c;
  }
  return {std::move(Pm), OperatorBasis::grid, true};
}

OperatorMatrix free_evolution_matrix(const SpectralPropagatorPlan& plan, double tau) {
  const std::size_t n = plan.grid().size();
  if (n > kKernelMaxPoints) throw StructuralError("grid too large for a dense evolution matrix", "grid");
  MatrixC U(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Complex> col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), Complex{});
    col[j] = 1.0;
    plan.apply(col, tau);
    for (std::size_t i = 0; i < n; ++i) U(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return {std::move(U)};
}

std::string to_string(RampProfile profile) {
  return profile == RampProfile::linear ? "linear" : "raised-cosine";
}

SmoothedProjector smoothed_projector(const Domain& domain, const Grid& grid, int N, RampProfile profile, double w0) {
  if (N < 1) throw StructuralError("N must be >= 1", "N");
  if (!(w0 > 0.0) || !std::isfinite(w0)) throw StructuralError("ramp scale w0 must be positive", "w0");
  SmoothedProjector sp{grid, {}, characteristic_mask(domain, grid), N, w0, 0.0, profile, false};
  double cell = grid.axis(0).spacing();
  for (int a = 1; a < grid.dim(); ++a) cell = std::max(cell, grid.axis(a).spacing());
  sp.width = w0 / (static_cast<double>(N) * N);
  if (sp.width < cell) {
    sp.width = cell;
    sp.saturated = true;
  }
  sp.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (sp.hard[i] != 0.0) {
      sp.values[i] = 1.0;
      continue;
    }
    const double s = domain.distance_outside(grid.coords(i)) / sp.width;
    double v = 0.0;
    if (s < 1.0) v = profile == RampProfile::linear ? 1.0 - s : 0.5 * (1.0 + std::cos(pi * s));
    // Saturated ramps stop at the first cell; the hard mask is the limit.
    sp.values[i] = sp.saturated ? 0.0 : std::clamp(v, 0.0, 1.0);
  }
  return sp;
}

double projector_error(const SmoothedProjector& pn, const WaveFunction& psi) {
  if (!(psi.grid() == pn.grid)) throw StructuralError("state and projector grids differ", "psi");
  const auto a = psi.amplitudes();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (pn.values[i] - pn.hard[i]) * (pn.values[i] - pn.hard[i]) * std::norm(a[i]);
  return std::sqrt(s * pn.grid.cell_measure());
}

ProjectorLaw projector_law(const Domain& domain, const WaveFunction& psi, const std::vector<int>& n_ladder,
                           RampProfile profile, double w0) {
  ProjectorLaw law;
  std::vector<double> x, y;
  for (int N : n_ladder) {
    const auto sp = smoothed_projector(domain, psi.grid(), N, profile, w0);
    law.n.push_back(N);
    law.error.push_back(projector_error(sp, psi));
    law.saturated.push_back(sp.saturated);
    if (!sp.saturated) {
      x.push_back(N);
      y.push_back(law.error.back());
    }
  }
  law.fit = fit_power_law(x, y, 1e-300);
  return law;
}

double automorphism_case(const Annulus& annulus, double t, PhysicalUnits units, PolarGridSpec spec) {
  units.validate();
  const Domain domain(annulus);
  if (spec.rings < 2 || spec.angles < 2) throw StructuralError("polar grid too small", "polar_grid");
  const double r_max = spec.r_max_factor * annulus.r2;
  const double dr = r_max / static_cast<double>(spec.rings);
  const auto na = static_cast<Eigen::Index>(spec.angles);

  // Ring-wise DFT: F(l, k) = e^{-i l theta_k} / sqrt(n) with signed l.
  MatrixC F(na, na);
  for (Eigen::Index l = 0; l < na; ++l)
    for (Eigen::Index k = 0; k < na; ++k)
      F(l, k) = std::polar(1.0 / std::sqrt(static_cast<double>(na)), -2.0 * pi * static_cast<double>(l * k) / na);

  std::vector<MatrixC> blocks;
  std::vector<double> chi;
  for (std::size_t j = 0; j < spec.rings; ++j) {
    const double r = (static_cast<double>(j) + 0.5) * dr;
    chi.push_back(domain.contains({r, 0.0, 0.0}) ? 1.0 : 0.0);
    VectorC phase(na);
    for (Eigen::Index l = 0; l < na; ++l) {
      const double ls = static_cast<double>(l <= na / 2 ? l : l - na);
      phase(l) = std::polar(1.0, -units.hbar * ls * ls * t / (2.0 * units.mass * r * r));
    }
    blocks.push_back(F.adjoint() * phase.asDiagonal() * F);
  }

  const auto n = static_cast<Eigen::Index>(spec.rings) * na;
  auto apply_u = [&](const VectorC& v, bool adjoint) {
    VectorC out(n);
    for (std::size_t j = 0; j < spec.rings; ++j) {
      const auto off = static_cast<Eigen::Index>(j) * na;
      out.segment(off, na) =
          adjoint ? (blocks[j].adjoint() * v.segment(off, na)).eval() : (blocks[j] * v.segment(off, na)).eval();
    }
    return out;
  };
  auto apply_p = [&](VectorC v) {
    for (std::size_t j = 0; j < spec.rings; ++j) v.segment(static_cast<Eigen::Index>(j) * na, na) *= chi[j];
    return v;
  };
  return operator_norm([&](const VectorC& v) -> VectorC { return apply_u(apply_p(v), false) - apply_p(apply_u(v, false)); },
                       [&](const VectorC& v) -> VectorC { return apply_p(apply_u(v, true)) - apply_u(apply_p(v), true); },
                       n)
      .value;
}

double free_commutator_defect(const Domain& domain, const Grid& grid, double t, PhysicalUnits units) {
  if (t == 0.0) return 0.0;
  const SpectralPropagatorPlan plan(grid, std::abs(t), units);
  const auto chi = characteristic_mask(domain, plan.grid());
  const auto n = static_cast<Eigen::Index>(plan.grid().size());
  auto apply_u = [&](VectorC v, double tau) {
    plan.apply({v.data(), static_cast<std::size_t>(n)}, tau);
    return v;
  };
  auto apply_p = [&](VectorC v) {
    for (Eigen::Index i = 0; i < n; ++i) v(i) *= chi[static_cast<std::size_t>(i)];
    return v;
  };
  return operator_norm([&](const VectorC& v) -> VectorC { return apply_u(apply_p(v), t) - apply_p(apply_u(v, t)); },
                       [&](const VectorC& v) -> VectorC { return apply_p(apply_u(v, -t)) - apply_u(apply_p(v), -t); },
                       n)
      .value;
}

CommutatorContrast commutator_contrast(const Annulus& annulus, const Grid& grid, const std::vector<double>& ts,
                                       PhysicalUnits units, PolarGridSpec spec) {
  CommutatorContrast c;
  const Domain domain(annulus);
  for (double t : ts) {
    c.t.push_back(t);
    c.angular.push_back(automorphism_case(annulus, t, units, spec));
    c.free.push_back(free_commutator_defect(domain, grid, t, units));
  }
  c.free_fit = fit_power_law(c.t, c.free, 1e-300);
  return c;
}

double star_step_defect(const Domain& domain, const Grid& grid, double tau, PhysicalUnits units) {
  if (tau == 0.0) return 0.0;
  const SpectralPropagatorPlan plan(grid, std::abs(tau), units);
  const OperatorMatrix P = mask_projector(characteristic_mask(domain, plan.grid()));
  const OperatorMatrix full = project(free_evolution_matrix(plan, tau), P);
  const OperatorMatrix half = project(free_evolution_matrix(plan, tau / 2), P);
  return norm2(full.values - star_product(half, half, P).values);
}

}  // namespace zeno
