#include "zeno/zeno_engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "zeno/errors.hpp"
#include "zeno/parallel.hpp"

namespace zeno {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double norm_of(std::span<const Complex> data, double cell) {
  double s = 0.0;
  for (const auto& z : data) s += std::norm(z);
  return std::sqrt(s * cell);
}

}  // namespace

ZenoStepper::ZenoStepper(Domain domain, SpectralPropagatorPlan plan)
    : domain_(std::move(domain)), plan_(std::move(plan)) {
  if (domain_.dim() != plan_.grid().dim())
    throw StructuralError("domain and propagator grid differ in dimension", "domain");
  // The domain has to sit inside the unpadded region, not only the padded box.
  (void)characteristic_mask(domain_, plan_.interior());
  chi_ = characteristic_mask(domain_, plan_.grid());
}

void ZenoStepper::project(std::span<Complex> data) const {
  if (data.size() != chi_.size()) throw StructuralError("field size does not match the plan grid", "state");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= chi_[i];
}

void ZenoStepper::step(std::span<Complex> data, double tau) const {
  project(data);
  plan_.apply(data, tau);
  project(data);
}

WaveFunction ZenoStepper::lift(const WaveFunction& psi) const {
  if (psi.grid() == plan_.grid()) return psi;
  return embed(psi, plan_.grid());
}

WaveFunction zeno_step(const WaveFunction& psi, double tau, const Domain& domain, PhysicalUnits units) {
  const ZenoStepper stepper(domain, SpectralPropagatorPlan(psi.grid(), std::abs(tau), units));
  return zeno_step(psi, tau, stepper);
}

WaveFunction zeno_step(const WaveFunction& psi, double tau, const ZenoStepper& stepper) {
  WaveFunction out = stepper.lift(psi);
  stepper.step(out.amplitudes(), tau);
  return out;
}

void ZenoRunConfig::validate() const {
  units.validate();
  if (!(t > 0.0) || !std::isfinite(t)) throw StructuralError("evolution time t must be positive and finite", "t");
  if (n_ladder.empty()) throw StructuralError("N ladder is empty", "n_ladder");
  for (int n : n_ladder)
    if (n < 1) throw StructuralError("N ladder entries must be >= 1", "n_ladder");
  if (!(initial.grid() == grid)) throw StructuralError("initial state is not sampled on the configured grid", "initial");
  if (domain.dim() != grid.dim()) throw StructuralError("domain and grid differ in dimension", "domain");
  if (!initial.all_finite()) throw StructuralError("initial state has non-finite samples", "initial");
  if (initial.norm() == 0.0) throw StructuralError("initial state is zero", "initial");
  if (reference && !((*reference)[0].field.grid() == grid))
    throw StructuralError("reference basis is not sampled on the configured grid", "reference");
}

ZenoRun zeno_evolve(const ZenoRunConfig& config, int N, const ZenoStepper* stepper) {
  if (N < 1) throw StructuralError("N must be >= 1", "N");
  const double tau = config.t / N;
  std::optional<ZenoStepper> own;
  if (!stepper) {
    own.emplace(config.domain, SpectralPropagatorPlan(config.grid, tau, config.units));
    stepper = &*own;
  }
  const auto& plan = stepper->plan();
  plan.check_guard(tau);
  ZenoRun run{stepper->lift(config.initial), {}, plan.grid().size(), plan.guard_margin(tau)};
  auto data = run.state.amplitudes();
  const double cell = plan.grid().cell_measure();
  stepper->project(data);
  run.step_norms.reserve(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k) {
    plan.apply(data, tau);
    stepper->project(data);
    const double nrm = norm_of(data, cell);
    if (!std::isfinite(nrm)) {
      std::ostringstream os;
      os << "state became non-finite at step " << k << " of " << N;
      throw NumericalError(os.str());
    }
    run.step_norms.push_back(nrm);
  }
  return run;
}

MatrixElementTable matrix_elements(const SpectralBasis& basis, const std::vector<double>& taus, const Domain& domain,
                                   PhysicalUnits units) {
  units.validate();
  if (basis.size() == 0) throw StructuralError("basis is empty", "basis");
  if (taus.empty()) throw StructuralError("no tau values given", "taus");
  double tau_max = 0.0;
  for (double tau : taus) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw StructuralError("tau values must be finite and >= 0", "taus");
    tau_max = std::max(tau_max, tau);
  }
  const MatrixC gram = basis.gram();
  const double dev = (gram - MatrixC::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-8) {
    std::ostringstream os;
    os << "basis is not orthonormal on its grid: Gram deviation " << dev << " > 1e-8";
    throw StructuralError(os.str(), "basis");
  }

  const Grid& grid = basis[0].field.grid();
  const ZenoStepper stepper(domain, SpectralPropagatorPlan(grid, std::max(tau_max, 1e-300), units));
  const Grid& pg = stepper.plan().grid();
  const auto n = static_cast<Eigen::Index>(basis.size());
  const auto rows = static_cast<Eigen::Index>(pg.size());
  MatrixC F(rows, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    WaveFunction f = stepper.lift(basis[static_cast<std::size_t>(j)].field);
    stepper.project(f.amplitudes());
    F.col(j) = Eigen::Map<const VectorC>(f.amplitudes().data(), rows);
  }
  const double cell = pg.cell_measure();

  MatrixElementTable table;
  table.taus = taus;
  table.units = units;
  for (const auto& e : basis.entries()) {
    table.labels.push_back(e.label);
    table.energies.push_back(e.energy);
  }
  for (double tau : taus) {
    MatrixC UF = F;
    if (tau > 0.0)
      for (Eigen::Index j = 0; j < n; ++j) {
        std::span<Complex> col(UF.col(j).data(), static_cast<std::size_t>(rows));
        stepper.plan().apply(col, tau);
        stepper.project(col);
      }
    MatrixC G = (F.adjoint() * UF) * cell;
    MatrixC R = G;
    for (Eigen::Index j = 0; j < n; ++j)
      R(j, j) -= Complex(1.0, -table.energies[static_cast<std::size_t>(j)] * tau / units.hbar);
    table.G.push_back(std::move(G));
    table.R.push_back(std::move(R));
  }
  return table;
}

PowerFit short_time_fit(const MatrixElementTable& table, std::size_t m, std::size_t n, double floor) {
  if (m >= table.labels.size() || n >= table.labels.size())
    throw StructuralError("matrix element index out of range", "index");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < table.taus.size(); ++k) {
    if (table.taus[k] <= 0.0) continue;
    const auto a = static_cast<Eigen::Index>(m), b = static_cast<Eigen::Index>(n);
    x.push_back(table.taus[k]);
    y.push_back(m == n ? std::abs(table.R[k](a, b)) : std::abs(table.G[k](a, b)));
  }
  return fit_power_law(x, y, floor);
}

double leakage(const WaveFunction& psi, double tau, const Domain& domain, PhysicalUnits units) {
  const ZenoStepper stepper(domain, SpectralPropagatorPlan(psi.grid(), std::abs(tau), units));
  return leakage(psi, tau, stepper);
}

double leakage(const WaveFunction& psi, double tau, const ZenoStepper& stepper) {
  WaveFunction f = stepper.lift(psi);
  auto data = f.amplitudes();
  const auto& chi = stepper.projector();
  const double cell = f.grid().cell_measure();
  double outside = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (chi[i] == 0.0) outside += std::norm(data[i]);
  const double total = norm_of(data, cell);
  if (std::sqrt(outside * cell) > 1e-12 * total)
    throw StructuralError("state is not supported in the domain; project it first", "state");
  stepper.plan().apply(data, tau);
  double q = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (chi[i] == 0.0) q += std::norm(data[i]);
  return std::sqrt(q * cell);
}

double leakage_operator_norm(const ZenoStepper& stepper, double tau) {
  const Grid& g = stepper.plan().grid();
  if (g.size() > kKernelMaxPoints) {
    std::ostringstream os;
    os << "operator assembly needs a grid of at most " << kKernelMaxPoints << " nodes, got " << g.size();
    throw StructuralError(os.str(), "grid");
  }
  const auto& chi = stepper.projector();
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < chi.size(); ++i)
    if (chi[i] != 0.0) inside.push_back(i);
  if (inside.empty()) return 0.0;
  // Unit vectors are orthonormal in the discrete l2 sense, which is the
  // quadrature L2 up to a common factor that cancels in the norm.
  MatrixC A = MatrixC::Zero(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(inside.size()));
  std::vector<Complex> col(g.size());
  for (std::size_t j = 0; j < inside.size(); ++j) {
    std::fill(col.begin(), col.end(), Complex{});
    col[inside[j]] = 1.0;
    stepper.plan().apply(col, tau);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (chi[i] == 0.0) A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return operator_norm(A).value;
}

bool ConvergenceReport::residual_strictly_decreasing() const {
  for (std::size_t i = 1; i < points.size(); ++i)
    if (!(points[i].residual < points[i - 1].residual)) return false;
  return true;
}

ConvergenceReport convergence_experiment(const ZenoRunConfig& config, int jobs) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  if (!config.reference) throw StructuralError("convergence experiment needs a reference spectrum", "reference");
  const SpectralBasis& basis = *config.reference;

  ConvergenceReport rep;
  rep.t = config.t;
  const double n0 = config.initial.norm();
  std::vector<Complex> c(basis.size());
  double captured = 0.0;
  for (std::size_t k = 0; k < basis.size(); ++k) {
    c[k] = inner_product(basis[k].field, config.initial);
    captured += std::norm(c[k]);
  }
  rep.projection_deficit = 1.0 - captured / (n0 * n0);
  if (rep.projection_deficit > 1e-3) {
    std::ostringstream os;
    os << "initial state is not resolved by the " << basis.size() << "-mode reference basis: deficit "
       << rep.projection_deficit << " > 1e-3";
    throw StructuralError(os.str(), "reference");
  }
  std::vector<std::size_t> tracked;
  for (std::size_t k = 0; k < basis.size(); ++k)
    if (std::abs(c[k]) > 1e-6 * n0) {
      tracked.push_back(k);
      rep.tracked_modes.push_back(basis[k].label);
      rep.initial_amplitudes.push_back(c[k]);
    }

  WaveFunction ref(config.grid);
  for (std::size_t k = 0; k < basis.size(); ++k) {
    const Complex phase = std::exp(Complex(0.0, -basis[k].energy * config.t / config.units.hbar));
    ref += (phase * c[k]) * basis[k].field;
  }

  std::vector<int> ladder = config.n_ladder;
  std::sort(ladder.begin(), ladder.end());
  ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
  rep.points.resize(ladder.size());
  std::vector<std::uint64_t> transforms(ladder.size(), 0);

  parallel_for(ladder.size(), jobs, [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    const int N = ladder[i];
    const ZenoStepper stepper(config.domain, SpectralPropagatorPlan(config.grid, config.t / N, config.units));
    const ZenoRun run = zeno_evolve(config, N, &stepper);
    const WaveFunction out = crop(run.state, config.grid);
    ConvergencePoint p;
    p.N = N;
    p.norm = run.step_norms.back();
    p.norm_loss = 1.0 - p.norm / n0;
    p.fidelity = std::abs(inner_product(ref, out));
    p.normalized_fidelity = p.norm > 0.0 ? p.fidelity / p.norm : 0.0;
    p.residual = distance(out, ref);
    p.phase = std::arg(inner_product(config.initial, out));
    for (std::size_t k = 1; k < run.step_norms.size(); ++k)
      if (run.step_norms[k] > run.step_norms[k - 1] * (1.0 + 1e-12)) p.monotone = false;
    p.guard_margin = run.guard_margin;
    p.padded_points = run.padded_points;
    for (std::size_t k : tracked) p.mode_amplitudes.push_back(inner_product(basis[k].field, out));
    p.seconds = seconds_since(t0);
    transforms[i] = stepper.plan().counters().transforms;
    rep.points[i] = std::move(p);
  });

  std::vector<double> ns, res, loss;
  for (const auto& p : rep.points) {
    ns.push_back(p.N);
    res.push_back(p.residual);
    loss.push_back(p.norm_loss);
  }
  rep.residual_fit = fit_power_law(ns, res);
  rep.norm_loss_fit = fit_power_law(ns, loss);
  for (auto t : transforms) rep.transforms += t;
  rep.wall_seconds = seconds_since(start);
  return rep;
}

}  // namespace zeno
