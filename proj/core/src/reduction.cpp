#include "zeno/reduction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "zeno/domain.hpp"
#include "zeno/errors.hpp"
#include "zeno/parallel.hpp"
#include "zeno/spectra.hpp"
#include "zeno/zeno_engine.hpp"

namespace zeno {

namespace {

using std::numbers::pi;

void check_ladder(const std::vector<double>& ladder, const char* field) {
  if (ladder.size() < 3) throw StructuralError("ladder needs at least 3 points for the extrapolation", field);
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || !std::isfinite(ladder[i]))
      throw StructuralError("ladder values must be positive and finite", field);
    if (i > 0 && !(ladder[i] < ladder[i - 1])) throw StructuralError("ladder must be strictly decreasing", field);
  }
}

void check_labels(const std::vector<int>& l_set) {
  if (l_set.empty()) throw StructuralError("l set is empty", "l_set");
  for (int l : l_set)
    if (l < 0) throw StructuralError("l values must be >= 0", "l_set");
}

// Radial n = 1 divergence hbar^2 pi^2 / 2 M dr^2.
double radial_divergence(double dr, PhysicalUnits u) { return u.kinetic_prefactor() * pi * pi / (dr * dr); }

ExtrapolatedLimit extrapolate(int label, double target, const std::vector<double>& x, const std::vector<double>& y) {
  ExtrapolatedLimit lim;
  lim.label = label;
  lim.target = target;
  lim.fit = fit_quadratic(x, y);
  lim.drop_coarsest_shift = std::numeric_limits<double>::quiet_NaN();
  if (x.size() >= 4) {
    const std::vector<double> xs(x.begin() + 1, x.end()), ys(y.begin() + 1, y.end());
    lim.drop_coarsest_shift = std::abs(fit_quadratic(xs, ys).c0 - lim.fit.c0);
  }
  return lim;
}

// Shared ladder logic for the annulus and shell families.
ReductionResult reduce_radial(const ReductionPlan& plan, double R, const std::vector<double>& ladder,
                              const std::vector<int>& l_set, bool sphere, int jobs) {
  const auto& u = plan.units;
  ReductionResult res;
  res.family = plan.family_name();
  res.units = u;
  res.points.resize(ladder.size());
  parallel_for(ladder.size(), jobs, [&](std::size_t i) {
    const double dr = ladder[i];
    const double r1 = R - dr / 2, r2 = R + dr / 2;
    LadderPoint p;
    p.value = dr;
    p.t = plan.zeno.t;
    p.transverse_energy = radial_divergence(dr, u);
    std::ostringstream where;
    where << "dr = " << dr;
    p.N = limit_order_steps(p.t, p.transverse_energy, plan.zeno, u, where.str());
    p.guard_ratio = p.t / static_cast<double>(p.N) * p.transverse_energy / u.hbar;
    for (int l : l_set) {
      const double k = sphere ? shell_wavenumbers(l, r1, r2, 1).at(0) : annulus_wavenumbers(l, r1, r2, 1).at(0);
      const double E = u.kinetic_prefactor() * k * k + plan.energy_shift;
      p.labels.push_back(l);
      p.raw_energies.push_back(E);
      p.regularized.push_back(E - p.transverse_energy);
    }
    res.points[i] = std::move(p);
  });

  const double unit = u.kinetic_prefactor() / (R * R);  // hbar^2 / 2 M R^2
  double offset_sum = 0.0;
  for (std::size_t j = 0; j < l_set.size(); ++j) {
    const int l = l_set[j];
    const double angular = sphere ? unit * l * (l + 1) : unit * l * l;
    std::vector<double> x, y;
    for (const auto& p : res.points) {
      x.push_back(p.value);
      y.push_back(p.regularized[j]);
    }
    const double expected_offset = sphere ? 0.0 : -unit / 4;
    auto lim = extrapolate(l, angular + expected_offset + plan.energy_shift, x, y);
    offset_sum += lim.fit.c0 - plan.energy_shift - angular;
    res.fit_residual = std::max(res.fit_residual, lim.fit.max_residual);
    res.limits.push_back(std::move(lim));
  }
  res.offset = offset_sum / static_cast<double>(l_set.size());
  res.offset_expected = sphere ? 0.0 : -unit / 4;
  res.offset_tolerance = 0.05 * unit / 4;
  res.flagged = std::abs(res.offset - res.offset_expected) > res.offset_tolerance;
  return res;
}

}  // namespace

std::string ReductionPlan::family_name() const {
  switch (family.index()) {
    case 0: return "rectangle-to-interval";
    case 1: return "annulus-to-circle";
    default: return "shell-to-sphere";
  }
}

void ReductionPlan::validate() const {
  units.validate();
  if (!(zeno.t > 0.0) || !std::isfinite(zeno.t)) throw StructuralError("t must be positive and finite", "t");
  if (!(zeno.target_ratio > 0.0) || zeno.target_ratio > kLimitOrderRatio)
    throw StructuralError("target ratio must lie in (0, 0.02]", "target_ratio");
  if (zeno.max_steps < 1) throw StructuralError("step budget must be >= 1", "max_steps");
  if (zeno.transverse_points < Grid::kMinPoints) throw StructuralError("too few transverse points", "transverse_points");
  if (!(zeno.control_factor > 0.0 && zeno.control_factor < 1.0))
    throw StructuralError("control factor must lie in (0, 1)", "control_factor");
  if (!std::isfinite(energy_shift)) throw StructuralError("energy shift must be finite", "energy_shift");
  if (const auto* r = std::get_if<RectangleToInterval>(&family)) {
    if (!(r->a > 0.0)) throw StructuralError("a must be positive", "a");
    check_ladder(r->b_ladder, "b_ladder");
    if (r->m < 1) throw StructuralError("transverse mode m must be >= 1", "m");
    if (r->n_max < 1) throw StructuralError("n_max must be >= 1", "n_max");
  } else if (const auto* c = std::get_if<AnnulusToCircle>(&family)) {
    check_ladder(c->dr_ladder, "dr_ladder");
    check_labels(c->l_set);
    if (!(c->dr_ladder.front() < 2 * c->R)) throw StructuralError("dr must stay below 2R so that r1 > 0", "dr_ladder");
  } else {
    const auto& s = std::get<ShellToSphere>(family);
    check_ladder(s.dr_ladder, "dr_ladder");
    check_labels(s.l_set);
    if (!(s.dr_ladder.front() < 2 * s.R)) throw StructuralError("dr must stay below 2R so that r1 > 0", "dr_ladder");
  }
}

double superselection_gap(double b, int m, int m_prime, PhysicalUnits units) {
  units.validate();
  if (!(b > 0.0)) throw StructuralError("b must be positive", "b");
  if (m < 1 || m_prime < 1 || m == m_prime) throw StructuralError("need distinct transverse modes >= 1", "m");
  const double mm = static_cast<double>(m_prime) * m_prime - static_cast<double>(m) * m;
  return units.kinetic_prefactor() * pi * pi * mm / (b * b);
}

long limit_order_steps(double t, double transverse_energy, const ZenoSettings& s, PhysicalUnits units,
                       const std::string& where) {
  const double phase = t * transverse_energy / units.hbar;
  const double wanted = std::ceil(phase / s.target_ratio);
  const double needed = std::ceil(phase / kLimitOrderRatio);
  if (needed > static_cast<double>(s.max_steps)) {
    std::ostringstream os;
    os << "limit-order guard at " << where << ": dt * E_transverse / hbar <= " << kLimitOrderRatio << " needs N >= "
       << static_cast<long>(needed) << " but the step budget is " << s.max_steps;
    throw GuardViolation(os.str());
  }
  return std::max(1L, static_cast<long>(std::min(wanted, static_cast<double>(s.max_steps))));
}

TransverseRun transverse_zeno_run(double b, int m, double t, long N, std::size_t points, PhysicalUnits units) {
  const auto start = std::chrono::steady_clock::now();
  if (N < 1) throw StructuralError("N must be >= 1", "N");
  const Grid g({Axis{0.0, b, points}});
  const SpectralBasis modes = interval_modes(0.0, b, m + 4, g, units);
  const double tau = t / static_cast<double>(N);
  const ZenoStepper stepper(Domain(Interval{0.0, b}), SpectralPropagatorPlan(g, tau, units));
  const auto& plan = stepper.plan();
  plan.check_guard(tau);

  const std::size_t im = static_cast<std::size_t>(m - 1);
  WaveFunction psi = stepper.lift(modes[im].field);
  auto data = psi.amplitudes();
  stepper.project(data);
  for (long k = 0; k < N; ++k) {
    plan.apply(data, tau);
    stepper.project(data);
  }
  if (!psi.all_finite()) throw NumericalError("transverse run produced non-finite values");
  const WaveFunction out = crop(psi, g);

  TransverseRun run;
  run.N = N;
  run.guard_ratio = tau * modes[im].energy / units.hbar;
  run.regularized_amplitude =
      std::exp(Complex(0.0, modes[im].energy * t / units.hbar)) * inner_product(modes[im].field, out);
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (k == im) continue;
    const double c = std::abs(inner_product(modes[k].field, out));
    if (c >= run.cross_sector) {
      run.cross_sector = c;
      run.cross_sector_mode = static_cast<int>(k) + 1;
    }
  }
  run.final_norm = psi.norm();
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

ReductionResult reduce_rectangle_to_interval(const ReductionPlan& plan, int jobs) {
  plan.validate();
  const auto& fam = std::get<RectangleToInterval>(plan.family);
  const auto& u = plan.units;
  const auto& z = plan.zeno;
  ReductionResult res;
  res.family = plan.family_name();
  res.units = u;
  res.points.resize(fam.b_ladder.size());

  // Fail on the guard before any expensive run starts.
  std::vector<long> steps;
  for (double b : fam.b_ladder) {
    const double Em = interval_energy(b, fam.m, u);
    std::ostringstream where;
    where << "b = " << b << ", m = " << fam.m;
    steps.push_back(limit_order_steps(z.t, Em, z, u, where.str()));
  }

  const std::size_t tasks = fam.b_ladder.size() + (z.run_transverse && z.negative_control ? 1 : 0);
  res.control_b = fam.b_ladder.back() * z.control_factor;
  std::optional<TransverseRun> control;
  parallel_for(tasks, jobs, [&](std::size_t i) {
    if (i == fam.b_ladder.size()) {
      control = transverse_zeno_run(res.control_b, fam.m, z.t, steps.back(), z.transverse_points, u);
      return;
    }
    const double b = fam.b_ladder[i];
    LadderPoint p;
    p.value = b;
    p.t = z.t;
    p.N = steps[i];
    p.transverse_energy = interval_energy(b, fam.m, u);
    p.guard_ratio = z.t / static_cast<double>(p.N) * p.transverse_energy / u.hbar;
    for (int n = 1; n <= fam.n_max; ++n) {
      const double E = rectangle_energy(fam.a, b, n, fam.m, u) + plan.energy_shift;
      p.labels.push_back(n);
      p.raw_energies.push_back(E);
      p.regularized.push_back(E - p.transverse_energy);
    }
    if (z.run_transverse) p.transverse = transverse_zeno_run(b, fam.m, z.t, p.N, z.transverse_points, u);
    res.points[i] = std::move(p);
  });
  res.negative_control = control;

  for (std::size_t j = 0; j < static_cast<std::size_t>(fam.n_max); ++j) {
    std::vector<double> x, y;
    for (const auto& p : res.points) {
      x.push_back(p.value);
      y.push_back(p.regularized[j]);
    }
    const int n = static_cast<int>(j) + 1;
    auto lim = extrapolate(n, interval_energy(fam.a, n, u) + plan.energy_shift, x, y);
    res.fit_residual = std::max(res.fit_residual, lim.fit.max_residual);
    res.limits.push_back(std::move(lim));
  }
  for (double b : fam.b_ladder)
    for (int mp : {fam.m + 1, fam.m + 2}) res.gaps.push_back({b, fam.m, mp, superselection_gap(b, fam.m, mp, u)});
  double worst = 0.0;
  for (const auto& lim : res.limits) worst = std::max(worst, std::abs(lim.fit.c0 - lim.target) / std::max(std::abs(lim.target), 1e-300));
  res.flagged = worst > 1e-6;
  return res;
}

ReductionResult reduce_annulus_to_circle(const ReductionPlan& plan, int jobs) {
  plan.validate();
  const auto& fam = std::get<AnnulusToCircle>(plan.family);
  return reduce_radial(plan, fam.R, fam.dr_ladder, fam.l_set, false, jobs);
}

ReductionResult reduce_shell_to_sphere(const ReductionPlan& plan, int jobs) {
  plan.validate();
  const auto& fam = std::get<ShellToSphere>(plan.family);
  return reduce_radial(plan, fam.R, fam.dr_ladder, fam.l_set, true, jobs);
}

ReductionResult reduce(const ReductionPlan& plan, int jobs) {
  switch (plan.family.index()) {
    case 0: return reduce_rectangle_to_interval(plan, jobs);
    case 1: return reduce_annulus_to_circle(plan, jobs);
    default: return reduce_shell_to_sphere(plan, jobs);
  }
}

}  // namespace zeno
