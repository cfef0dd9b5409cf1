#include "zeno_harness/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "zeno/domain.hpp"
#include "zeno/errors.hpp"
#include "zeno/fit.hpp"
#include "zeno/reduction.hpp"
#include "zeno/spectra.hpp"
#include "zeno/star_algebra.hpp"
#include "zeno/zeno_engine.hpp"

namespace zeno::harness {

namespace {

using Clock = std::chrono::steady_clock;

Json fit_json(const PowerFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}, {"used", f.used}, {"accepted", f.accepted}};
}

Json quad_json(const QuadraticFit& f) {
  return {{"c0", f.c0}, {"c1", f.c1}, {"c2", f.c2}, {"rms_residual", f.rms_residual}, {"max_residual", f.max_residual}};
}

PhysicalUnits make_units(const Json& u) {
  PhysicalUnits units{u["hbar"].get<double>(), u["mass"].get<double>()};
  units.validate();
  return units;
}

Domain make_domain(const Json& d) {
  const std::string type = d["type"].get<std::string>();
  if (type == "interval") return Domain(Interval{d["x0"].get<double>(), d["x1"].get<double>()});
  if (type == "rectangle") return Domain(Rectangle{d["a"].get<double>(), d["b"].get<double>()});
  if (type == "annulus") return Domain(Annulus{d["r1"].get<double>(), d["r2"].get<double>()});
  if (type == "shell") return Domain(Shell{d["r1"].get<double>(), d["r2"].get<double>()});
  std::vector<double> origin = d.value("origin", std::vector<double>{0.0, 0.0});
  if (origin.size() != 2) throw ConfigError("mask origin needs two coordinates", "/domain/origin");
  return Domain(load_pgm(d["pgm"].get<std::string>(), origin[0], origin[1], d["spacing"].get<double>()));
}

Grid make_grid(const Json& raw, const Domain& domain) {
  const int dim = domain.dim();
  const Json g = raw.value("grid", Json::object());
  if (domain.kind() == DomainKind::mask && g.empty()) return domain.as<Mask>().grid;
  const auto [lo, hi] = domain.bounding_box();
  const std::size_t def_points = dim == 1 ? 1024 : dim == 2 ? 256 : 64;
  auto axis_values = [&](const char* key, auto fallback) {
    using V = decltype(fallback(0));
    std::vector<V> out;
    if (!g.contains(key)) {
      for (int a = 0; a < dim; ++a) out.push_back(fallback(a));
      return out;
    }
    const Json& v = g[key];
    if (!v.is_array()) {
      out.assign(static_cast<std::size_t>(dim), v.get<V>());
      return out;
    }
    if (static_cast<int>(v.size()) != dim)
      throw ConfigError(std::string(key) + " needs one entry per axis", std::string("/grid/") + key);
    for (const auto& e : v) out.push_back(e.get<V>());
    return out;
  };
  const auto points = axis_values("points", [&](int) { return static_cast<long>(def_points); });
  const auto origin = axis_values("origin", [&](int a) { return lo[static_cast<std::size_t>(a)]; });
  const auto extent = axis_values("extent", [&](int a) {
    return hi[static_cast<std::size_t>(a)] - lo[static_cast<std::size_t>(a)];
  });
  std::vector<Axis> axes;
  for (int a = 0; a < dim; ++a) {
    const auto i = static_cast<std::size_t>(a);
    if (points[i] < static_cast<long>(Grid::kMinPoints)) throw ConfigError("grid needs at least 8 points per axis", "/grid/points");
    axes.push_back(Axis{origin[i], extent[i], static_cast<std::size_t>(points[i])});
  }
  return Grid(axes);
}

int param_int(const Json& p, const char* key, int fallback, int min_value) {
  const int v = p.contains(key) ? static_cast<int>(p[key].get<double>()) : fallback;
  if (v < min_value)
    throw ConfigError(std::string(key) + " must be >= " + std::to_string(min_value), std::string("/params/") + key);
  return v;
}

void require_grid_domain(const Domain& d) {
  if (d.kind() == DomainKind::shell)
    throw ConfigError("grid-based experiments support interval, rectangle, annulus and mask domains; shells are "
                      "covered by the spectrum and reduce commands",
                      "/domain/type");
}

SpectralBasis make_basis(const Domain& domain, const Grid& grid, const Json& p, PhysicalUnits u) {
  require_grid_domain(domain);
  switch (domain.kind()) {
    case DomainKind::interval: {
      const auto& s = domain.as<Interval>();
      return interval_modes(s.x0, s.x1, param_int(p, "nmax", 8, 1), grid, u);
    }
    case DomainKind::rectangle: {
      const auto& s = domain.as<Rectangle>();
      return rectangle_modes(s.a, s.b, param_int(p, "nmax", 6, 1), param_int(p, "mmax", 6, 1), grid, u);
    }
    case DomainKind::annulus: {
      const auto& s = domain.as<Annulus>();
      return annulus_modes(s.r1, s.r2, param_int(p, "lmax", 4, 0), param_int(p, "nmax", 4, 1), grid, u);
    }
    default:
      return fd_dirichlet_eigs(domain, grid, static_cast<std::size_t>(param_int(p, "count", 16, 1)), u);
  }
}

QuantumNumberLabel make_label(const Domain& domain, const Json& v, const std::string& pointer) {
  std::vector<int> q;
  for (const auto& e : v) q.push_back(static_cast<int>(e.get<double>()));
  auto need = [&](std::size_t n, const char* shape) {
    if (q.size() != n) throw ConfigError(std::string("label must be ") + shape, pointer);
  };
  switch (domain.kind()) {
    case DomainKind::interval: need(1, "[n]"); return QuantumNumberLabel::interval(q[0]);
    case DomainKind::rectangle: need(2, "[n, m]"); return QuantumNumberLabel::rectangle(q[0], q[1]);
    case DomainKind::annulus: need(2, "[n, l]"); return QuantumNumberLabel::annulus(q[0], q[1]);
    default: need(1, "[k]"); return QuantumNumberLabel::mask(q[0]);
  }
}

std::size_t find_label(const SpectralBasis& basis, const QuantumNumberLabel& label, const std::string& pointer) {
  const auto idx = basis.find(label);
  if (!idx) throw ConfigError("label " + label.str() + " is not in the reference basis", pointer);
  return *idx;
}

SpectralBasis orthonormal(const SpectralBasis& basis, Json& flags) {
  const MatrixC G = basis.gram();
  const double dev = (G - MatrixC::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
  flags["gram_deviation"] = dev;
  flags["orthonormalized"] = dev > 1e-8;
  return dev > 1e-8 ? lowdin_orthonormalize(basis) : basis;
}

// ---- spectrum ---------------------------------------------------------------

RunResult run_spectrum(const ExperimentConfig& cfg) {
  const Json& raw = cfg.raw;
  const Json& p = raw["params"];
  const auto u = make_units(raw["units"]);
  const Domain domain = make_domain(raw["domain"]);
  RunResult r;
  const std::string source = p["source"].get<std::string>();
  r.payload["source"] = source;
  r.payload["domain"] = to_string(domain.kind());

  if (source == "fd") {
    require_grid_domain(domain);
    const Grid grid = make_grid(raw, domain);
    FdDiagnostics diag;
    const auto basis = fd_dirichlet_eigs(domain, grid, static_cast<std::size_t>(param_int(p, "count", 10, 1)), u, {}, &diag);
    CsvTable t("spectrum", {"k", "energy"});
    for (std::size_t k = 0; k < basis.size(); ++k) t.add({k + 1, basis[k].energy});
    r.tables.push_back(std::move(t));
    r.payload["unknowns"] = diag.unknowns;
    r.payload["dense"] = diag.dense;
    r.payload["lanczos_steps"] = diag.lanczos_steps;
    r.payload["max_residual"] = diag.max_residual;
    r.payload["gram_deviation"] = basis.normalization().gram_deviation;
    return r;
  }
  if (source != "analytic") throw ConfigError("source must be analytic or fd", "/params/source");

  switch (domain.kind()) {
    case DomainKind::interval: {
      const auto& s = domain.as<Interval>();
      CsvTable t("spectrum", {"n", "energy"});
      for (int n = 1; n <= param_int(p, "nmax", 10, 1); ++n) t.add({n, interval_energy(s.x1 - s.x0, n, u)});
      r.tables.push_back(std::move(t));
      break;
    }
    case DomainKind::rectangle: {
      const auto& s = domain.as<Rectangle>();
      struct Row { double e; int n, m; };
      std::vector<Row> rows;
      for (int n = 1; n <= param_int(p, "nmax", 6, 1); ++n)
        for (int m = 1; m <= param_int(p, "mmax", 6, 1); ++m) rows.push_back({rectangle_energy(s.a, s.b, n, m, u), n, m});
      std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.e, a.n, a.m) < std::tie(b.e, b.n, b.m);
      });
      CsvTable t("spectrum", {"n", "m", "energy"});
      for (const auto& row : rows) t.add({row.n, row.m, row.e});
      r.tables.push_back(std::move(t));
      break;
    }
    case DomainKind::annulus:
    case DomainKind::shell: {
      const bool shell = domain.kind() == DomainKind::shell;
      const double r1 = shell ? domain.as<Shell>().r1 : domain.as<Annulus>().r1;
      const double r2 = shell ? domain.as<Shell>().r2 : domain.as<Annulus>().r2;
      if (!(r1 > 0.0)) throw ConfigError("analytic radial spectra need r1 > 0", "/domain/r1");
      const int lmax = param_int(p, "lmax", 3, 0), nmax = param_int(p, "nmax", 5, 1);
      struct Row { double e; int l, n; double k; };
      std::vector<Row> rows;
      for (int l = 0; l <= lmax; ++l) {
        const auto ks = shell ? shell_wavenumbers(l, r1, r2, nmax) : annulus_wavenumbers(l, r1, r2, nmax);
        for (int n = 1; n <= nmax; ++n) {
          const double k = ks[static_cast<std::size_t>(n - 1)];
          rows.push_back({u.kinetic_prefactor() * k * k, l, n, k});
        }
      }
      std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.e, a.l, a.n) < std::tie(b.e, b.l, b.n);
      });
      if (shell) {
        CsvTable t("spectrum", {"n", "l", "m", "k", "energy"});
        for (const auto& row : rows)
          for (int m = -row.l; m <= row.l; ++m) t.add({row.n, row.l, m, row.k, row.e});
        r.tables.push_back(std::move(t));
      } else {
        CsvTable t("spectrum", {"l", "n", "k", "energy"});
        for (const auto& row : rows) t.add({row.l, row.n, row.k, row.e});
        r.tables.push_back(std::move(t));
      }
      break;
    }
    case DomainKind::mask: throw ConfigError("mask domains have no analytic spectrum; use source fd", "/params/source");
  }
  return r;
}

// ---- zeno-run ---------------------------------------------------------------

RunResult run_zeno(const ExperimentConfig& cfg) {
  const Json& raw = cfg.raw;
  const Json& p = raw["params"];
  const auto u = make_units(raw["units"]);
  const Domain domain = make_domain(raw["domain"]);
  require_grid_domain(domain);
  const Grid grid = make_grid(raw, domain);
  SpectralBasis basis = make_basis(domain, grid, p, u);
  const std::size_t i0 = p.contains("initial") ? find_label(basis, make_label(domain, p["initial"], "/params/initial"),
                                                            "/params/initial")
                                               : 0;
  const auto ladder = parse_int_ladder(p["n_ladder"], "/params/n_ladder");
  const WaveFunction psi0 = basis[i0].field;
  ZenoRunConfig zc{domain, u, p["t"].get<double>(), ladder, grid, psi0, std::move(basis)};
  const auto rep = convergence_experiment(zc, cfg.jobs);

  RunResult r;
  CsvTable conv("convergence", {"N", "fidelity", "normalized_fidelity", "residual", "phase", "norm", "norm_loss",
                                "monotone", "guard_margin", "padded_points"});
  CsvTable modes("modes", {"N", "label", "re", "im", "abs"});
  Json points = Json::array();
  bool monotone = true, guard_ok = true;
  for (const auto& pt : rep.points) {
    conv.add({pt.N, pt.fidelity, pt.normalized_fidelity, pt.residual, pt.phase, pt.norm, pt.norm_loss, pt.monotone,
              pt.guard_margin, pt.padded_points});
    for (std::size_t k = 0; k < rep.tracked_modes.size(); ++k) {
      const Complex a = pt.mode_amplitudes[k];
      modes.add({pt.N, rep.tracked_modes[k].str(), a.real(), a.imag(), std::abs(a)});
    }
    points.push_back({{"N", pt.N}, {"fidelity", pt.fidelity}, {"normalized_fidelity", pt.normalized_fidelity},
                      {"residual", pt.residual}, {"phase", pt.phase}, {"norm_loss", pt.norm_loss}});
    monotone = monotone && pt.monotone;
    guard_ok = guard_ok && pt.guard_margin >= SpectralPropagatorPlan::kGuardConstant;
  }
  r.tables.push_back(std::move(conv));
  r.tables.push_back(std::move(modes));
  r.payload["t"] = rep.t;
  r.payload["initial"] = zc.reference->operator[](i0).label.str();
  r.payload["projection_deficit"] = rep.projection_deficit;
  Json tracked = Json::array();
  for (const auto& l : rep.tracked_modes) tracked.push_back(l.str());
  r.payload["tracked_modes"] = tracked;
  r.payload["points"] = points;
  r.payload["residual_fit"] = fit_json(rep.residual_fit);
  r.payload["norm_loss_fit"] = fit_json(rep.norm_loss_fit);
  r.payload["residual_strictly_decreasing"] = rep.residual_strictly_decreasing();
  r.payload["transforms"] = rep.transforms;
  r.flags["step_norms_monotone"] = monotone;
  r.flags["guard_ok"] = guard_ok;
  return r;
}

// ---- short-time -------------------------------------------------------------

RunResult run_short_time(const ExperimentConfig& cfg) {
  const Json& raw = cfg.raw;
  const Json& p = raw["params"];
  const auto u = make_units(raw["units"]);
  const Domain domain = make_domain(raw["domain"]);
  require_grid_domain(domain);
  const Grid grid = make_grid(raw, domain);
  RunResult r;
  const SpectralBasis basis = orthonormal(make_basis(domain, grid, p, u), r.flags);
  const auto taus = parse_real_ladder(p["taus"], "/params/taus");
  for (double t : taus)
    if (!(t >= 0.0)) throw ConfigError("taus must be >= 0", "/params/taus");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (p.contains("pairs")) {
    for (std::size_t k = 0; k < p["pairs"].size(); ++k) {
      const std::string ptr = "/params/pairs/" + std::to_string(k);
      pairs.emplace_back(find_label(basis, make_label(domain, p["pairs"][k][0], ptr + "/0"), ptr + "/0"),
                         find_label(basis, make_label(domain, p["pairs"][k][1], ptr + "/1"), ptr + "/1"));
    }
  } else {
    for (std::size_t k = 0; k < basis.size(); ++k) pairs.emplace_back(k, k);
    for (std::size_t k = 1; k < basis.size(); ++k) pairs.emplace_back(k, 0);
  }

  const auto table = matrix_elements(basis, taus, domain, u);
  CsvTable el("elements", {"tau", "m", "n", "re", "im", "abs_g", "abs_r"});
  for (std::size_t k = 0; k < taus.size(); ++k)
    for (const auto& [m, n] : pairs) {
      const auto a = static_cast<Eigen::Index>(m), b = static_cast<Eigen::Index>(n);
      const Complex g = table.G[k](a, b);
      el.add({taus[k], basis[m].label.str(), basis[n].label.str(), g.real(), g.imag(), std::abs(g),
              std::abs(table.R[k](a, b))});
    }
  CsvTable fits("fits", {"m", "n", "quantity", "slope", "intercept", "r2", "used", "accepted"});
  Json jf = Json::array();
  for (const auto& [m, n] : pairs) {
    const auto f = short_time_fit(table, m, n);
    const char* q = m == n ? "abs_r" : "abs_g";
    fits.add({basis[m].label.str(), basis[n].label.str(), q, f.slope, f.intercept, f.r2, f.used, f.accepted});
    Json j = fit_json(f);
    j["m"] = basis[m].label.str();
    j["n"] = basis[n].label.str();
    j["quantity"] = q;
    jf.push_back(j);
  }
  r.tables.push_back(std::move(el));
  r.tables.push_back(std::move(fits));
  r.payload["fits"] = jf;
  return r;
}

// ---- leakage ----------------------------------------------------------------

RunResult run_leakage(const ExperimentConfig& cfg) {
  const Json& raw = cfg.raw;
  const Json& p = raw["params"];
  const auto u = make_units(raw["units"]);
  const Domain domain = make_domain(raw["domain"]);
  require_grid_domain(domain);
  const Grid grid = make_grid(raw, domain);
  const SpectralBasis basis = make_basis(domain, grid, p, u);
  const std::size_t i0 = p.contains("initial") ? find_label(basis, make_label(domain, p["initial"], "/params/initial"),
                                                            "/params/initial")
                                               : 0;
  const auto taus = parse_real_ladder(p["taus"], "/params/taus");
  double tmax = 0.0;
  for (double t : taus) tmax = std::max(tmax, std::abs(t));
  const ZenoStepper stepper(domain, SpectralPropagatorPlan(grid, tmax, u));
  WaveFunction psi = stepper.lift(basis[i0].field);
  stepper.project(psi.amplitudes());
  const bool want_norm = p["operator_norm"].get<bool>();
  if (want_norm && stepper.plan().grid().size() > kKernelMaxPoints)
    throw ConfigError("operator_norm needs a padded grid of at most " + std::to_string(kKernelMaxPoints) + " nodes",
                      "/params/operator_norm");

  RunResult r;
  CsvTable t("leakage", {"tau", "leakage", "operator_norm"});
  std::vector<double> x, y;
  for (double tau : taus) {
    const double l = leakage(psi, tau, stepper);
    const double on = want_norm ? leakage_operator_norm(stepper, tau) : std::nan("");
    t.add({tau, l, on});
    x.push_back(tau);
    y.push_back(l);
  }
  r.tables.push_back(std::move(t));
  r.payload["initial"] = basis[i0].label.str();
  r.payload["leakage_fit"] = fit_json(fit_power_law(x, y, 1e-14));
  return r;
}

// ---- reduce -----------------------------------------------------------------

RunResult run_reduce(const ExperimentConfig& cfg) {
  const Json& p = cfg.raw["params"];
  ReductionPlan plan;
  plan.units = make_units(cfg.raw["units"]);
  const std::string fam = p["family"].get<std::string>();
  auto ints = [&](const char* key) {
    std::vector<int> v;
    for (const auto& e : p[key]) v.push_back(static_cast<int>(e.get<double>()));
    return v;
  };
  if (fam == "rectangle-to-interval") {
    for (const char* key : {"R", "dr_ladder", "l_set"})
      if (p.contains(key)) throw ConfigError(std::string(key) + " does not apply to " + fam, std::string("/params/") + key);
    plan.family = RectangleToInterval{p["a"].get<double>(), p["b_ladder"].get<std::vector<double>>(),
                                      static_cast<int>(p["m"].get<double>()), static_cast<int>(p["n_max"].get<double>())};
  } else {
    for (const char* key : {"a", "b_ladder", "m", "n_max"})
      if (p.contains(key)) throw ConfigError(std::string(key) + " does not apply to " + fam, std::string("/params/") + key);
    if (fam == "annulus-to-circle")
      plan.family = AnnulusToCircle{p["R"].get<double>(), p["dr_ladder"].get<std::vector<double>>(), ints("l_set")};
    else
      plan.family = ShellToSphere{p["R"].get<double>(), p["dr_ladder"].get<std::vector<double>>(), ints("l_set")};
  }
  auto& z = plan.zeno;
  z.t = p.value("t", z.t);
  z.target_ratio = p.value("target_ratio", z.target_ratio);
  z.max_steps = p.contains("max_steps") ? static_cast<long>(p["max_steps"].get<double>()) : z.max_steps;
  if (p.contains("transverse_points")) {
    const double v = p["transverse_points"].get<double>();
    if (v < 8) throw ConfigError("transverse_points must be >= 8", "/params/transverse_points");
    z.transverse_points = static_cast<std::size_t>(v);
  }
  z.control_factor = p.value("control_factor", z.control_factor);
  z.run_transverse = p.value("run_transverse", z.run_transverse);
  z.negative_control = p.value("negative_control", z.negative_control);
  plan.energy_shift = p.value("energy_shift", 0.0);

  const auto res = reduce(plan, cfg.jobs);
  RunResult r;
  CsvTable ladder("ladder", {"family", "value", "t", "N", "guard_ratio", "transverse_energy", "label", "raw_energy",
                             "regularized"});
  CsvTable transverse("transverse", {"value", "N", "guard_ratio", "regularized_re", "regularized_im", "regularized_abs",
                                     "cross_sector", "cross_mode", "final_norm"});
  double worst_ratio = 0.0, worst_cross = 0.0;
  for (const auto& pt : res.points) {
    for (std::size_t j = 0; j < pt.labels.size(); ++j)
      ladder.add({res.family, pt.value, pt.t, pt.N, pt.guard_ratio, pt.transverse_energy, pt.labels[j],
                  pt.raw_energies[j], pt.regularized[j]});
    worst_ratio = std::max(worst_ratio, pt.guard_ratio);
    if (pt.transverse) {
      const auto& tr = *pt.transverse;
      transverse.add({pt.value, tr.N, tr.guard_ratio, tr.regularized_amplitude.real(), tr.regularized_amplitude.imag(),
                      std::abs(tr.regularized_amplitude), tr.cross_sector, tr.cross_sector_mode, tr.final_norm});
      worst_cross = std::max(worst_cross, tr.cross_sector);
    }
  }
  CsvTable limits("limits", {"label", "target", "c0", "c1", "c2", "rms_residual", "max_residual", "drop_coarsest_shift"});
  Json jl = Json::array();
  for (const auto& l : res.limits) {
    limits.add({l.label, l.target, l.fit.c0, l.fit.c1, l.fit.c2, l.fit.rms_residual, l.fit.max_residual,
                l.drop_coarsest_shift});
    Json j = quad_json(l.fit);
    j["label"] = l.label;
    j["target"] = l.target;
    jl.push_back(j);
  }
  r.tables.push_back(std::move(ladder));
  if (!transverse.rows().empty()) r.tables.push_back(std::move(transverse));
  r.tables.push_back(std::move(limits));
  if (!res.gaps.empty()) {
    CsvTable gaps("gaps", {"b", "m", "m_prime", "gap"});
    for (const auto& g : res.gaps) gaps.add({g.b, g.m, g.m_prime, g.gap});
    r.tables.push_back(std::move(gaps));
  }
  r.payload["family"] = res.family;
  r.payload["limits"] = jl;
  r.payload["fit_residual"] = res.fit_residual;
  if (fam != "rectangle-to-interval") {
    r.payload["offset"] = res.offset;
    r.payload["offset_expected"] = res.offset_expected;
    r.payload["offset_tolerance"] = res.offset_tolerance;
  }
  if (res.negative_control) {
    const auto& c = *res.negative_control;
    r.payload["negative_control"] = {{"b", res.control_b},         {"N", c.N},
                                     {"guard_ratio", c.guard_ratio}, {"final_norm", c.final_norm},
                                     {"cross_sector", c.cross_sector}};
  }
  r.flags["max_guard_ratio"] = worst_ratio;
  r.flags["guard_ok"] = worst_ratio <= kLimitOrderRatio;
  r.flags["max_cross_sector"] = worst_cross;
  r.flags["flagged"] = res.flagged;
  return r;
}

// ---- algebra-check ----------------------------------------------------------

RunResult run_algebra(const ExperimentConfig& cfg) {
  const Json& p = cfg.raw["params"];
  const auto u = make_units(cfg.raw["units"]);
  RunResult r;

  const int trials = param_int(p, "trials", 100, 1);
  const int dim = param_int(p, "dim", 64, 2);
  const int rank = param_int(p, "rank", 32, 1);
  if (rank > dim) throw ConfigError("rank must not exceed dim", "/params/rank");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_matrix = [&] {
    MatrixC m(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
      for (Eigen::Index i = 0; i < dim; ++i) m(i, j) = {unif(rng), unif(rng)};
    return OperatorMatrix(m);
  };
  CsvTable rnd("random", {"trial", "associativity_abs", "associativity_rel", "star_defect", "star_rel", "plain_rel"});
  double worst_assoc = 0.0, worst_star = 0.0;
  for (int k = 0; k < trials; ++k) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(dim));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(rank));
    std::sort(idx.begin(), idx.end());
    const auto P = coordinate_projector(dim, idx);
    const auto A = random_matrix(), B = random_matrix(), C = random_matrix();
    const MatrixC lhs = star_product(star_product(A, B, P), C, P).values;
    const MatrixC rhs = star_product(A, star_product(B, C, P), P).values;
    const double assoc = (lhs - rhs).cwiseAbs().maxCoeff();
    const double assoc_rel = assoc / std::max(lhs.cwiseAbs().maxCoeff(), 1e-300);
    const auto h = homomorphism_check(A, B, P);
    const double scale = operator_norm(project(A, P).values).value * operator_norm(project(B, P).values).value;
    const double star_rel = h.defect_star / std::max(scale, 1e-300);
    rnd.add({k, assoc, assoc_rel, h.defect_star, star_rel, h.defect_plain / std::max(scale, 1e-300)});
    worst_assoc = std::max(worst_assoc, assoc_rel);
    worst_star = std::max(worst_star, star_rel);
  }
  r.tables.push_back(std::move(rnd));
  r.payload["associativity_max_rel"] = worst_assoc;
  r.payload["star_homomorphism_max_rel"] = worst_star;

  // Documented non-homomorphic pairs.
  CsvTable pairs("pairs", {"pair", "projector", "defect_plain", "defect_star", "reference", "relative_plain"});
  const int xp_points = param_int(p, "xp_points", 64, 8);
  const Grid g1({Axis{0.0, 1.0, static_cast<std::size_t>(xp_points)}});
  const auto fd = fd_dirichlet_eigs(Domain(Interval{0.0, 1.0}), g1,
                                    static_cast<std::size_t>(param_int(p, "xp_rank", 8, 1)), u);
  const auto Pspec = basis_projector(fd, fd.size());
  const auto hxp = homomorphism_check(position_operator(g1), momentum_operator(g1, u), Pspec);
  pairs.add({"x,p", "spectral-rank-" + std::to_string(fd.size()), hxp.defect_plain, hxp.defect_star, hxp.reference,
             hxp.defect_plain / hxp.reference});
  const Grid g2({Axis{-0.5, 2.0, static_cast<std::size_t>(xp_points)}});
  const auto Pmask = mask_projector(characteristic_mask(Domain(Interval{0.0, 1.0}), g2));
  const auto hpp = homomorphism_check(momentum_operator(g2, u), momentum_operator(g2, u), Pmask);
  pairs.add({"p,p", "interval-mask", hpp.defect_plain, hpp.defect_star, hpp.reference, hpp.defect_plain / hpp.reference});
  const auto hxm = homomorphism_check(position_operator(g2), momentum_operator(g2, u), Pmask);
  pairs.add({"x,p", "interval-mask", hxm.defect_plain, hxm.defect_star, hxm.reference,
             hxm.reference > 0 ? hxm.defect_plain / hxm.reference : 0.0});
  r.tables.push_back(std::move(pairs));
  r.payload["xp_relative_plain_defect"] = hxp.defect_plain / hxp.reference;

  // Commuting angular evolution against the full free evolution.
  const Annulus an{p["annulus_r1"].get<double>(), p["annulus_r2"].get<double>()};
  (void)Domain(an);
  const auto ts = parse_real_ladder(p["t_ladder"], "/params/t_ladder");
  PolarGridSpec spec;
  spec.rings = static_cast<std::size_t>(param_int(p, "polar_rings", 64, 2));
  spec.angles = static_cast<std::size_t>(param_int(p, "polar_angles", 128, 2));
  const int fp = param_int(p, "free_points", 48, 8);
  const auto contrast =
      commutator_contrast(an, Grid::cube(2, -1.25 * an.r2, 2.5 * an.r2, static_cast<std::size_t>(fp)), ts, u, spec);
  CsvTable comm("commutator", {"t", "angular", "free"});
  double worst_ang = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    comm.add({contrast.t[k], contrast.angular[k], contrast.free[k]});
    worst_ang = std::max(worst_ang, contrast.angular[k]);
  }
  r.tables.push_back(std::move(comm));
  r.payload["angular_commutator_max"] = worst_ang;
  r.payload["free_commutator_fit"] = fit_json(contrast.free_fit);

  // Smoothed projector law on a fine 1D grid.
  const auto ladder = parse_int_ladder(p["projector_ladder"], "/params/projector_ladder");
  const double w0 = p["w0"].get<double>();
  const std::string prof = p["profile"].get<std::string>();
  if (prof != "linear" && prof != "raised-cosine") throw ConfigError("profile must be linear or raised-cosine", "/params/profile");
  const auto profile = prof == "linear" ? RampProfile::linear : RampProfile::raised_cosine;
  const int lo = *std::min_element(ladder.begin(), ladder.end());
  const double reach = w0 / (static_cast<double>(lo) * lo) + 0.05;
  const Grid fine({Axis{-reach, 1.0 + 2 * reach, static_cast<std::size_t>(param_int(p, "projector_points", 400000, 8))}});
  const auto psi = WaveFunction::sample(fine, [](const Point& x) { return Complex(std::exp(-(x[0] - 0.4) * (x[0] - 0.4) / 0.1), 0.0); });
  const auto law = projector_law(Domain(Interval{0.0, 1.0}), psi, ladder, profile, w0);
  CsvTable proj("projector", {"N", "error", "saturated"});
  for (std::size_t k = 0; k < law.n.size(); ++k) proj.add({law.n[k], law.error[k], static_cast<bool>(law.saturated[k])});
  r.tables.push_back(std::move(proj));
  r.payload["projector_exponent"] = -law.fit.slope;
  r.payload["projector_fit"] = fit_json(law.fit);

  // Star-product step defect.
  const auto st = parse_real_ladder(p["step_taus"], "/params/step_taus");
  CsvTable step("step", {"tau", "defect"});
  std::vector<double> sx, sy;
  for (double tau : st) {
    const double d = star_step_defect(Domain(Interval{0.0, 1.0}), g2, tau, u);
    step.add({tau, d});
    sx.push_back(tau);
    sy.push_back(d);
  }
  r.tables.push_back(std::move(step));
  r.payload["step_defect_fit"] = fit_json(fit_power_law(sx, sy, 1e-300));

  r.flags["associativity_ok"] = worst_assoc <= 1e-12;
  r.flags["star_homomorphism_ok"] = worst_star <= 1e-12;
  r.flags["angular_commutes"] = worst_ang <= 1e-10;
  return r;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  const auto start = Clock::now();
  RunResult r;
  switch (config.kind) {
    case ExperimentKind::spectrum: r = run_spectrum(config); break;
    case ExperimentKind::zeno_run: r = run_zeno(config); break;
    case ExperimentKind::short_time: r = run_short_time(config); break;
    case ExperimentKind::leakage: r = run_leakage(config); break;
    case ExperimentKind::reduce: r = run_reduce(config); break;
    case ExperimentKind::algebra_check: r = run_algebra(config); break;
  }
  r.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

std::vector<std::filesystem::path> write_run(const ExperimentConfig& config, const RunResult& result) {
  const std::string stem = to_string(config.kind) + "-" + config.hash;
  std::vector<std::filesystem::path> files;
  Json tables = Json::object();
  for (const auto& t : result.tables) {
    const auto csv = config.output / (stem + "-" + t.name() + ".csv");
    atomic_write(csv, t.csv(config.hash));
    files.push_back(csv);
    tables[t.name()] = csv.filename().string();
    if (config.dat) {
      const auto dat = config.output / (stem + "-" + t.name() + ".dat");
      atomic_write(dat, t.dat(config.hash));
      files.push_back(dat);
    }
  }
  Json env;
  env["artifact"] = kArtifactName;
  env["version"] = kArtifactVersion;
  env["schema"] = kSchemaVersion;
  env["kind"] = to_string(config.kind);
  env["config_hash"] = config.hash;
  env["config"] = config.raw;
  env["wall_seconds"] = result.wall_seconds;
  env["flags"] = result.flags;
  env["payload"] = result.payload;
  env["tables"] = tables;
  const auto json_path = config.output / (stem + ".json");
  atomic_write(json_path, env.dump(2) + "\n");
  files.insert(files.begin(), json_path);
  return files;
}

std::pair<int, Json> describe_current_exception() {
  auto make = [](int code, const char* kind, const std::string& msg, const std::string& pointer) {
    Json e{{"code", code}, {"kind", kind}, {"message", msg}};
    if (!pointer.empty()) e["pointer"] = pointer;
    return std::pair<int, Json>{code, Json{{"error", e}}};
  };
  try {
    throw;
  } catch (const ConfigError& e) {
    return make(kExitValidation, "validation", e.what(), e.pointer());
  } catch (const StructuralError& e) {
    return make(kExitValidation, "validation", e.what(), field_pointer(e.field()));
  } catch (const GuardViolation& e) {
    return make(kExitGuard, "guard", e.what(), "");
  } catch (const NumericalError& e) {
    return make(kExitNumerical, "numerical", e.what(), "");
  } catch (const Json::exception& e) {
    return make(kExitValidation, "validation", e.what(), "");
  } catch (const std::exception& e) {
    return make(kExitFailure, "failure", e.what(), "");
  }
}

}  // namespace zeno::harness
