#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "zeno/fit.hpp"
#include "zeno/grid.hpp"
#include "zeno/units.hpp"

namespace zeno {

/// Largest allowed dt * E_transverse / hbar at any ladder point.
inline constexpr double kLimitOrderRatio = 0.02;

struct RectangleToInterval {
  double a = 1.0;
  std::vector<double> b_ladder;  // strictly decreasing
  int m = 1;                     // transverse mode
  int n_max = 3;                 // longitudinal modes reported
};

struct AnnulusToCircle {
  double R = 1.0;
  std::vector<double> dr_ladder;  // strictly decreasing
  std::vector<int> l_set{0, 1, 2, 3};
};

struct ShellToSphere {
  double R = 1.0;
  std::vector<double> dr_ladder;
  std::vector<int> l_set{0, 1, 2, 3};
};

struct ZenoSettings {
  double t = 5e-4;
  /// Preferred dt * E_transverse / hbar; N is raised toward it within the budget.
  double target_ratio = 1.2e-6;
  long max_steps = 2'000'000;
  std::size_t transverse_points = 4096;
  /// The negative control shrinks the thinnest b by this factor at fixed N.
  double control_factor = 0.05;
  bool run_transverse = true;
  bool negative_control = true;
};

struct ReductionPlan {
  std::variant<RectangleToInterval, AnnulusToCircle, ShellToSphere> family;
  PhysicalUnits units;
  ZenoSettings zeno;
  /// Constant added to every raw energy (gauge check).
  double energy_shift = 0.0;

  std::string family_name() const;
  void validate() const;
};

/// Transverse 1D Zeno run on [0, b] started in transverse mode m.
struct TransverseRun {
  long N = 0;
  double guard_ratio = 0.0;
  Complex regularized_amplitude;  // e^{i E_m t / hbar} <m|V_N(t)|m>
  double cross_sector = 0.0;      // max_{m' != m} |<m'|V_N(t)|m>|
  int cross_sector_mode = 0;      // argmax m'
  double final_norm = 0.0;
  double seconds = 0.0;
};

struct LadderPoint {
  double value = 0.0;  // b or dr
  double t = 0.0;
  long N = 0;
  double guard_ratio = 0.0;        // dt * E_transverse / hbar
  double transverse_energy = 0.0;  // removed divergent part
  std::vector<int> labels;         // n (rectangle) or l (annulus, shell)
  std::vector<double> raw_energies;
  std::vector<double> regularized;
  std::optional<TransverseRun> transverse;
};

struct ExtrapolatedLimit {
  int label = 0;
  double target = 0.0;
  QuadraticFit fit;  // regularized energy vs ladder value; c0 is the limit
  /// |c0 with all points - c0 without the coarsest|; NaN with fewer than 4 points.
  double drop_coarsest_shift = 0.0;
};

struct GapRecord {
  double b = 0.0;
  int m = 0;
  int m_prime = 0;
  double gap = 0.0;
};

struct ReductionResult {
  std::string family;
  PhysicalUnits units;
  std::vector<LadderPoint> points;
  std::vector<ExtrapolatedLimit> limits;
  std::vector<GapRecord> gaps;
  /// Mean over labels of c0 minus the angular eigenvalue (circle, sphere).
  double offset = 0.0;
  double offset_expected = 0.0;
  double offset_tolerance = 0.0;
  /// Largest quadratic-fit residual over the limits.
  double fit_residual = 0.0;
  bool flagged = false;
  std::optional<TransverseRun> negative_control;
  double control_b = 0.0;
};

/// E_{m'} - E_m = hbar^2 pi^2 (m'^2 - m^2) / 2 M b^2.
double superselection_gap(double b, int m, int m_prime, PhysicalUnits units = {});

/// Step count for dt * E / hbar <= target within the budget; throws
/// GuardViolation naming the binding constraint when even the 0.02 bound
/// cannot be met.
long limit_order_steps(double t, double transverse_energy, const ZenoSettings& settings, PhysicalUnits units,
                       const std::string& where);

TransverseRun transverse_zeno_run(double b, int m, double t, long N, std::size_t points, PhysicalUnits units = {});

ReductionResult reduce_rectangle_to_interval(const ReductionPlan& plan, int jobs = 1);
ReductionResult reduce_annulus_to_circle(const ReductionPlan& plan, int jobs = 1);
ReductionResult reduce_shell_to_sphere(const ReductionPlan& plan, int jobs = 1);
/// Dispatches on the plan family.
ReductionResult reduce(const ReductionPlan& plan, int jobs = 1);

}  // namespace zeno
