#include "zeno/propagator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <limits>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "zeno/errors.hpp"

namespace zeno {

namespace {

// The FFTW planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr std::size_t kPhaseCacheLimit = 64;

}  // namespace

std::size_t fft_friendly_size(std::size_t n) {
  for (std::size_t c = std::max<std::size_t>(n, 1);; ++c) {
    std::size_t r = c;
    for (std::size_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return c;
  }
}

struct SpectralPropagatorPlan::Impl {
  Grid grid;
  Grid interior;
  PhysicalUnits units;
  std::vector<double> k2;
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  mutable std::mutex cache_mutex;
  mutable std::unordered_map<std::uint64_t, std::shared_ptr<const std::vector<Complex>>> cache;
  mutable std::atomic<std::uint64_t> transforms{0};
  mutable std::atomic<std::uint64_t> hits{0};
  mutable std::atomic<std::uint64_t> misses{0};

  Impl(Grid g, Grid in, PhysicalUnits u) : grid(std::move(g)), interior(std::move(in)), units(u) {
    units.validate();
    if (!grid.nests(interior)) throw StructuralError("computational grid does not nest the interior grid", "grid");
    build_wavenumbers();
    build_plans();
  }

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  void build_wavenumbers() {
    const auto shape = grid.shape();
    std::array<std::vector<double>, 3> kk;
    for (int a = 0; a < 3; ++a) {
      const std::size_t n = shape[static_cast<std::size_t>(a)];
      auto& v = kk[static_cast<std::size_t>(a)];
      v.assign(n, 0.0);
      if (a >= grid.dim()) continue;
      const double dk = 2.0 * std::numbers::pi / grid.axis(a).extent;
      for (std::size_t j = 0; j < n; ++j) {
        const double jj = j < (n + 1) / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
        v[j] = (jj * dk) * (jj * dk);
      }
    }
    k2.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto idx = grid.unflatten(i);
      k2[i] = kk[0][idx[0]] + kk[1][idx[1]] + kk[2][idx[2]];
    }
  }

  void build_plans() {
    std::vector<int> n;
    for (const Axis& ax : grid.axes()) n.push_back(static_cast<int>(ax.points));
    std::lock_guard lock(planner_mutex());
    auto* buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * grid.size()));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_dft(grid.dim(), n.data(), buf, buf, FFTW_FORWARD, flags);
    backward = fftw_plan_dft(grid.dim(), n.data(), buf, buf, FFTW_BACKWARD, flags);
    fftw_free(buf);
    if (!forward || !backward) throw NumericalError("FFTW failed to create a plan");
  }

  double tau_max() const {
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < grid.dim(); ++a) {
      const double pad = grid.axis(a).extent - interior.axis(a).extent;
      const double s = pad / kGuardConstant;
      best = std::min(best, s * s * units.mass / units.hbar);
    }
    return best;
  }
};

SpectralPropagatorPlan::SpectralPropagatorPlan(const Grid& interior, double tau_max, PhysicalUnits units) {
  units.validate();
  if (!(tau_max >= 0.0) || !std::isfinite(tau_max)) throw StructuralError("tau_max must be finite and >= 0", "tau");
  const double guard_len = kGuardConstant * std::sqrt(units.hbar * tau_max / units.mass);
  std::vector<Axis> axes;
  for (const Axis& ax : interior.axes()) {
    const double h = ax.spacing();
    const auto extra = static_cast<std::size_t>(std::ceil(guard_len / h - 1e-9));
    const std::size_t total = fft_friendly_size(ax.points + extra);
    const std::size_t left = (total - ax.points) / 2;
    axes.push_back(Axis{ax.origin - static_cast<double>(left) * h, static_cast<double>(total) * h, total});
  }
  impl_ = std::make_shared<Impl>(Grid(std::move(axes)), interior, units);
}

SpectralPropagatorPlan::SpectralPropagatorPlan(Grid computational, Grid interior, PhysicalUnits units)
    : impl_(std::make_shared<Impl>(std::move(computational), std::move(interior), units)) {}

const Grid& SpectralPropagatorPlan::grid() const { return impl_->grid; }
const Grid& SpectralPropagatorPlan::interior() const { return impl_->interior; }
const PhysicalUnits& SpectralPropagatorPlan::units() const { return impl_->units; }

double SpectralPropagatorPlan::padding_factor() const {
  double f = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid().dim(); ++a) f = std::min(f, grid().axis(a).extent / interior().axis(a).extent);
  return f;
}

double SpectralPropagatorPlan::guard_margin(double tau) const {
  if (tau == 0.0) return std::numeric_limits<double>::infinity();
  const double scale = std::sqrt(impl_->units.hbar * std::abs(tau) / impl_->units.mass);
  double m = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid().dim(); ++a) m = std::min(m, (grid().axis(a).extent - interior().axis(a).extent) / scale);
  return m;
}

double SpectralPropagatorPlan::tau_max() const { return impl_->tau_max(); }

void SpectralPropagatorPlan::check_guard(double tau) const {
  if (!std::isfinite(tau)) throw NumericalError("non-finite time step");
  const double limit = impl_->tau_max();
  if (std::abs(tau) > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os.precision(6);
    os << "guard violated: |tau| = " << std::abs(tau) << " exceeds " << limit << " (padding margin "
       << guard_margin(tau) << " < " << kGuardConstant << ")";
    throw GuardViolation(os.str());
  }
}

std::shared_ptr<const std::vector<Complex>> SpectralPropagatorPlan::phases(double tau) const {
  const auto key = std::bit_cast<std::uint64_t>(tau);
  {
    std::lock_guard lock(impl_->cache_mutex);
    auto it = impl_->cache.find(key);
    if (it != impl_->cache.end()) {
      impl_->hits.fetch_add(1, std::memory_order_relaxed);
      return it->second;
    }
  }
  impl_->misses.fetch_add(1, std::memory_order_relaxed);
  const double c = impl_->units.hbar * tau / (2.0 * impl_->units.mass);
  auto table = std::make_shared<std::vector<Complex>>(impl_->k2.size());
  for (std::size_t i = 0; i < table->size(); ++i) (*table)[i] = std::polar(1.0, -c * impl_->k2[i]);
  std::lock_guard lock(impl_->cache_mutex);
  if (impl_->cache.size() >= kPhaseCacheLimit) impl_->cache.clear();
  impl_->cache.emplace(key, table);
  return table;
}

void SpectralPropagatorPlan::apply(std::span<Complex> data, double tau) const {
  if (data.size() != grid().size()) throw StructuralError("field size does not match the propagator grid");
  check_guard(tau);
  if (tau == 0.0) return;
  const auto table = phases(tau);
  auto* raw = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(impl_->forward, raw, raw);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= (*table)[i] * scale;
  fftw_execute_dft(impl_->backward, raw, raw);
  impl_->transforms.fetch_add(2, std::memory_order_relaxed);
}

PropagatorCounters SpectralPropagatorPlan::counters() const {
  return {impl_->transforms.load(), impl_->hits.load(), impl_->misses.load()};
}

WaveFunction evolve_free(const WaveFunction& psi, double tau, const SpectralPropagatorPlan& plan) {
  WaveFunction out = psi.grid() == plan.grid() ? psi : embed(psi, plan.grid());
  plan.apply(out.amplitudes(), tau);
  if (!out.all_finite()) throw NumericalError("free evolution produced non-finite values");
  return out;
}

KernelMatrix kernel_matrix(const Grid& grid, double tau, PhysicalUnits units) {
  units.validate();
  if (tau == 0.0) throw StructuralError("kernel is singular at tau = 0; use the spectral identity path", "tau");
  if (!(tau > 0.0)) throw StructuralError("kernel evolution needs tau > 0", "tau");
  if (grid.size() > kKernelMaxPoints)
    throw StructuralError("grid too large for the dense kernel (" + std::to_string(grid.size()) + " > " +
                          std::to_string(kKernelMaxPoints) + " points)", "grid");
  const double d = grid.dim();
  const double lambda = units.mass / (2.0 * units.hbar * tau);
  const Complex pref = std::pow(units.mass / (2.0 * std::numbers::pi * units.hbar * tau), d / 2.0) *
                       std::polar(1.0, -std::numbers::pi * d / 4.0) * grid.cell_measure();
  const auto n = static_cast<Eigen::Index>(grid.size());
  std::vector<Point> x(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) x[i] = grid.coords(i);
  MatrixC K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const Point& p = x[static_cast<std::size_t>(i)];
      const Point& q = x[static_cast<std::size_t>(j)];
      const double r2 = (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]);
      K(i, j) = pref * std::polar(1.0, lambda * r2);
      K(j, i) = K(i, j);
    }
  }
  return {grid, tau, std::move(K)};
}

WaveFunction kernel_evolve(const WaveFunction& psi, double tau, PhysicalUnits units) {
  const KernelMatrix K = kernel_matrix(psi.grid(), tau, units);
  const auto in = psi.amplitudes();
  const Eigen::Map<const VectorC> v(in.data(), static_cast<Eigen::Index>(in.size()));
  const VectorC w = K.values * v;
  return WaveFunction(psi.grid(), std::vector<Complex>(w.data(), w.data() + w.size()));
}

}  // namespace zeno
