#include "zeno/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "zeno/errors.hpp"

namespace zeno {

namespace {

using ld = long double;
constexpr ld kPiL = 3.141592653589793238462643383279502884L;
constexpr ld kEulerL = 0.577215664901532860606512090082402431L;

bool is_integer(double nu) { return nu == std::floor(nu); }

// Y0 and Y1 by their ascending series.
std::pair<double, double> y01_series(double xd) {
  const ld x = xd;
  const ld h = x / 2;
  const ld q = -h * h;
  const ld lg = std::log(h) + kEulerL;

  // Y0 = (2/pi)(ln(x/2)+gamma) J0 + (2/pi) sum_{k>=1} (-1)^{k+1} H_k (x^2/4)^k / (k!)^2
  ld term = 1, j0 = 1, s0 = 0, hk = 0;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<ld>(k) * k);
    hk += 1.0L / k;
    j0 += term;
    s0 -= hk * term;
    if (std::abs(term) * (1 + hk) < 1e-22L * (std::abs(j0) + std::abs(s0))) break;
  }
  const ld y0 = 2 / kPiL * (lg * j0 + s0);

  // Y1 = -2/(pi x) + (2/pi) ln(x/2) J1
  //      - (1/pi) sum_k (psi(k+1)+psi(k+2)) (-x^2/4)^k (x/2) / (k!(k+1)!)
  term = h;
  ld j1 = h;
  ld psi1 = -kEulerL, psi2 = 1 - kEulerL;
  ld s1 = (psi1 + psi2) * term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (static_cast<ld>(k) * (k + 1));
    psi1 += 1.0L / k;
    psi2 += 1.0L / (k + 1);
    j1 += term;
    s1 += (psi1 + psi2) * term;
    if (std::abs(term) * (std::abs(psi1) + std::abs(psi2) + 1) < 1e-22L * (std::abs(j1) + std::abs(s1))) break;
  }
  const ld y1 = -2 / (kPiL * x) + 2 / kPiL * std::log(h) * j1 - s1 / kPiL;
  return {static_cast<double>(y0), static_cast<double>(y1)};
}

// Y_mu, Y_{mu+1} for 0 <= mu < 1 and x at or below the crossover.
std::pair<double, double> y_low_pair_series(double mu, double x) {
  if (mu == 0.0) return y01_series(x);
  const ld s = std::sin(kPiL * mu), c = std::cos(kPiL * mu);
  const ld ym = (detail::bessel_j_series(mu, x) * c - detail::bessel_j_series(-mu, x)) / s;
  // Order mu + 1: cos((mu+1) pi) = -c, sin((mu+1) pi) = -s.
  const ld yp = (detail::bessel_j_series(mu + 1, x) * -c - detail::bessel_j_series(-mu - 1, x)) / -s;
  return {static_cast<double>(ym), static_cast<double>(yp)};
}

// Y_mu, Y_{mu+1} for 0 <= mu < 1 at any x > 0.
std::pair<double, double> y_low_pair(double mu, double x) {
  if (x <= detail::kBesselCrossover) return y_low_pair_series(mu, x);
  return {detail::bessel_jy_asymptotic(mu, x).y, detail::bessel_jy_asymptotic(mu + 1, x).y};
}

// J_nu for x above the crossover: Miller's downward recurrence from a high
// starting order, normalized against the asymptotic J_mu and J_{mu+1}.
double bessel_j_miller(double nu, double x) {
  const double mu = nu - std::floor(nu);
  const auto n = static_cast<long>(std::floor(nu));
  const long start = static_cast<long>(std::ceil(std::max(nu, x))) + 60 + static_cast<long>(10.0 * std::cbrt(x));
  ld f_next = 0.0L, f = 1e-300L, f_nu = 0.0L, f_mu = 0.0L, f_mu1 = 0.0L;
  // f holds the unnormalized value at order mu + k, f_next at mu + k + 1.
  for (long k = start; k >= 0; --k) {
    if (k == n) f_nu = f;
    if (k == 1) f_mu1 = f;
    if (k == 0) {
      f_mu = f;
      break;
    }
    const ld f_prev = 2.0L * (mu + k) / x * f - f_next;
    f_next = f;
    f = f_prev;
    if (std::abs(f) > 1e250L) {
      f *= 1e-250L;
      f_next *= 1e-250L;
      f_nu *= 1e-250L;
      f_mu1 *= 1e-250L;
    }
  }
  const double jm = detail::bessel_jy_asymptotic(mu, x).j;
  const double jp = detail::bessel_jy_asymptotic(mu + 1, x).j;
  const ld scale = (f_mu * jm + f_mu1 * jp) / (f_mu * f_mu + f_mu1 * f_mu1);
  return static_cast<double>(f_nu * scale);
}

}  // namespace

namespace detail {

double bessel_j_series(double nu, double xd) {
  if (xd == 0.0) {
    if (nu == 0.0) return 1.0;
    if (nu > 0.0 || is_integer(nu)) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  const ld x = xd;
  const ld h = x / 2;
  const ld q = -h * h;
  // Leading term (x/2)^nu / Gamma(nu+1); 1/Gamma vanishes at negative integers.
  ld term;
  int k0 = 0;
  if (nu < 0 && is_integer(nu)) {
    // J_{-n} = (-1)^n J_n.
    const double r = bessel_j_series(-nu, xd);
    return (static_cast<long>(-nu) % 2 == 0) ? r : -r;
  }
  if (nu >= 0) {
    term = std::exp(static_cast<ld>(nu) * std::log(h) - std::lgamma(static_cast<ld>(nu) + 1));
  } else {
    term = std::pow(h, static_cast<ld>(nu)) / std::tgamma(static_cast<ld>(nu) + 1);
  }
  ld sum = term;
  for (int k = k0 + 1; k < 1000; ++k) {
    term *= q / (static_cast<ld>(k) * (static_cast<ld>(nu) + k));
    sum += term;
    if (std::abs(term) < 1e-21L * std::abs(sum) && k > -nu + 2) break;
  }
  return static_cast<double>(sum);
}

BesselPair bessel_jy_asymptotic(double nu, double xd) {
  const ld x = xd;
  const ld m4 = 4.0L * nu * nu;
  ld p = 1, qsum = 0;
  ld a = 1;  // a_k / x^k
  ld last = std::numeric_limits<ld>::infinity();
  for (int k = 1; k < 200; ++k) {
    const ld odd = 2.0L * k - 1;
    a *= (m4 - odd * odd) / (static_cast<ld>(k) * 8.0L * x);
    const ld mag = std::abs(a);
    if (mag > last) break;  // asymptotic series starts to diverge
    last = mag;
    // Signs: P = a0 - a2 + a4 - ..., Q = a1 - a3 + a5 - ...
    const int r = k % 4;
    if (r == 1) qsum += a;
    else if (r == 2) p -= a;
    else if (r == 3) qsum -= a;
    else p += a;
    if (mag < 1e-20L) break;
  }
  const ld chi = x - (static_cast<ld>(nu) / 2 + 0.25L) * kPiL;
  const ld pref = std::sqrt(2.0L / (kPiL * x));
  const ld c = std::cos(chi), s = std::sin(chi);
  return {static_cast<double>(pref * (p * c - qsum * s)), static_cast<double>(pref * (p * s + qsum * c))};
}

}  // namespace detail

double bessel_j(double nu, double x) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw StructuralError("Bessel order must be finite and >= 0");
  if (!(x >= 0.0) || !std::isfinite(x)) throw StructuralError("Bessel argument must be finite and >= 0");
  if (x <= detail::kBesselCrossover) return detail::bessel_j_series(nu, x);
  if (nu < 2.0) return detail::bessel_jy_asymptotic(nu, x).j;
  return bessel_j_miller(nu, x);
}

double bessel_y(double nu, double x) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw StructuralError("Bessel order must be finite and >= 0");
  if (!(x > 0.0) || !std::isfinite(x)) throw StructuralError("Y_nu needs a finite argument x > 0");
  const double mu = nu - std::floor(nu);
  const auto n = static_cast<long>(std::floor(nu));
  auto [y0, y1] = y_low_pair(mu, x);
  if (n == 0) return y0;
  // Upward recurrence is stable for Y at every order.
  for (long k = 1; k < n; ++k) {
    const double y2 = 2.0 * (mu + static_cast<double>(k)) / x * y1 - y0;
    y0 = y1;
    y1 = y2;
    if (!std::isfinite(y1)) return -std::numeric_limits<double>::infinity();
  }
  return y1;
}

double sph_bessel_j(int l, double x) {
  if (l < 0) throw StructuralError("spherical Bessel order must be >= 0");
  if (!(x >= 0.0) || !std::isfinite(x)) throw StructuralError("spherical Bessel argument must be >= 0");
  if (x == 0.0) return l == 0 ? 1.0 : 0.0;
  // Upward recurrence is stable while the order stays below x.
  if (x > static_cast<double>(l)) {
    const ld xl = x;
    ld j0 = std::sin(xl) / xl;
    if (l == 0) return static_cast<double>(j0);
    ld j1 = std::sin(xl) / (xl * xl) - std::cos(xl) / xl;
    for (int k = 1; k < l; ++k) {
      const ld j2 = (2.0L * k + 1) / xl * j1 - j0;
      j0 = j1;
      j1 = j2;
    }
    return static_cast<double>(j1);
  }
  // Series x^l/(2l+1)!! sum_k (-x^2/2)^k / (k! (2l+3)(2l+5)...(2l+2k+1)).
  const ld xl = x;
  ld lead = 1;
  for (int k = 1; k <= l; ++k) lead *= xl / (2.0L * k + 1);
  ld term = 1, sum = 1;
  for (int k = 1; k < 500; ++k) {
    term *= -(xl * xl / 2) / (static_cast<ld>(k) * (2.0L * l + 2 * k + 1));
    sum += term;
    if (std::abs(term) < 1e-21L * std::abs(sum)) break;
  }
  return static_cast<double>(lead * sum);
}

double sph_bessel_y(int l, double x) {
  if (l < 0) throw StructuralError("spherical Bessel order must be >= 0");
  if (!(x > 0.0) || !std::isfinite(x)) throw StructuralError("spherical y_l needs x > 0");
  const ld xl = x;
  ld y0 = -std::cos(xl) / xl;
  if (l == 0) return static_cast<double>(y0);
  ld y1 = -std::cos(xl) / (xl * xl) - std::sin(xl) / xl;
  for (int k = 1; k < l; ++k) {
    const ld y2 = (2.0L * k + 1) / xl * y1 - y0;
    y0 = y1;
    y1 = y2;
  }
  return static_cast<double>(y1);
}

}  // namespace zeno
