#include "twisted/bessel.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "twisted/errors.hpp"

namespace twisted {

namespace {

// Below this argument (or below 2 nu) the ascending series is used.
constexpr double kSeriesLimit = 12.0;
// At or above this argument the Hankel expansion is accurate to double
// precision for every order in the envelope with nu^2 <= x / 2.
constexpr double kHankelLimit = 50.0;

void check_args(double nu, double x)
{
  if (!std::isfinite(nu) || !std::isfinite(x))
    throw DomainError("bessel: non-finite argument");
  if (nu < 0.0)
    throw DomainError("bessel: negative order " + std::to_string(nu));
  if (x < 0.0)
    throw DomainError("bessel: negative argument " + std::to_string(x));
}

bool use_series(double nu, double x) { return x <= kSeriesLimit || x <= 2.0 * nu; }

bool use_hankel(double nu, double x) { return x >= kHankelLimit && 2.0 * nu * nu <= x; }

// x^{-nu} J_nu(x) = 2^{-nu} sum_k (-x^2/4)^k / (k! Gamma(nu+k+1)).
// Summed in extended precision: at x = 12 the largest term exceeds the
// result by about four orders of magnitude.
double scaled_series(double nu, double x)
{
  using ld = long double;
  const ld q = -static_cast<ld>(x) * x / 4.0L;
  ld term = 1.0L / (std::tgamma(static_cast<ld>(nu) + 1.0L) * std::pow(2.0L, static_cast<ld>(nu)));
  ld sum = term;
  for (int k = 1; k < 1000; ++k) {
    term *= q / (static_cast<ld>(k) * (static_cast<ld>(nu) + k));
    sum += term;
    if (std::fabs(term) < 1e-17L * std::fabs(sum))
      break;
  }
  return static_cast<double>(sum);
}

// Hankel asymptotic expansion, sqrt(2/(pi x)) (P cos chi - Q sin chi).
double hankel(double nu, double x)
{
  const double mu = 4.0 * nu * nu;
  double p = 1.0;
  double q = 0.0;
  double term = 1.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (mu - odd * odd) / (k * 8.0 * x);
    const double mag = std::fabs(term);
    if (mag > prev)
      break; // asymptotic series started to diverge
    // term holds a_k / x^k; signs alternate in pairs.
    const int r = k % 4;
    if (r == 1)
      q += term;
    else if (r == 2)
      p -= term;
    else if (r == 3)
      q -= term;
    else
      p += term;
    if (mag < 1e-17)
      break;
    prev = mag;
  }
  const double chi = x - (0.5 * nu + 0.25) * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

// Miller's backward recurrence normalized with the Neumann-type sum
//   (x/2)^mu / Gamma(mu+1) = J_mu + sum_{k>=1} (mu+2k) g_k J_{mu+2k},
//   g_k = Gamma(mu+k) / (k! Gamma(mu+1)),
// where mu is the fractional part of nu.
double miller(double nu, double x)
{
  using ld = long double;
  const int n = static_cast<int>(std::floor(nu));
  const ld mu = static_cast<ld>(nu) - n;
  const int top = std::max(n, static_cast<int>(std::ceil(x))) + 60 + static_cast<int>(10.0 * std::cbrt(x));

  std::vector<ld> weight(top / 2 + 2);
  weight[0] = 1.0L;
  ld g = 1.0L;
  for (int k = 1; k < static_cast<int>(weight.size()); ++k) {
    if (k > 1)
      g *= (mu + (k - 1)) / k;
    weight[k] = (mu + 2 * k) * g;
  }

  const ld inv_x = 1.0L / static_cast<ld>(x);
  ld above = 0.0L;
  ld current = 1e-30L;
  ld norm = 0.0L;
  ld captured = 0.0L;
  for (int k = top; k >= 0; --k) {
    if (k == n)
      captured = current;
    if (k % 2 == 0)
      norm += weight[k / 2] * current;
    if (k == 0)
      break;
    const ld below = 2.0L * (mu + k) * inv_x * current - above;
    above = current;
    current = below;
    if (std::fabs(current) > 1e200L) {
      current *= 1e-200L;
      above *= 1e-200L;
      norm *= 1e-200L;
      captured *= 1e-200L;
    }
  }
  const ld target = std::pow(static_cast<ld>(x) / 2.0L, mu) / std::tgamma(mu + 1.0L);
  return static_cast<double>(captured * target / norm);
}

} // namespace

double bessel_j(double nu, double x)
{
  check_args(nu, x);
  if (x == 0.0)
    return nu == 0.0 ? 1.0 : 0.0;
  if (use_series(nu, x))
    return std::pow(x, nu) * scaled_series(nu, x);
  if (use_hankel(nu, x))
    return hankel(nu, x);
  return miller(nu, x);
}

double bessel_j_scaled(double nu, double x)
{
  check_args(nu, x);
  if (use_series(nu, x))
    return scaled_series(nu, x);
  return bessel_j(nu, x) / std::pow(x, nu);
}

double bessel_j_prime(double nu, double x)
{
  check_args(nu, x);
  if (x == 0.0) {
    if (nu == 1.0)
      return 0.5;
    if (nu == 0.0 || nu > 1.0)
      return 0.0;
    throw DomainError("bessel_j_prime: derivative unbounded at x = 0 for 0 < nu < 1");
  }
  return nu / x * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

double bessel_zero(double nu, int m)
{
  check_args(nu, 0.0);
  if (m < 1)
    throw DomainError("bessel_zero: zero index must be >= 1");

  // McMahon expansion; poor for small m and large nu, so it only seeds the
  // refinement inside a bracket found by scanning.
  const double beta = (m + 0.5 * nu - 0.25) * std::numbers::pi;
  const double mu = 4.0 * nu * nu;
  const double eb = 8.0 * beta;
  const double guess = beta - (mu - 1.0) / eb - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * eb * eb * eb);

  // J_nu > 0 on (0, j_{nu,1}) and j_{nu,1} > nu; consecutive zeros are
  // more than 2.4 apart, so a 0.25 scan cannot skip a sign change.
  constexpr double step = 0.25;
  double lo = std::max(nu, 0.1);
  double f_lo = bessel_j(nu, lo);
  int found = 0;
  double hi = lo;
  double f_hi = f_lo;
  while (true) {
    hi = lo + step;
    f_hi = bessel_j(nu, hi);
    if ((f_lo > 0.0) != (f_hi > 0.0) || f_hi == 0.0) {
      if (++found == m)
        break;
    }
    lo = hi;
    f_lo = f_hi;
    if (lo > 1e4)
      throw ConvergenceError("bessel_zero: scan did not find the requested zero");
  }
  if (f_hi == 0.0)
    return hi;

  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double f = bessel_j(nu, x);
    if (f == 0.0)
      return x;
    if ((f > 0.0) == (f_lo > 0.0)) {
      lo = x;
      f_lo = f;
    } else {
      hi = x;
    }
    const double df = nu / x * f - bessel_j(nu + 1.0, x);
    double next = x - f / df;
    if (!(next > lo && next < hi) || df == 0.0)
      next = 0.5 * (lo + hi);
    if (std::fabs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * x) {
      x = next;
      const double residual = std::fabs(bessel_j(nu, x));
      const double slope = std::fabs(bessel_j_prime(nu, x));
      if (residual > 1e-11 * std::max(1.0, slope))
        throw ConvergenceError("bessel_zero: residual above tolerance");
      return x;
    }
    x = next;
  }
  throw ConvergenceError("bessel_zero: refinement did not converge");
}

double unit_ball_volume(int d)
{
  if (d < 1)
    throw DomainError("unit_ball_volume: dimension must be positive");
  if (d % 2 == 0) {
    const int k = d / 2;
    double factorial = 1.0;
    for (int i = 2; i <= k; ++i)
      factorial *= i;
    return std::pow(std::numbers::pi, k) / factorial;
  }
  // Gamma(d/2 + 1) = Gamma(k + 1/2) with k = (d+1)/2, = (2k)! sqrt(pi) / (4^k k!).
  const int k = (d + 1) / 2;
  double ratio = 1.0; // (2k)! / (4^k k!)
  for (int i = k + 1; i <= 2 * k; ++i)
    ratio *= i / 4.0;
  const double gamma = ratio * std::sqrt(std::numbers::pi);
  return std::pow(std::numbers::pi, 0.5 * d) / gamma;
}

Dimension::Dimension(int d)
    : d_(d)
{
  if (d < 2)
    throw DomainError("Dimension: d must be >= 2");
  sigma_ = 0.5 * d;
  delta_ = unit_ball_volume(d);
  delta_pow_ = std::pow(delta_, 2.0 / d);
  j_lower_ = bessel_zero(sigma_ - 1.0, 1);
  j_upper_ = bessel_zero(sigma_, 1);
}

namespace {

constexpr double kPoleFloor = 1e-13;

void check_positive(double x, const char* what)
{
  if (!std::isfinite(x) || x <= 0.0)
    throw DomainError(std::string(what) + ": argument must be positive and finite");
}

// Quotients are formed from x^{-nu} J_nu so the small-x limits are finite
// and the pole test is relative to the denominator's value at the origin.
struct ScaledTriple {
  double lower; // x^{1-s} J_{s-1}, normalized to 1 at x = 0
  double mid;   // x^{-s} J_s, normalized by the same constant
  double upper; // x^{-s-1} J_{s+1}, normalized by the same constant
};

ScaledTriple scaled_triple(const Dimension& dim, double x)
{
  const double s = dim.sigma();
  const double scale = 1.0 / bessel_j_scaled(s - 1.0, 0.0);
  return {bessel_j_scaled(s - 1.0, x) * scale, bessel_j_scaled(s, x) * scale, bessel_j_scaled(s + 1.0, x) * scale};
}

} // namespace

double phi(const Dimension& dim, double x)
{
  check_positive(x, "phi");
  const auto t = scaled_triple(dim, x);
  const double num = std::pow(x, dim.d() + 2) * t.upper;
  if (std::fabs(t.lower) < kPoleFloor * (std::fabs(num) + 1.0))
    throw PoleProximityError("phi: argument too close to a zero of J_{d/2-1}");
  return num / t.lower;
}

double phi_prime(const Dimension& dim, double x)
{
  check_positive(x, "phi_prime");
  const auto t = scaled_triple(dim, x);
  const double num = std::pow(x, dim.d() + 1) * t.mid * t.mid;
  if (std::fabs(t.lower) < kPoleFloor * (std::fabs(num) + 1.0))
    throw PoleProximityError("phi_prime: argument too close to a zero of J_{d/2-1}");
  return dim.d() * num / (t.lower * t.lower);
}

double big_phi(const Dimension& dim, double x)
{
  check_positive(x, "big_phi");
  const auto t = scaled_triple(dim, x);
  const double num = std::pow(x, dim.d() + 1) * t.upper;
  if (std::fabs(t.mid) < kPoleFloor * (std::fabs(num) + 1.0))
    throw PoleProximityError("big_phi: argument too close to a zero of J_{d/2}");
  return num / t.mid;
}

double big_phi_prime(const Dimension& dim, double x)
{
  const double value = big_phi(dim, x);
  const double xd = std::pow(x, dim.d());
  return xd - value / x + value * value / xd;
}

double upsilon(const Dimension& dim, double x)
{
  check_positive(x, "upsilon");
  const auto t = scaled_triple(dim, x);
  if (std::fabs(t.mid) < kPoleFloor * (std::fabs(x * x * t.upper) + 1.0))
    throw PoleProximityError("upsilon: argument too close to a zero of J_{d/2}");
  if (std::fabs(t.upper) < kPoleFloor * (std::fabs(t.mid) + 1.0))
    throw PoleProximityError("upsilon: argument too close to a zero of J_{d/2+1}");
  // x J_{s+1}/J_s = x^2 upper/mid and x J_s/J_{s+1} = mid/upper.
  return x * x * t.upper / t.mid + t.mid / t.upper;
}

} // namespace twisted
