#include "twisted/two_ball.hpp"

#include <algorithm>
#include <cmath>

#include "twisted/errors.hpp"
#include "twisted/quadrature.hpp"

namespace twisted {

namespace {

constexpr double kSymmetricWindow = 1e-3;
constexpr double kNewtonTol = 1e-12;
constexpr double kPathTol = 1e-10;
constexpr int kNewtonMaxIter = 50;
constexpr double kMinAlphaStep = 1e-6;
constexpr double kQuadTol = 1e-12;

struct Point {
  double x_minus;
  double x_plus;
};

Point scaled_radii(const Dimension& dim, double M, double omega)
{
  const double inv_d = 1.0 / dim.d();
  return {omega * std::pow(1.0 - M, inv_d), omega * std::pow(M, inv_d)};
}

void check_alpha(double alpha)
{
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw DomainError("alpha must lie in (0, 1]");
}

// r^{1-d/2} J_{d/2-1}(omega r), finite at r = 0.
double radial_profile(const Dimension& dim, double omega, double r)
{
  const double nu = dim.sigma() - 1.0;
  return std::pow(omega, nu) * bessel_j_scaled(nu, omega * r);
}

struct NewtonOutcome {
  bool converged = false;
  double residual = 0.0;
};

NewtonOutcome newton(const Dimension& dim, double alpha, double& M, double& omega, double tol)
{
  NewtonOutcome out;
  double res;
  try {
    res = scaled_residual(dim, alpha, M, omega);
  } catch (const PoleProximityError&) {
    return out;
  }
  for (int it = 0; it < kNewtonMaxIter; ++it) {
    out.residual = res;
    if (res <= tol) {
      out.converged = true;
      return out;
    }
    const Matrix2 j = system_jacobian(dim, alpha, M, omega);
    const double f1 = orthogonality_residual(dim, alpha, M, omega);
    const double f2 = optimality_residual(dim, alpha, M, omega);
    const double det = determinant(j);
    if (!(std::fabs(det) > 0.0) || !std::isfinite(det))
      return out;
    const double dM = -(j[1][1] * f1 - j[0][1] * f2) / det;
    const double dw = -(-j[1][0] * f1 + j[0][0] * f2) / det;

    // damped step: stay in the box and reduce the scaled residual
    bool accepted = false;
    for (double t = 1.0; t > 1e-10; t *= 0.5) {
      const double Mn = M + t * dM;
      const double wn = omega + t * dw;
      if (!in_admissible_box(dim, Mn, wn))
        continue;
      double rn;
      try {
        rn = scaled_residual(dim, alpha, Mn, wn);
      } catch (const PoleProximityError&) {
        continue;
      }
      if (rn < res) {
        M = Mn;
        omega = wn;
        res = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.residual = res;
      out.converged = res <= tol;
      return out;
    }
  }
  out.residual = res;
  out.converged = res <= tol;
  return out;
}

OptimalPair make_pair(const Dimension& dim, double alpha, double M, double omega, double residual, int steps,
                      bool symmetric)
{
  OptimalPair p{dim, alpha, M, omega, 1.0 / M - 1.0, dim.delta_pow() * omega * omega, 0.0, 0.0, residual, steps,
                symmetric};
  if (symmetric)
    p.m = 1.0;
  const RadialEigenfunction ef = RadialEigenfunction::with_orthogonal_coefficients(p.config(), omega);
  p.s_plus = ef.s_plus;
  p.s_minus = ef.s_minus;
  return p;
}

} // namespace

TwoBallConfig TwoBallConfig::from_ratio(const Dimension& dim, double alpha, double m)
{
  check_alpha(alpha);
  if (!(m >= 0.0 && m <= 1.0))
    throw DomainError("measure ratio must lie in [0, 1]");
  const double inv_d = 1.0 / dim.d();
  return {dim, alpha, std::pow(1.0 / (1.0 + m), inv_d), std::pow(m / (1.0 + m), inv_d)};
}

TwoBallConfig TwoBallConfig::from_measure(const Dimension& dim, double alpha, double M)
{
  check_alpha(alpha);
  if (!(M >= 0.5 && M <= 1.0))
    throw DomainError("scaled measure must lie in [1/2, 1]");
  const double inv_d = 1.0 / dim.d();
  return {dim, alpha, std::pow(M, inv_d), std::pow(1.0 - M, inv_d)};
}

double TwoBallConfig::ratio() const
{
  return std::pow(r_minus / r_plus, dim.d());
}

double OptimalPair::r_plus() const
{
  return std::pow(M, 1.0 / dim.d());
}

double OptimalPair::r_minus() const
{
  return std::pow(1.0 - M, 1.0 / dim.d());
}

TwoBallConfig OptimalPair::config() const
{
  return {dim, alpha, r_plus(), r_minus()};
}

double orthogonality_residual(const Dimension& dim, double alpha, double M, double omega, ResidualForm form)
{
  const Point p = scaled_radii(dim, M, omega);
  if (form == ResidualForm::quotient)
    return phi(dim, p.x_minus) + alpha * alpha * phi(dim, p.x_plus);
  const double s = dim.sigma();
  const int d = dim.d();
  return std::pow(p.x_minus, d) * bessel_j(s + 1, p.x_minus) * bessel_j(s - 1, p.x_plus) +
         alpha * alpha * std::pow(p.x_plus, d) * bessel_j(s + 1, p.x_plus) * bessel_j(s - 1, p.x_minus);
}

double optimality_residual(const Dimension& dim, double alpha, double M, double omega)
{
  const Point p = scaled_radii(dim, M, omega);
  return big_phi(dim, p.x_minus) - alpha * big_phi(dim, p.x_plus);
}

Matrix2 system_jacobian(const Dimension& dim, double alpha, double M, double omega)
{
  const Point p = scaled_radii(dim, M, omega);
  const double inv_d = 1.0 / dim.d();
  const double a2 = alpha * alpha;
  const double dm = std::pow(1.0 - M, inv_d - 1.0);
  const double dp = std::pow(M, inv_d - 1.0);
  const double um = std::pow(1.0 - M, inv_d);
  const double up = std::pow(M, inv_d);
  const double a = phi_prime(dim, p.x_minus);
  const double b = phi_prime(dim, p.x_plus);
  const double A = big_phi_prime(dim, p.x_minus);
  const double B = big_phi_prime(dim, p.x_plus);
  Matrix2 j;
  j[0][0] = omega * inv_d * (-dm * a + a2 * dp * b);
  j[0][1] = um * a + a2 * up * b;
  j[1][0] = -omega * inv_d * (dm * A + alpha * dp * B);
  j[1][1] = um * A - alpha * up * B;
  return j;
}

double jacobian_determinant_closed_form(const Dimension& dim, double alpha, double M, double omega)
{
  const Point p = scaled_radii(dim, M, omega);
  const double pre = alpha * p.x_minus * p.x_plus / (dim.d() * omega * M * (1.0 - M));
  return pre * (phi_prime(dim, p.x_minus) * big_phi_prime(dim, p.x_plus) +
                alpha * phi_prime(dim, p.x_plus) * big_phi_prime(dim, p.x_minus));
}

bool in_admissible_box(const Dimension& dim, double M, double omega)
{
  if (!(M > 0.5 && M < 1.0) || !(omega > 0.0))
    return false;
  const Point p = scaled_radii(dim, M, omega);
  return p.x_minus > 0.0 && p.x_minus < dim.j_lower() && p.x_plus > dim.j_lower() && p.x_plus < dim.j_upper();
}

double scaled_residual(const Dimension& dim, double alpha, double M, double omega)
{
  const Point p = scaled_radii(dim, M, omega);
  const double pm = phi(dim, p.x_minus);
  const double pp = phi(dim, p.x_plus);
  const double Pm = big_phi(dim, p.x_minus);
  const double Pp = big_phi(dim, p.x_plus);
  const double r1 = std::fabs(pm + alpha * alpha * pp) / (std::fabs(pm) + alpha * alpha * std::fabs(pp));
  const double r2 = std::fabs(Pm - alpha * Pp) / (Pm + alpha * Pp);
  return std::max(r1, r2);
}

OptimalPair solve_optimal_pair(const Dimension& dim, double alpha)
{
  check_alpha(alpha);
  const double omega_sym = dim.j_lower() * std::pow(2.0, 1.0 / dim.d());
  if (alpha >= 1.0 - kSymmetricWindow)
    return make_pair(dim, alpha, 0.5, omega_sym, 0.0, 0, true);

  // seed just below the symmetric configuration along the limit tangent
  const CurveDerivatives lim = symmetric_limit_derivatives(dim);
  double a = 1.0 - kSymmetricWindow;
  double M = 0.5 + lim.dM_dalpha * (a - 1.0);
  double omega = omega_sym + lim.domega_dalpha * (a - 1.0);
  NewtonOutcome nr = newton(dim, a, M, omega, a == alpha ? kNewtonTol : kPathTol);
  if (!nr.converged)
    throw ConvergenceError("Newton failed at the continuation seed");

  int steps = 0;
  while (a > alpha) {
    double step = std::min(a - alpha, 0.5 * std::min(a, 1.0 - a));
    for (;;) {
      if (step < kMinAlphaStep && step < a - alpha)
        throw ConvergenceError("continuation step underflow");
      const double an = std::max(alpha, a - step);
      // Euler predictor along the curve tangent
      const OptimalPair cur{dim, a, M, omega, 1.0 / M - 1.0, 0, 0, 0, 0, 0, false};
      const CurveDerivatives t = curve_derivatives(cur);
      double Mn = M + t.dM_dalpha * (an - a);
      double wn = omega + t.domega_dalpha * (an - a);
      if (!in_admissible_box(dim, Mn, wn)) {
        Mn = M;
        wn = omega;
      }
      const NewtonOutcome r = newton(dim, an, Mn, wn, an == alpha ? kNewtonTol : kPathTol);
      if (r.converged) {
        a = an;
        M = Mn;
        omega = wn;
        nr = r;
        ++steps;
        break;
      }
      step *= 0.5;
    }
  }
  if (!in_admissible_box(dim, M, omega))
    throw ConvergenceError("solution left the admissible box");
  return make_pair(dim, alpha, M, omega, nr.residual, steps, false);
}

std::string_view to_string(Branch branch)
{
  switch (branch) {
  case Branch::non_dirichlet:
    return "non_dirichlet";
  case Branch::dirichlet:
    return "dirichlet";
  case Branch::symmetric:
    return "symmetric";
  }
  return "unknown";
}

FixedRatioEigenvalue twisted_eigenvalue_fixed_m(const Dimension& dim, double alpha, double m)
{
  check_alpha(alpha);
  if (!(m > 0.0 && m <= 1.0))
    throw DomainError("measure ratio must lie in (0, 1]");
  const TwoBallConfig c = TwoBallConfig::from_ratio(dim, alpha, m);
  const double p = dim.j_lower();
  const double q = dim.j_upper();
  const double scale = dim.delta_pow();
  if (m == 1.0) {
    const double w = p / c.r_plus;
    return {scale * w * w, w, Branch::symmetric};
  }

  const double w_dir = q / c.r_plus;
  const FixedRatioEigenvalue dirichlet{scale * w_dir * w_dir, w_dir, Branch::dirichlet};

  const double M = 1.0 / (1.0 + m);
  auto g = [&](double w) { return orthogonality_residual(dim, alpha, M, w, ResidualForm::cleared); };
  const double lo = p / c.r_plus;
  const double hi = std::min(q / c.r_plus, p / c.r_minus);

  // first sign change on a uniform scan of the open window
  constexpr int kScan = 400;
  double a = lo;
  double ga = g(lo);
  double b = 0.0;
  bool found = false;
  for (int i = 1; i <= kScan; ++i) {
    const double w = lo + (hi - lo) * i / kScan;
    const double gw = g(w);
    if (gw == 0.0 || (ga > 0.0) != (gw > 0.0)) {
      b = w;
      found = true;
      break;
    }
    a = w;
    ga = gw;
  }
  if (!found)
    return dirichlet;

  for (int it = 0; it < 200 && b - a > 4e-16 * b; ++it) {
    const double mid = 0.5 * (a + b);
    const double gm = g(mid);
    if (gm == 0.0) {
      a = b = mid;
      break;
    }
    if ((gm > 0.0) == (ga > 0.0)) {
      a = mid;
      ga = gm;
    } else {
      b = mid;
    }
  }
  const double w = 0.5 * (a + b);
  const double lam = scale * w * w;
  if (lam <= dirichlet.lambda_scaled)
    return {lam, w, Branch::non_dirichlet};
  return dirichlet;
}

RadialEigenfunction RadialEigenfunction::with_orthogonal_coefficients(const TwoBallConfig& config, double omega)
{
  const double s = config.dim.sigma();
  const double sp = std::pow(config.r_minus, s + 1) * bessel_j(s + 1, omega * config.r_minus);
  const double sm = config.alpha * std::pow(config.r_plus, s + 1) * bessel_j(s + 1, omega * config.r_plus);
  return with_coefficients(config, omega, sp, sm);
}

RadialEigenfunction RadialEigenfunction::with_coefficients(const TwoBallConfig& config, double omega, double s_plus,
                                                           double s_minus)
{
  RadialEigenfunction ef{config, omega, s_plus, s_minus, 0.0};
  if (s_minus != 0.0)
    ef.xi = ef.xi_side(Side::minus);
  else
    ef.xi = -ef.xi_side(Side::plus) / config.alpha;
  return ef;
}

RadialEigenfunction RadialEigenfunction::from_pair(const OptimalPair& pair)
{
  return with_coefficients(pair.config(), pair.omega, pair.s_plus, pair.s_minus);
}

double RadialEigenfunction::xi_side(Side side) const
{
  const double R = radius(side);
  if (R == 0.0)
    return 0.0;
  return -coefficient(side) * omega * omega * radial_profile(config.dim, omega, R);
}

RadialEigenfunction RadialEigenfunction::scaled(double factor) const
{
  RadialEigenfunction ef = *this;
  ef.s_plus *= factor;
  ef.s_minus *= factor;
  ef.xi *= factor;
  return ef;
}

double eval_eigenfunction(const RadialEigenfunction& ef, Side side, double r)
{
  const double R = ef.radius(side);
  if (!(r >= 0.0 && r <= R))
    throw DomainError("radius outside the ball");
  if (r == R)
    return 0.0;
  const Dimension& dim = ef.config.dim;
  return ef.coefficient(side) * (radial_profile(dim, ef.omega, r) - radial_profile(dim, ef.omega, R));
}

double eval_gradient(const RadialEigenfunction& ef, Side side, double r)
{
  const double R = ef.radius(side);
  if (!(r >= 0.0 && r <= R))
    throw DomainError("radius outside the ball");
  const double s = ef.config.dim.sigma();
  const double y = ef.omega * r;
  return -ef.coefficient(side) * std::pow(ef.omega, s) * y * bessel_j_scaled(s, y);
}

namespace {

double sphere_area(const Dimension& dim)
{
  return dim.d() * dim.delta();
}

double radial_integral(const RadialEigenfunction& ef, Side side, bool squared)
{
  const double R = ef.radius(side);
  if (R == 0.0 || ef.coefficient(side) == 0.0)
    return 0.0;
  const int d = ef.config.dim.d();
  auto f = [&](double r) {
    const double u = eval_eigenfunction(ef, side, std::min(r, R));
    return (squared ? u * u : u) * std::pow(r, d - 1);
  };
  return sphere_area(ef.config.dim) * integrate(f, 0.0, R, kQuadTol).value;
}

} // namespace

double norm_squared(const RadialEigenfunction& ef)
{
  return radial_integral(ef, Side::plus, true) + radial_integral(ef, Side::minus, true);
}

double orthogonality_integral(const RadialEigenfunction& ef)
{
  return ef.config.alpha * radial_integral(ef, Side::plus, false) - radial_integral(ef, Side::minus, false);
}

double orthogonality_integral_closed_form(const RadialEigenfunction& ef)
{
  const Dimension& dim = ef.config.dim;
  const double s = dim.sigma();
  auto ball = [&](Side side) {
    const double R = ef.radius(side);
    if (R == 0.0)
      return 0.0;
    return dim.delta() * ef.coefficient(side) * std::pow(R, s + 1) * bessel_j(s + 1, ef.omega * R);
  };
  return ef.config.alpha * ball(Side::plus) - ball(Side::minus);
}

double ode_residual(const RadialEigenfunction& ef, int samples, double h)
{
  const int d = ef.config.dim.d();
  const double w2 = ef.omega * ef.omega;
  double worst = 0.0;
  for (Side side : {Side::plus, Side::minus}) {
    const double R = ef.radius(side);
    if (R == 0.0 || ef.coefficient(side) == 0.0)
      continue;
    const double xi = ef.xi_side(side);
    double umax = 0.0;
    for (int k = 0; k <= samples; ++k)
      umax = std::max(umax, std::fabs(eval_eigenfunction(ef, side, std::min(R, R * k / samples))));
    const double scale = w2 * umax + std::fabs(xi);
    for (int k = 0; k < samples; ++k) {
      const double r = R * (k + 0.5) / samples;
      const double up = eval_gradient(ef, side, r);
      const double upp = (eval_gradient(ef, side, r + h) - eval_gradient(ef, side, r - h)) / (2.0 * h);
      const double res = upp + (d - 1) / r * up + w2 * eval_eigenfunction(ef, side, r) - xi;
      worst = std::max(worst, std::fabs(res) / scale);
    }
  }
  return worst;
}

BoundaryGradientResidual boundary_gradient_identity(const OptimalPair& pair)
{
  const RadialEigenfunction ef = RadialEigenfunction::from_pair(pair);
  const double n2 = norm_squared(ef);
  const double gp = std::fabs(eval_gradient(ef, Side::plus, ef.radius(Side::plus)));
  const double gm = std::fabs(eval_gradient(ef, Side::minus, ef.radius(Side::minus)));
  BoundaryGradientResidual out;
  out.residual_eq = std::fabs(gp - gm) / std::max(gp, gm);
  out.mu = gp * gp / n2;
  const double lambda = pair.omega * pair.omega;
  out.residual_mu = std::fabs(out.mu - 2.0 * lambda / (pair.dim.d() * pair.dim.delta()));
  return out;
}

double pohozaev_residual(const RadialEigenfunction& ef, double lambda)
{
  const double n2 = norm_squared(ef);
  if (!(n2 > 1e-14))
    throw DomainError("eigenfunction norm too small to normalize");
  const Dimension& dim = ef.config.dim;
  double boundary = 0.0;
  for (Side side : {Side::plus, Side::minus}) {
    const double R = ef.radius(side);
    if (R == 0.0)
      continue;
    const double g = eval_gradient(ef, side, R);
    boundary += g * g / n2 * dim.d() * dim.delta() * std::pow(R, dim.d());
  }
  return std::fabs(2.0 * lambda - boundary);
}

CurveDerivatives curve_derivatives(const OptimalPair& pair)
{
  const Dimension& dim = pair.dim;
  const Point p = scaled_radii(dim, pair.M, pair.omega);
  const Matrix2 j = system_jacobian(dim, pair.alpha, pair.M, pair.omega);
  const double det = determinant(j);
  if (!(det != 0.0) || !std::isfinite(det))
    throw ConvergenceError("singular Jacobian on the curve");
  const double f1a = 2.0 * pair.alpha * phi(dim, p.x_plus);
  const double f2a = -big_phi(dim, p.x_plus);
  CurveDerivatives out;
  out.dM_dalpha = -(f1a * j[1][1] - j[0][1] * f2a) / det;
  out.domega_dalpha = -(j[0][0] * f2a - f1a * j[1][0]) / det;
  out.dm_dalpha = -out.dM_dalpha / (pair.M * pair.M);
  out.dlambda_dalpha = 2.0 * dim.delta_pow() * pair.omega * out.domega_dalpha;
  return out;
}

CurveDerivatives symmetric_limit_derivatives(const Dimension& dim)
{
  const double p = dim.j_lower();
  const double dM = -dim.d() * big_phi(dim, p) / (4.0 * p * big_phi_prime(dim, p));
  return {dM, 0.0, -4.0 * dM, 0.0};
}

LowerBounds lower_bounds(const Dimension& dim, double alpha)
{
  check_alpha(alpha);
  const int d = dim.d();
  const double m_lb = std::pow(alpha, double(d) / (d - 1));
  const double p = dim.j_lower();
  return {m_lb, std::pow(1.0 + m_lb, 2.0 / d) * dim.delta_pow() * p * p};
}

double upper_bound_f(const Dimension& dim, double alpha, double m)
{
  check_alpha(alpha);
  if (!(m > 0.0 && m <= 1.0))
    throw DomainError("measure ratio must lie in (0, 1]");
  const double e = 2.0 / dim.d();
  const double a2 = alpha * alpha;
  const double p = dim.j_lower();
  return (std::pow(m, 1.0 + e) + a2) / (m + a2) * std::pow(1.0 + 1.0 / m, e) * dim.delta_pow() * p * p;
}

double mediant_value(double a1, double a2, double b1, double b2, double t)
{
  if (!(a1 > 0 && a2 > 0 && b1 > 0 && b2 > 0))
    throw DomainError("mediant coefficients must be positive");
  if (!(t >= 0.0))
    throw DomainError("mediant parameter must be non-negative");
  if (std::isinf(t))
    return a1 / a2;
  return (a1 * t + b1) / (a2 * t + b2);
}

double symmetric_eigenvalue(const Dimension& dim)
{
  const double p = dim.j_lower();
  return dim.delta_pow() * std::pow(2.0, 2.0 / dim.d()) * p * p;
}

double single_ball_eigenvalue(const Dimension& dim)
{
  const double p = dim.j_lower();
  return dim.delta_pow() * p * p;
}

} // namespace twisted
