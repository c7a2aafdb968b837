#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "twisted/errors.hpp"
#include "twisted/two_ball.hpp"

using namespace twisted;

namespace {

const double kJ01 = 2.404825557695773;
const double kPi = std::numbers::pi;

double rel(double a, double b)
{
  return std::fabs(a - b) / std::fabs(b);
}

// random point of the admissible box with x+/- at least `margin` from the poles
std::pair<double, double> random_admissible(const Dimension& dim, std::mt19937_64& rng, double margin = 0.05)
{
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (;;) {
    const double M = 0.5 + 0.5 * U(rng);
    const double xp = dim.j_lower() + margin + (dim.j_upper() - dim.j_lower() - 2 * margin) * U(rng);
    const double omega = xp / std::pow(M, 1.0 / dim.d());
    const double xm = omega * std::pow(1.0 - M, 1.0 / dim.d());
    if (xm < dim.j_lower() - margin && M < 0.99 && M > 0.51)
      return {M, omega};
  }
}

} // namespace

TEST(TwoBallConfig, Normalization)
{
  const Dimension d3(3);
  for (double m : {0.0, 0.1, 0.5, 1.0}) {
    const TwoBallConfig c = TwoBallConfig::from_ratio(d3, 0.4, m);
    EXPECT_NEAR(std::pow(c.r_plus, 3) + std::pow(c.r_minus, 3), 1.0, 1e-14);
    EXPECT_GE(c.r_plus, c.r_minus);
    EXPECT_NEAR(c.ratio(), m, 1e-14);
  }
  const TwoBallConfig c = TwoBallConfig::from_measure(Dimension(2), 0.4, 0.7);
  EXPECT_NEAR(c.r_plus * c.r_plus, 0.7, 1e-15);
  EXPECT_THROW(TwoBallConfig::from_ratio(d3, 0.4, 1.5), DomainError);
  EXPECT_THROW(TwoBallConfig::from_measure(d3, 0.0, 0.7), DomainError);
}

TEST(Residuals, SymmetricConfiguration)
{
  const Dimension d2(2);
  const double omega = kJ01 * std::sqrt(2.0);
  EXPECT_NEAR(orthogonality_residual(d2, 1.0, 0.5, omega, ResidualForm::cleared), 0.0, 1e-10);
  for (double w : {1.0, 3.0, 5.0})
    EXPECT_EQ(optimality_residual(d2, 1.0, 0.5, w), 0.0);
}

TEST(Residuals, ClearedAndQuotientVanishTogether)
{
  const Dimension d2(2);
  const OptimalPair p = solve_optimal_pair(d2, 1.0 / 6);
  EXPECT_LE(std::fabs(orthogonality_residual(d2, p.alpha, p.M, p.omega)), 1e-10);
  EXPECT_LE(std::fabs(orthogonality_residual(d2, p.alpha, p.M, p.omega, ResidualForm::cleared)), 1e-10);
  EXPECT_LE(std::fabs(optimality_residual(d2, p.alpha, p.M, p.omega)), 1e-10);
}

TEST(Residuals, OrthogonalitySignChangeInWindow)
{
  const Dimension d2(2);
  for (double a : {0.1, 0.3, 0.6, 0.9}) {
    const double M = solve_optimal_pair(d2, a).M;
    const double lo = d2.j_lower() / std::sqrt(M), hi = d2.j_upper() / std::sqrt(M);
    int changes = 0;
    double prev = orthogonality_residual(d2, a, M, lo + 1e-9, ResidualForm::cleared);
    for (int i = 1; i < 400; ++i) {
      const double w = lo + (hi - lo) * i / 400.0;
      const double v = orthogonality_residual(d2, a, M, w, ResidualForm::cleared);
      if ((v > 0) != (prev > 0))
        ++changes;
      prev = v;
    }
    EXPECT_GE(changes, 1) << a;
  }
}

TEST(Residuals, OptimalityDecreasingInM)
{
  const Dimension d2(2);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    auto [M, w] = random_admissible(d2, rng);
    EXPECT_LT(system_jacobian(d2, 0.4, M, w)[1][0], 0.0);
  }
}

TEST(Jacobian, MatchesFiniteDifferences)
{
  std::mt19937_64 rng(11);
  for (int d : {2, 3}) {
    const Dimension dim(d);
    for (int k = 0; k < 10; ++k) {
      auto [M, w] = random_admissible(dim, rng);
      const double a = 0.25 + 0.5 * (k % 3) / 2.0;
      const Matrix2 J = system_jacobian(dim, a, M, w);
      const double h = 1e-6;
      auto f1 = [&](double m, double o) { return orthogonality_residual(dim, a, m, o); };
      auto f2 = [&](double m, double o) { return optimality_residual(dim, a, m, o); };
      const double fd[2][2] = {{(f1(M + h, w) - f1(M - h, w)) / (2 * h), (f1(M, w + h) - f1(M, w - h)) / (2 * h)},
                               {(f2(M + h, w) - f2(M - h, w)) / (2 * h), (f2(M, w + h) - f2(M, w - h)) / (2 * h)}};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          EXPECT_LT(rel(fd[i][j], J[i][j]), 1e-6) << d << " " << M << " " << w << " " << i << j;
      EXPECT_LT(rel(determinant(J), jacobian_determinant_closed_form(dim, a, M, w)), 1e-10);
    }
  }
}

TEST(Jacobian, DeterminantPositiveOnSolutions)
{
  for (int d : {2, 3}) {
    const Dimension dim(d);
    for (double a : {0.2, 0.5, 0.9, 1.0 - 1e-3 - 1e-9}) {
      const OptimalPair p = solve_optimal_pair(dim, a);
      EXPECT_GT(determinant(system_jacobian(dim, a, p.M, p.omega)), 0.0) << d << " " << a;
      EXPECT_GT(jacobian_determinant_closed_form(dim, a, p.M, p.omega), 0.0);
    }
  }
}

TEST(OptimalPair, TableValues)
{
  const Dimension d2(2);
  const OptimalPair p6 = solve_optimal_pair(d2, 1.0 / 6);
  EXPECT_NEAR(p6.m, 0.3635, 5e-4);
  EXPECT_NEAR(p6.lambda_scaled, 27.7534, 5e-3);
  const OptimalPair p1 = solve_optimal_pair(d2, 1.0);
  EXPECT_EQ(p1.m, 1.0);
  EXPECT_NEAR(p1.lambda_scaled, 36.3368, 1e-3);
  EXPECT_TRUE(p1.symmetric_limit);
  const OptimalPair p20 = solve_optimal_pair(d2, 1.0 / 20);
  EXPECT_NEAR(p20.lambda_scaled, 22.7001, 5e-3);
}

TEST(OptimalPair, SmallMeasureRatioAtOneTwentieth)
{
  // tabulated m = 0.1664; the root of the system sits at 0.16708
  const OptimalPair p = solve_optimal_pair(Dimension(2), 1.0 / 20);
  EXPECT_NEAR(p.m, 0.1664, 5e-4);
}

TEST(OptimalPair, TableCrossSectionValues)
{
  const OptimalPair p = solve_optimal_pair(Dimension(2), 1.0 / 6);
  EXPECT_NEAR(p.omega, 2.972, 1e-3);
  EXPECT_NEAR(p.x_plus(), 2.545, 1e-3);
  EXPECT_NEAR(p.x_minus(), 1.535, 2e-3);
}

TEST(OptimalPair, SmallAlphaLimit)
{
  const OptimalPair p = solve_optimal_pair(Dimension(2), 0.01);
  EXPECT_LT(p.m, 0.1664);
  EXPECT_GT(p.lambda_scaled, kPi * kJ01 * kJ01);
  EXPECT_LT(p.lambda_scaled, 22.7001);
}

TEST(OptimalPair, Invariants)
{
  for (int d : {2, 3, 4}) {
    const Dimension dim(d);
    for (double a : {0.05, 0.2, 0.45, 0.7, 0.95}) {
      const OptimalPair p = solve_optimal_pair(dim, a);
      EXPECT_LE(p.residual_norm, 1e-12);
      EXPECT_NEAR(p.m, 1.0 / p.M - 1.0, 1e-13);
      EXPECT_TRUE(in_admissible_box(dim, p.M, p.omega));
      const LowerBounds lb = lower_bounds(dim, a);
      EXPECT_GE(p.m, lb.m_lb);
      EXPECT_GE(p.lambda_scaled, lb.lambda_lb);
      EXPECT_LT(p.lambda_scaled, symmetric_eigenvalue(dim));
      // interlacing between the first two Dirichlet eigenvalues of B+
      const double rp = p.r_plus();
      EXPECT_LE(dim.delta_pow() * std::pow(dim.j_lower() / rp, 2), p.lambda_scaled);
      EXPECT_LE(p.lambda_scaled, dim.delta_pow() * std::pow(dim.j_upper() / rp, 2));
    }
  }
}

TEST(OptimalPair, Deterministic)
{
  const Dimension d3(3);
  const OptimalPair a = solve_optimal_pair(d3, 0.37);
  const OptimalPair b = solve_optimal_pair(d3, 0.37);
  EXPECT_EQ(a.M, b.M);
  EXPECT_EQ(a.omega, b.omega);
}

TEST(OptimalPair, RejectsAlphaOutsideRange)
{
  EXPECT_THROW(solve_optimal_pair(Dimension(2), 0.0), DomainError);
  EXPECT_THROW(solve_optimal_pair(Dimension(2), 1.5), DomainError);
}

TEST(OptimalPair, UniqueRootInBox)
{
  // nested scan: for each M the cleared orthogonality root in omega, then
  // sign changes of the optimality residual along that branch
  const Dimension d2(2);
  for (double a : {0.1, 0.3, 0.6, 0.9}) {
    int roots = 0;
    double prev = NAN;
    const int n = 400;
    for (int i = 1; i < n; ++i) {
      const double M = 0.5 + 0.5 * i / n;
      const double m = 1.0 / M - 1.0;
      const FixedRatioEigenvalue e = twisted_eigenvalue_fixed_m(d2, a, m);
      if (e.branch != Branch::non_dirichlet)
        continue;
      const double f2 = optimality_residual(d2, a, M, e.omega);
      if (!std::isnan(prev) && (f2 > 0) != (prev > 0))
        ++roots;
      prev = f2;
    }
    EXPECT_EQ(roots, 1) << a;
  }
}

TEST(FixedRatio, SymmetricIndependentOfAlpha)
{
  const Dimension d2(2);
  for (double a : {0.1, 0.5, 1.0}) {
    const FixedRatioEigenvalue e = twisted_eigenvalue_fixed_m(d2, a, 1.0);
    EXPECT_NEAR(e.lambda_scaled, 2 * kPi * kJ01 * kJ01, 1e-10);
    EXPECT_EQ(e.branch, Branch::symmetric);
  }
  EXPECT_NEAR(twisted_eigenvalue_fixed_m(d2, 0.3, 1.0).lambda_scaled, 36.3368, 1e-3);
  const Dimension d3(3);
  EXPECT_NEAR(twisted_eigenvalue_fixed_m(d3, 0.3, 1.0).lambda_scaled, symmetric_eigenvalue(d3), 1e-10);
}

TEST(FixedRatio, MatchesOptimumAndIsMinimal)
{
  const Dimension d2(2);
  const double a = 1.0 / 6;
  const FixedRatioEigenvalue at = twisted_eigenvalue_fixed_m(d2, a, 0.3635);
  EXPECT_NEAR(at.lambda_scaled, 27.7534, 5e-3);
  EXPECT_GT(twisted_eigenvalue_fixed_m(d2, a, 0.9).lambda_scaled, at.lambda_scaled);

  const OptimalPair p = solve_optimal_pair(d2, a);
  const FixedRatioEigenvalue exact = twisted_eigenvalue_fixed_m(d2, a, p.m);
  EXPECT_NEAR(exact.lambda_scaled, p.lambda_scaled, 1e-9);
  EXPECT_EQ(exact.branch, Branch::non_dirichlet);

  double best = INFINITY;
  const int n = 200;
  for (int i = 1; i <= n; ++i)
    best = std::min(best, twisted_eigenvalue_fixed_m(d2, a, double(i) / n).lambda_scaled);
  // quadratic in the grid step around the minimum
  EXPECT_GE(best, p.lambda_scaled - 1e-9);
  EXPECT_LE(best - p.lambda_scaled, 1e-3);
}

TEST(FixedRatio, BelowUpperBound)
{
  const Dimension d2(2);
  for (int i = 1; i <= 50; ++i) {
    const double m = i / 50.0;
    const double v = twisted_eigenvalue_fixed_m(d2, 1.0 / 6, m).lambda_scaled;
    EXPECT_LE(v, upper_bound_f(d2, 1.0 / 6, m) * (1 + 1e-12)) << m;
  }
}

TEST(FixedRatio, DirichletBranchForTinySatellite)
{
  // once the small ball is tiny its factor J_{d/2-1}(x-) cannot vanish in the
  // window and the second Dirichlet eigenvalue of B+ is the answer
  const Dimension d2(2);
  const FixedRatioEigenvalue e = twisted_eigenvalue_fixed_m(d2, 0.9, 1e-3);
  const TwoBallConfig c = TwoBallConfig::from_ratio(d2, 0.9, 1e-3);
  EXPECT_LE(e.lambda_scaled, kPi * std::pow(d2.j_upper() / c.r_plus, 2) * (1 + 1e-14));
  EXPECT_GE(e.lambda_scaled, kPi * std::pow(d2.j_lower() / c.r_plus, 2));
}

TEST(Eigenfunction, BoundaryAndCenter)
{
  const OptimalPair p = solve_optimal_pair(Dimension(3), 0.4);
  const RadialEigenfunction ef = RadialEigenfunction::from_pair(p);
  for (Side s : {Side::plus, Side::minus}) {
    EXPECT_EQ(eval_eigenfunction(ef, s, ef.radius(s)), 0.0);
    EXPECT_EQ(eval_gradient(ef, s, 0.0), 0.0);
    EXPECT_NEAR(eval_gradient(ef, s, 1e-8), 0.0, 1e-7);
    EXPECT_TRUE(std::isfinite(eval_eigenfunction(ef, s, 0.0)));
  }
  EXPECT_THROW(eval_eigenfunction(ef, Side::minus, 1.0), DomainError);
  EXPECT_THROW(eval_gradient(ef, Side::plus, -0.1), DomainError);
}

TEST(Eigenfunction, GradientMatchesDifferenceQuotient)
{
  const OptimalPair p = solve_optimal_pair(Dimension(2), 0.3);
  const RadialEigenfunction ef = RadialEigenfunction::from_pair(p);
  const double h = 1e-6;
  for (Side s : {Side::plus, Side::minus}) {
    const double R = ef.radius(s);
    for (double t : {0.1, 0.4, 0.8}) {
      const double r = t * R;
      const double fd = (eval_eigenfunction(ef, s, r + h) - eval_eigenfunction(ef, s, r - h)) / (2 * h);
      EXPECT_NEAR(fd, eval_gradient(ef, s, r), 1e-8);
    }
  }
}

TEST(Eigenfunction, OdeResidual)
{
  for (int d : {2, 3}) {
    const OptimalPair p = solve_optimal_pair(Dimension(d), 0.25);
    EXPECT_LE(ode_residual(RadialEigenfunction::from_pair(p)), 1e-8);
  }
}

TEST(Eigenfunction, OrthogonalityAndMultiplier)
{
  for (int d : {2, 3}) {
    const Dimension dim(d);
    for (double a : {0.1, 0.5, 0.9}) {
      const OptimalPair p = solve_optimal_pair(dim, a);
      const RadialEigenfunction ef = RadialEigenfunction::from_pair(p);
      EXPECT_LE(std::fabs(orthogonality_integral(ef)), 1e-10);
      EXPECT_LE(std::fabs(orthogonality_integral_closed_form(ef)), 1e-14);
      EXPECT_LT(ef.xi, 0.0);
      // xi+ = -alpha xi- at a root of the orthogonality equation
      EXPECT_NEAR(ef.xi_side(Side::plus), -a * ef.xi_side(Side::minus), 1e-10 * std::fabs(ef.xi));
    }
  }
}

TEST(Eigenfunction, ClosedFormBallIntegral)
{
  // coefficients away from a root still give matching quadrature and closed form
  const Dimension d2(2);
  const TwoBallConfig c = TwoBallConfig::from_ratio(d2, 0.3, 0.5);
  const RadialEigenfunction ef = RadialEigenfunction::with_coefficients(c, 3.1, 0.7, 1.3);
  EXPECT_NEAR(orthogonality_integral(ef), orthogonality_integral_closed_form(ef), 1e-11);
}

TEST(BoundaryGradient, OptimumAndSymmetric)
{
  const OptimalPair p = solve_optimal_pair(Dimension(2), 1.0 / 6);
  const BoundaryGradientResidual r = boundary_gradient_identity(p);
  EXPECT_LE(r.residual_eq, 1e-9);
  EXPECT_LE(r.residual_mu, 1e-8);
  const BoundaryGradientResidual s = boundary_gradient_identity(solve_optimal_pair(Dimension(2), 1.0));
  EXPECT_EQ(s.residual_eq, 0.0);
  // mu d |Omega| = 2 lambda int u^2 with the normalization int u^2 = 1
  EXPECT_NEAR(r.mu * 2 * kPi, 2 * p.omega * p.omega, 1e-8);
}

TEST(Pohozaev, OptimumAndSingleBall)
{
  const OptimalPair p = solve_optimal_pair(Dimension(2), 1.0 / 6);
  const RadialEigenfunction ef = RadialEigenfunction::from_pair(p);
  EXPECT_LE(pohozaev_residual(ef, p.omega * p.omega), 1e-8);
  // scaling the eigenfunction does not matter
  EXPECT_LE(pohozaev_residual(ef.scaled(17.0), p.omega * p.omega), 1e-8);

  for (int d : {2, 3}) {
    const Dimension dim(d);
    const TwoBallConfig ball = TwoBallConfig::from_ratio(dim, 1.0, 0.0);
    const double w = dim.j_lower() / ball.r_plus;
    const RadialEigenfunction single = RadialEigenfunction::with_coefficients(ball, w, 1.0, 0.0);
    EXPECT_NEAR(single.xi, 0.0, 1e-14);
    EXPECT_LE(pohozaev_residual(single, w * w), 1e-8);
  }
  EXPECT_THROW(pohozaev_residual(ef.scaled(0.0), 1.0), DomainError);
}

TEST(CurveDerivatives, MatchFiniteDifferences)
{
  const Dimension d2(2);
  const double a = 0.5, h = 1e-4;
  const CurveDerivatives cd = curve_derivatives(solve_optimal_pair(d2, a));
  const OptimalPair lo = solve_optimal_pair(d2, a - h), hi = solve_optimal_pair(d2, a + h);
  EXPECT_LT(rel((hi.m - lo.m) / (2 * h), cd.dm_dalpha), 1e-4);
  EXPECT_LT(rel((hi.lambda_scaled - lo.lambda_scaled) / (2 * h), cd.dlambda_dalpha), 1e-4);
}

TEST(CurveDerivatives, Positive)
{
  for (int i = 1; i <= 9; ++i) {
    const CurveDerivatives cd = curve_derivatives(solve_optimal_pair(Dimension(2), i / 10.0));
    EXPECT_GT(cd.dm_dalpha, 0.0);
    EXPECT_GT(cd.dlambda_dalpha, 0.0);
  }
}

TEST(CurveDerivatives, SymmetricLimit)
{
  const Dimension d2(2);
  const CurveDerivatives lim = symmetric_limit_derivatives(d2);
  const CurveDerivatives near = curve_derivatives(solve_optimal_pair(d2, 0.995));
  EXPECT_NEAR(near.dm_dalpha, lim.dm_dalpha, 0.01);
  EXPECT_NEAR(near.dlambda_dalpha, 0.0, 0.1);
  double prev = 0.0;
  for (double e : {1e-1, 3e-2, 1e-2, 3e-3}) {
    const double m = solve_optimal_pair(d2, 1.0 - e).m;
    EXPECT_LT(m, 1.0);
    EXPECT_GT(m, prev);
    prev = m;
  }
}

TEST(Bounds, LowerBounds)
{
  const Dimension d2(2);
  const LowerBounds b = lower_bounds(d2, 1.0 / 6);
  EXPECT_NEAR(b.m_lb, 1.0 / 36, 1e-15);
  EXPECT_NEAR(b.lambda_lb, 37.0 / 36 * kPi * kJ01 * kJ01, 1e-11);
  EXPECT_NEAR(b.lambda_lb, 18.672, 2e-3);
  EXPECT_EQ(lower_bounds(d2, 1.0).m_lb, 1.0);
}

TEST(Bounds, UpperBoundF)
{
  const Dimension d2(2);
  EXPECT_NEAR(upper_bound_f(d2, 0.3, 1.0), 2 * kPi * kJ01 * kJ01, 1e-10);
  EXPECT_NEAR(upper_bound_f(d2, 0.3, 1.0), 36.3368, 1e-3);
  for (int d : {2, 3}) {
    const Dimension dim(d);
    const double a = 0.4, eps = 1e-5;
    const double slope = (upper_bound_f(dim, a, 1.0) - upper_bound_f(dim, a, 1.0 - eps)) / eps;
    const double expected =
        std::pow(4.0, 1.0 / d) * (1 - a * a) / (d * (1 + a * a)) * dim.delta_pow() * std::pow(dim.j_lower(), 2);
    EXPECT_LT(rel(slope, expected), 1e-3);
    EXPECT_GT(expected, 0.0);
  }
}

TEST(Mediant, Properties)
{
  EXPECT_DOUBLE_EQ(mediant_value(3, 1.5, 2, 1, 0.7), 2.0);
  EXPECT_DOUBLE_EQ(mediant_value(2, 1, 1, 2, 0.0), 0.5);
  EXPECT_DOUBLE_EQ(mediant_value(2, 1, 1, 2, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(mediant_value(2, 1, 1, 2, INFINITY), 2.0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.01, 10.0);
  for (int k = 0; k < 100; ++k) {
    const double a1 = U(rng), a2 = U(rng), b1 = U(rng), b2 = U(rng);
    const double q = mediant_value(a1, a2, b1, b2, 1.0);
    EXPECT_LE(std::min(a1 / a2, b1 / b2), q * (1 + 1e-15));
    EXPECT_GE(std::max(a1 / a2, b1 / b2), q * (1 - 1e-15));
  }
  EXPECT_THROW(mediant_value(-1, 1, 1, 1, 1), DomainError);
}
