#pragma once

// Twisted Dirichlet eigenvalues on the union of two disjoint balls with a
// bang-bang orthogonality weight (alpha on the larger ball B+, 1 on B-).
//
// Configurations are normalized to total volume delta_d, i.e. the radii
// satisfy R+^d + R-^d = 1. With M = R+^d and omega = sqrt(lambda) the
// eigenvalue problem reduces to the transcendental system
//
//   f1 = phi(omega (1-M)^{1/d}) + alpha^2 phi(omega M^{1/d})  (orthogonality)
//   f2 = Phi(omega (1-M)^{1/d}) - alpha Phi(omega M^{1/d})    (optimality)
//
// whose unique root in the admissible box gives the optimal pair of balls.
// All reported eigenvalues use the scale-invariant normalization
// delta_d^{2/d} omega^2.

#include <array>
#include <string_view>

#include "twisted/bessel.hpp"

namespace twisted {

struct TwoBallConfig {
  Dimension dim;
  double alpha;
  double r_plus;
  double r_minus;

  /// Radii from the measure ratio m = |B-| / |B+| in (0, 1].
  static TwoBallConfig from_ratio(const Dimension& dim, double alpha, double m);
  /// Radii from the scaled measure M = R+^d in [1/2, 1].
  static TwoBallConfig from_measure(const Dimension& dim, double alpha, double M);

  double ratio() const;
};

struct OptimalPair {
  Dimension dim;
  double alpha;
  double M;     // R+^d
  double omega; // sqrt(lambda) on the configuration of total volume delta_d
  double m;     // 1/M - 1
  double lambda_scaled;
  double s_plus;
  double s_minus;
  double residual_norm;
  int continuation_steps = 0;
  /// True when alpha lies in [1 - 1e-3, 1] and the symmetric closed form
  /// (two equal balls) was returned instead of a Newton solve.
  bool symmetric_limit = false;

  double r_plus() const;
  double r_minus() const;
  double x_plus() const { return omega * r_plus(); }
  double x_minus() const { return omega * r_minus(); }
  TwoBallConfig config() const;
};

enum class ResidualForm { quotient, cleared };

/// f1 in quotient form, or its pole-free multiple
/// x-^d J_{s+1}(x-) J_{s-1}(x+) + alpha^2 x+^d J_{s+1}(x+) J_{s-1}(x-).
double orthogonality_residual(const Dimension& dim, double alpha, double M, double omega,
                              ResidualForm form = ResidualForm::quotient);

/// f2 = Phi(x-) - alpha Phi(x+).
double optimality_residual(const Dimension& dim, double alpha, double M, double omega);

/// Row-major [[df1/dM, df1/domega], [df2/dM, df2/domega]].
using Matrix2 = std::array<std::array<double, 2>, 2>;

Matrix2 system_jacobian(const Dimension& dim, double alpha, double M, double omega);

inline double determinant(const Matrix2& j) { return j[0][0] * j[1][1] - j[0][1] * j[1][0]; }

/// Closed form of the Jacobian determinant,
/// alpha x- x+ / (d omega M (1-M)) (phi'(x-) Phi'(x+) + alpha phi'(x+) Phi'(x-)).
double jacobian_determinant_closed_form(const Dimension& dim, double alpha, double M, double omega);

/// True when x- in (0, j_{d/2-1,1}), x+ in (j_{d/2-1,1}, j_{d/2,1}) and M in (1/2, 1).
bool in_admissible_box(const Dimension& dim, double M, double omega);

/// max(|f1| / (|phi(x-)| + alpha^2 |phi(x+)|), |f2| / (Phi(x-) + alpha Phi(x+))).
double scaled_residual(const Dimension& dim, double alpha, double M, double omega);

/// Solves F(alpha, M, omega) = 0 by Newton continuation from the symmetric
/// configuration at alpha = 1 down to the requested alpha.
OptimalPair solve_optimal_pair(const Dimension& dim, double alpha);

enum class Branch { non_dirichlet, dirichlet, symmetric };

std::string_view to_string(Branch branch);

struct FixedRatioEigenvalue {
  double lambda_scaled;
  double omega;
  Branch branch;
};

/// First twisted eigenvalue of the two-ball configuration with measure
/// ratio m and weight alpha, as the smaller of the radial (non-Dirichlet)
/// root and the second Dirichlet eigenvalue of B+.
FixedRatioEigenvalue twisted_eigenvalue_fixed_m(const Dimension& dim, double alpha, double m);

enum class Side { plus, minus };

/// Piecewise radial eigenfunction u = u+ on B+, u = -u- on B-, with
///   u_side(r) = s_side (r^{1-d/2} J_{d/2-1}(omega r) - R^{1-d/2} J_{d/2-1}(omega R)).
struct RadialEigenfunction {
  TwoBallConfig config;
  double omega;
  double s_plus;
  double s_minus;
  /// Multiplier of the weight in -Delta u = lambda u + xi chi_alpha; equals
  /// the right-hand side of the radial ODE on B-.
  double xi;

  /// Coefficients chosen so that the orthogonality integral vanishes,
  /// s+ = R-^{d/2+1} J_{d/2+1}(omega R-), s- = alpha R+^{d/2+1} J_{d/2+1}(omega R+).
  static RadialEigenfunction with_orthogonal_coefficients(const TwoBallConfig& config, double omega);
  /// Explicit coefficients; xi is taken from B-, or from B+ when s- = 0.
  static RadialEigenfunction with_coefficients(const TwoBallConfig& config, double omega, double s_plus, double s_minus);
  static RadialEigenfunction from_pair(const OptimalPair& pair);

  double radius(Side side) const { return side == Side::plus ? config.r_plus : config.r_minus; }
  double coefficient(Side side) const { return side == Side::plus ? s_plus : s_minus; }
  /// Right-hand side xi_side of u'' + (d-1)/r u' + omega^2 u = xi_side.
  double xi_side(Side side) const;
  RadialEigenfunction scaled(double factor) const;
};

/// u_side(r), 0 <= r <= R_side.
double eval_eigenfunction(const RadialEigenfunction& ef, Side side, double r);

/// u_side'(r) = -s omega r^{1-d/2} J_{d/2}(omega r).
double eval_gradient(const RadialEigenfunction& ef, Side side, double r);

/// Integral of u^2 over B+ and B- by adaptive radial quadrature.
double norm_squared(const RadialEigenfunction& ef);

/// Integral of u chi_alpha = alpha int_{B+} u+ - int_{B-} u- by quadrature.
double orthogonality_integral(const RadialEigenfunction& ef);

/// Same integral from the closed form delta s R^{d/2+1} J_{d/2+1}(omega R).
double orthogonality_integral_closed_form(const RadialEigenfunction& ef);

/// Largest |u'' + (d-1)/r u' + omega^2 u - xi_side| over `samples` interior
/// radii per side, with u'' from central differences of the closed-form
/// gradient (step h). Relative to omega^2 max|u| + |xi_side|.
double ode_residual(const RadialEigenfunction& ef, int samples = 20, double h = 1e-5);

struct BoundaryGradientResidual {
  double residual_eq; // ||u+'(R+)| - |u-'(R-)|| / max(|u+'|, |u-'|)
  double residual_mu; // ||grad u|^2 - 2 lambda / (d |Omega|) int u^2| with int u^2 = 1
  double mu;          // |grad u|^2 on the boundary after normalization
};

BoundaryGradientResidual boundary_gradient_identity(const OptimalPair& pair);

/// |2 lambda - sum_side |u'(R)|^2 d delta R^d| after normalizing int u^2 = 1.
/// `lambda` is the unscaled eigenvalue omega^2.
double pohozaev_residual(const RadialEigenfunction& ef, double lambda);

struct CurveDerivatives {
  double dM_dalpha;
  double domega_dalpha;
  double dm_dalpha;
  double dlambda_dalpha;
};

CurveDerivatives curve_derivatives(const OptimalPair& pair);

/// Limits of M'(alpha) and omega'(alpha) as alpha -> 1-.
CurveDerivatives symmetric_limit_derivatives(const Dimension& dim);

struct LowerBounds {
  double m_lb;
  double lambda_lb;
};

/// m(alpha) >= alpha^{d/(d-1)}, lambda(alpha) >= (1 + alpha^{d/(d-1)})^{2/d} delta^{2/d} j_{d/2-1,1}^2.
LowerBounds lower_bounds(const Dimension& dim, double alpha);

/// Upper bound f(m) from testing with first Dirichlet eigenfunctions of the two balls.
double upper_bound_f(const Dimension& dim, double alpha, double m);

/// Q(t) = (a1 t + b1) / (a2 t + b2).
double mediant_value(double a1, double a2, double b1, double b2, double t);

/// delta^{2/d} 2^{2/d} j_{d/2-1,1}^2, the value on two equal balls.
double symmetric_eigenvalue(const Dimension& dim);

/// delta^{2/d} j_{d/2-1,1}^2, the Faber-Krahn value (alpha -> 0 limit).
double single_ball_eigenvalue(const Dimension& dim);

} // namespace twisted
