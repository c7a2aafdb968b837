#pragma once

// Real-order Bessel functions of the first kind, their positive zeros, and
// the ratio functions used by the two-ball transcendental system.
//
// Operating envelope: 0 <= nu <= 8, 0 <= x <= 100. Outside it the routines
// still return values but the accuracy target (1e-12 relative, away from
// zeros) is not guaranteed.

namespace twisted {

/// J_nu(x) for nu >= 0, x >= 0.
double bessel_j(double nu, double x);

/// x^{-nu} J_nu(x). Finite at x = 0, where it equals 1 / (2^nu Gamma(nu+1)).
double bessel_j_scaled(double nu, double x);

/// d/dx J_nu(x) = (nu/x) J_nu(x) - J_{nu+1}(x), with the x = 0 limit.
double bessel_j_prime(double nu, double x);

/// m-th positive zero j_{nu,m} of J_nu, m >= 1.
double bessel_zero(double nu, int m);

/// Spatial dimension d >= 2 with the constants the solvers need.
///
/// sigma = d/2 is the order parameter; the ratio functions below involve
/// J_{sigma-1}, J_sigma and J_{sigma+1}. The first zeros of J_{sigma-1} and
/// J_sigma bound the admissible frequency window and are cached here.
class Dimension {
public:
  explicit Dimension(int d);

  int d() const { return d_; }
  double sigma() const { return sigma_; }
  /// Volume of the unit ball in R^d.
  double delta() const { return delta_; }
  /// delta^{2/d}, the factor that converts omega^2 to the scale-invariant
  /// eigenvalue on a domain of measure delta.
  double delta_pow() const { return delta_pow_; }
  /// j_{d/2-1,1}
  double j_lower() const { return j_lower_; }
  /// j_{d/2,1}
  double j_upper() const { return j_upper_; }

private:
  int d_;
  double sigma_;
  double delta_;
  double delta_pow_;
  double j_lower_;
  double j_upper_;
};

/// Volume of the unit ball pi^{d/2} / Gamma(d/2 + 1), using the factorial
/// closed forms for even and odd d.
double unit_ball_volume(int d);

/// phi(x) = x^d J_{d/2+1}(x) / J_{d/2-1}(x). Throws PoleProximityError near a
/// zero of J_{d/2-1}.
double phi(const Dimension& dim, double x);

/// phi'(x) = d x^{d-1} J_{d/2}^2 / J_{d/2-1}^2.
double phi_prime(const Dimension& dim, double x);

/// Phi(x) = x^d J_{d/2+1}(x) / J_{d/2}(x). Throws PoleProximityError near a
/// zero of J_{d/2}.
double big_phi(const Dimension& dim, double x);

/// Phi'(x) = x^d - Phi/x + Phi^2 / x^d.
double big_phi_prime(const Dimension& dim, double x);

/// Upsilon(x) = x (J_{s+1}/J_s + J_s/J_{s+1}), s = d/2.
double upsilon(const Dimension& dim, double x);

} // namespace twisted
