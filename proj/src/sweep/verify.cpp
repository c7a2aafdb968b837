#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "twisted/bessel.hpp"
#include "twisted/errors.hpp"
#include "twisted/grid.hpp"
#include "twisted/quadrature.hpp"
#include "twisted/sweep.hpp"
#include "twisted/two_ball.hpp"

namespace twisted::sweep {

namespace {

std::string num(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

struct Collector {
  std::string suite;
  std::vector<Check>& out;

  void add(std::string name, bool pass, std::string detail) { out.push_back({suite, std::move(name), pass, std::move(detail)}); }

  // `worst` against a bound, reported as "worst <= bound"
  void bound(std::string name, double worst, double limit)
  {
    add(std::move(name), worst <= limit, num(worst) + " <= " + num(limit));
  }

  template <class F>
  void guarded(const std::string& name, F f)
  {
    try {
      f();
    } catch (const std::exception& e) {
      add(name, false, std::string("threw: ") + e.what());
    }
  }
};

std::vector<double> logspace(double a, double b, int n)
{
  std::vector<double> v;
  for (int i = 0; i < n; ++i)
    v.push_back(a * std::pow(b / a, double(i) / (n - 1)));
  return v;
}

void bessel_suite(std::vector<Check>& out)
{
  Collector c{"bessel", out};
  c.guarded("zeros", [&] {
    const double e = std::max(std::fabs(bessel_zero(0, 1) - 2.404825557695773),
                              std::fabs(bessel_zero(1, 1) - 3.831705970207512));
    c.bound("j_{0,1}, j_{1,1}", e, 1e-11);
  });
  c.guarded("recurrence", [&] {
    double worst = 0;
    for (double nu : {1.0, 1.5, 2.0, 3.0})
      for (double x : logspace(1e-3, 50, 100)) {
        const double a = bessel_j(nu - 1, x), b = bessel_j(nu + 1, x);
        const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
        worst = std::max(worst, std::fabs(a + b - 2 * nu / x * bessel_j(nu, x)) / scale);
      }
    c.bound("recurrence", worst, 1e-11);
  });
  c.guarded("derivative", [&] {
    double worst = 0;
    const double h = 1e-6;
    for (double nu : {0.0, 1.0, 1.5, 2.5})
      for (double x : logspace(0.05, 30, 60)) {
        const double fd = (bessel_j(nu, x + h) - bessel_j(nu, x - h)) / (2 * h);
        const double ex = bessel_j_prime(nu, x);
        worst = std::max(worst, std::fabs(fd - ex) / std::max(std::fabs(ex), 1e-2 / std::sqrt(x)));
      }
    c.bound("derivative", worst, 1e-7);
  });
  c.guarded("integral", [&] {
    double worst = 0;
    for (double nu : {1.0, 1.5, 2.0})
      for (double w : {0.5, 2.0, 3.7})
        for (double R : {0.3, 1.0, 2.5}) {
          auto f = [&](double r) { return std::pow(r, nu) * bessel_j(nu - 1, w * r); };
          const double q = integrate(f, 0.0, R, 1e-13).value;
          worst = std::max(worst, std::fabs(q - std::pow(R, nu) / w * bessel_j(nu, w * R)));
        }
    c.bound("integral", worst, 1e-9);
  });
  c.guarded("monotonicity", [&] {
    bool ok = true;
    for (int d : {2, 3, 4}) {
      const Dimension dim(d);
      const double p = dim.j_lower(), q = dim.j_upper();
      for (auto [a, b] : {std::pair{1e-3, p - 1e-3}, std::pair{p + 1e-3, q - 1e-3}}) {
        double prev = -INFINITY;
        for (int i = 0; i < 200; ++i) {
          const double v = phi(dim, a + (b - a) * i / 199.0);
          ok = ok && v > prev;
          prev = v;
        }
      }
      double pp = 0, pu = 0;
      for (int i = 0; i < 200; ++i) {
        const double x = 1e-3 + (q - 2e-3) * i / 199.0;
        const double P = big_phi(dim, x), U = upsilon(dim, x);
        ok = ok && P > pp && U > pu;
        pp = P;
        pu = U;
      }
    }
    c.add("phi/Phi/Upsilon monotone", ok, "200-point grids, d = 2, 3, 4");
  });
}

void twoball_suite(std::vector<Check>& out)
{
  Collector c{"twoball", out};
  const Dimension d2(2);
  struct Entry {
    double alpha, m, lambda, m_tol, l_tol;
  };
  for (const Entry& e : {Entry{1.0 / 6, 0.3635, 27.7534, 5e-4, 5e-3}, Entry{1.0 / 20, 0.1664, 22.7001, 5e-4, 5e-3},
                         Entry{1.0, 1.0, 36.3368, 0.0, 1e-3}}) {
    char label[48];
    std::snprintf(label, sizeof label, "table alpha=%.4g", e.alpha);
    const std::string name = label;
    c.guarded(name, [&] {
      const OptimalPair p = solve_optimal_pair(d2, e.alpha);
      const bool ok = std::fabs(p.m - e.m) <= e.m_tol && std::fabs(p.lambda_scaled - e.lambda) <= e.l_tol;
      char buf[96];
      std::snprintf(buf, sizeof buf, "m=%.6f lambda=%.6f", p.m, p.lambda_scaled);
      c.add(name, ok, buf);
    });
  }
  c.guarded("bounds", [&] {
    int violations = 0;
    double pm = -1, pl = -1;
    bool mono = true;
    for (int i = 0; i < 100; ++i) {
      const double a = 0.005 + 0.99 * i / 99.0;
      const OptimalPair p = solve_optimal_pair(d2, a);
      const LowerBounds lb = lower_bounds(d2, a);
      violations += (p.m < lb.m_lb) + (p.lambda_scaled < lb.lambda_lb) + (p.lambda_scaled >= symmetric_eigenvalue(d2));
      mono = mono && p.m > pm && p.lambda_scaled > pl;
      pm = p.m;
      pl = p.lambda_scaled;
    }
    c.add("lower/upper bounds", violations == 0, std::to_string(violations) + " violations on 100 points");
    c.add("monotone m, lambda", mono, "100 points");
  });
  c.guarded("identities", [&] {
    double eq = 0, mu = 0, poh = 0, ode = 0, orth = 0, det = INFINITY;
    for (int d : {2, 3})
      for (double a : {0.05, 0.15, 0.3, 0.5, 0.7}) {
        const Dimension dim(d);
        const OptimalPair p = solve_optimal_pair(dim, a);
        const BoundaryGradientResidual bg = boundary_gradient_identity(p);
        const RadialEigenfunction ef = RadialEigenfunction::from_pair(p);
        eq = std::max(eq, std::fabs(bg.residual_eq));
        mu = std::max(mu, std::fabs(bg.residual_mu));
        poh = std::max(poh, std::fabs(pohozaev_residual(ef, p.omega * p.omega)));
        ode = std::max(ode, ode_residual(ef));
        orth = std::max(orth, std::fabs(orthogonality_integral(ef)));
        det = std::min(det, determinant(system_jacobian(dim, a, p.M, p.omega)));
      }
    c.bound("boundary-gradient", eq, 1e-9);
    c.bound("multiplier", mu, 1e-8);
    c.bound("Pohozaev", poh, 1e-8);
    c.bound("ODE", ode, 1e-8);
    c.bound("orthogonality", orth, 1e-10);
    c.add("Jacobian determinant", det > 0, "min " + num(det));
  });
}

void grid_suite(std::vector<Check>& out)
{
  using namespace grid;
  Collector c{"grid", out};
  const double h = 1.0 / 128, pi2 = std::numbers::pi * std::numbers::pi;
  c.guarded("square", [&] {
    const GridDomain g = GridDomain::from_shapes(ShapeSpec::unit_square(), h);
    const auto e = dirichlet_eigs(g, 2);
    c.bound("square lambda_1", std::fabs(e[0].lambda / (2 * pi2) - 1), 5e-3);
    c.bound("square lambda_2", std::fabs(e[1].lambda / (5 * pi2) - 1), 5e-3);
    const double t = twisted_eig(g, ConstraintField::constant(g)).lambda;
    c.add("square interlacing", e[0].lambda < t && t <= e[1].lambda * (1 + 1e-9), num(t));
  });
  c.guarded("disk", [&] {
    const GridDomain g = GridDomain::from_shapes(ShapeSpec::unit_disk(), h);
    const double j = bessel_zero(0, 1);
    c.bound("disk lambda_1", std::fabs(dirichlet_eigs(g, 1)[0].lambda / (j * j) - 1), 1e-2);
  });
  c.guarded("two disks", [&] {
    const GridDomain g = GridDomain::from_shapes(ShapeSpec::two_disks(0.3635), h);
    const auto e = dirichlet_eigs(g, 2);
    const double t = twisted_eig(g, ConstraintField::bang_bang(g, 1.0 / 6)).lambda;
    c.bound("two-disk twisted", std::fabs(t * g.area() / 27.7534 - 1), 2e-2);
    c.add("two-disk interlacing", e[0].lambda <= t && t <= e[1].lambda * (1 + 1e-9), num(t));
  });
}

} // namespace

std::vector<Check> run_verify(std::string_view suite)
{
  const bool all = suite == "all";
  if (!all && suite != "bessel" && suite != "twoball" && suite != "grid")
    throw InputError("unknown suite '" + std::string(suite) + "'");
  std::vector<Check> out;
  if (all || suite == "bessel")
    bessel_suite(out);
  if (all || suite == "twoball")
    twoball_suite(out);
  if (all || suite == "grid")
    grid_suite(out);
  return out;
}

void write_report(std::ostream& out, const std::vector<Check>& checks)
{
  std::size_t w = 4;
  for (const Check& c : checks)
    w = std::max(w, c.name.size());
  int failed = 0;
  for (const Check& c : checks) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-4s  %-8s %-*s  %s\n", c.pass ? "PASS" : "FAIL", c.suite.c_str(), int(w),
                  c.name.c_str(), c.detail.c_str());
    out << buf;
    failed += !c.pass;
  }
  out << checks.size() - failed << "/" << checks.size() << " checks passed\n";
}

} // namespace twisted::sweep
