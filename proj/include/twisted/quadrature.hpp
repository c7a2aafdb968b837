#pragma once

#include <array>
#include <cmath>
#include <functional>

#include "twisted/errors.hpp"

namespace twisted {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

namespace detail {

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
// 7-point Gauss weights at the odd indices.
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
void kronrod15(F& f, double a, double b, double& kronrod, double& gauss)
{
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  kronrod = fc * kKronrodWeights[7];
  gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1)
      gauss += kGaussWeights[i / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
}

template <class F>
double adapt(F& f, double a, double b, double whole, double gauss, double tol, int depth, QuadratureResult& out)
{
  const double err = std::fabs(whole - gauss);
  if (err <= tol || depth == 0) {
    out.error_estimate += err;
    return whole;
  }
  const double mid = 0.5 * (a + b);
  double kl, gl, kr, gr;
  kronrod15(f, a, mid, kl, gl);
  kronrod15(f, mid, b, kr, gr);
  out.evaluations += 30;
  return adapt(f, a, mid, kl, gl, 0.5 * tol, depth - 1, out) + adapt(f, mid, b, kr, gr, 0.5 * tol, depth - 1, out);
}

} // namespace detail

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b] with recursive
/// bisection until the local Gauss/Kronrod difference is below its share of
/// abs_tol.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol = 1e-12, int max_depth = 40)
{
  QuadratureResult out;
  if (a == b)
    return out;
  double k, g;
  detail::kronrod15(f, a, b, k, g);
  out.evaluations = 15;
  out.value = detail::adapt(f, a, b, k, g, abs_tol, max_depth, out);
  return out;
}

} // namespace twisted
