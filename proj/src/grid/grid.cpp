#include "twisted/grid.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "twisted/errors.hpp"
#include "twisted/two_ball.hpp"

namespace twisted::grid {

namespace {

constexpr std::size_t kMinNodes = 16;
constexpr unsigned kSeed = 20240601u;

void require_nondegenerate(const GridDomain& domain)
{
  if (domain.size() < kMinNodes)
    throw DomainError("degenerate domain: fewer than 16 interior nodes");
}

} // namespace

bool ShapeSpec::shape_contains(std::size_t index, double x, double y) const
{
  const Shape& s = shapes.at(index);
  if (const Disk* d = std::get_if<Disk>(&s)) {
    const double dx = x - d->cx, dy = y - d->cy;
    return dx * dx + dy * dy < d->r * d->r;
  }
  const Rect& r = std::get<Rect>(s);
  return x > r.x0 && x < r.x1 && y > r.y0 && y < r.y1;
}

bool ShapeSpec::contains(double x, double y) const
{
  return owner(x, y) >= 0;
}

int ShapeSpec::owner(double x, double y) const
{
  for (std::size_t i = 0; i < shapes.size(); ++i)
    if (shape_contains(i, x, y))
      return int(i);
  return -1;
}

ShapeSpec ShapeSpec::scaled(double s) const
{
  ShapeSpec out;
  for (const Shape& sh : shapes) {
    if (const Disk* d = std::get_if<Disk>(&sh))
      out.shapes.push_back(Disk{s * d->cx, s * d->cy, s * d->r});
    else {
      const Rect& r = std::get<Rect>(sh);
      out.shapes.push_back(Rect{s * r.x0, s * r.y0, s * r.x1, s * r.y1});
    }
  }
  return out;
}

std::array<double, 4> ShapeSpec::bounding_box() const
{
  if (shapes.empty())
    throw InputError("shape list is empty");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::array<double, 4> b{inf, inf, -inf, -inf};
  for (const Shape& sh : shapes) {
    std::array<double, 4> e;
    if (const Disk* d = std::get_if<Disk>(&sh))
      e = {d->cx - d->r, d->cy - d->r, d->cx + d->r, d->cy + d->r};
    else {
      const Rect& r = std::get<Rect>(sh);
      e = {r.x0, r.y0, r.x1, r.y1};
    }
    b[0] = std::min(b[0], e[0]);
    b[1] = std::min(b[1], e[1]);
    b[2] = std::max(b[2], e[2]);
    b[3] = std::max(b[3], e[3]);
  }
  return b;
}

ShapeSpec ShapeSpec::unit_square()
{
  return {{Rect{0.0, 0.0, 1.0, 1.0}}};
}

ShapeSpec ShapeSpec::unit_disk()
{
  return {{Disk{0.0, 0.0, 1.0}}};
}

ShapeSpec ShapeSpec::two_disks(double m, double gap)
{
  if (!(m > 0.0 && m <= 1.0))
    throw InputError("two_disks: ratio must lie in (0, 1]");
  const double rp = 1.0 / std::sqrt(1.0 + m);
  const double rm = std::sqrt(m / (1.0 + m));
  return {{Disk{0.0, 0.0, rp}, Disk{rp + gap + rm, 0.0, rm}}};
}

GridDomain GridDomain::from_shapes(const ShapeSpec& spec, double h)
{
  if (!(h > 0.0) || !std::isfinite(h))
    throw InputError("grid spacing must be positive");
  const auto b = spec.bounding_box();
  for (double v : b)
    if (!std::isfinite(v))
      throw InputError("shape extents must be finite");
  GridDomain g;
  g.h_ = h;
  g.x0_ = b[0] - h;
  g.y0_ = b[1] - h;
  g.nx_ = int(std::ceil((b[2] - b[0]) / h)) + 3;
  g.ny_ = int(std::ceil((b[3] - b[1]) / h)) + 3;
  if (double(g.nx_) * g.ny_ > 5e7)
    throw InputError("grid too large");
  g.index_.assign(std::size_t(g.nx_) * g.ny_, -1);
  for (int j = 0; j < g.ny_; ++j)
    for (int i = 0; i < g.nx_; ++i)
      if (spec.contains(g.x(i), g.y(j))) {
        g.index_[std::size_t(i) + std::size_t(g.nx_) * j] = int(g.cells_.size());
        g.cells_.push_back({i, j});
      }
  g.spec_ = spec;
  require_nondegenerate(g);
  return g;
}

GridDomain GridDomain::from_mask(int nx, int ny, double h, std::vector<char> mask, double x0, double y0)
{
  if (nx <= 0 || ny <= 0 || mask.size() != std::size_t(nx) * ny)
    throw InputError("mask size does not match the grid extents");
  if (!(h > 0.0))
    throw InputError("grid spacing must be positive");
  GridDomain g;
  g.h_ = h;
  g.x0_ = x0;
  g.y0_ = y0;
  g.nx_ = nx;
  g.ny_ = ny;
  g.index_.assign(mask.size(), -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (mask[std::size_t(i) + std::size_t(nx) * j]) {
        g.index_[std::size_t(i) + std::size_t(nx) * j] = int(g.cells_.size());
        g.cells_.push_back({i, j});
      }
  return g;
}

bool GridDomain::interior(int i, int j) const
{
  return index(i, j) >= 0;
}

int GridDomain::index(int i, int j) const
{
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_)
    return -1;
  return index_[std::size_t(i) + std::size_t(nx_) * j];
}

namespace {

constexpr int kDi[4] = {-1, 1, 0, 0};
constexpr int kDj[4] = {0, 0, -1, 1};

} // namespace

Laplacian::Laplacian(const GridDomain& domain) : domain_(&domain)
{
  if (domain.size() == 0)
    throw DomainError("degenerate domain: no interior nodes");
  const double s = 1.0 / (domain.h() * domain.h());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(domain.size() * 5);
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const auto [i, j] = domain.cell(k);
    t.emplace_back(int(k), int(k), 4.0 * s);
    for (int n = 0; n < 4; ++n) {
      const int q = domain.index(i + kDi[n], j + kDj[n]);
      if (q >= 0)
        t.emplace_back(int(k), q, -s);
    }
  }
  matrix_.resize(int(domain.size()), int(domain.size()));
  matrix_.setFromTriplets(t.begin(), t.end());
}

Vector Laplacian::apply(const Vector& u) const
{
  const GridDomain& d = *domain_;
  const double s = 1.0 / (d.h() * d.h());
  Vector out(u.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    const auto [i, j] = d.cell(k);
    double acc = 4.0 * u[Eigen::Index(k)];
    for (int n = 0; n < 4; ++n) {
      const int q = d.index(i + kDi[n], j + kDj[n]);
      if (q >= 0)
        acc -= u[q];
    }
    out[Eigen::Index(k)] = s * acc;
  }
  return out;
}

namespace {

using Matrix = Eigen::MatrixXd;

class InverseOperator {
public:
  InverseOperator(const Laplacian& A, const SolverOptions& opt) : inner_(opt.inner)
  {
    if (inner_ == InnerSolver::cholesky) {
      chol_ = std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>(A.matrix());
      if (chol_->info() != Eigen::Success)
        throw ConvergenceError("sparse factorization failed");
    } else {
      cg_ = std::make_unique<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>>();
      cg_->setTolerance(opt.pcg_tol);
      cg_->setMaxIterations(std::max<Eigen::Index>(1000, 20 * A.matrix().rows()));
      cg_->compute(A.matrix());
    }
  }

  Vector solve(const Vector& b) const
  {
    if (inner_ == InnerSolver::cholesky)
      return chol_->solve(b);
    Vector x = cg_->solve(b);
    if (cg_->info() != Eigen::Success)
      throw ConvergenceError("inner conjugate gradient did not converge");
    return x;
  }

private:
  InnerSolver inner_;
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> chol_;
  std::unique_ptr<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper>> cg_;
};

struct BlockResult {
  Vector lambdas;
  Matrix vectors;
  Vector xis;
  Vector residuals;
  int iterations;
};

void project_out(Matrix& X, const Vector* g)
{
  if (!g)
    return;
  const double gg = g->squaredNorm();
  for (Eigen::Index c = 0; c < X.cols(); ++c)
    X.col(c) -= (g->dot(X.col(c)) / gg) * *g;
}

Matrix orthonormalize(const Matrix& Y)
{
  Eigen::HouseholderQR<Matrix> qr(Y);
  return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

// Block inverse iteration with Rayleigh-Ritz. With g set, iterates live in
// g-perp and the inverse is replaced by its constrained counterpart.
BlockResult block_iteration(const Laplacian& A, const Vector* g, int nev, const SolverOptions& opt)
{
  const Eigen::Index n = Eigen::Index(A.size());
  const Eigen::Index b = std::min<Eigen::Index>(std::max(opt.block, nev), n - (g ? 1 : 0));
  const InverseOperator inv(A, opt);

  Vector w;
  double gw = 0.0;
  if (g) {
    w = inv.solve(*g);
    gw = w.dot(*g);
    if (!(gw > 0.0))
      throw ConvergenceError("constraint weight has vanishing energy");
  }

  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Matrix X(n, b);
  for (Eigen::Index c = 0; c < b; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      X(r, c) = U(rng);
  project_out(X, g);
  X = orthonormalize(X);

  Vector prev = Vector::Constant(b, std::numeric_limits<double>::infinity());
  BlockResult out;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Matrix Y(n, b);
    for (Eigen::Index c = 0; c < b; ++c) {
      Vector y = inv.solve(X.col(c));
      if (g)
        y -= (y.dot(*g) / gw) * w;
      Y.col(c) = y;
    }
    project_out(Y, g);
    Matrix Q = orthonormalize(Y);
    project_out(Q, g);
    Q = orthonormalize(Q);

    const Matrix AQ = A.matrix() * Q;
    Matrix H = Q.transpose() * AQ;
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const Vector theta = es.eigenvalues();
    X = Q * es.eigenvectors();
    const Matrix AX = AQ * es.eigenvectors();

    out.lambdas = theta.head(nev);
    out.vectors = X.leftCols(nev);
    out.xis = Vector::Zero(nev);
    out.residuals = Vector::Zero(nev);
    out.iterations = it;
    bool done = true;
    for (int k = 0; k < nev; ++k) {
      Vector r = AX.col(k) - theta[k] * X.col(k);
      if (g) {
        out.xis[k] = r.dot(*g) / g->squaredNorm();
        r -= out.xis[k] * *g;
      }
      out.residuals[k] = r.norm() / AX.col(k).norm();
      if (std::fabs(theta[k] - prev[k]) > opt.rq_tol * theta[k] || out.residuals[k] > opt.residual_tol)
        done = false;
    }
    prev = theta;
    if (done)
      return out;
  }
  throw ConvergenceError("block inverse iteration did not converge");
}

void fix_sign(Eigen::Ref<Vector> v)
{
  Eigen::Index imax;
  v.cwiseAbs().maxCoeff(&imax);
  if (v[imax] < 0.0)
    v = -v;
}

} // namespace

std::vector<Eigenpair> dirichlet_eigs(const GridDomain& domain, int k, const SolverOptions& opt)
{
  if (k < 1 || k > 2)
    throw InputError("dirichlet_eigs: k must be 1 or 2");
  require_nondegenerate(domain);
  const Laplacian A(domain);
  BlockResult r = block_iteration(A, nullptr, k, opt);
  std::vector<Eigenpair> out;
  for (int i = 0; i < k; ++i) {
    Vector u = r.vectors.col(i).normalized();
    fix_sign(u);
    out.push_back({r.lambdas[i], std::move(u)});
  }
  return out;
}

std::string_view to_string(ConstraintClass c)
{
  switch (c) {
  case ConstraintClass::zero:
    return "zero";
  case ConstraintClass::constant:
    return "constant";
  case ConstraintClass::bang_bang:
    return "bang_bang";
  case ConstraintClass::custom:
    return "custom";
  }
  return "custom";
}

ConstraintField ConstraintField::zero(const GridDomain& domain)
{
  return {Vector::Zero(Eigen::Index(domain.size())), ConstraintClass::zero, std::nullopt};
}

ConstraintField ConstraintField::constant(const GridDomain& domain, double value)
{
  if (!(value > 0.0) || !std::isfinite(value))
    throw InputError("constant weight must be positive");
  return {Vector::Constant(Eigen::Index(domain.size()), value), ConstraintClass::constant, std::nullopt};
}

ConstraintField ConstraintField::bang_bang(const GridDomain& domain, double alpha, const std::vector<int>& alpha_shapes)
{
  if (!domain.spec())
    throw InputError("bang_bang by shape needs a shape-built domain");
  const ShapeSpec& spec = *domain.spec();
  for (int s : alpha_shapes)
    if (s < 0 || std::size_t(s) >= spec.shapes.size())
      throw InputError("alpha_shapes index out of range");
  std::vector<char> in(domain.size(), 0);
  for (std::size_t k = 0; k < domain.size(); ++k)
    for (int s : alpha_shapes)
      if (spec.shape_contains(std::size_t(s), domain.node_x(k), domain.node_y(k)))
        in[k] = 1;
  return bang_bang(alpha, in);
}

ConstraintField ConstraintField::bang_bang(double alpha, const std::vector<char>& in_alpha)
{
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InputError("bang_bang level must lie in (0, 1]");
  Vector v(Eigen::Index(in_alpha.size()));
  for (std::size_t k = 0; k < in_alpha.size(); ++k)
    v[Eigen::Index(k)] = in_alpha[k] ? alpha : 1.0;
  return {std::move(v), ConstraintClass::bang_bang, alpha};
}

ConstraintField ConstraintField::custom(Vector values)
{
  for (Eigen::Index k = 0; k < values.size(); ++k)
    if (!std::isfinite(values[k]))
      throw InputError("custom weight has non-finite entries");
  return {std::move(values), ConstraintClass::custom, std::nullopt};
}

bool ConstraintField::in_l_inf_alpha(double a) const
{
  return values.size() > 0 && values.minCoeff() >= a && values.maxCoeff() <= 1.0;
}

bool ConstraintField::consistent() const
{
  switch (class_tag) {
  case ConstraintClass::zero:
    return values.size() == 0 || values.cwiseAbs().maxCoeff() == 0.0;
  case ConstraintClass::constant:
    return values.size() > 0 && values.minCoeff() == values.maxCoeff();
  case ConstraintClass::bang_bang:
    if (!alpha)
      return false;
    for (Eigen::Index k = 0; k < values.size(); ++k)
      if (values[k] != *alpha && values[k] != 1.0)
        return false;
    return true;
  case ConstraintClass::custom:
    return true;
  }
  return false;
}

TwistedSolution twisted_eig(const GridDomain& domain, const ConstraintField& g, const SolverOptions& opt)
{
  require_nondegenerate(domain);
  if (std::size_t(g.values.size()) != domain.size())
    throw InputError("weight size does not match the domain");
  const Laplacian A(domain);
  TwistedSolution sol;
  if (g.class_tag == ConstraintClass::zero || g.values.cwiseAbs().maxCoeff() == 0.0) {
    BlockResult r = block_iteration(A, nullptr, 1, opt);
    sol.lambda = r.lambdas[0];
    sol.u = r.vectors.col(0).normalized();
    sol.xi = 0.0;
    sol.iterations = r.iterations;
    sol.residual = r.residuals[0];
    fix_sign(sol.u);
  } else {
    BlockResult r = block_iteration(A, &g.values, 1, opt);
    sol.u = r.vectors.col(0);
    sol.u -= (g.values.dot(sol.u) / g.values.squaredNorm()) * g.values;
    sol.u.normalize();
    fix_sign(sol.u);
    const Vector Au = A.matrix() * sol.u;
    sol.lambda = sol.u.dot(Au);
    sol.xi = (Au - sol.lambda * sol.u).dot(g.values) / g.values.squaredNorm();
    sol.residual = (Au - sol.lambda * sol.u - sol.xi * g.values).norm() / Au.norm();
    sol.iterations = r.iterations;
  }
  return sol;
}

NodalReport nodal_report(const TwistedSolution& sol, const GridDomain& domain, double theta_rel)
{
  const Laplacian A(domain);
  const double theta = theta_rel * sol.u.cwiseAbs().maxCoeff();
  const std::size_t n = domain.size();
  std::vector<int> label(n, -1);
  NodalReport rep;
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < n; ++s) {
    const double us = sol.u[Eigen::Index(s)];
    if (label[s] >= 0 || std::fabs(us) <= theta)
      continue;
    const int sign = us > 0 ? 1 : -1;
    const int id = int(rep.components.size());
    Vector v = Vector::Zero(Eigen::Index(n));
    std::size_t count = 0;
    stack.assign(1, s);
    label[s] = id;
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      v[Eigen::Index(k)] = sol.u[Eigen::Index(k)];
      ++count;
      const auto [i, j] = domain.cell(k);
      for (int q = 0; q < 4; ++q) {
        const int nb = domain.index(i + kDi[q], j + kDj[q]);
        if (nb < 0 || label[std::size_t(nb)] >= 0)
          continue;
        const double un = sol.u[nb];
        if (sign * un > theta) {
          label[std::size_t(nb)] = id;
          stack.push_back(std::size_t(nb));
        }
      }
    }
    rep.components.push_back({sign, count, double(count) * domain.h() * domain.h(), rayleigh_quotient(A, v)});
  }
  rep.count = int(rep.components.size());

  Vector up = sol.u.cwiseMax(0.0), um = (-sol.u).cwiseMax(0.0);
  const double h2 = domain.h() * domain.h();
  rep.rayleigh_plus = up.squaredNorm() > 0 ? rayleigh_quotient(A, up) : 0.0;
  rep.rayleigh_minus = um.squaredNorm() > 0 ? rayleigh_quotient(A, um) : 0.0;
  rep.measure_plus = double((sol.u.array() > theta).count()) * h2;
  rep.measure_minus = double((sol.u.array() < -theta).count()) * h2;
  return rep;
}

ConstraintField nodal_average_field(const TwistedSolution& sol, const ConstraintField& g)
{
  const Vector up = sol.u.cwiseMax(0.0), um = (-sol.u).cwiseMax(0.0);
  const double a1 = up.dot(g.values) / up.sum();
  const double a2 = um.dot(g.values) / um.sum();
  Vector v = g.values;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (sol.u[k] > 0)
      v[k] = a1;
    else if (sol.u[k] < 0)
      v[k] = a2;
  }
  return ConstraintField::custom(std::move(v));
}

ConstraintField attaining_g(const GridDomain& domain, double a1_frac, double a2_frac, const SolverOptions& opt)
{
  if (!(a1_frac > 0 && a2_frac > 0 && a1_frac + a2_frac <= 1.0))
    throw InputError("subregion fractions must be positive and disjoint");
  const double x0 = domain.x(0), x1 = domain.x(domain.nx() - 1);
  const double cut1 = x0 + a1_frac * (x1 - x0);
  const double cut2 = x1 - a2_frac * (x1 - x0);
  const Vector u1 = dirichlet_eigs(domain, 1, opt)[0].u;
  const double h2 = domain.h() * domain.h();
  double s1 = 0.0, s2 = 0.0;
  std::size_t n1 = 0, n2 = 0;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const double x = domain.node_x(k);
    if (x < cut1) {
      s1 += u1[Eigen::Index(k)] * h2;
      ++n1;
    } else if (x > cut2) {
      s2 += u1[Eigen::Index(k)] * h2;
      ++n2;
    }
  }
  if (n1 == 0 || n2 == 0)
    throw InputError("subregion does not meet the domain");
  Vector v = Vector::Zero(Eigen::Index(domain.size()));
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const double x = domain.node_x(k);
    if (x < cut1)
      v[Eigen::Index(k)] = s2;
    else if (x > cut2)
      v[Eigen::Index(k)] = -s1;
  }
  return ConstraintField::custom(std::move(v));
}

std::array<double, 2> boundary_point(const GridDomain& domain)
{
  for (int i = 0; i < domain.nx(); ++i)
    for (int j = 0; j < domain.ny(); ++j) {
      if (domain.interior(i, j))
        continue;
      for (int q = 0; q < 4; ++q)
        if (domain.interior(i + kDi[q], j + kDj[q]))
          return {domain.x(i), domain.y(j)};
    }
  throw DomainError("domain has no boundary nodes");
}

ConstraintField boundary_concentration_g(const GridDomain& domain, double r, double alpha)
{
  return boundary_concentration_g(domain, boundary_point(domain), r, alpha);
}

ConstraintField boundary_concentration_g(const GridDomain& domain, std::array<double, 2> p, double r, double alpha)
{
  if (!(r > 0.0))
    throw InputError("radius must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw InputError("alpha must lie in (0, 1]");
  std::vector<char> outside(domain.size(), 1);
  std::size_t inside = 0;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    const double dx = domain.node_x(k) - p[0], dy = domain.node_y(k) - p[1];
    if (dx * dx + dy * dy < r * r) {
      outside[k] = 0;
      ++inside;
    }
  }
  if (inside == 0 || domain.size() - inside < kMinNodes)
    throw DomainError("degenerate split of the domain");
  return ConstraintField::bang_bang(alpha, outside);
}

Vector twisted_test_function(const Vector& v1, const Vector& v2, const ConstraintField& g)
{
  const double p2 = v2.dot(g.values);
  if (p2 == 0.0)
    return v2;
  return v1 - (v1.dot(g.values) / p2) * v2;
}

double rayleigh_quotient(const Laplacian& A, const Vector& v)
{
  const double vv = v.squaredNorm();
  if (!(vv > 0.0))
    throw InputError("Rayleigh quotient of the zero vector");
  return v.dot(A.matrix() * v) / vv;
}

IsoperimetricCheck isoperimetric_check(const GridDomain& domain, const ConstraintField& g, const SolverOptions& opt)
{
  if (g.values.size() == 0 || std::size_t(g.values.size()) != domain.size())
    throw InputError("weight size does not match the domain");
  const double alpha = (g.class_tag == ConstraintClass::bang_bang && g.alpha) ? *g.alpha : g.values.minCoeff();
  if (!(alpha > 0.0) || !g.in_l_inf_alpha(alpha))
    throw InputError("weight is not in L^inf_alpha");
  IsoperimetricCheck out;
  out.alpha = alpha;
  out.solution = twisted_eig(domain, g, opt);
  out.lhs = domain.area() * out.solution.lambda;
  out.rhs = solve_optimal_pair(Dimension(2), alpha).lambda_scaled;
  out.margin = out.lhs - out.rhs;
  return out;
}

} // namespace twisted::grid
