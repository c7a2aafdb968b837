#pragma once

// Finite-difference verification of twisted eigenvalues on masked 2D grids.
//
// A domain is a union of open disks and rectangles sampled on a uniform
// grid; -Delta with homogeneous Dirichlet data is the 5-point stencil over
// the interior nodes. Twisted eigenvalues are computed by block inverse
// iteration with the constrained inverse
//   T x = A^{-1} x - <A^{-1} x, g> / <A^{-1} g, g> A^{-1} g,
// which maps into g-perp and whose largest eigenvalue is 1 / lambda_1^g.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace twisted::grid {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct Disk {
  double cx, cy, r;
};

struct Rect {
  double x0, y0, x1, y1;
};

using Shape = std::variant<Disk, Rect>;

/// Union of open disks and rectangles.
struct ShapeSpec {
  std::vector<Shape> shapes;

  bool contains(double x, double y) const;
  bool shape_contains(std::size_t index, double x, double y) const;
  /// Index of the first shape containing (x, y), or -1.
  int owner(double x, double y) const;
  ShapeSpec scaled(double s) const;
  std::array<double, 4> bounding_box() const; // xmin, ymin, xmax, ymax

  static ShapeSpec unit_square();
  static ShapeSpec unit_disk();
  /// Two disks of total area pi with area ratio m = |B-|/|B+|, separated by `gap`.
  static ShapeSpec two_disks(double m, double gap = 0.25);
};

class GridDomain {
public:
  /// Nodes at (xmin - h + i h, ymin - h + j h) covering the bounding box with
  /// one exterior layer on each side; a node is interior iff it lies in the
  /// open point set. Requires at least 16 interior nodes.
  static GridDomain from_shapes(const ShapeSpec& spec, double h);
  /// Explicit mask (row-major, index i + nx j). No minimum size.
  static GridDomain from_mask(int nx, int ny, double h, std::vector<char> mask, double x0 = 0.0, double y0 = 0.0);

  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double x(int i) const { return x0_ + i * h_; }
  double y(int j) const { return y0_ + j * h_; }
  bool interior(int i, int j) const;
  /// Interior index of node (i, j), or -1 when exterior or outside the grid.
  int index(int i, int j) const;
  std::size_t size() const { return cells_.size(); }
  /// (i, j) of interior node k.
  std::array<int, 2> cell(std::size_t k) const { return cells_[k]; }
  double node_x(std::size_t k) const { return x(cells_[k][0]); }
  double node_y(std::size_t k) const { return y(cells_[k][1]); }
  /// Node count times h^2.
  double area() const { return double(size()) * h_ * h_; }
  const std::optional<ShapeSpec>& spec() const { return spec_; }

private:
  double h_ = 0.0, x0_ = 0.0, y0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<int> index_;
  std::vector<std::array<int, 2>> cells_;
  std::optional<ShapeSpec> spec_;
};

/// 5-point Dirichlet Laplacian scaled by 1/h^2.
class Laplacian {
public:
  explicit Laplacian(const GridDomain& domain);

  const SparseMatrix& matrix() const { return matrix_; }
  /// Matrix-free stencil application.
  Vector apply(const Vector& u) const;
  std::size_t size() const { return domain_->size(); }
  const GridDomain& domain() const { return *domain_; }

private:
  const GridDomain* domain_;
  SparseMatrix matrix_;
};

enum class InnerSolver { cholesky, pcg };

struct SolverOptions {
  InnerSolver inner = InnerSolver::cholesky;
  double pcg_tol = 1e-10;     // relative residual of the inner CG solves
  double rq_tol = 1e-10;      // relative Rayleigh-quotient change
  double residual_tol = 1e-9; // ||A u - lambda u - xi g|| / ||A u||
  int block = 6;
  int max_iterations = 500;
};

struct Eigenpair {
  double lambda;
  Vector u;
};

/// Smallest k (1 or 2) Dirichlet eigenpairs, increasing, orthonormal vectors.
std::vector<Eigenpair> dirichlet_eigs(const GridDomain& domain, int k, const SolverOptions& opt = {});

enum class ConstraintClass { zero, constant, bang_bang, custom };

std::string_view to_string(ConstraintClass c);

/// Weight g on the interior nodes.
struct ConstraintField {
  Vector values;
  ConstraintClass class_tag = ConstraintClass::custom;
  std::optional<double> alpha;

  static ConstraintField zero(const GridDomain& domain);
  static ConstraintField constant(const GridDomain& domain, double value = 1.0);
  /// alpha on the nodes owned by the listed shapes, 1 elsewhere.
  static ConstraintField bang_bang(const GridDomain& domain, double alpha, const std::vector<int>& alpha_shapes = {0});
  /// alpha where `in_alpha` is set, 1 elsewhere.
  static ConstraintField bang_bang(double alpha, const std::vector<char>& in_alpha);
  static ConstraintField custom(Vector values);

  /// alpha <= g <= 1 at every node.
  bool in_l_inf_alpha(double alpha) const;
  /// Class invariants (two levels for bang_bang, one for constant).
  bool consistent() const;
};

struct TwistedSolution {
  double lambda = 0.0;
  Vector u;
  double xi = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

/// First twisted eigenpair for the weight g. The zero class delegates to
/// dirichlet_eigs(domain, 1).
TwistedSolution twisted_eig(const GridDomain& domain, const ConstraintField& g, const SolverOptions& opt = {});

struct NodalComponent {
  int sign;           // +1 or -1
  std::size_t nodes;  // node count
  double measure;     // nodes * h^2
  double rayleigh;    // <A v, v> / <v, v> with v = u restricted to the component
};

struct NodalReport {
  int count = 0;
  std::vector<NodalComponent> components;
  /// Rayleigh quotients of u+ and u- over all positive / negative nodes.
  double rayleigh_plus = 0.0;
  double rayleigh_minus = 0.0;
  double measure_plus = 0.0;
  double measure_minus = 0.0;
};

/// 4-connected components of {u > theta} and {u < -theta}, theta = 1e-7 max|u|.
NodalReport nodal_report(const TwistedSolution& sol, const GridDomain& domain, double theta_rel = 1e-7);

/// Two-level field alpha1 on {u > 0}, alpha2 on {u < 0}, with alpha1, alpha2
/// the u-weighted averages of g on each nodal set (zero nodes keep g).
ConstraintField nodal_average_field(const TwistedSolution& sol, const ConstraintField& g);

/// Sign-changing weight (sum_{A2} u1) chi_{A1} - (sum_{A1} u1) chi_{A2}, with A1
/// the left a1_frac and A2 the right a2_frac of the bounding box.
ConstraintField attaining_g(const GridDomain& domain, double a1_frac, double a2_frac, const SolverOptions& opt = {});

/// Lexicographically (x, then y) smallest exterior node adjacent to an interior node.
std::array<double, 2> boundary_point(const GridDomain& domain);

/// 1 on the nodes within distance r of boundary_point, alpha elsewhere.
ConstraintField boundary_concentration_g(const GridDomain& domain, double r, double alpha);
/// Same with an explicit center.
ConstraintField boundary_concentration_g(const GridDomain& domain, std::array<double, 2> center, double r, double alpha);

/// v1 - gamma v2 with gamma = <v1, g> / <v2, g>, or v2 when <v2, g> = 0.
Vector twisted_test_function(const Vector& v1, const Vector& v2, const ConstraintField& g);

double rayleigh_quotient(const Laplacian& A, const Vector& v);

struct IsoperimetricCheck {
  double lhs;   // |Omega| lambda_1^g
  double rhs;   // lambda(alpha) of the optimal pair of disks
  double margin;
  double alpha;
  TwistedSolution solution;
};

/// Requires g in L^inf_alpha with alpha the bang_bang level or min g.
IsoperimetricCheck isoperimetric_check(const GridDomain& domain, const ConstraintField& g, const SolverOptions& opt = {});

} // namespace twisted::grid
