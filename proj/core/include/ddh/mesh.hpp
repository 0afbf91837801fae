#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace ddh {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Axis-aligned strip (0, length) x (0, width) split into nx x ny uniform cells.
struct DomainSpec {
  double length = 1.0;
  double width = 1.0;
  int nx = 2;
  int ny = 2;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const DomainSpec& spec);

/// Structured node grid with the base operators of a 5-point discretization.
///
/// Nodes are numbered row by row: global = j * (nx + 1) + i. Interior
/// quantities (corrections, dual vectors, stiffness rows) are indexed by the
/// interior ordering, which keeps the global order with boundary nodes skipped.
///
/// Scaling: every edge carries the dual-cell measure hx*hy, so
///   K = sum_e hx*hy * (D_e v)^2 with D_e the edge difference quotient,
/// and the lumped mass is hx*hy on each interior node. Hence
/// M^{-1} K is the classical 5-point -Laplacian.
///
/// Immutable after construction; the shared K factorization is only read.
class Grid {
 public:
  explicit Grid(const DomainSpec& spec);

  const DomainSpec& spec() const { return spec_; }
  double hx() const { return hx_; }
  double hy() const { return hy_; }
  double cell_measure() const { return hx_ * hy_; }
  double area() const { return spec_.length * spec_.width; }

  std::size_t num_nodes() const { return x_.size(); }
  std::size_t num_interior() const { return interior_.size(); }
  std::size_t num_boundary() const { return boundary_.size(); }

  int node(int i, int j) const { return j * (spec_.nx + 1) + i; }
  double x(std::size_t g) const { return x_[g]; }
  double y(std::size_t g) const { return y_[g]; }
  const std::vector<int>& interior_nodes() const { return interior_; }
  const std::vector<int>& boundary_nodes() const { return boundary_; }
  /// Interior position of a global node, -1 on the boundary.
  int interior_index(std::size_t g) const { return interior_index_[g]; }
  bool on_boundary(std::size_t g) const { return interior_index_[g] < 0; }

  /// Stiffness on interior nodes (Dirichlet rows and columns eliminated).
  const SparseMatrix& stiffness() const { return k_ii_; }
  /// Coupling of interior rows to boundary values.
  const SparseMatrix& stiffness_boundary() const { return k_ib_; }
  /// Full stiffness over all nodes (interior and boundary).
  const SparseMatrix& stiffness_full() const { return k_full_; }
  /// Lumped interior mass as its diagonal.
  const Vector& mass() const { return mass_; }
  SparseMatrix mass_matrix() const;
  /// Trapezoidal weights over all nodes (sum equals the strip area).
  const Vector& quadrature_weights() const { return quad_; }

  /// Edge difference quotients: rows are edges, columns all nodes.
  const SparseMatrix& dx() const { return dx_; }
  const SparseMatrix& dy() const { return dy_; }
  /// Edge midpoint averages, same layout as dx()/dy().
  const SparseMatrix& ax() const { return ax_; }
  const SparseMatrix& ay() const { return ay_; }
  /// Weight of every edge in the weak-form sums.
  double edge_weight() const { return hx_ * hy_; }

  /// Solves K x = b on interior nodes.
  Vector solve_stiffness(const Vector& b) const;

  /// Interior restriction and zero-boundary embedding.
  Vector restrict_interior(const Vector& full) const;
  Vector embed_interior(const Vector& interior) const;
  Vector sample(const std::function<double(double, double)>& f) const;

 private:
  DomainSpec spec_;
  double hx_;
  double hy_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<int> interior_;
  std::vector<int> boundary_;
  std::vector<int> interior_index_;
  SparseMatrix k_full_;
  SparseMatrix k_ii_;
  SparseMatrix k_ib_;
  Vector mass_;
  Vector quad_;
  SparseMatrix dx_;
  SparseMatrix dy_;
  SparseMatrix ax_;
  SparseMatrix ay_;
  std::shared_ptr<const Eigen::SimplicialLDLT<SparseMatrix>> k_factor_;
};

Grid build_grid(const DomainSpec& spec);

/// Boundary trace in boundary-node order; interior values are ignored.
struct BoundaryTrace {
  Vector values;
};

BoundaryTrace trace_of(const Grid& grid, const std::function<double(double, double)>& f);

/// Discrete harmonic extension of a boundary trace to all nodes.
Vector lift_boundary(const Grid& grid, const BoundaryTrace& trace);

/// Discrete norms on interior fields.
double l2_norm(const Grid& grid, const Vector& interior);
double h10_norm(const Grid& grid, const Vector& interior);
/// ||M^{-1} K v||_{L2}, the Laplacian norm on H2 cap H10.
double laplacian_norm(const Grid& grid, const Vector& interior);
/// Trapezoidal L2 norm of a field on all nodes.
double l2_norm_full(const Grid& grid, const Vector& full);

}  // namespace ddh
