#include "ddh/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddh {

namespace {

void require_size(const Vector& v, std::size_t n, const char* what) {
  if (v.size() != static_cast<Eigen::Index>(n)) {
    throw std::invalid_argument(std::string(what) + ": expected size " + std::to_string(n) +
                                ", got " + std::to_string(v.size()));
  }
}

void require_state(const Grid& grid, const BlockState& h, const char* what) {
  require_size(h.rho, grid.num_interior(), what);
  require_size(h.sigma, grid.num_interior(), what);
  require_size(h.tau, grid.num_interior(), what);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(name) + " must be a positive finite number");
  }
}

void require_finite_field(const Vector& v, std::size_t n, const char* name) {
  require_size(v, n, name);
  if (!v.allFinite()) throw std::invalid_argument(std::string(name) + " contains non-finite values");
}

void require_fields(const Grid& grid, const Coefficients& c) {
  require_size(c.doping, grid.num_nodes(), "doping");
  require_size(c.a_u, grid.num_nodes(), "a_u");
  require_size(c.a_n, grid.num_nodes(), "a_n");
  require_size(c.a_p, grid.num_nodes(), "a_p");
}

// Interior rows of sum_e w * D^T flux over both edge directions.
Vector weak_divergence(const Grid& grid, const Vector& flux_x, const Vector& flux_y) {
  const Vector full = grid.edge_weight() * (grid.dx().transpose() * flux_x + grid.dy().transpose() * flux_y);
  return grid.restrict_interior(full);
}

SparseMatrix embedding(const Grid& grid) {
  std::vector<Eigen::Triplet<double>> t;
  const auto& nodes = grid.interior_nodes();
  t.reserve(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) t.emplace_back(nodes[k], static_cast<int>(k), 1.0);
  SparseMatrix p(static_cast<Eigen::Index>(grid.num_nodes()), static_cast<Eigen::Index>(nodes.size()));
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

SparseMatrix diag(const Vector& v) {
  SparseMatrix m(v.size(), v.size());
  m.reserve(Eigen::VectorXi::Constant(v.size(), 1));
  for (Eigen::Index i = 0; i < v.size(); ++i) m.insert(i, i) = v[i];
  m.makeCompressed();
  return m;
}

void append_block(std::vector<Eigen::Triplet<double>>& t, const SparseMatrix& b, Eigen::Index row0,
                  Eigen::Index col0) {
  for (int k = 0; k < b.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(b, k); it; ++it) {
      t.emplace_back(row0 + it.row(), col0 + it.col(), it.value());
    }
  }
}

}  // namespace

void validate(const Grid& grid, const Coefficients& c) {
  require_positive(c.d_n, "d_n");
  require_positive(c.c_n, "c_n");
  require_positive(c.d_p, "d_p");
  require_positive(c.c_p, "c_p");
  const auto n = grid.num_nodes();
  require_finite_field(c.doping, n, "doping");
  require_finite_field(c.a_u, n, "a_u");
  require_finite_field(c.a_n, n, "a_n");
  require_finite_field(c.a_p, n, "a_p");
}

Coefficients zero_coefficients(const Grid& grid) {
  Coefficients c;
  const auto n = static_cast<Eigen::Index>(grid.num_nodes());
  c.doping = Vector::Zero(n);
  c.a_u = Vector::Zero(n);
  c.a_n = Vector::Zero(n);
  c.a_p = Vector::Zero(n);
  return c;
}

BlockState BlockState::zero(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.num_interior());
  return {Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
}

BlockState& BlockState::operator+=(const BlockState& o) {
  rho += o.rho;
  sigma += o.sigma;
  tau += o.tau;
  return *this;
}

BlockState& BlockState::operator-=(const BlockState& o) {
  rho -= o.rho;
  sigma -= o.sigma;
  tau -= o.tau;
  return *this;
}

BlockState& BlockState::operator*=(double s) {
  rho *= s;
  sigma *= s;
  tau *= s;
  return *this;
}

BlockState operator+(BlockState a, const BlockState& b) { return a += b; }
BlockState operator-(BlockState a, const BlockState& b) { return a -= b; }
BlockState operator*(double s, BlockState a) { return a *= s; }

DualResidual DualResidual::zero(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.num_interior());
  return {Vector::Zero(n), Vector::Zero(n), Vector::Zero(n)};
}

DualResidual& DualResidual::operator+=(const DualResidual& o) {
  g1 += o.g1;
  g2 += o.g2;
  g3 += o.g3;
  return *this;
}

DualResidual& DualResidual::operator-=(const DualResidual& o) {
  g1 -= o.g1;
  g2 -= o.g2;
  g3 -= o.g3;
  return *this;
}

DualResidual& DualResidual::operator*=(double s) {
  g1 *= s;
  g2 *= s;
  g3 *= s;
  return *this;
}

DualResidual operator+(DualResidual a, const DualResidual& b) { return a += b; }
DualResidual operator-(DualResidual a, const DualResidual& b) { return a -= b; }
DualResidual operator*(double s, DualResidual a) { return a *= s; }

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("homotopy parameter must lie in [0, 1], got " + std::to_string(lambda));
  }
}

Vector flatten(const BlockState& h) {
  Vector v(h.rho.size() + h.sigma.size() + h.tau.size());
  v << h.rho, h.sigma, h.tau;
  return v;
}

Vector flatten(const DualResidual& g) {
  Vector v(g.g1.size() + g.g2.size() + g.g3.size());
  v << g.g1, g.g2, g.g3;
  return v;
}

BlockState unflatten_state(const Grid& grid, const Vector& v) {
  const auto n = static_cast<Eigen::Index>(grid.num_interior());
  require_size(v, 3 * grid.num_interior(), "unflatten_state");
  return {v.segment(0, n), v.segment(n, n), v.segment(2 * n, n)};
}

DualResidual unflatten_dual(const Grid& grid, const Vector& v) {
  const auto n = static_cast<Eigen::Index>(grid.num_interior());
  require_size(v, 3 * grid.num_interior(), "unflatten_dual");
  return {v.segment(0, n), v.segment(n, n), v.segment(2 * n, n)};
}

PhysicalFields physical_fields(const Grid& grid, const Coefficients& c, const BlockState& h) {
  require_state(grid, h, "physical_fields");
  return {grid.embed_interior(h.rho) + c.a_u, grid.embed_interior(h.sigma) + c.a_n,
          grid.embed_interior(h.tau) + c.a_p};
}

DualResidual residual(const Grid& grid, const Coefficients& c, const BlockState& h, double lambda) {
  require_state(grid, h, "residual");
  require_fields(grid, c);
  check_lambda(lambda);
  const auto f = physical_fields(grid, c, h);

  DualResidual g;
  const Vector lap_u = grid.restrict_interior(grid.stiffness_full() * f.u).cwiseQuotient(grid.mass());
  g.g1 = lap_u + lambda * grid.restrict_interior(f.n - f.p) - grid.restrict_interior(c.doping);

  const Vector ux = grid.dx() * f.u;
  const Vector uy = grid.dy() * f.u;
  const Vector jn_x = c.d_n * (grid.dx() * f.n) - c.c_n * (grid.ax() * f.n).cwiseProduct(ux);
  const Vector jn_y = c.d_n * (grid.dy() * f.n) - c.c_n * (grid.ay() * f.n).cwiseProduct(uy);
  g.g2 = weak_divergence(grid, jn_x, jn_y);

  const Vector jp_x = c.d_p * (grid.dx() * f.p) + c.c_p * (grid.ax() * f.p).cwiseProduct(ux);
  const Vector jp_y = c.d_p * (grid.dy() * f.p) + c.c_p * (grid.ay() * f.p).cwiseProduct(uy);
  g.g3 = weak_divergence(grid, jp_x, jp_y);
  return g;
}

DualResidual jacobian_apply(const Grid& grid, const Coefficients& c, const BlockState& h, double lambda,
                            const BlockState& dir) {
  require_state(grid, h, "jacobian_apply");
  require_fields(grid, c);
  check_lambda(lambda);
  require_state(grid, dir, "jacobian_apply direction");
  const auto f = physical_fields(grid, c, h);
  const Vector drho = grid.embed_interior(dir.rho);
  const Vector dsig = grid.embed_interior(dir.sigma);
  const Vector dtau = grid.embed_interior(dir.tau);

  DualResidual g;
  g.g1 = (grid.stiffness() * dir.rho).cwiseQuotient(grid.mass()) + lambda * (dir.sigma - dir.tau);

  const Vector ux = grid.dx() * f.u;
  const Vector uy = grid.dy() * f.u;
  const Vector rx = grid.dx() * drho;
  const Vector ry = grid.dy() * drho;

  const Vector jn_x = c.d_n * (grid.dx() * dsig) - c.c_n * (grid.ax() * dsig).cwiseProduct(ux) -
                      c.c_n * (grid.ax() * f.n).cwiseProduct(rx);
  const Vector jn_y = c.d_n * (grid.dy() * dsig) - c.c_n * (grid.ay() * dsig).cwiseProduct(uy) -
                      c.c_n * (grid.ay() * f.n).cwiseProduct(ry);
  g.g2 = weak_divergence(grid, jn_x, jn_y);

  const Vector jp_x = c.d_p * (grid.dx() * dtau) + c.c_p * (grid.ax() * dtau).cwiseProduct(ux) +
                      c.c_p * (grid.ax() * f.p).cwiseProduct(rx);
  const Vector jp_y = c.d_p * (grid.dy() * dtau) + c.c_p * (grid.ay() * dtau).cwiseProduct(uy) +
                      c.c_p * (grid.ay() * f.p).cwiseProduct(ry);
  g.g3 = weak_divergence(grid, jp_x, jp_y);
  return g;
}

DualResidual BlockOperator::apply(const Grid& grid, const BlockState& dir) const {
  return unflatten_dual(grid, matrix * flatten(dir));
}

SparseMatrix BlockOperator::block(int row, int col) const {
  const auto n = static_cast<Eigen::Index>(block_size);
  return matrix.block(row * n, col * n, n, n);
}

BlockOperator jacobian_assemble(const Grid& grid, const Coefficients& c, const BlockState& h,
                                double lambda) {
  require_state(grid, h, "jacobian_assemble");
  require_fields(grid, c);
  check_lambda(lambda);
  const auto f = physical_fields(grid, c, h);
  const SparseMatrix emb = embedding(grid);
  const SparseMatrix restr = emb.transpose();
  const double w = grid.edge_weight();
  const auto n = static_cast<Eigen::Index>(grid.num_interior());

  const Vector inv_mass = grid.mass().cwiseInverse();
  const SparseMatrix j11 = diag(inv_mass) * grid.stiffness();
  const SparseMatrix coupling = diag(Vector::Constant(n, lambda));

  const SparseMatrix& dx = grid.dx();
  const SparseMatrix& dy = grid.dy();
  const SparseMatrix& ax = grid.ax();
  const SparseMatrix& ay = grid.ay();
  const SparseMatrix dux = diag(dx * f.u);
  const SparseMatrix duy = diag(dy * f.u);

  // Weak forms sum_e w * D^T (edge flux operator), interior rows and columns.
  const auto weak = [&](const SparseMatrix& flux_x, const SparseMatrix& flux_y) -> SparseMatrix {
    SparseMatrix full = SparseMatrix(dx.transpose()) * flux_x + SparseMatrix(dy.transpose()) * flux_y;
    return SparseMatrix(w * (restr * full * emb));
  };

  const SparseMatrix j21 = weak(SparseMatrix(-c.c_n * diag(ax * f.n) * dx),
                                SparseMatrix(-c.c_n * diag(ay * f.n) * dy));
  const SparseMatrix j22 = weak(SparseMatrix(c.d_n * dx - c.c_n * dux * ax),
                                SparseMatrix(c.d_n * dy - c.c_n * duy * ay));
  const SparseMatrix j31 = weak(SparseMatrix(c.c_p * diag(ax * f.p) * dx),
                                SparseMatrix(c.c_p * diag(ay * f.p) * dy));
  const SparseMatrix j33 = weak(SparseMatrix(c.d_p * dx + c.c_p * dux * ax),
                                SparseMatrix(c.d_p * dy + c.c_p * duy * ay));

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(j11.nonZeros() + 2 * n + j21.nonZeros() + j22.nonZeros() + j31.nonZeros() + j33.nonZeros());
  append_block(t, j11, 0, 0);
  if (lambda != 0.0) {
    append_block(t, coupling, 0, n);
    append_block(t, SparseMatrix(-coupling), 0, 2 * n);
  }
  append_block(t, j21, n, 0);
  append_block(t, j22, n, n);
  append_block(t, j31, 2 * n, 0);
  append_block(t, j33, 2 * n, 2 * n);

  BlockOperator op;
  op.block_size = static_cast<std::size_t>(n);
  op.matrix.resize(3 * n, 3 * n);
  op.matrix.setFromTriplets(t.begin(), t.end());
  return op;
}

DualResidual f_lambda(const Grid& grid, const Coefficients& c, const BlockState& h) {
  require_state(grid, h, "f_lambda");
  const auto f = physical_fields(grid, c, h);
  DualResidual g = DualResidual::zero(grid);
  g.g1 = grid.restrict_interior(f.n - f.p);
  return g;
}

double h_minus1_norm(const Grid& grid, const Vector& g) {
  require_size(g, grid.num_interior(), "h_minus1_norm");
  return std::sqrt(std::max(0.0, g.dot(grid.solve_stiffness(g))));
}

double norm_H(const Grid& grid, const BlockState& h) {
  require_state(grid, h, "norm_H");
  const double r = laplacian_norm(grid, h.rho);
  const double s = h10_norm(grid, h.sigma);
  const double t = h10_norm(grid, h.tau);
  return std::sqrt(r * r + s * s + t * t);
}

double norm_G(const Grid& grid, const DualResidual& g) {
  require_size(g.g1, grid.num_interior(), "norm_G");
  const double a = l2_norm(grid, g.g1);
  const double b = h_minus1_norm(grid, g.g2);
  const double c = h_minus1_norm(grid, g.g3);
  return std::sqrt(a * a + b * b + c * c);
}

}  // namespace ddh
