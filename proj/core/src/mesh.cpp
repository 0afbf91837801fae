#include "ddh/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ddh {

void validate(const DomainSpec& spec) {
  if (!(spec.length > 0.0) || !std::isfinite(spec.length)) {
    throw std::invalid_argument("domain length must be positive, got " + std::to_string(spec.length));
  }
  if (!(spec.width > 0.0) || !std::isfinite(spec.width)) {
    throw std::invalid_argument("domain width must be positive, got " + std::to_string(spec.width));
  }
  if (spec.nx < 2) {
    throw std::invalid_argument("nx must be >= 2 (no interior nodes), got " + std::to_string(spec.nx));
  }
  if (spec.ny < 2) {
    throw std::invalid_argument("ny must be >= 2 (no interior nodes), got " + std::to_string(spec.ny));
  }
}

namespace {

using Triplet = Eigen::Triplet<double>;

// Edge operators for one direction. Edges run from node a to node b = a + stride.
void append_edge(std::vector<Triplet>& diff, std::vector<Triplet>& avg, int edge, int a, int b,
                 double h) {
  diff.emplace_back(edge, a, -1.0 / h);
  diff.emplace_back(edge, b, 1.0 / h);
  avg.emplace_back(edge, a, 0.5);
  avg.emplace_back(edge, b, 0.5);
}

}  // namespace

Grid::Grid(const DomainSpec& spec) : spec_(spec) {
  validate(spec_);
  const int nx = spec_.nx;
  const int ny = spec_.ny;
  hx_ = spec_.length / nx;
  hy_ = spec_.width / ny;

  const int n_nodes = (nx + 1) * (ny + 1);
  x_.resize(n_nodes);
  y_.resize(n_nodes);
  interior_index_.assign(n_nodes, -1);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int g = node(i, j);
      // Exact endpoints, no accumulated rounding at x = L or y = d.
      x_[g] = (i == nx) ? spec_.length : i * hx_;
      y_[g] = (j == ny) ? spec_.width : j * hy_;
      const bool boundary = i == 0 || j == 0 || i == nx || j == ny;
      if (boundary) {
        boundary_.push_back(g);
      } else {
        interior_index_[g] = static_cast<int>(interior_.size());
        interior_.push_back(g);
      }
    }
  }

  std::vector<Triplet> dx_t, ax_t, dy_t, ay_t;
  int ex = 0;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) append_edge(dx_t, ax_t, ex++, node(i, j), node(i + 1, j), hx_);
  }
  int ey = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) append_edge(dy_t, ay_t, ey++, node(i, j), node(i, j + 1), hy_);
  }
  dx_.resize(ex, n_nodes);
  ax_.resize(ex, n_nodes);
  dy_.resize(ey, n_nodes);
  ay_.resize(ey, n_nodes);
  dx_.setFromTriplets(dx_t.begin(), dx_t.end());
  ax_.setFromTriplets(ax_t.begin(), ax_t.end());
  dy_.setFromTriplets(dy_t.begin(), dy_t.end());
  ay_.setFromTriplets(ay_t.begin(), ay_t.end());

  // Per-edge symmetric assembly: identical values land at (a,b) and (b,a).
  std::vector<Triplet> k_t;
  k_t.reserve(4 * static_cast<std::size_t>(ex + ey));
  const auto add_edge = [&](int a, int b, double c) {
    k_t.emplace_back(a, a, c);
    k_t.emplace_back(b, b, c);
    k_t.emplace_back(a, b, -c);
    k_t.emplace_back(b, a, -c);
  };
  const double cx = edge_weight() / (hx_ * hx_);
  const double cy = edge_weight() / (hy_ * hy_);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i < nx; ++i) add_edge(node(i, j), node(i + 1, j), cx);
  }
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i <= nx; ++i) add_edge(node(i, j), node(i, j + 1), cy);
  }
  k_full_.resize(n_nodes, n_nodes);
  k_full_.setFromTriplets(k_t.begin(), k_t.end());

  std::vector<int> boundary_pos(n_nodes, -1);
  for (std::size_t b = 0; b < boundary_.size(); ++b) boundary_pos[boundary_[b]] = static_cast<int>(b);

  std::vector<Triplet> ii_t, ib_t;
  for (int col = 0; col < k_full_.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(k_full_, col); it; ++it) {
      const int row = interior_index_[it.row()];
      if (row < 0) continue;
      if (interior_index_[col] >= 0) {
        ii_t.emplace_back(row, interior_index_[col], it.value());
      } else {
        ib_t.emplace_back(row, boundary_pos[col], it.value());
      }
    }
  }
  const auto n_int = static_cast<Eigen::Index>(interior_.size());
  k_ii_.resize(n_int, n_int);
  k_ii_.setFromTriplets(ii_t.begin(), ii_t.end());
  k_ib_.resize(n_int, static_cast<Eigen::Index>(boundary_.size()));
  k_ib_.setFromTriplets(ib_t.begin(), ib_t.end());

  mass_ = Vector::Constant(n_int, cell_measure());

  quad_.resize(n_nodes);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const double wx = (i == 0 || i == nx) ? 0.5 : 1.0;
      const double wy = (j == 0 || j == ny) ? 0.5 : 1.0;
      quad_[node(i, j)] = wx * wy * cell_measure();
    }
  }

  auto factor = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>(k_ii_);
  if (factor->info() != Eigen::Success) {
    throw std::runtime_error("stiffness factorization failed");
  }
  k_factor_ = std::move(factor);
}

SparseMatrix Grid::mass_matrix() const {
  SparseMatrix m(mass_.size(), mass_.size());
  m.reserve(Eigen::VectorXi::Constant(mass_.size(), 1));
  for (Eigen::Index i = 0; i < mass_.size(); ++i) m.insert(i, i) = mass_[i];
  m.makeCompressed();
  return m;
}

Vector Grid::solve_stiffness(const Vector& b) const {
  if (b.size() != static_cast<Eigen::Index>(num_interior())) {
    throw std::invalid_argument("solve_stiffness: size mismatch");
  }
  return k_factor_->solve(b);
}

Vector Grid::restrict_interior(const Vector& full) const {
  if (full.size() != static_cast<Eigen::Index>(num_nodes())) {
    throw std::invalid_argument("restrict_interior: expected a field over all nodes");
  }
  Vector out(num_interior());
  for (std::size_t k = 0; k < interior_.size(); ++k) out[k] = full[interior_[k]];
  return out;
}

Vector Grid::embed_interior(const Vector& interior) const {
  if (interior.size() != static_cast<Eigen::Index>(num_interior())) {
    throw std::invalid_argument("embed_interior: expected an interior field");
  }
  Vector out = Vector::Zero(num_nodes());
  for (std::size_t k = 0; k < interior_.size(); ++k) out[interior_[k]] = interior[k];
  return out;
}

Vector Grid::sample(const std::function<double(double, double)>& f) const {
  Vector out(num_nodes());
  for (std::size_t g = 0; g < num_nodes(); ++g) out[g] = f(x_[g], y_[g]);
  return out;
}

Grid build_grid(const DomainSpec& spec) { return Grid(spec); }

BoundaryTrace trace_of(const Grid& grid, const std::function<double(double, double)>& f) {
  BoundaryTrace t;
  t.values.resize(grid.num_boundary());
  const auto& nodes = grid.boundary_nodes();
  for (std::size_t b = 0; b < nodes.size(); ++b) t.values[b] = f(grid.x(nodes[b]), grid.y(nodes[b]));
  return t;
}

Vector lift_boundary(const Grid& grid, const BoundaryTrace& trace) {
  if (trace.values.size() != static_cast<Eigen::Index>(grid.num_boundary())) {
    throw std::invalid_argument("lift_boundary: trace must have one value per boundary node");
  }
  const Vector interior = grid.solve_stiffness(-(grid.stiffness_boundary() * trace.values));
  Vector full(grid.num_nodes());
  const auto& bnodes = grid.boundary_nodes();
  for (std::size_t b = 0; b < bnodes.size(); ++b) full[bnodes[b]] = trace.values[b];
  const auto& inodes = grid.interior_nodes();
  for (std::size_t k = 0; k < inodes.size(); ++k) full[inodes[k]] = interior[k];
  return full;
}

double l2_norm(const Grid& grid, const Vector& v) {
  return std::sqrt(v.dot(grid.mass().cwiseProduct(v)));
}

double h10_norm(const Grid& grid, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(grid.stiffness() * v)));
}

double laplacian_norm(const Grid& grid, const Vector& v) {
  const Vector lap = (grid.stiffness() * v).cwiseQuotient(grid.mass());
  return l2_norm(grid, lap);
}

double l2_norm_full(const Grid& grid, const Vector& full) {
  return std::sqrt(full.dot(grid.quadrature_weights().cwiseProduct(full)));
}

}  // namespace ddh
