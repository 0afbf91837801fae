#pragma once

// Dense brute-force references. They only use residual() (the definition of
// F) and dense linear algebra, never the Jacobian or solver code under test.

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "ddh/system.hpp"

namespace ddh::testing {

using DenseMatrix = Eigen::MatrixXd;

/// Dense Jacobian of x -> flatten(F(unflatten(x), lambda)) by central differences.
inline DenseMatrix fd_jacobian(const Grid& grid, const Coefficients& c, const BlockState& h, double lambda,
                               double eps = 1e-5) {
  const Vector x0 = flatten(h);
  const auto n = x0.size();
  DenseMatrix jac(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    Vector xp = x0, xm = x0;
    xp[k] += eps;
    xm[k] -= eps;
    jac.col(k) = (flatten(residual(grid, c, unflatten_state(grid, xp), lambda)) -
                  flatten(residual(grid, c, unflatten_state(grid, xm), lambda))) /
                 (2.0 * eps);
  }
  return jac;
}

/// Damped Newton on the raw algebraic residual with a dense FD Jacobian and
/// backtracking on ||F||_2, started from `start`.
inline BlockState dense_damped_newton(const Grid& grid, const Coefficients& c, double lambda, BlockState start,
                                      int maxit = 60, double tol = 1e-12) {
  Vector x = flatten(start);
  const auto raw = [&](const Vector& v) { return flatten(residual(grid, c, unflatten_state(grid, v), lambda)); };
  Vector f = raw(x);
  for (int it = 0; it < maxit && f.norm() > tol; ++it) {
    const DenseMatrix jac = fd_jacobian(grid, c, unflatten_state(grid, x), lambda);
    const Vector step = jac.fullPivLu().solve(-f);
    double t = 1.0;
    Vector trial = x + step;
    Vector ft = raw(trial);
    while (ft.norm() > (1.0 - 1e-4 * t) * f.norm() && t > 1e-8) {
      t *= 0.5;
      trial = x + t * step;
      ft = raw(trial);
    }
    x = trial;
    f = ft;
  }
  return unflatten_state(grid, x);
}

/// Dense interior stiffness from the 5-point stencil, built node by node.
inline DenseMatrix dense_stencil_stiffness(const Grid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.num_interior());
  DenseMatrix k = DenseMatrix::Zero(n, n);
  const double hx = grid.hx(), hy = grid.hy();
  const double cx = hy / hx, cy = hx / hy;
  const int nx = grid.spec().nx, ny = grid.spec().ny;
  for (int j = 1; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) {
      const int row = grid.interior_index(grid.node(i, j));
      k(row, row) = 2.0 * cx + 2.0 * cy;
      const auto link = [&](int ii, int jj, double w) {
        const int col = grid.interior_index(grid.node(ii, jj));
        if (col >= 0) k(row, col) = -w;
      };
      link(i - 1, j, cx);
      link(i + 1, j, cx);
      link(i, j - 1, cy);
      link(i, j + 1, cy);
    }
  }
  return k;
}

/// Symmetric positive definite square root via eigendecomposition.
inline DenseMatrix spd_sqrt(const DenseMatrix& a) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
  return es.operatorSqrt();
}

}  // namespace ddh::testing
