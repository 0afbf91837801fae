#pragma once

#include "ddh/mesh.hpp"

namespace ddh {

/// Transport constants, permanent charge and boundary-data extensions.
/// Nodal fields (doping, a_u, a_n, a_p) live on all grid nodes.
struct Coefficients {
  double d_n = 1.0;
  double c_n = 1.0;
  double d_p = 1.0;
  double c_p = 1.0;
  Vector doping;
  Vector a_u;
  Vector a_n;
  Vector a_p;
};

/// Checks positivity of the constants, field sizes and finiteness.
void validate(const Grid& grid, const Coefficients& coeffs);

/// Coefficients with zero fields sized for the grid.
Coefficients zero_coefficients(const Grid& grid);

/// Correction (rho, sigma, tau) on interior nodes; zero trace implied.
struct BlockState {
  Vector rho;
  Vector sigma;
  Vector tau;

  static BlockState zero(const Grid& grid);

  BlockState& operator+=(const BlockState& o);
  BlockState& operator-=(const BlockState& o);
  BlockState& operator*=(double s);
};

BlockState operator+(BlockState a, const BlockState& b);
BlockState operator-(BlockState a, const BlockState& b);
BlockState operator*(double s, BlockState a);

/// (g1, g2, g3): g1 is a nodal interior field, g2 and g3 are dual vectors
/// (functional values on the interior nodal basis).
struct DualResidual {
  Vector g1;
  Vector g2;
  Vector g3;

  static DualResidual zero(const Grid& grid);

  DualResidual& operator+=(const DualResidual& o);
  DualResidual& operator-=(const DualResidual& o);
  DualResidual& operator*=(double s);
};

DualResidual operator+(DualResidual a, const DualResidual& b);
DualResidual operator-(DualResidual a, const DualResidual& b);
DualResidual operator*(double s, DualResidual a);

/// Throws std::invalid_argument unless 0 <= lambda <= 1.
void check_lambda(double lambda);

/// Stacked (rho, sigma, tau) and (g1, g2, g3) layouts used by the block matrix.
Vector flatten(const BlockState& h);
Vector flatten(const DualResidual& g);
BlockState unflatten_state(const Grid& grid, const Vector& v);
DualResidual unflatten_dual(const Grid& grid, const Vector& v);

/// Potential and densities (u, n, p) = h + (a_u, a_n, a_p) on all nodes.
struct PhysicalFields {
  Vector u;
  Vector n;
  Vector p;
};

PhysicalFields physical_fields(const Grid& grid, const Coefficients& coeffs, const BlockState& h);

/// F(h, lambda).
///   g1 = -Lap_h u + lambda (n - p) - D             (interior nodes)
///   g2[phi] = sum_e w (d_n grad n - c_n n grad u) . grad phi
///   g3[psi] = sum_e w (d_p grad p + c_p p grad u) . grad psi
/// Edge gradients are difference quotients; edge densities are midpoint averages.
DualResidual residual(const Grid& grid, const Coefficients& coeffs, const BlockState& h,
                      double lambda);

/// F_h(h, lambda) applied to a direction, matrix-free.
DualResidual jacobian_apply(const Grid& grid, const Coefficients& coeffs, const BlockState& h,
                            double lambda, const BlockState& dir);

/// Explicit 3x3 block sparse matrix of F_h(h, lambda) acting on flatten(h').
struct BlockOperator {
  SparseMatrix matrix;
  std::size_t block_size = 0;

  DualResidual apply(const Grid& grid, const BlockState& dir) const;
  /// Block (row, col), both in {0, 1, 2}.
  SparseMatrix block(int row, int col) const;
};

BlockOperator jacobian_assemble(const Grid& grid, const Coefficients& coeffs, const BlockState& h,
                                double lambda);

/// F_lambda(h): (n - p, 0, 0). Independent of lambda.
DualResidual f_lambda(const Grid& grid, const Coefficients& coeffs, const BlockState& h);

/// ||g||_{H^-1} = sqrt(g^T K^{-1} g) for a dual vector.
double h_minus1_norm(const Grid& grid, const Vector& g);

double norm_H(const Grid& grid, const BlockState& h);
double norm_G(const Grid& grid, const DualResidual& g);

}  // namespace ddh
