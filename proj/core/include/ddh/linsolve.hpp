#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/SparseLU>

#include "ddh/system.hpp"

namespace ddh {

/// A factorization or linear solve could not be completed.
class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ContractionReport {
  int iterations = 0;
  /// Largest consecutive step ratio after the warm-up ratio.
  double contraction_factor = 0.0;
  /// ||h'||_H / ||g~||_G of the returned iterate.
  double inverse_norm_estimate = 0.0;
  bool converged = false;
};

/// Fixed-point iteration left the contraction regime or ran out of iterations.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, ContractionReport report)
      : std::runtime_error(what), report_(report) {}
  const ContractionReport& report() const { return report_; }

 private:
  ContractionReport report_;
};

/// (-Lap)^{-1} of a dual component: K^{-1} g.
Vector inv_laplacian_dual(const Grid& grid, const Vector& g);
/// (-Lap)^{-1} of a nodal L2 component: K^{-1} M f, so that
/// inv_laplacian_nodal(M^{-1} K w) == w.
Vector inv_laplacian_nodal(const Grid& grid, const Vector& f);

/// Sparse LU of an assembled block Jacobian. Reusable for many right-hand sides.
class DirectSolver {
 public:
  explicit DirectSolver(BlockOperator op);

  BlockState solve(const Grid& grid, const DualResidual& g) const;
  const BlockOperator& op() const { return op_; }

 private:
  BlockOperator op_;
  std::shared_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
};

BlockState solve_direct(const Grid& grid, const BlockOperator& op, const DualResidual& g);

/// The preconditioned linearized map T with h' = T h' + P^{-1} g, where
/// P = diag(-Lap, d_n (-Lap), d_p (-Lap)):
///   T1 = -lambda (-Lap)^{-1} (sigma' - tau')
///   T2 =  (c_n/d_n) (-Lap)^{-1} div-form(sigma' grad u + n grad rho')
///   T3 = -(c_p/d_p) (-Lap)^{-1} div-form(tau' grad u + p grad rho')
BlockState contraction_operator(const Grid& grid, const Coefficients& coeffs, const BlockState& h,
                                double lambda, const BlockState& dir);

/// P^{-1} g: component-wise inverse Laplacian of g with g2, g3 divided by d_n, d_p.
BlockState preconditioned_rhs(const Grid& grid, const Coefficients& coeffs, const DualResidual& g);

struct ContractionResult {
  BlockState solution;
  ContractionReport report;
};

/// Solves F_h(h, lambda) h' = g by the fixed-point iteration from h' = 0.
/// Throws NonConvergence when a step ratio >= 1 is observed or maxit is hit.
ContractionResult solve_contraction(const Grid& grid, const Coefficients& coeffs, const BlockState& h,
                                    double lambda, const DualResidual& g, double tol, int maxit);

/// Max of ||F_h^{-1} g||_H over random probes with ||g||_G = 1. A lower
/// bound on the inverse norm; deterministic for a given seed.
double measure_inverse_norm(const Grid& grid, const Coefficients& coeffs, const BlockState& h,
                            double lambda, int probes, std::uint64_t seed = 0);

}  // namespace ddh
