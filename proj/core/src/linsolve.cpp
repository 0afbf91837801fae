#include "ddh/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ddh/sampling.hpp"

namespace ddh {

Vector inv_laplacian_dual(const Grid& grid, const Vector& g) { return grid.solve_stiffness(g); }

Vector inv_laplacian_nodal(const Grid& grid, const Vector& f) {
  return grid.solve_stiffness(grid.mass().cwiseProduct(f));
}

DirectSolver::DirectSolver(BlockOperator op)
    : op_(std::move(op)), lu_(std::make_shared<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>()) {
  op_.matrix.makeCompressed();
  // SparseLU does not terminate on structurally empty columns; catch those first.
  Eigen::VectorXi row_hits = Eigen::VectorXi::Zero(op_.matrix.rows());
  for (Eigen::Index k = 0; k < op_.matrix.outerSize(); ++k) {
    bool any = false;
    for (SparseMatrix::InnerIterator it(op_.matrix, k); it; ++it) {
      if (it.value() != 0.0) {
        any = true;
        ++row_hits[it.row()];
      }
    }
    if (!any) throw SolverFailure("block Jacobian is structurally singular (empty column " + std::to_string(k) + ")");
  }
  if ((row_hits.array() == 0).any()) throw SolverFailure("block Jacobian is structurally singular (empty row)");
  lu_->analyzePattern(op_.matrix);
  lu_->factorize(op_.matrix);
  if (lu_->info() != Eigen::Success) {
    throw SolverFailure("block Jacobian factorization failed (numerically singular): " + lu_->lastErrorMessage());
  }
}

BlockState DirectSolver::solve(const Grid& grid, const DualResidual& g) const {
  const Vector rhs = flatten(g);
  Vector x = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success || !x.allFinite()) {
    throw SolverFailure("block Jacobian solve failed");
  }
  // One step of iterative refinement against the assembled operator.
  const Vector defect = rhs - op_.matrix * x;
  x += lu_->solve(defect);
  if (!x.allFinite()) throw SolverFailure("block Jacobian solve produced non-finite values");
  return unflatten_state(grid, x);
}

BlockState solve_direct(const Grid& grid, const BlockOperator& op, const DualResidual& g) {
  return DirectSolver(op).solve(grid, g);
}

BlockState contraction_operator(const Grid& grid, const Coefficients& c, const BlockState& h, double lambda,
                                const BlockState& dir) {
  const auto f = physical_fields(grid, c, h);
  const Vector drho = grid.embed_interior(dir.rho);
  const Vector dsig = grid.embed_interior(dir.sigma);
  const Vector dtau = grid.embed_interior(dir.tau);
  const Vector ux = grid.dx() * f.u;
  const Vector uy = grid.dy() * f.u;
  const Vector rx = grid.dx() * drho;
  const Vector ry = grid.dy() * drho;

  // Weak form sum_e w (flux . grad phi) on interior test functions.
  const auto weak = [&](const Vector& fx, const Vector& fy) {
    return grid.restrict_interior(grid.edge_weight() *
                                  (grid.dx().transpose() * fx + grid.dy().transpose() * fy));
  };

  BlockState out;
  out.rho = -lambda * inv_laplacian_nodal(grid, dir.sigma - dir.tau);
  const Vector drift_n = weak((grid.ax() * dsig).cwiseProduct(ux) + (grid.ax() * f.n).cwiseProduct(rx),
                              (grid.ay() * dsig).cwiseProduct(uy) + (grid.ay() * f.n).cwiseProduct(ry));
  out.sigma = (c.c_n / c.d_n) * inv_laplacian_dual(grid, drift_n);
  const Vector drift_p = weak((grid.ax() * dtau).cwiseProduct(ux) + (grid.ax() * f.p).cwiseProduct(rx),
                              (grid.ay() * dtau).cwiseProduct(uy) + (grid.ay() * f.p).cwiseProduct(ry));
  out.tau = -(c.c_p / c.d_p) * inv_laplacian_dual(grid, drift_p);
  return out;
}

BlockState preconditioned_rhs(const Grid& grid, const Coefficients& c, const DualResidual& g) {
  BlockState b;
  b.rho = inv_laplacian_nodal(grid, g.g1);
  b.sigma = inv_laplacian_dual(grid, g.g2 / c.d_n);
  b.tau = inv_laplacian_dual(grid, g.g3 / c.d_p);
  return b;
}

ContractionResult solve_contraction(const Grid& grid, const Coefficients& c, const BlockState& h, double lambda,
                                    const DualResidual& g, double tol, int maxit) {
  if (!(tol > 0.0)) throw std::invalid_argument("solve_contraction: tol must be positive");
  if (maxit < 1) throw std::invalid_argument("solve_contraction: maxit must be >= 1");
  check_lambda(lambda);

  const BlockState b = preconditioned_rhs(grid, c, g);
  DualResidual g_scaled = g;
  g_scaled.g2 /= c.d_n;
  g_scaled.g3 /= c.d_p;
  const double g_norm = norm_G(grid, g_scaled);

  ContractionReport report;
  BlockState current = BlockState::zero(grid);
  double prev_step = -1.0;
  int ratios_seen = 0;
  constexpr double kNoiseFloor = 100.0 * std::numeric_limits<double>::epsilon();

  for (int k = 1; k <= maxit; ++k) {
    BlockState next = contraction_operator(grid, c, h, lambda, current) + b;
    const double step = norm_H(grid, next - current);
    const double size = norm_H(grid, next);
    report.iterations = k;

    if (prev_step > kNoiseFloor * size) {
      const double ratio = step / prev_step;
      ++ratios_seen;
      // The first ratio is warm-up; keep it only until a later one exists.
      if (ratios_seen == 1 || ratios_seen == 2) {
        report.contraction_factor = ratio;
      } else {
        report.contraction_factor = std::max(report.contraction_factor, ratio);
      }
      if (ratios_seen >= 2 && ratio >= 1.0) {
        report.inverse_norm_estimate = g_norm > 0.0 ? size / g_norm : 0.0;
        throw NonConvergence("contraction iteration diverging: step ratio " + std::to_string(ratio) +
                                 " >= 1 (width likely beyond the contraction regime)",
                             report);
      }
    }
    current = std::move(next);
    if (step <= tol * size) {
      report.converged = true;
      report.inverse_norm_estimate = g_norm > 0.0 ? size / g_norm : 0.0;
      return {std::move(current), report};
    }
    prev_step = step;
  }
  report.inverse_norm_estimate = g_norm > 0.0 ? norm_H(grid, current) / g_norm : 0.0;
  throw NonConvergence("contraction iteration reached maxit = " + std::to_string(maxit) +
                           " with measured factor " + std::to_string(report.contraction_factor),
                       report);
}

double measure_inverse_norm(const Grid& grid, const Coefficients& c, const BlockState& h, double lambda,
                            int probes, std::uint64_t seed) {
  if (probes < 1) throw std::invalid_argument("measure_inverse_norm: probes must be >= 1");
  check_lambda(lambda);
  const DirectSolver solver(jacobian_assemble(grid, c, h, lambda));
  Rng rng(seed);
  double best = 0.0;
  for (int k = 0; k < probes; ++k) {
    DualResidual g = random_dual(grid, rng);
    g *= 1.0 / norm_G(grid, g);
    best = std::max(best, norm_H(grid, solver.solve(grid, g)));
  }
  return best;
}

}  // namespace ddh
