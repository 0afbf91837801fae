#include "ddh/continuation.hpp"

#include <algorithm>
#include <cmath>

namespace ddh {

void validate(const TraceConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (!(cfg.newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (cfg.newton_maxit < 1) throw std::invalid_argument("newton_maxit must be >= 1");
  if (!(cfg.linear_tol > 0.0)) throw std::invalid_argument("linear solver tol must be positive");
  if (cfg.linear_maxit < 1) throw std::invalid_argument("linear solver maxit must be >= 1");
}

BlockState solve_linearized(const Grid& grid, const Coefficients& c, const BlockState& h, double lambda,
                            const DualResidual& g, const TraceConfig& cfg) {
  if (cfg.linear_solver == LinearSolverKind::contraction) {
    return solve_contraction(grid, c, h, lambda, g, cfg.linear_tol, cfg.linear_maxit).solution;
  }
  return DirectSolver(jacobian_assemble(grid, c, h, lambda)).solve(grid, g);
}

namespace {

Vector solve_block(const SparseMatrix& a, const Vector& rhs, int equation) {
  SparseMatrix m = a;
  m.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  if (lu.info() != Eigen::Success) throw Lambda0Failure(equation, "factorization failed: " + lu.lastErrorMessage());
  Vector x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw Lambda0Failure(equation, "solve failed");
  x += lu.solve(Vector(rhs - m * x));
  return x;
}

}  // namespace

BlockState solve_lambda0(const Grid& grid, const Coefficients& c) {
  validate(grid, c);
  BlockState h = BlockState::zero(grid);

  // K rho = M D - (K_full a_u) on interior rows.
  const Vector rhs1 = grid.mass().cwiseProduct(grid.restrict_interior(c.doping)) -
                      grid.restrict_interior(grid.stiffness_full() * c.a_u);
  h.rho = grid.solve_stiffness(rhs1);
  if (!h.rho.allFinite()) throw Lambda0Failure(1, "Poisson solve produced non-finite values");

  // With u frozen each carrier equation is linear in its correction:
  // F_k(sigma) = J_kk sigma + F_k(0).
  const DualResidual base = residual(grid, c, h, 0.0);
  const BlockOperator op = jacobian_assemble(grid, c, h, 0.0);
  h.sigma = solve_block(op.block(1, 1), -base.g2, 2);
  h.tau = solve_block(op.block(2, 2), -base.g3, 3);
  return h;
}

BlockState euler_predict(const Grid& grid, const Coefficients& c, const BlockState& h, double lambda, double dlambda,
                         const TraceConfig& cfg) {
  check_lambda(lambda);
  if (!(dlambda >= 0.0)) throw std::invalid_argument("euler_predict: step must be nonnegative");
  if (lambda + dlambda > 1.0 + 1e-12) throw std::invalid_argument("euler_predict: lambda + step exceeds 1");
  const DualResidual fl = f_lambda(grid, c, h);
  if (dlambda == 0.0 || !fl.g1.any()) return h;
  const BlockState hdot = -1.0 * solve_linearized(grid, c, h, lambda, fl, cfg);
  return h + dlambda * hdot;
}

NewtonResult newton_correct(const Grid& grid, const Coefficients& c, const BlockState& h_init, double lambda,
                            const TraceConfig& cfg) {
  validate(cfg);
  check_lambda(lambda);
  NewtonResult out{h_init, 0, {}};
  double res = norm_G(grid, residual(grid, c, out.state, lambda));
  out.residual_history.push_back(res);
  while (!(res <= cfg.newton_tol)) {
    if (!std::isfinite(res)) {
      throw CorrectorFailure("Newton corrector produced a non-finite residual", out.iterations, res);
    }
    if (out.iterations == cfg.newton_maxit) {
      throw CorrectorFailure("Newton corrector did not reach tolerance in " + std::to_string(cfg.newton_maxit) +
                                 " iterations (last residual " + std::to_string(res) + ")",
                             out.iterations, res);
    }
    const DualResidual f = residual(grid, c, out.state, lambda);
    out.state -= solve_linearized(grid, c, out.state, lambda, f, cfg);
    ++out.iterations;
    res = norm_G(grid, residual(grid, c, out.state, lambda));
    out.residual_history.push_back(res);
  }
  return out;
}

NewtonResult curve_start(const Grid& grid, const Coefficients& c, const TraceConfig& cfg) {
  return newton_correct(grid, c, solve_lambda0(grid, c), 0.0, cfg);
}

NonnegativityDiagnostics check_nonnegativity(const Grid& grid, const Coefficients& c, const BlockState& h) {
  const auto f = physical_fields(grid, c, h);
  const Vector n_neg = f.n.cwiseMin(0.0);
  const Vector p_neg = f.p.cwiseMin(0.0);
  const SparseMatrix& k = grid.stiffness_full();
  NonnegativityDiagnostics d;
  d.min_n = f.n.minCoeff();
  d.min_p = f.p.minCoeff();
  d.neg_part_norm_n = std::sqrt(std::max(0.0, n_neg.dot(k * n_neg)));
  d.neg_part_norm_p = std::sqrt(std::max(0.0, p_neg.dot(k * p_neg)));
  return d;
}

namespace {

CurvePoint make_point(const Grid& grid, const Coefficients& c, const BlockState& h0, BlockState state,
                      double lambda, int iterations) {
  CurvePoint pt;
  pt.lambda = lambda;
  pt.residual_norm = norm_G(grid, residual(grid, c, state, lambda));
  pt.dist_to_h0 = norm_H(grid, state - h0);
  pt.newton_iters = iterations;
  const auto diag = check_nonnegativity(grid, c, state);
  pt.min_n = diag.min_n;
  pt.min_p = diag.min_p;
  pt.neg_part_norm_n = diag.neg_part_norm_n;
  pt.neg_part_norm_p = diag.neg_part_norm_p;
  pt.state = std::move(state);
  return pt;
}

}  // namespace

TraceResult trace_curve(const Grid& grid, const Coefficients& c, const TraceConfig& cfg) {
  validate(cfg);
  TraceResult out;
  // The lambda = 0 solve is direct; the corrector only polishes it, and the
  // polished state is the ball center h0.
  BlockState h0;
  int iters0 = 0;
  try {
    auto polished = curve_start(grid, c, cfg);
    iters0 = polished.iterations;
    h0 = std::move(polished.state);
  } catch (const CorrectorFailure& e) {
    out.failure = TraceFailure{0.0, e.iterations(), e.last_residual(), e.what()};
    return out;
  } catch (const SolverFailure& e) {
    out.failure = TraceFailure{0.0, 0, std::nan(""), e.what()};
    return out;
  }
  out.points.push_back(make_point(grid, c, h0, h0, 0.0, iters0));

  for (int k = 1; k <= cfg.steps; ++k) {
    const double lambda_prev = out.points.back().lambda;
    const double lambda = k == cfg.steps ? 1.0 : static_cast<double>(k) / cfg.steps;
    try {
      const BlockState pred = euler_predict(grid, c, out.points.back().state, lambda_prev, lambda - lambda_prev, cfg);
      auto corr = newton_correct(grid, c, pred, lambda, cfg);
      out.points.push_back(make_point(grid, c, h0, std::move(corr.state), lambda, corr.iterations));
    } catch (const CorrectorFailure& e) {
      out.failure = TraceFailure{lambda, e.iterations(), e.last_residual(), e.what()};
      return out;
    } catch (const std::runtime_error& e) {
      out.failure = TraceFailure{lambda, 0, std::nan(""), e.what()};
      return out;
    }
  }
  return out;
}

}  // namespace ddh
