#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddh/linsolve.hpp"

namespace ddh {

enum class LinearSolverKind { direct, contraction };

struct TraceConfig {
  int steps = 10;
  double newton_tol = 1e-10;
  int newton_maxit = 20;
  LinearSolverKind linear_solver = LinearSolverKind::direct;
  /// Only used by the contraction solver.
  double linear_tol = 1e-13;
  int linear_maxit = 500;
};

void validate(const TraceConfig& cfg);

/// Failure of one of the three decoupled lambda = 0 solves.
class Lambda0Failure : public SolverFailure {
 public:
  Lambda0Failure(int equation, const std::string& what)
      : SolverFailure("lambda = 0 equation " + std::to_string(equation) + ": " + what), equation_(equation) {}
  /// 1 = Poisson, 2 = negative carriers, 3 = positive carriers.
  int equation() const { return equation_; }

 private:
  int equation_;
};

/// Newton corrector ran out of iterations or produced non-finite values.
class CorrectorFailure : public std::runtime_error {
 public:
  CorrectorFailure(const std::string& what, int iterations, double last_residual)
      : std::runtime_error(what), iterations_(iterations), last_residual_(last_residual) {}
  int iterations() const { return iterations_; }
  double last_residual() const { return last_residual_; }

 private:
  int iterations_;
  double last_residual_;
};

struct NonnegativityDiagnostics {
  double min_n = 0.0;
  double min_p = 0.0;
  /// ||min(n, 0)||_{H10} and ||min(p, 0)||_{H10}.
  double neg_part_norm_n = 0.0;
  double neg_part_norm_p = 0.0;
};

struct CurvePoint {
  double lambda = 0.0;
  BlockState state;
  double residual_norm = 0.0;
  double dist_to_h0 = 0.0;
  int newton_iters = 0;
  double min_n = 0.0;
  double min_p = 0.0;
  double neg_part_norm_n = 0.0;
  double neg_part_norm_p = 0.0;
};

struct TraceFailure {
  double lambda = 0.0;
  int iterations = 0;
  double last_residual = 0.0;
  std::string message;
};

struct TraceResult {
  std::vector<CurvePoint> points;
  std::optional<TraceFailure> failure;

  bool complete() const { return !failure.has_value(); }
};

/// Solves F_h(h, lambda) h' = g with the configured linear solver.
BlockState solve_linearized(const Grid& grid, const Coefficients& coeffs, const BlockState& h, double lambda,
                            const DualResidual& g, const TraceConfig& cfg);

/// The decoupled lambda = 0 system: Poisson for rho with homogeneous data,
/// then the two linear carrier equations with u = rho + a_u frozen.
BlockState solve_lambda0(const Grid& grid, const Coefficients& coeffs);

/// h + dl * hdot with F_h hdot = -F_lambda.
BlockState euler_predict(const Grid& grid, const Coefficients& coeffs, const BlockState& h, double lambda,
                         double dlambda, const TraceConfig& cfg = {});

struct NewtonResult {
  BlockState state;
  int iterations = 0;
  /// ||F||_G before each iteration and at acceptance.
  std::vector<double> residual_history;
};

NewtonResult newton_correct(const Grid& grid, const Coefficients& coeffs, const BlockState& h_init, double lambda,
                            const TraceConfig& cfg);

/// The curve start h0: solve_lambda0 polished by the corrector at lambda = 0.
NewtonResult curve_start(const Grid& grid, const Coefficients& coeffs, const TraceConfig& cfg);

NonnegativityDiagnostics check_nonnegativity(const Grid& grid, const Coefficients& coeffs, const BlockState& h);

/// Points at lambda = k / steps. Stops at the first corrector failure and
/// returns the partial curve with the failure record.
TraceResult trace_curve(const Grid& grid, const Coefficients& coeffs, const TraceConfig& cfg);

}  // namespace ddh
