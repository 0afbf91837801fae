// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ddh/bounds.hpp"
#include "ddh/continuation.hpp"
#include "ddh/exact.hpp"
#include "ddh/sampling.hpp"
#include "instances.hpp"
#include "oracles.hpp"

namespace {

using namespace ddh;
using ddh::testing::DenseMatrix;

struct Outcome {
  bool ok = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome poisson_mms() {
  std::vector<double> hs, errs;
  for (const int n : {8, 16, 32}) {
    const auto inst = ddh::testing::poisson_mms_instance(n);
    const BlockState h0 = solve_lambda0(inst.grid, inst.coeffs);
    const Vector u = physical_fields(inst.grid, inst.coeffs, h0).u;
    hs.push_back(1.0 / n);
    errs.push_back((u - ddh::testing::sine_mode(inst.grid)).cwiseAbs().maxCoeff());
  }
  const double order = ddh::testing::loglog_slope(hs, errs);
  return {std::abs(order - 2.0) <= 0.2,
          fmt("order %.3f", order) + fmt(" (max error %.3e at nx=32)", errs.back())};
}

Outcome jacobian_fd() {
  auto inst = ddh::testing::reference_instance(1.0, 1.0, 8, 8);
  inst.coeffs.doping = inst.grid.sample([](double x, double y) { return std::sin(3 * x) + y; });
  Rng rng(20240601);
  const BlockState h = random_state(inst.grid, rng);
  const double eps = 1e-5;
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    const BlockState dir = random_state(inst.grid, rng);
    const DualResidual fd = (1.0 / (2 * eps)) * (residual(inst.grid, inst.coeffs, h + eps * dir, 0.7) -
                                                 residual(inst.grid, inst.coeffs, h - eps * dir, 0.7));
    const DualResidual j = jacobian_apply(inst.grid, inst.coeffs, h, 0.7, dir);
    worst = std::max(worst, norm_G(inst.grid, fd - j) / norm_G(inst.grid, j));
  }
  return {worst < 1e-6, fmt("max relative error %.3e over 10 directions", worst)};
}

Outcome constant_homotopy() {
  const auto inst = ddh::testing::constant_instance();
  TraceConfig cfg;
  cfg.steps = 5;
  const TraceResult t = trace_curve(inst.grid, inst.coeffs, cfg);
  double dist = 0.0;
  int iters = 0;
  for (const auto& p : t.points) {
    dist = std::max(dist, p.dist_to_h0);
    iters = std::max(iters, p.newton_iters);
  }
  const bool ok = t.complete() && t.points.size() == 6 && dist <= 1e-12 && iters == 0;
  return {ok, fmt("%g points", static_cast<double>(t.points.size())) + fmt(", max dist %.3e", dist) +
                  fmt(", max newton iters %g", iters)};
}

Outcome dense_terminus() {
  Grid grid(DomainSpec{1.0, 0.5, 6, 4});
  Coefficients c = zero_coefficients(grid);
  c.a_u = lift_boundary(grid, trace_of(grid, [](double x, double) { return 2.0 * x; }));
  c.a_n = lift_boundary(grid, trace_of(grid, [](double x, double) { return 2.0 * (1.0 + x); }));
  c.a_p = c.a_n;
  c.doping.setConstant(2.0);
  TraceConfig cfg;
  cfg.newton_tol = 1e-12;
  const TraceResult t = trace_curve(grid, c, cfg);
  if (!t.complete()) return {false, "trace incomplete: " + t.failure->message};
  const BlockState oracle = ddh::testing::dense_damped_newton(grid, c, 1.0, BlockState::zero(grid));
  const double diff = norm_H(grid, t.points.back().state - oracle);
  return {diff < 1e-8, fmt("%g interior nodes", static_cast<double>(grid.num_interior())) +
                           fmt(", terminus difference %.3e", diff)};
}

Outcome contraction_regime() {
  const std::vector<double> widths{0.1, 0.05, 0.025};
  std::vector<double> factors;
  double m_meas = 0.0;
  bool converged = true;
  for (const double d : widths) {
    const auto inst = ddh::testing::reference_instance(d);
    const BlockState h0 = solve_lambda0(inst.grid, inst.coeffs);
    Rng rng(77);
    DualResidual g = random_dual(inst.grid, rng);
    g *= 1.0 / norm_G(inst.grid, g);
    try {
      const auto res = solve_contraction(inst.grid, inst.coeffs, h0, 1.0, g, 1e-12, 500);
      factors.push_back(res.report.contraction_factor);
    } catch (const NonConvergence& e) {
      converged = false;
      factors.push_back(e.report().contraction_factor);
    }
    m_meas = std::max(m_meas, measure_inverse_norm(inst.grid, inst.coeffs, h0, 1.0, 10, 77));
  }
  const double slope = ddh::testing::loglog_slope(widths, factors);
  const bool ok = converged && factors[1] < 0.5 && factors[2] < 0.5 && std::abs(slope - 1.0) <= 0.3 &&
                  m_meas <= 2.0 * 1.05;
  return {ok, fmt("factors %.4f", factors[0]) + fmt(" / %.4f", factors[1]) + fmt(" / %.4f", factors[2]) +
                  fmt(", slope %.3f", slope) + fmt(", inverse norm %.4f", m_meas)};
}

Outcome dual_norm_identity() {
  const Grid grid(DomainSpec{1.0, 1.0, 6, 6});
  const DenseMatrix kinv = DenseMatrix(grid.stiffness()).inverse();
  Rng rng(6);
  double worst = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Vector g = random_vector(static_cast<Eigen::Index>(grid.num_interior()), rng);
    const double via_solve = std::pow(h_minus1_norm(grid, g), 2);
    const double dense = g.dot(kinv * g);
    worst = std::max(worst, std::abs(via_solve - dense) / dense);
  }
  return {worst < 1e-10, fmt("max relative difference %.3e over 20 vectors", worst)};
}

struct ReferenceAudit {
  ddh::testing::ReferenceInstance inst = ddh::testing::reference_instance();
  BlockState h0;
  BoundsReport report;
};

const ReferenceAudit& reference_audit() {
  static const ReferenceAudit audit = [] {
    ReferenceAudit a;
    a.h0 = newton_correct(a.inst.grid, a.inst.coeffs, solve_lambda0(a.inst.grid, a.inst.coeffs), 0.0, {}).state;
    BoundsOptions opt;
    opt.seed = 1;
    a.report = compute_bounds(a.inst.grid, a.inst.coeffs, a.h0, opt);
    return a;
  }();
  return audit;
}

Outcome feasibility_consistency() {
  using Q = QuadraticSurd;
  const BoundsReport& rep = reference_audit().report;
  const Q c = Q::from_double(rep.C_meas);
  const Q an = Q::from_double(rep.an_l2);
  const Q ap = Q::from_double(rep.ap_l2);
  const Q h0 = Q::from_double(rep.h0_norm);
  bool ok = true;
  std::string detail = fmt("C_meas %.4g;", rep.C_meas);
  for (const double alpha : {0.25, 0.5, 1.0}) {
    const auto choice = compute_r(c, Q(2), an, ap, h0, Q::from_double(alpha));
    const Q sup = sup_f_mu_bound(an, ap, choice.d_required, h0 + choice.r);
    const bool holds = check_bigr(choice.r, c, Q(2), Q(1), sup);
    const Q margin = choice.r - max_of(c, Q(2)) * (Q(1) + sup);
    ok = ok && holds;
    detail += fmt(" alpha %.2f:", alpha) + (holds ? " holds" : " violated") + fmt(" (margin %.4g)", margin.to_double());
  }
  return {ok, detail};
}

Outcome nonnegativity() {
  const auto inst = ddh::testing::reference_instance(0.025);
  const TraceResult t = trace_curve(inst.grid, inst.coeffs, TraceConfig{});
  double min_density = std::numeric_limits<double>::infinity();
  double neg = 0.0;
  for (const auto& p : t.points) {
    min_density = std::min({min_density, p.min_n, p.min_p});
    neg = std::max({neg, p.neg_part_norm_n, p.neg_part_norm_p});
  }
  const bool ok = t.complete() && t.points.size() == 11 && min_density >= -1e-10 && neg <= 1e-10;
  return {ok, fmt("%g points", static_cast<double>(t.points.size())) + fmt(", min density %.6f", min_density) +
                  fmt(", max negative-part norm %.3e", neg)};
}

Outcome ball_containment() {
  const ReferenceAudit& a = reference_audit();
  const TraceResult t = trace_curve(a.inst.grid, a.inst.coeffs, TraceConfig{});
  double dist = 0.0;
  for (const auto& p : t.points) dist = std::max(dist, p.dist_to_h0);
  const bool ok = a.report.feasible() && t.complete() && dist < a.report.r;
  return {ok, fmt("max dist %.4e", dist) + fmt(" < r = %.4f", a.report.r) +
                  (a.report.feasible() ? ", instance feasible" : ", instance NOT feasible")};
}

Outcome remainder_audit() {
  const ReferenceAudit& a = reference_audit();
  const Grid& grid = a.inst.grid;
  const Coefficients& c = a.inst.coeffs;
  const double radius = a.report.R;
  const double bound = 1.1 * a.report.C_meas;
  Rng rng(10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_ratio = 0.0;
  double worst_structure = 0.0;
  for (int s = 0; s < 100; ++s) {
    const BlockState v = random_smooth_state_in_ball(grid, rng, radius);
    const BlockState w = random_smooth_state_in_ball(grid, rng, radius);
    const double lv = unit(rng), lw = unit(rng);
    const BlockState dv = v - w;
    const DualResidual fv = residual(grid, c, v, lv);
    const DualResidual fw = residual(grid, c, w, lw);
    const DualResidual jw = jacobian_apply(grid, c, w, lw, dv);
    const DualResidual rem = fv - fw - jw - (lv - lw) * f_lambda(grid, c, w);
    const double dh = norm_H(grid, dv);
    worst_ratio = std::max(worst_ratio, norm_G(grid, rem) / (bound * (dh * dh + (lv - lw) * (lv - lw))));

    // Base-point independence of the quadratic remainder, relative to the cancelled terms.
    const DualResidual fv_w = residual(grid, c, v, lw);
    const DualResidual q1 = fv_w - fw - jw;
    const BlockState base = random_smooth_state_in_ball(grid, rng, radius);
    const DualResidual fb = residual(grid, c, base, lw);
    const DualResidual fbd = residual(grid, c, base + dv, lw);
    const DualResidual jb = jacobian_apply(grid, c, base, lw, dv);
    const DualResidual q2 = fbd - fb - jb;
    const double scale = std::max({norm_G(grid, fv_w), norm_G(grid, fw), norm_G(grid, jw), norm_G(grid, fbd),
                                   norm_G(grid, fb), norm_G(grid, jb)});
    worst_structure = std::max(worst_structure, norm_G(grid, q1 - q2) / scale);
  }
  return {worst_ratio <= 1.0 && worst_structure < 1e-12,
          fmt("max remainder / (1.1 C (dist^2)) = %.4f", worst_ratio) +
              fmt(", structure identity %.3e", worst_structure)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "lambda=0 Poisson manufactured solution, order 2.0 +- 0.2", 5.0, poisson_mms},
      {2, "Jacobian vs central differences, relative error < 1e-6", 1.0, jacobian_fd},
      {3, "constant-solution homotopy, dist <= 1e-12 and zero Newton iterations", 1.0, constant_homotopy},
      {4, "dense damped-Newton terminus on 5x3 interior grid, agreement < 1e-8", 1.0, dense_terminus},
      {5, "contraction regime: factor < 1/2, slope 1.0 +- 0.3, inverse norm <= 2.1", 30.0, contraction_regime},
      {6, "dual norm via one solve vs dense inverse, relative < 1e-10", 1.0, dual_norm_identity},
      {7, "radius choice satisfies the step condition, exact arithmetic", 1.0, feasibility_consistency},
      {8, "nonnegativity along the d=0.025 curve, tolerance 1e-10", 10.0, nonnegativity},
      {9, "ball containment on the feasible reference instance", 10.0, ball_containment},
      {10, "quadratic remainder bound (1.1 C) and structure identity < 1e-12", 10.0, remainder_audit},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.time_limit_s;
    const bool pass = out.ok && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2d %s  %s | %s | %.3f s (limit %.0f s)%s\n", c.id, pass ? "PASS" : "FAIL",
                c.title.c_str(), out.detail.c_str(), secs, c.time_limit_s, in_time ? "" : " TIME EXCEEDED");
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
