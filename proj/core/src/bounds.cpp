#include "ddh/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddh/linsolve.hpp"
#include "ddh/sampling.hpp"

namespace ddh {

namespace {

std::optional<double> d0_from(const Coefficients& c, double denominator) {
  if (denominator == 0.0) return std::nullopt;
  const double ratio = std::min(c.d_n / c.c_n, c.d_p / c.c_p);
  return std::sqrt(4.0 * ratio / denominator);
}

bool below(double width, const std::optional<double>& bound) { return !bound || width < *bound; }

}  // namespace

std::optional<double> compute_d0(const Coefficients& c) {
  const double d_inf = c.doping.size() ? c.doping.cwiseAbs().maxCoeff() : 0.0;
  const double au_inf = c.a_u.size() ? c.a_u.cwiseAbs().maxCoeff() : 0.0;
  return d0_from(c, d_inf + au_inf);
}

std::optional<double> compute_d0_proof(const Grid& grid, const Coefficients& c) {
  // Lap_h a_u = -(K a_u) / m on interior rows.
  const Vector lap_au = -grid.restrict_interior(grid.stiffness_full() * c.a_u).cwiseQuotient(grid.mass());
  const Vector q = grid.restrict_interior(c.doping) + lap_au;
  return d0_from(c, q.cwiseAbs().maxCoeff());
}

namespace {

double pair_distance(const Grid& grid, const BlockState& v, double lv, const BlockState& w, double lw) {
  const double dh = norm_H(grid, v - w);
  return std::sqrt(dh * dh + (lv - lw) * (lv - lw));
}

}  // namespace

std::optional<double> jacobian_lipschitz_ratio(const Grid& grid, const Coefficients& c, const BlockState& v,
                                               double lv, const BlockState& w, double lw, const BlockState& dir) {
  const double dist = pair_distance(grid, v, lv, w, lw);
  if (dist == 0.0) return std::nullopt;
  const DualResidual delta = jacobian_apply(grid, c, v, lv, dir) - jacobian_apply(grid, c, w, lw, dir);
  return norm_G(grid, delta) / dist;
}

std::optional<double> parameter_lipschitz_ratio(const Grid& grid, const Coefficients& c, const BlockState& v,
                                                double lv, const BlockState& w, double lw) {
  const double dist = pair_distance(grid, v, lv, w, lw);
  if (dist == 0.0) return std::nullopt;
  return norm_G(grid, f_lambda(grid, c, v) - f_lambda(grid, c, w)) / dist;
}

LipschitzEstimate estimate_lipschitz(const Grid& grid, const Coefficients& c, double radius, int samples,
                                     std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("estimate_lipschitz: samples must be >= 2");
  if (!(radius >= 0.0)) throw std::invalid_argument("estimate_lipschitz: radius must be nonnegative");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LipschitzEstimate est;

  for (int s = 0; s < samples; ++s) {
    const BlockState v = random_smooth_state_in_ball(grid, rng, radius);
    const BlockState w = random_smooth_state_in_ball(grid, rng, radius);
    const double lv = unit(rng);
    const double lw = unit(rng);
    const BlockState hp = random_state_with_norm(grid, rng, 1.0);

    const auto parameter = parameter_lipschitz_ratio(grid, c, v, lv, w, lw);
    if (!parameter) continue;
    ++est.pairs_used;
    est.parameter = std::max(est.parameter, *parameter);

    est.jacobian = std::max(est.jacobian, *jacobian_lipschitz_ratio(grid, c, v, lv, w, lw, hp));
    const BlockState diff = v - w;
    const double dh = norm_H(grid, diff);
    if (dh > 0.0) {
      est.jacobian = std::max(est.jacobian, *jacobian_lipschitz_ratio(grid, c, v, lv, w, lw, (1.0 / dh) * diff));
    }
  }
  est.constant = std::max(est.jacobian, est.parameter);
  return est;
}

BoundsFlags recompute_flags(const BoundsReport& r) {
  BoundsFlags f{};
  f.width_ok = below(r.width, r.d0);
  f.coercivity_ok = below(r.width, r.d0_proof);
  f.contraction_width_ok = r.contraction_converged && r.contraction_factor <= 0.5 && r.M_meas <= r.M;
  f.bigr_ok = check_bigr(r.r, r.C_meas, r.M, 1.0, r.sup_F_mu);
  return f;
}

BoundsReport compute_bounds(const Grid& grid, const Coefficients& c, const BlockState& h0,
                            const BoundsOptions& opt) {
  validate(grid, c);
  BoundsReport rep;
  rep.width = grid.spec().width;
  rep.alpha0 = opt.alpha0;
  rep.M = opt.inverse_bound;
  rep.d0 = compute_d0(c);
  rep.d0_proof = compute_d0_proof(grid, c);
  rep.an_l2 = l2_norm_full(grid, c.a_n);
  rep.ap_l2 = l2_norm_full(grid, c.a_p);
  rep.h0_norm = norm_H(grid, h0);

  // F_h is affine in (h, lambda); the radius only shifts the balance between
  // state and parameter differences. Sample in the ball that C = 2 would give.
  const auto provisional = compute_r(2.0, rep.M, rep.an_l2, rep.ap_l2, rep.h0_norm, rep.alpha0);
  const auto lip = estimate_lipschitz(grid, c, rep.h0_norm + provisional.r, opt.lipschitz_samples, opt.seed);
  rep.C_meas = lip.constant;
  rep.C_jacobian = lip.jacobian;
  rep.C_parameter = lip.parameter;

  const auto choice = compute_r(rep.C_meas, rep.M, rep.an_l2, rep.ap_l2, rep.h0_norm, rep.alpha0);
  rep.d_required = choice.d_required;
  rep.r = choice.r;
  rep.R = rep.h0_norm + rep.r;
  rep.sup_F_mu = sup_f_mu_bound(rep.an_l2, rep.ap_l2, rep.width, rep.R);

  // Contraction regime at both ends of the homotopy, probed at h0.
  Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
  rep.contraction_converged = true;
  for (const double lambda : {0.0, 1.0}) {
    DualResidual g = random_dual(grid, rng);
    g *= 1.0 / norm_G(grid, g);
    try {
      const auto res = solve_contraction(grid, c, h0, lambda, g, opt.contraction_tol, opt.contraction_maxit);
      rep.contraction_factor = std::max(rep.contraction_factor, res.report.contraction_factor);
    } catch (const NonConvergence& e) {
      rep.contraction_converged = false;
      rep.contraction_factor = std::max(rep.contraction_factor, e.report().contraction_factor);
    }
    try {
      rep.M_meas = std::max(rep.M_meas, measure_inverse_norm(grid, c, h0, lambda, opt.inverse_probes, opt.seed));
    } catch (const SolverFailure&) {
      rep.M_meas = std::numeric_limits<double>::infinity();
    }
  }

  const BoundsFlags flags = recompute_flags(rep);
  rep.width_ok = flags.width_ok;
  rep.coercivity_ok = flags.coercivity_ok;
  rep.contraction_width_ok = flags.contraction_width_ok;
  rep.bigr_ok = flags.bigr_ok;
  return rep;
}

}  // namespace ddh
