#pragma once

#include <cstdint>
#include <optional>

#include "ddh/exact.hpp"
#include "ddh/system.hpp"

namespace ddh {

// Feasibility formulas are templated on the scalar so that the same code
// runs in double and in exact Q(sqrt 2) arithmetic.

template <class T>
T max_of(const T& a, const T& b) {
  return a < b ? b : a;
}

/// Uniform bound on ||F_lambda||: ||a_n|| + ||a_p|| + (2d/sqrt 2) R.
template <class T>
T sup_f_mu_bound(const T& an_l2, const T& ap_l2, const T& width, const T& radius) {
  return an_l2 + ap_l2 + (T(2) * width / sqrt2<T>()) * radius;
}

template <class T>
struct RadiusChoice {
  T d_required;
  T r;
};

/// Width demanded by alpha0 and the resulting ball radius:
///   d = alpha0 / (2 sqrt2 max(C, 2))
///   r = max(C, 2)(1 + ||a_n|| + ||a_p||) / (1 - alpha0/2) + alpha0/(2 - alpha0) ||h0||
/// M enters only through check_bigr; it is accepted here to keep the call
/// shape of the feasibility chain.
template <class T>
RadiusChoice<T> compute_r(const T& lipschitz, const T& /*inverse_bound*/, const T& an_l2, const T& ap_l2,
                          const T& h0_norm, const T& alpha0) {
  if (!(T(0) < alpha0) || T(1) < alpha0) throw std::invalid_argument("alpha0 must lie in (0, 1]");
  const T m = max_of(lipschitz, T(2));
  RadiusChoice<T> out{alpha0 / (T(2) * sqrt2<T>() * m),
                      (T(1) / (T(1) - alpha0 / T(2))) * m * (T(1) + an_l2 + ap_l2) +
                          (alpha0 / (T(2) - alpha0)) * h0_norm};
  return out;
}

/// r >= max(C, M) (lambda1 - lambda0) [1 + sup ||F_mu||].
template <class T>
bool check_bigr(const T& r, const T& lipschitz, const T& inverse_bound, const T& lambda_span,
                const T& sup_f_mu) {
  return !(r < max_of(lipschitz, inverse_bound) * lambda_span * (T(1) + sup_f_mu));
}

/// Width bound from the printed formula d0^2 = 4 min(d_n/c_n, d_p/c_p) / (||D||_inf + ||a_u||_inf).
/// Empty when the denominator vanishes (no width restriction).
std::optional<double> compute_d0(const Coefficients& coeffs);

/// Same formula with the coercivity quantity ||D + Lap a_u||_inf (interior nodes).
std::optional<double> compute_d0_proof(const Grid& grid, const Coefficients& coeffs);

struct LipschitzEstimate {
  /// sup of ||(F_h(v,l) - F_h(w,m)) h'||_G / dist over samples.
  double jacobian = 0.0;
  /// sup of ||F_lambda(v) - F_lambda(w)||_G / dist over samples.
  double parameter = 0.0;
  /// max of the two; an empirical lower estimate of C.
  double constant = 0.0;
  int pairs_used = 0;
};

/// ||(F_h(v,l) - F_h(w,m)) dir||_G / (||v - w||_H^2 + (l - m)^2)^{1/2};
/// empty for coincident pairs.
std::optional<double> jacobian_lipschitz_ratio(const Grid& grid, const Coefficients& coeffs, const BlockState& v,
                                               double lv, const BlockState& w, double lw, const BlockState& dir);
/// ||F_lambda(v) - F_lambda(w)||_G / (||v - w||_H^2 + (l - m)^2)^{1/2}; empty for coincident pairs.
std::optional<double> parameter_lipschitz_ratio(const Grid& grid, const Coefficients& coeffs, const BlockState& v,
                                                double lv, const BlockState& w, double lw);

/// Samples pairs (v, l), (w, m) with ||v||, ||w|| <= R and l, m in [0, 1].
/// States are smooth random sine-mode fields. Each pair is probed with a
/// random unit direction and with the unit direction of v - w. Coincident
/// pairs are skipped.
LipschitzEstimate estimate_lipschitz(const Grid& grid, const Coefficients& coeffs, double radius, int samples,
                                     std::uint64_t seed);

struct BoundsOptions {
  double alpha0 = 1.0;
  double inverse_bound = 2.0;
  int lipschitz_samples = 200;
  int inverse_probes = 10;
  double contraction_tol = 1e-10;
  int contraction_maxit = 200;
  std::uint64_t seed = 0;
};

struct BoundsReport {
  double width = 0.0;
  std::optional<double> d0;
  std::optional<double> d0_proof;
  double C_meas = 0.0;
  double C_jacobian = 0.0;
  double C_parameter = 0.0;
  double M = 2.0;
  double M_meas = 0.0;
  double contraction_factor = 0.0;
  bool contraction_converged = false;
  double sup_F_mu = 0.0;
  double an_l2 = 0.0;
  double ap_l2 = 0.0;
  double h0_norm = 0.0;
  double alpha0 = 1.0;
  double d_required = 0.0;
  double r = 0.0;
  double R = 0.0;
  bool width_ok = false;
  bool coercivity_ok = false;
  bool contraction_width_ok = false;
  bool bigr_ok = false;

  bool feasible() const { return width_ok && contraction_width_ok && bigr_ok; }
};

/// Recomputes every flag from the stored scalars.
struct BoundsFlags {
  bool width_ok;
  bool coercivity_ok;
  bool contraction_width_ok;
  bool bigr_ok;
  friend bool operator==(const BoundsFlags&, const BoundsFlags&) = default;
};
BoundsFlags recompute_flags(const BoundsReport& report);

/// Full audit of an instance given its lambda = 0 solution h0.
BoundsReport compute_bounds(const Grid& grid, const Coefficients& coeffs, const BlockState& h0,
                            const BoundsOptions& options);

}  // namespace ddh
