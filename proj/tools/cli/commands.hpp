#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"
#include "ddh/bounds.hpp"

namespace ddh::cli {

enum ExitCode : int { ok = 0, config_error = 1, infeasible = 2, partial = 3 };

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
/// Inverse of format_double; accepts "inf", "-inf" and "nan".
double parse_double(const std::string& text);

inline constexpr const char* kCurveHeader =
    "lambda,residual_norm,dist_to_h0,newton_iters,min_n,min_p,neg_part_norm_n,neg_part_norm_p";

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& points);
void write_fields_csv(std::ostream& out, const Grid& grid, const Coefficients& coeffs, const BlockState& h);

/// Curve scalars as read back from curve.csv.
struct CurveRow {
  double lambda, residual_norm, dist_to_h0;
  int newton_iters;
  double min_n, min_p, neg_part_norm_n, neg_part_norm_p;
};
std::vector<CurveRow> read_curve_csv(std::istream& in);

/// Flat JSON object with every report field, both width bounds and the verdict.
std::string bounds_to_json(const BoundsReport& report);
BoundsReport bounds_from_json(const std::string& text);

/// Run a verb with a loaded configuration. Diagnostics go to err.
int cmd_audit(const RunConfig& cfg, std::ostream& err);
int cmd_solve0(const RunConfig& cfg, std::ostream& err);
int cmd_trace(const RunConfig& cfg, std::ostream& err);

/// Loads the configuration and dispatches; maps every failure to an exit code.
int run_verb(const std::string& verb, const std::filesystem::path& config_path, std::ostream& err);

}  // namespace ddh::cli
