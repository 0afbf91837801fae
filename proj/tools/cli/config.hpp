#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "ddh/continuation.hpp"

namespace ddh::cli {

/// Invalid or unreadable configuration. The message starts with the key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field given as a constant, an affine function of x, a sine bump, or a file of values.
struct FieldSpec {
  enum class Kind { constant, linear_x, sine, file };
  Kind kind = Kind::constant;
  double value = 0.0;
  double offset = 0.0;
  double slope = 0.0;
  double amplitude = 0.0;
  std::filesystem::path path;
};

struct AuditSpec {
  int samples = 200;
  int probes = 10;
  double inverse_bound = 2.0;
};

struct RunConfig {
  DomainSpec domain;
  double d_n = 1.0, c_n = 1.0, d_p = 1.0, c_p = 1.0;
  /// Nodal permanent charge: constant, sine (amplitude sin(pi x/L) sin(pi y/d)) or file (all nodes).
  FieldSpec doping;
  /// Boundary traces: constant, linear_x or file (boundary-node order).
  FieldSpec boundary_u, boundary_n, boundary_p;
  TraceConfig trace;
  double alpha0 = 1.0;
  AuditSpec audit;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;
};

/// Parses a JSON document. Relative file paths are resolved against base_dir.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

/// Grid and coefficients described by a configuration; reads referenced files.
struct Problem {
  Grid grid;
  Coefficients coeffs;
};
Problem build_problem(const RunConfig& cfg);

}  // namespace ddh::cli
