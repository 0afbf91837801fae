#include "config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace ddh::cli {

namespace {

using json = nlohmann::json;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

const json& require_object(const json& parent, const std::string& key, const std::string& path) {
  const std::string where = join(path, key);
  if (!parent.contains(key)) fail(where, "missing required section");
  const json& obj = parent.at(key);
  if (!obj.is_object()) fail(where, "expected an object");
  return obj;
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || item.key() == a;
    if (!known) fail(join(path, item.key()), "unknown key");
  }
}

double number(const json& obj, const std::string& key, const std::string& path) {
  const std::string where = join(path, key);
  if (!obj.contains(key)) fail(where, "missing required key");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(where, "must be finite");
  return d;
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  return obj.contains(key) ? number(obj, key, path) : fallback;
}

double positive(const json& obj, const std::string& key, const std::string& path) {
  const double d = number(obj, key, path);
  if (!(d > 0.0)) fail(join(path, key), "must be positive");
  return d;
}

long long integer(const json& obj, const std::string& key, const std::string& path) {
  const std::string where = join(path, key);
  if (!obj.contains(key)) fail(where, "missing required key");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<long long>();
}

int bounded_int(const json& obj, const std::string& key, const std::string& path, int lo, int fallback) {
  if (!obj.contains(key)) return fallback;
  const long long v = integer(obj, key, path);
  if (v < lo || v > std::numeric_limits<int>::max()) fail(join(path, key), "must be an integer >= " + std::to_string(lo));
  return static_cast<int>(v);
}

std::string string(const json& obj, const std::string& key, const std::string& path) {
  const std::string where = join(path, key);
  if (!obj.contains(key)) fail(where, "missing required key");
  const json& v = obj.at(key);
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

FieldSpec field(const json& obj, const std::string& path, const std::filesystem::path& base, bool allow_sine,
                bool allow_linear) {
  if (!obj.is_object()) fail(path, "expected an object");
  const std::string type = string(obj, "type", path);
  FieldSpec f;
  if (type == "constant") {
    reject_unknown(obj, path, {"type", "value"});
    f.kind = FieldSpec::Kind::constant;
    f.value = number(obj, "value", path);
  } else if (type == "linear_x" && allow_linear) {
    reject_unknown(obj, path, {"type", "offset", "slope"});
    f.kind = FieldSpec::Kind::linear_x;
    f.offset = number(obj, "offset", path);
    f.slope = number(obj, "slope", path);
  } else if (type == "sine" && allow_sine) {
    reject_unknown(obj, path, {"type", "amplitude"});
    f.kind = FieldSpec::Kind::sine;
    f.amplitude = number(obj, "amplitude", path);
  } else if (type == "file") {
    reject_unknown(obj, path, {"type", "path"});
    f.kind = FieldSpec::Kind::file;
    f.path = resolve(base, string(obj, "path", path));
  } else {
    fail(join(path, "type"), "unsupported value '" + type + "'");
  }
  return f;
}

Vector read_values(const std::filesystem::path& file, std::size_t expected, const std::string& key,
                   const std::string& what) {
  std::ifstream in(file);
  if (!in) throw ConfigError(key + ": cannot open file " + file.string());
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    std::istringstream ts(token);
    double v = 0.0;
    if (!(ts >> v) || !ts.eof() || !std::isfinite(v)) {
      throw ConfigError(key + ": invalid value '" + token + "' in " + file.string());
    }
    values.push_back(v);
  }
  if (values.size() != expected) {
    throw ConfigError(key + ": file " + file.string() + " has " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(expected) + " (" + what + ")");
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Vector nodal_field(const Grid& grid, const FieldSpec& f, const std::string& key) {
  const double L = grid.spec().length, d = grid.spec().width;
  switch (f.kind) {
    case FieldSpec::Kind::constant:
      return Vector::Constant(static_cast<Eigen::Index>(grid.num_nodes()), f.value);
    case FieldSpec::Kind::linear_x:
      return grid.sample([&](double x, double) { return f.offset + f.slope * x; });
    case FieldSpec::Kind::sine:
      return grid.sample([&](double x, double y) {
        return f.amplitude * std::sin(std::numbers::pi * x / L) * std::sin(std::numbers::pi * y / d);
      });
    case FieldSpec::Kind::file:
      return read_values(f.path, grid.num_nodes(), key, "one per grid node, row by row");
  }
  return {};
}

Vector lifted(const Grid& grid, const FieldSpec& f, const std::string& key) {
  if (f.kind == FieldSpec::Kind::file) {
    return lift_boundary(grid, BoundaryTrace{read_values(f.path, grid.num_boundary(), key, "one per boundary node")});
  }
  return lift_boundary(grid, trace_of(grid, [&](double x, double) {
                         return f.kind == FieldSpec::Kind::linear_x ? f.offset + f.slope * x : f.value;
                       }));
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown(doc, "",
                 {"domain", "coefficients", "doping", "boundary", "homotopy", "solver", "audit", "seed", "output_dir"});

  RunConfig cfg;
  const json& domain = require_object(doc, "domain", "");
  reject_unknown(domain, "domain", {"length", "width", "nx", "ny"});
  cfg.domain.length = positive(domain, "length", "domain");
  cfg.domain.width = positive(domain, "width", "domain");
  const long long nx = integer(domain, "nx", "domain");
  const long long ny = integer(domain, "ny", "domain");
  if (nx < 2 || nx > 100000) fail("domain.nx", "must be an integer in [2, 100000]");
  if (ny < 2 || ny > 100000) fail("domain.ny", "must be an integer in [2, 100000]");
  cfg.domain.nx = static_cast<int>(nx);
  cfg.domain.ny = static_cast<int>(ny);

  const json& coeffs = require_object(doc, "coefficients", "");
  reject_unknown(coeffs, "coefficients", {"d_n", "c_n", "d_p", "c_p"});
  cfg.d_n = positive(coeffs, "d_n", "coefficients");
  cfg.c_n = positive(coeffs, "c_n", "coefficients");
  cfg.d_p = positive(coeffs, "d_p", "coefficients");
  cfg.c_p = positive(coeffs, "c_p", "coefficients");

  if (doc.contains("doping")) cfg.doping = field(doc.at("doping"), "doping", base_dir, true, false);

  const json& boundary = require_object(doc, "boundary", "");
  reject_unknown(boundary, "boundary", {"u", "n", "p"});
  for (const auto& [key, target] : {std::pair{"u", &cfg.boundary_u}, std::pair{"n", &cfg.boundary_n},
                                    std::pair{"p", &cfg.boundary_p}}) {
    if (!boundary.contains(key)) fail(join("boundary", key), "missing required key");
    *target = field(boundary.at(key), join("boundary", key), base_dir, false, true);
  }

  if (doc.contains("homotopy")) {
    const json& h = require_object(doc, "homotopy", "");
    reject_unknown(h, "homotopy", {"steps", "newton_tol", "newton_maxit", "alpha0"});
    cfg.trace.steps = bounded_int(h, "steps", "homotopy", 1, cfg.trace.steps);
    if (h.contains("newton_tol")) cfg.trace.newton_tol = positive(h, "newton_tol", "homotopy");
    cfg.trace.newton_maxit = bounded_int(h, "newton_maxit", "homotopy", 1, cfg.trace.newton_maxit);
    cfg.alpha0 = number_or(h, "alpha0", "homotopy", cfg.alpha0);
    if (!(cfg.alpha0 > 0.0 && cfg.alpha0 <= 1.0)) fail("homotopy.alpha0", "must lie in (0, 1]");
  }

  if (doc.contains("solver")) {
    const json& s = require_object(doc, "solver", "");
    reject_unknown(s, "solver", {"type", "tol", "maxit"});
    if (s.contains("type")) {
      const std::string type = string(s, "type", "solver");
      if (type == "direct") {
        cfg.trace.linear_solver = LinearSolverKind::direct;
      } else if (type == "contraction") {
        cfg.trace.linear_solver = LinearSolverKind::contraction;
      } else {
        fail("solver.type", "expected 'direct' or 'contraction'");
      }
    }
    if (s.contains("tol")) cfg.trace.linear_tol = positive(s, "tol", "solver");
    cfg.trace.linear_maxit = bounded_int(s, "maxit", "solver", 1, cfg.trace.linear_maxit);
  }

  if (doc.contains("audit")) {
    const json& a = require_object(doc, "audit", "");
    reject_unknown(a, "audit", {"samples", "probes", "inverse_bound"});
    cfg.audit.samples = bounded_int(a, "samples", "audit", 2, cfg.audit.samples);
    cfg.audit.probes = bounded_int(a, "probes", "audit", 1, cfg.audit.probes);
    if (a.contains("inverse_bound")) cfg.audit.inverse_bound = positive(a, "inverse_bound", "audit");
  }

  const long long seed = integer(doc, "seed", "");
  if (seed < 0) fail("seed", "must be a nonnegative integer");
  cfg.seed = static_cast<std::uint64_t>(seed);
  const std::string out = string(doc, "output_dir", "");
  if (out.empty()) fail("output_dir", "must not be empty");
  cfg.output_dir = resolve(base_dir, out);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

Problem build_problem(const RunConfig& cfg) {
  Grid grid(cfg.domain);
  Coefficients c = zero_coefficients(grid);
  c.d_n = cfg.d_n;
  c.c_n = cfg.c_n;
  c.d_p = cfg.d_p;
  c.c_p = cfg.c_p;
  c.doping = nodal_field(grid, cfg.doping, "doping");
  c.a_u = lifted(grid, cfg.boundary_u, "boundary.u");
  c.a_n = lifted(grid, cfg.boundary_n, "boundary.n");
  c.a_p = lifted(grid, cfg.boundary_p, "boundary.p");
  validate(grid, c);
  return {std::move(grid), std::move(c)};
}

}  // namespace ddh::cli
