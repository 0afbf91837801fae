#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace ddh::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("output_dir: cannot create " + dir.string() + (ec ? ": " + ec.message() : ""));
  }
}

ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

ordered_json json_bound(const std::optional<double>& v) {
  if (!v) return "unconstrained";
  return json_number(*v);
}

double read_number(const ordered_json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (v.is_string()) return parse_double(v.get<std::string>());
  return v.get<double>();
}

std::optional<double> read_bound(const ordered_json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (v.is_string() && v.get<std::string>() == "unconstrained") return std::nullopt;
  return read_number(doc, key);
}

void warn_width(const Grid& grid, const Coefficients& c, std::ostream& err) {
  const auto d0 = compute_d0(c);
  if (d0 && !(grid.spec().width < *d0)) {
    err << "warning: width " << format_double(grid.spec().width) << " is not below d0 = " << format_double(*d0)
        << "; the lambda = 0 solve is attempted anyway\n";
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) throw std::invalid_argument("not a number: '" + text + "'");
  return v;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
  out << kCurveHeader << '\n';
  for (const auto& p : points) {
    out << format_double(p.lambda) << ',' << format_double(p.residual_norm) << ',' << format_double(p.dist_to_h0)
        << ',' << p.newton_iters << ',' << format_double(p.min_n) << ',' << format_double(p.min_p) << ','
        << format_double(p.neg_part_norm_n) << ',' << format_double(p.neg_part_norm_p) << '\n';
  }
}

void write_fields_csv(std::ostream& out, const Grid& grid, const Coefficients& coeffs, const BlockState& h) {
  const PhysicalFields f = physical_fields(grid, coeffs, h);
  out << "x,y,u,n,p\n";
  for (std::size_t g = 0; g < grid.num_nodes(); ++g) {
    const auto i = static_cast<Eigen::Index>(g);
    out << format_double(grid.x(g)) << ',' << format_double(grid.y(g)) << ',' << format_double(f.u[i]) << ','
        << format_double(f.n[i]) << ',' << format_double(f.p[i]) << '\n';
  }
}

std::vector<CurveRow> read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) throw std::invalid_argument("curve.csv: unexpected header");
  std::vector<CurveRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw std::invalid_argument("curve.csv: expected 8 columns in '" + line + "'");
    CurveRow r{};
    r.lambda = parse_double(cells[0]);
    r.residual_norm = parse_double(cells[1]);
    r.dist_to_h0 = parse_double(cells[2]);
    r.newton_iters = std::stoi(cells[3]);
    r.min_n = parse_double(cells[4]);
    r.min_p = parse_double(cells[5]);
    r.neg_part_norm_n = parse_double(cells[6]);
    r.neg_part_norm_p = parse_double(cells[7]);
    rows.push_back(r);
  }
  return rows;
}

std::string bounds_to_json(const BoundsReport& r) {
  ordered_json doc;
  doc["width"] = json_number(r.width);
  doc["d0"] = json_bound(r.d0);
  doc["d0_proof"] = json_bound(r.d0_proof);
  doc["C_meas"] = json_number(r.C_meas);
  doc["C_meas_kind"] = "empirical lower estimate; r uses max(C_meas, 2) and bigr_ok uses max(C_meas, M)";
  doc["C_jacobian"] = json_number(r.C_jacobian);
  doc["C_parameter"] = json_number(r.C_parameter);
  doc["M"] = json_number(r.M);
  doc["M_meas"] = json_number(r.M_meas);
  doc["contraction_factor"] = json_number(r.contraction_factor);
  doc["contraction_converged"] = r.contraction_converged;
  doc["sup_F_mu"] = json_number(r.sup_F_mu);
  doc["an_l2"] = json_number(r.an_l2);
  doc["ap_l2"] = json_number(r.ap_l2);
  doc["h0_norm"] = json_number(r.h0_norm);
  doc["alpha0"] = json_number(r.alpha0);
  doc["d_required"] = json_number(r.d_required);
  doc["r"] = json_number(r.r);
  doc["R"] = json_number(r.R);
  doc["width_ok"] = r.width_ok;
  doc["coercivity_ok"] = r.coercivity_ok;
  doc["contraction_width_ok"] = r.contraction_width_ok;
  doc["bigr_ok"] = r.bigr_ok;
  doc["feasible"] = r.feasible();
  return doc.dump(2) + "\n";
}

BoundsReport bounds_from_json(const std::string& text) {
  const ordered_json doc = ordered_json::parse(text);
  BoundsReport r;
  r.width = read_number(doc, "width");
  r.d0 = read_bound(doc, "d0");
  r.d0_proof = read_bound(doc, "d0_proof");
  r.C_meas = read_number(doc, "C_meas");
  r.C_jacobian = read_number(doc, "C_jacobian");
  r.C_parameter = read_number(doc, "C_parameter");
  r.M = read_number(doc, "M");
  r.M_meas = read_number(doc, "M_meas");
  r.contraction_factor = read_number(doc, "contraction_factor");
  r.contraction_converged = doc.at("contraction_converged").get<bool>();
  r.sup_F_mu = read_number(doc, "sup_F_mu");
  r.an_l2 = read_number(doc, "an_l2");
  r.ap_l2 = read_number(doc, "ap_l2");
  r.h0_norm = read_number(doc, "h0_norm");
  r.alpha0 = read_number(doc, "alpha0");
  r.d_required = read_number(doc, "d_required");
  r.r = read_number(doc, "r");
  r.R = read_number(doc, "R");
  r.width_ok = doc.at("width_ok").get<bool>();
  r.coercivity_ok = doc.at("coercivity_ok").get<bool>();
  r.contraction_width_ok = doc.at("contraction_width_ok").get<bool>();
  r.bigr_ok = doc.at("bigr_ok").get<bool>();
  return r;
}

int cmd_audit(const RunConfig& cfg, std::ostream& err) {
  const Problem prob = build_problem(cfg);
  BlockState h0;
  try {
    h0 = curve_start(prob.grid, prob.coeffs, cfg.trace).state;
  } catch (const std::runtime_error& e) {
    err << "audit: lambda = 0 solve failed: " << e.what() << '\n';
    return infeasible;
  }
  BoundsOptions opt;
  opt.alpha0 = cfg.alpha0;
  opt.inverse_bound = cfg.audit.inverse_bound;
  opt.lipschitz_samples = cfg.audit.samples;
  opt.inverse_probes = cfg.audit.probes;
  opt.seed = cfg.seed;
  const BoundsReport report = compute_bounds(prob.grid, prob.coeffs, h0, opt);
  prepare_output_dir(cfg.output_dir);
  write_file(cfg.output_dir / "bounds.json", bounds_to_json(report));
  if (!report.feasible()) {
    err << "audit: hypotheses not verified (width_ok=" << report.width_ok
        << ", contraction_width_ok=" << report.contraction_width_ok << ", bigr_ok=" << report.bigr_ok << ")\n";
    return infeasible;
  }
  return ok;
}

int cmd_solve0(const RunConfig& cfg, std::ostream& err) {
  const Problem prob = build_problem(cfg);
  warn_width(prob.grid, prob.coeffs, err);
  BlockState h0;
  try {
    h0 = solve_lambda0(prob.grid, prob.coeffs);
  } catch (const Lambda0Failure& e) {
    err << "solve0: " << e.what() << '\n';
    return partial;
  }
  prepare_output_dir(cfg.output_dir);
  std::ostringstream fields;
  write_fields_csv(fields, prob.grid, prob.coeffs, h0);
  write_file(cfg.output_dir / "fields_lambda0.csv", fields.str());
  return ok;
}

int cmd_trace(const RunConfig& cfg, std::ostream& err) {
  const Problem prob = build_problem(cfg);
  warn_width(prob.grid, prob.coeffs, err);
  const TraceResult trace = trace_curve(prob.grid, prob.coeffs, cfg.trace);
  prepare_output_dir(cfg.output_dir);
  std::ostringstream curve;
  write_curve_csv(curve, trace.points);
  write_file(cfg.output_dir / "curve.csv", curve.str());
  if (!trace.complete()) {
    const TraceFailure& f = *trace.failure;
    err << "trace: stopped at lambda = " << format_double(f.lambda) << " after " << f.iterations
        << " corrector iterations (last residual " << format_double(f.last_residual) << "): " << f.message << '\n';
    return partial;
  }
  std::ostringstream fields;
  write_fields_csv(fields, prob.grid, prob.coeffs, trace.points.back().state);
  write_file(cfg.output_dir / "fields_lambda1.csv", fields.str());
  return ok;
}

int run_verb(const std::string& verb, const std::filesystem::path& config_path, std::ostream& err) {
  try {
    const RunConfig cfg = load_config(config_path);
    if (verb == "audit") return cmd_audit(cfg, err);
    if (verb == "solve0") return cmd_solve0(cfg, err);
    if (verb == "trace") return cmd_trace(cfg, err);
    err << "unknown verb '" << verb << "'\n";
    return config_error;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
  }
  return config_error;
}

}  // namespace ddh::cli
