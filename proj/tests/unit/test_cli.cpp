#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "commands.hpp"
#include "instances.hpp"

namespace ddh::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json reference_json() {
  return json::parse(R"({
    "domain": {"length": 2.0, "width": 0.05, "nx": 64, "ny": 4},
    "coefficients": {"d_n": 1.0, "c_n": 1.0, "d_p": 1.0, "c_p": 1.0},
    "doping": {"type": "constant", "value": 0.0},
    "boundary": {
      "u": {"type": "linear_x", "offset": 0.0, "slope": 0.5},
      "n": {"type": "linear_x", "offset": 1.0, "slope": 0.5},
      "p": {"type": "linear_x", "offset": 1.0, "slope": 0.5}
    },
    "homotopy": {"steps": 10},
    "seed": 1,
    "output_dir": "out"
  })");
}

json constant_json() {
  json j = reference_json();
  j["domain"]["nx"] = 16;
  j["boundary"]["u"] = {{"type", "constant"}, {"value", 0.0}};
  j["boundary"]["n"] = {{"type", "constant"}, {"value", 1.0}};
  j["boundary"]["p"] = {{"type", "constant"}, {"value", 1.0}};
  j["homotopy"]["steps"] = 5;
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Fresh scratch directory per test; the config lives there and output_dir is relative to it.
class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("ddh_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& verb, const json& cfg, const std::string& name = "config.json") {
    const fs::path path = dir_ / name;
    std::ofstream(path) << cfg.dump(2);
    err_.str("");
    return run_verb(verb, path, err_);
  }

  fs::path out() const { return dir_ / "out"; }
  std::string errors() const { return err_.str(); }

  fs::path dir_;
  std::ostringstream err_;
};

TEST_F(CliTest, ReferenceAuditIsFeasible) {
  EXPECT_EQ(run("audit", reference_json()), ok) << errors();
  const BoundsReport r = bounds_from_json(slurp(out() / "bounds.json"));
  EXPECT_TRUE(r.feasible());
  const auto doc = json::parse(slurp(out() / "bounds.json"));
  EXPECT_TRUE(doc.at("feasible").get<bool>());
  EXPECT_TRUE(doc.contains("d0"));
  EXPECT_TRUE(doc.contains("d0_proof"));
}

TEST_F(CliTest, AuditWideStripIsInfeasible) {
  json cfg = reference_json();
  cfg["domain"]["width"] = 1.0;
  EXPECT_EQ(run("audit", cfg), infeasible);
  const BoundsReport r = bounds_from_json(slurp(out() / "bounds.json"));
  EXPECT_FALSE(r.feasible());
}

TEST_F(CliTest, BoundsJsonFlagsAreRecomputable) {
  ASSERT_EQ(run("audit", reference_json()), ok) << errors();
  const BoundsReport r = bounds_from_json(slurp(out() / "bounds.json"));
  const BoundsFlags f = recompute_flags(r);
  EXPECT_EQ(f.width_ok, r.width_ok);
  EXPECT_EQ(f.coercivity_ok, r.coercivity_ok);
  EXPECT_EQ(f.contraction_width_ok, r.contraction_width_ok);
  EXPECT_EQ(f.bigr_ok, r.bigr_ok);
}

TEST_F(CliTest, BoundsJsonRoundTripIsExact) {
  BoundsReport r;
  r.width = 0.1;
  r.d0 = 2.0 / 3.0;
  r.d0_proof = std::nullopt;
  r.C_meas = 0.0105;
  r.M_meas = std::numeric_limits<double>::infinity();
  r.r = 7.866123456789012;
  r.bigr_ok = true;
  const BoundsReport back = bounds_from_json(bounds_to_json(r));
  EXPECT_EQ(back.width, r.width);
  EXPECT_EQ(back.d0, r.d0);
  EXPECT_FALSE(back.d0_proof.has_value());
  EXPECT_EQ(back.C_meas, r.C_meas);
  EXPECT_TRUE(std::isinf(back.M_meas));
  EXPECT_EQ(back.r, r.r);
  EXPECT_TRUE(back.bigr_ok);
}

TEST_F(CliTest, MissingWidthNamesKey) {
  json cfg = reference_json();
  cfg["domain"].erase("width");
  EXPECT_EQ(run("audit", cfg), config_error);
  EXPECT_NE(errors().find("width"), std::string::npos) << errors();
  EXPECT_FALSE(fs::exists(out()));
}

TEST_F(CliTest, UnknownKeyRejected) {
  json cfg = reference_json();
  cfg["domain"]["height"] = 1.0;
  EXPECT_EQ(run("trace", cfg), config_error);
  EXPECT_NE(errors().find("domain.height"), std::string::npos) << errors();
}

TEST_F(CliTest, NonPositiveCoefficientRejected) {
  json cfg = reference_json();
  cfg["coefficients"]["c_p"] = 0.0;
  EXPECT_EQ(run("solve0", cfg), config_error);
  EXPECT_NE(errors().find("c_p"), std::string::npos) << errors();
}

TEST_F(CliTest, DopingFileWrongLengthNamesKey) {
  std::ofstream(dir_ / "doping.txt") << "0 0 0\n";
  json cfg = constant_json();
  cfg["doping"] = {{"type", "file"}, {"path", "doping.txt"}};
  EXPECT_EQ(run("solve0", cfg), config_error);
  EXPECT_NE(errors().find("doping"), std::string::npos) << errors();
}

TEST_F(CliTest, DopingFileIsReadRelativeToConfig) {
  const Grid grid(DomainSpec{2.0, 0.05, 16, 4});
  {
    std::ofstream f(dir_ / "doping.txt");
    for (std::size_t g = 0; g < grid.num_nodes(); ++g) f << "0.5\n";
  }
  json cfg = constant_json();
  cfg["doping"] = {{"type", "file"}, {"path", "doping.txt"}};
  EXPECT_EQ(run("solve0", cfg), ok) << errors();
}

TEST_F(CliTest, MissingConfigFileIsIoError) {
  std::ostringstream err;
  EXPECT_EQ(run_verb("trace", dir_ / "nope.json", err), config_error);
  EXPECT_FALSE(err.str().empty());
}

TEST_F(CliTest, MalformedJsonRejected) {
  std::ofstream(dir_ / "bad.json") << "{ \"domain\": ";
  std::ostringstream err;
  EXPECT_EQ(run_verb("audit", dir_ / "bad.json", err), config_error);
}

TEST_F(CliTest, ConstantTraceStaysAtStart) {
  ASSERT_EQ(run("trace", constant_json()), ok) << errors();
  std::ifstream in(out() / "curve.csv");
  const auto rows = read_curve_csv(in);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) EXPECT_LE(r.dist_to_h0, 1e-12);
  EXPECT_TRUE(fs::exists(out() / "fields_lambda1.csv"));
}

TEST_F(CliTest, ReferenceTraceSchedule) {
  ASSERT_EQ(run("trace", reference_json()), ok) << errors();
  std::ifstream in(out() / "curve.csv");
  const auto rows = read_curve_csv(in);
  ASSERT_EQ(rows.size(), 11u);
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(rows[k].lambda, static_cast<double>(k) / 10.0);
  EXPECT_EQ(rows.back().lambda, 1.0);
  for (const auto& r : rows) EXPECT_LE(r.residual_norm, 1e-10);
}

TEST_F(CliTest, CurveCsvMatchesInMemoryTrace) {
  const json cfg = reference_json();
  ASSERT_EQ(run("trace", cfg), ok) << errors();
  std::ifstream in(out() / "curve.csv");
  const auto rows = read_curve_csv(in);

  const RunConfig rc = load_config(dir_ / "config.json");
  const Problem prob = build_problem(rc);
  const TraceResult trace = trace_curve(prob.grid, prob.coeffs, rc.trace);
  ASSERT_EQ(rows.size(), trace.points.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const CurvePoint& p = trace.points[k];
    EXPECT_EQ(rows[k].lambda, p.lambda);
    EXPECT_EQ(rows[k].residual_norm, p.residual_norm);
    EXPECT_EQ(rows[k].dist_to_h0, p.dist_to_h0);
    EXPECT_EQ(rows[k].newton_iters, p.newton_iters);
    EXPECT_EQ(rows[k].min_n, p.min_n);
    EXPECT_EQ(rows[k].min_p, p.min_p);
    EXPECT_EQ(rows[k].neg_part_norm_n, p.neg_part_norm_n);
    EXPECT_EQ(rows[k].neg_part_norm_p, p.neg_part_norm_p);
  }
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  const json cfg = reference_json();
  ASSERT_EQ(run("trace", cfg), ok);
  ASSERT_EQ(run("audit", cfg), ok);
  const std::string curve = slurp(out() / "curve.csv");
  const std::string fields = slurp(out() / "fields_lambda1.csv");
  const std::string bounds = slurp(out() / "bounds.json");
  ASSERT_EQ(run("trace", cfg), ok);
  ASSERT_EQ(run("audit", cfg), ok);
  EXPECT_EQ(curve, slurp(out() / "curve.csv"));
  EXPECT_EQ(fields, slurp(out() / "fields_lambda1.csv"));
  EXPECT_EQ(bounds, slurp(out() / "bounds.json"));
}

TEST_F(CliTest, PartialTraceExitCode) {
  json cfg = reference_json();
  cfg["homotopy"]["newton_maxit"] = 1;
  cfg["homotopy"]["newton_tol"] = 1e-300;
  EXPECT_EQ(run("trace", cfg), partial);
  EXPECT_TRUE(fs::exists(out() / "curve.csv"));
  EXPECT_FALSE(fs::exists(out() / "fields_lambda1.csv"));
  EXPECT_NE(errors().find("lambda"), std::string::npos);
}

TEST_F(CliTest, Solve0ConstantFieldsAreExact) {
  ASSERT_EQ(run("solve0", constant_json()), ok) << errors();
  std::ifstream in(out() / "fields_lambda0.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,u,n,p");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    double x, y, u, n, p;
    char c;
    std::istringstream ls(line);
    ls >> x >> c >> y >> c >> u >> c >> n >> c >> p;
    EXPECT_LE(std::abs(u), 1e-13);
    EXPECT_NEAR(n, 1.0, 1e-13);
    EXPECT_NEAR(p, 1.0, 1e-13);
    ++rows;
  }
  EXPECT_EQ(rows, 17u * 5u);
}

TEST_F(CliTest, Solve0PoissonSecondOrder) {
  json cfg = reference_json();
  cfg["domain"] = {{"length", 1.0}, {"width", 1.0}, {"nx", 8}, {"ny", 8}};
  cfg["doping"] = {{"type", "sine"}, {"amplitude", 2.0 * testing::kPi * testing::kPi}};
  for (const char* k : {"u", "n", "p"}) cfg["boundary"][k] = {{"type", "constant"}, {"value", 0.0}};
  std::vector<double> hs, errs;
  for (const int n : {8, 16, 32}) {
    cfg["domain"]["nx"] = n;
    cfg["domain"]["ny"] = n;
    ASSERT_EQ(run("solve0", cfg), ok) << errors();
    std::ifstream in(out() / "fields_lambda0.csv");
    std::string line;
    std::getline(in, line);
    double worst = 0.0;
    while (std::getline(in, line)) {
      double x, y, u, nn, p;
      char c;
      std::istringstream ls(line);
      ls >> x >> c >> y >> c >> u >> c >> nn >> c >> p;
      worst = std::max(worst, std::abs(u - std::sin(testing::kPi * x) * std::sin(testing::kPi * y)));
    }
    hs.push_back(1.0 / n);
    errs.push_back(worst);
  }
  EXPECT_NEAR(testing::loglog_slope(hs, errs), 2.0, 0.2);
}

TEST(FormatDouble, RoundTripsAndKeepsPrecision) {
  for (const double v : {0.0, 1.0, 0.1, -3.5e-17, 1.0 / 3.0, 7.866123456789012, 1e300}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(1.0 / 3.0).size(), std::string("0.3333333333333333").size());
  EXPECT_TRUE(std::isinf(parse_double(format_double(std::numeric_limits<double>::infinity()))));
  EXPECT_THROW(parse_double("1.0x"), std::invalid_argument);
}

}  // namespace
}  // namespace ddh::cli
