// End-to-end checks of the command-line tool: spawns the built binary and
// inspects its outputs and exit codes.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "hypobridge/model_io.hpp"
#include "hypobridge/presets.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string out_file =
      (fs::temp_directory_path() / "hb_cli_out.txt").string();
  const std::string cmd =
      std::string(HYPOBRIDGE_CLI_PATH) + " " + args + " > " + out_file +
      " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  std::ifstream in(out_file);
  std::ostringstream buf;
  buf << in.rdbuf();
  r.out = buf.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("analyze of the planar preset reports the controllability data") {
  const RunResult r = run_cli("analyze --preset kolmogorov");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["d"] == 2);
  CHECK(doc["m"] == 1);
  CHECK(doc["n"] == 2);
  CHECK(doc["dims"] == json::array({1, 2}));
  CHECK(doc["u_blocks"][0][0][0].get<double>() == doctest::Approx(1.0));
  CHECK(doc["u_blocks"][1][0][0].get<double>() == doctest::Approx(1.0));
  CHECK(doc["V"][0][0].get<double>() == doctest::Approx(1.0));
  CHECK(doc["V"][0][1].get<double>() == doctest::Approx(-0.5));
  CHECK(doc["V"][1][0].get<double>() == doctest::Approx(0.5));
  CHECK(doc["V"][1][1].get<double>() == doctest::Approx(-1.0 / 6.0));
  CHECK(doc["V_inverse"][0][0].get<double>() == doctest::Approx(-2.0));
  CHECK(doc["V_inverse"][1][1].get<double>() == doctest::Approx(12.0));
}

TEST_CASE("analyze of the full shift ladder reports inverse factorials") {
  const RunResult r = run_cli("analyze --preset iterated_kolmogorov:3");
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["n"] == 3);
  CHECK(doc["u_blocks"][2][0][0].get<double>() == doctest::Approx(0.5));
}

TEST_CASE("analyze of a rank-deficient model file exits with code 2") {
  const fs::path dir = fresh_dir("hb_cli_rankdef");
  const fs::path model = dir / "model.json";
  std::ofstream(model) << R"({"A": [[0, 0], [0, 0]], "B": [[1], [0]]})";
  const RunResult r = run_cli("analyze --model " + model.string());
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("rank") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("analyze").exit_code == 1);               // no input
  CHECK(run_cli("bridge --preset kolmogorov").exit_code == 1);
  CHECK(run_cli("no_such_command").exit_code == 1);
}

TEST_CASE("exported model files re-parse to the identical spec") {
  const fs::path dir = fresh_dir("hb_cli_export");
  const fs::path model = dir / "exported.json";
  const RunResult r = run_cli("analyze --preset sec43 --export-model " +
                              model.string());
  REQUIRE(r.exit_code == 0);
  const hypobridge::ModelFile mf = hypobridge::read_model_file(model.string());
  const hypobridge::Preset p = hypobridge::preset("sec43");
  CHECK(mf.A == p.spec.A);
  CHECK(mf.B == p.spec.B);
}

TEST_CASE("bridge command writes the mean path of the printed planar form") {
  const fs::path dir = fresh_dir("hb_cli_bridge");
  const double a = 1.0, b = 2.0, eps = 0.5;
  const RunResult r = run_cli(
      "bridge --preset kolmogorov --eps 0.5 --x 0,0 --y 1,2 "
      "--grid 0.25,0.5,0.75,1.0 --paths 50 --seed 9 --out " +
      dir.string());
  REQUIRE(r.exit_code == 0);

  std::ifstream mean(dir / "mean.csv");
  std::string header;
  std::getline(mean, header);
  CHECK(header == "t,x1,x2");
  std::string line;
  while (std::getline(mean, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    const double t = std::stod(tok);
    std::getline(ss, tok, ',');
    const double c1 = std::stod(tok);
    std::getline(ss, tok, ',');
    const double c2 = std::stod(tok);
    const double want1 =
        (3 * t * t - 2 * t) * a + (6 * t - 6 * t * t) * b / eps;
    const double want2 =
        (t * t * t - t * t) * a * eps + (3 * t * t - 2 * t * t * t) * b;
    CHECK(c1 == doctest::Approx(want1).epsilon(1e-9));
    CHECK(c2 == doctest::Approx(want2).epsilon(1e-9));
  }

  // Every sampled path ends at y when t = 1 is on the grid.
  std::ifstream paths(dir / "paths.csv");
  std::getline(paths, header);
  CHECK(header == "path,t,x1,x2");
  int rows_at_one = 0;
  while (std::getline(paths, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    std::getline(ss, tok, ',');
    if (std::stod(tok) != 1.0) continue;
    ++rows_at_one;
    std::getline(ss, tok, ',');
    CHECK(std::stod(tok) == doctest::Approx(a).epsilon(1e-9));
    std::getline(ss, tok, ',');
    CHECK(std::stod(tok) == doctest::Approx(b).epsilon(1e-9));
  }
  CHECK(rows_at_one == 50);
}

TEST_CASE("bridge covariance CSV matches the library law") {
  const fs::path dir = fresh_dir("hb_cli_cov");
  const RunResult r = run_cli(
      "bridge --preset kolmogorov --eps 1 --x 0,0 --y 0,0 --grid 0.5,1.0 "
      "--paths 1 --seed 1 --out " +
      dir.string());
  REQUIRE(r.exit_code == 0);
  const hypobridge::Preset kol = hypobridge::preset("kolmogorov");
  hypobridge::Vector zero2 = hypobridge::Vector::Zero(2);
  const hypobridge::BridgeLaw law =
      hypobridge::bridge_law(kol.spec, 1.0, zero2, zero2, {0.5, 1.0});

  std::ifstream cov(dir / "cov.csv");
  std::string line;
  std::getline(cov, line);  // header
  int rows = 0;
  while (std::getline(cov, line)) {
    std::stringstream ss(line);
    std::string tok;
    double vals[4];
    for (int c = 0; c < 4; ++c) {
      std::getline(ss, tok, ',');
      vals[c] = std::stod(tok);
    }
    std::getline(ss, tok, ',');
    const double value = std::stod(tok);
    const size_t a = vals[0] == 0.5 ? 0 : 1;
    const size_t b = vals[1] == 0.5 ? 0 : 1;
    const hypobridge::Matrix blk = law.cov_block(a, b);
    CHECK(value == doctest::Approx(blk(static_cast<int>(vals[2]) - 1,
                                       static_cast<int>(vals[3]) - 1))
                       .epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 2 * 2 * 2 * 2);
}

TEST_CASE("bridge command is deterministic under a fixed seed") {
  const fs::path dir1 = fresh_dir("hb_cli_det1");
  const fs::path dir2 = fresh_dir("hb_cli_det2");
  const std::string args =
      "bridge --preset ou_area --eps 1 --x 0,0 --y 1,0 --grid uniform:5 "
      "--paths 20 --seed 31415 --out ";
  REQUIRE(run_cli(args + dir1.string()).exit_code == 0);
  REQUIRE(run_cli(args + dir2.string()).exit_code == 0);
  CHECK(read_file(dir1 / "paths.csv") == read_file(dir2 / "paths.csv"));
  CHECK(read_file(dir1 / "mean.csv") == read_file(dir2 / "mean.csv"));
  CHECK(read_file(dir1 / "cov.csv") == read_file(dir2 / "cov.csv"));
}

TEST_CASE("converge command reports the exact planar ladder and slopes") {
  const fs::path dir = fresh_dir("hb_cli_conv");
  const RunResult r = run_cli(
      "converge --preset kolmogorov --eps-list 0.1,0.05,0.025 "
      "--grid uniform:9 --out " +
      dir.string());
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(read_file(dir / "report.json"));
  for (const auto& e : doc["sup_cov_error"]) {
    CHECK(e.get<double>() < 1e-12);
  }
  for (const auto& e : doc["sup_mean_error"]) {
    CHECK(e.get<double>() == 0.0);
  }
  CHECK(doc["alpha_expansion"].size() == 3);

  // errors.csv has one row per (eps, t1, t2).
  std::ifstream errs(dir / "errors.csv");
  std::string line;
  int rows = 0;
  std::getline(errs, line);
  CHECK(line == "eps,t1,t2,error");
  while (std::getline(errs, line)) ++rows;
  CHECK(rows == 3 * 9 * 9);
}

TEST_CASE("converge on the first-order preset meets the slope bound") {
  const fs::path dir = fresh_dir("hb_cli_conv_ou");
  const RunResult r = run_cli(
      "converge --preset ou_area --eps-list 0.1,0.05,0.025 --grid uniform:9 "
      "--out " +
      dir.string());
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(read_file(dir / "report.json"));
  CHECK(doc["slope"].get<double>() >= 0.9);
}

TEST_CASE("TOML model files are accepted at the command line") {
  const fs::path dir = fresh_dir("hb_cli_toml");
  const fs::path model = dir / "model.toml";
  std::ofstream(model) << "A = [[0.0, 0.0], [1.0, 0.0]]\nB = [[1.0], [0.0]]\n";
  const RunResult r = run_cli("analyze --model " + model.string());
  REQUIRE(r.exit_code == 0);
  const json doc = json::parse(r.out);
  CHECK(doc["n"] == 2);
}
