// Black-box tests for the command line driver.  Each case launches the real
// binary via std::system and inspects exit codes and artifacts.
#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("geolab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args) {
  const std::string cmd =
      std::string(GEOLAB_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  REQUIRE(raw != -1);
  REQUIRE(WIFEXITED(raw));
  return WEXITSTATUS(raw);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json(const fs::path& p) {
  return nlohmann::json::parse(slurp(p));
}

}  // namespace

TEST_CASE("selftest passes and writes a report") {
  const auto dir = fresh_dir("selftest");
  CHECK(run("selftest --out-dir " + dir.string()) == 0);
  const auto rep = load_json(dir / "selftest_report.json");
  CHECK(rep["schema_version"] == 1);
  CHECK(rep["command"] == "selftest");
  CHECK(rep["tool_version"] == "1.0.0");
  REQUIRE(rep["checks"].size() >= 8);
  for (const auto& c : rep["checks"]) CHECK(c["status"] == "pass");
}

TEST_CASE("jacobi run produces a parseable table") {
  const auto dir = fresh_dir("jacobi");
  CHECK(run("jacobi --profile constant:n=3,c=-1 --t-max 3 --out-dir " +
            dir.string()) == 0);
  const std::string body = slurp(dir / "jacobi.csv");
  CHECK(body.rfind("t,X00,X01,X10,X11,Xp00", 0) == 0);
  const auto rep = load_json(dir / "jacobi_report.json");
  CHECK(rep["checks"][0]["status"] == "pass");
  CHECK(rep["profile_fingerprints"].size() == 1);
}

TEST_CASE("theta-bound certificate carries entries and a positive constant") {
  const auto dir = fresh_dir("theta");
  CHECK(run("theta-bound --profile constant:n=2,c=-1 --s 0.5 --out-dir " +
            dir.string()) == 0);
  const auto cert = load_json(dir / "theta_bound.json");
  CHECK(cert["falsified"] == false);
  CHECK(cert["C"].get<double>() > 0.0);
  CHECK(cert["bridge_norm"].get<double>() > 0.0);
  CHECK(cert["entries"].size() == 17);
  for (const auto& e : cert["entries"])
    CHECK(e["margin"].get<double>() >= 0.0);
  CHECK(fs::exists(dir / "theta_bound.csv"));
  CHECK(fs::exists(dir / "theta_bound_report.json"));
}

TEST_CASE("identical invocations produce byte-identical tables") {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  const std::string tail =
      "bridge --profile 'seeded:phi=0.1*(1-cos(t))' --s-grid 0.5,1 --out-dir ";
  CHECK(run(tail + a.string()) == 0);
  CHECK(run(tail + b.string()) == 0);
  CHECK(slurp(a / "bridge.csv") == slurp(b / "bridge.csv"));
  // reports differ only in elapsed time and the artifact path
  auto ra = load_json(a / "bridge_report.json");
  auto rb = load_json(b / "bridge_report.json");
  for (auto* r : {&ra, &rb}) {
    r->erase("elapsed_seconds");
    (*r)["parameters"].erase("out");
  }
  CHECK(ra == rb);
}

TEST_CASE("sweep over ball geodesics certifies every cell") {
  const auto dir = fresh_dir("sweep");
  CHECK(run("sweep --metric poincare-ball --dim 3 --geodesics 6 --s-grid "
            "0.5,1 --t-max 8 --jobs 2 --out-dir " +
            dir.string()) == 0);
  const auto rep = load_json(dir / "sweep_report.json");
  CHECK(rep["profile_fingerprints"].size() == 6);
  double min_margin = 0.0;
  for (const auto& c : rep["checks"]) {
    CHECK(c["status"] == "pass");
    if (c["name"] == "certificate margins nonnegative")
      min_margin = c["witness"]["value"].get<double>();
  }
  CHECK(min_margin > 0.0);
  const std::string body = slurp(dir / "sweep.csv");
  CHECK(body.find(",error") == std::string::npos);
  CHECK(body.find(",conjugate-point") == std::string::npos);
}

TEST_CASE("sweep results do not depend on the worker count") {
  const auto a = fresh_dir("sweep_j1");
  const auto b = fresh_dir("sweep_j4");
  const std::string tail =
      "sweep --metric poincare-ball --dim 2 --geodesics 5 --s-grid 0.5 "
      "--t-max 6 --out-dir ";
  CHECK(run(tail + a.string() + " --jobs 1") == 0);
  CHECK(run(tail + b.string() + " --jobs 4") == 0);
  CHECK(slurp(a / "sweep.csv") == slurp(b / "sweep.csv"));
}

TEST_CASE("scenario files replay through the same validation") {
  const auto dir = fresh_dir("config");
  const auto cfg = dir / "run.json";
  {
    std::ofstream f(cfg);
    f << R"({"command":"weyl","out-dir":")" << dir.string()
      << R"(","parameters":{"torus":"L=6.283185307179586,6.283185307179586",)"
      << R"("lambda-max":20,"lambda-count":10}})";
  }
  CHECK(run("--config " + cfg.string()) == 0);
  const std::string body = slurp(dir / "weyl.csv");
  CHECK(body.rfind("lambda,count,leading,remainder,ratio", 0) == 0);

  const auto bad = dir / "bad.json";
  {
    std::ofstream f(bad);
    f << R"({"command":"weyl","mystery":1,"parameters":{"torus":"L=6.28","lambda-max":20}})";
  }
  CHECK(run("--config " + bad.string()) == 2);

  const auto bad2 = dir / "bad2.json";
  {
    std::ofstream f(bad2);
    f << R"({"command":"weyl","parameters":{"torus":"L=6.28","lambda-max":20,"mystery":1}})";
  }
  CHECK(run("--config " + bad2.string()) == 2);
}

TEST_CASE("configuration mistakes exit with code two") {
  CHECK(run("--no-such-flag selftest") == 2);
  CHECK(run("") == 2);
  CHECK(run("jacobi --profile constant:n=2,c=-1,bogus=1") == 2);
  CHECK(run("jacobi --profile constant:n=2") == 2);  // c is mandatory
  CHECK(run("sweep --metric poincare-ball --geodesics 0 --s-grid 0.5") == 2);
  CHECK(run("sweep --metric poincare-ball --geodesics 2 --s-grid 0.5 --t-max 0.8") == 2);
  CHECK(run("weyl --torus 6.28 --lambda-max 10") == 2);  // missing L= prefix
  CHECK(run("parametrix --model sphere:n=2") == 2);
  CHECK(run("--tol-scale -2 selftest") == 2);
}

TEST_CASE("numerical failures exit with code three") {
  // positive curvature has a conjugate point at pi, inside the window
  CHECK(run("theta-bound --profile constant:n=2,c=1 --s 0.5 --t-max 8") == 3);
  // 3-torus at lambda 1e4 would enumerate ~1.7e9 lattice points
  CHECK(run("weyl --torus L=6.283185307179586,6.283185307179586,"
            "6.283185307179586 --lambda-max 1e4") == 3);
}

TEST_CASE("an injected violation trips the falsification exit") {
  const auto dir = fresh_dir("inject");
  CHECK(run("theta-bound --profile constant:n=2,c=-1 --s 0.5 "
            "--inject-margin-offset -10 --out-dir " +
            dir.string()) == 4);
  const auto cert = load_json(dir / "theta_bound.json");
  CHECK(cert["falsified"] == true);
  CHECK(cert["worst_margin"].get<double>() < 0.0);
}

TEST_CASE("weyl table matches the exact circle count") {
  const auto dir = fresh_dir("weyl_circle");
  CHECK(run("weyl --torus L=6.283185307179586 --lambda-max 10 "
            "--lambda-count 20 --out-dir " +
            dir.string()) == 0);
  std::ifstream in(dir / "weyl.csv");
  std::string line;
  std::getline(in, line);  // header
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string lam, cnt;
    std::getline(ss, lam, ',');
    std::getline(ss, cnt, ',');
    const double lambda = std::stod(lam);
    CHECK(std::stoll(cnt) == 2 * static_cast<long long>(lambda) + 1);
    ++rows;
  }
  CHECK(rows == 20);
}
