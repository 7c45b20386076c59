#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kryrank/theory.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kDir = fs::temp_directory_path() / "kryrank_cli_test";

int run(const std::string& args, const std::string& out = "out.txt", const std::string& err = "err.txt") {
  fs::create_directories(kDir);
  const std::string cmd = std::string("cd '") + kDir.string() + "' && '" + KRYRANK_BIN + "' " + args + " > " + out +
                          " 2> " + err;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) {
  std::ifstream in(kDir / name, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& name, const std::string& text) {
  fs::create_directories(kDir);
  std::ofstream(kDir / name) << text;
}

}  // namespace

TEST_CASE("generate and estimate are byte-identical across runs") {
  REQUIRE(run("generate --p 30 --n 80 --lambdas 9,6 --sigma 1 --seed 4 --out tiny.mtx") == 0);
  const std::string first = slurp("tiny.mtx");
  REQUIRE(run("generate --p 30 --n 80 --lambdas 9,6 --sigma 1 --seed 4 --out tiny.mtx") == 0);
  CHECK(slurp("tiny.mtx") == first);

  REQUIRE(run("estimate tiny.mtx --sigma 1 --seed 7", "a.json") == 0);
  REQUIRE(run("estimate tiny.mtx --sigma 1 --seed 7", "b.json") == 0);
  CHECK(slurp("a.json") == slurp("b.json"));
  const auto j = nlohmann::json::parse(slurp("a.json"));
  CHECK(j["schema"] == 1);
  CHECK(j["q_hat"] == 2);
  CHECK(j["config"]["seed"] == 7);
  CHECK_FALSE(j.contains("wall_time"));
}

TEST_CASE("estimate writes subspace, theta and IC files") {
  REQUIRE(run("generate --p 30 --n 80 --lambdas 9,6 --seed 4 --out tiny.mtx") == 0);
  REQUIRE(run("estimate tiny.mtx --seed 1 --out res --timings --mode paper-truncated --scaling alg1-literal") == 0);
  CHECK(nlohmann::json::parse(slurp("res.json")).contains("wall_time"));
  CHECK(slurp("res_subspace.mtx").rfind("%%MatrixMarket matrix array real general\n30 ", 0) == 0);
  CHECK(slurp("res_theta.csv").rfind("index,theta\n1,", 0) == 0);
  CHECK(slurp("res_ic.csv").rfind("k,ic,theta_k\n0,", 0) == 0);
}

TEST_CASE("conditions matches the theory module") {
  REQUIRE(run("conditions --p 200 --n 400 --q 5 --sigma 1.1 --cn log --json") == 0);
  const auto j = nlohmann::json::parse(slurp("out.txt"));
  const double cn = std::log(400.0);
  CHECK(j["underest_threshold"].get<double>() == kryrank::underestimation_threshold(1.1, cn, 400, 200, 5));
  CHECK(j["overest_threshold"].get<double>() == kryrank::overestimation_threshold(1.1, cn, 400, 200, 5));
  CHECK(j["tw_edge"].get<double>() == kryrank::tracy_widom_edge(1.1, 200, 400));
  CHECK(j["cn_lower_bound"].get<double>() == kryrank::cn_lower_bound(200, 400, 5));
  CHECK(j["cn_above_bound"] == false);
  REQUIRE(run("conditions --p 200 --n 400 --q 5 --sigma 1.1") == 0);
  CHECK(slurp("out.txt").find("underestimation threshold          3.75865197") != std::string::npos);
  write("spec.txt", "10 8 7 6 5 2 1 1\n");
  REQUIRE(run("conditions --p 8 --n 1000 --q 5 --sigma 1 --spectrum spec.txt --json") == 0);
  CHECK(nlohmann::json::parse(slurp("out.txt"))["no_underestimation"] == true);
  write("theta.csv", "index,theta\n1,10\n2,8\n3,7\n4,6\n5,5\n6,2\n7,1\n8,1\n");
  REQUIRE(run("conditions --p 8 --n 1000 --q 5 --sigma 1 --spectrum theta.csv --json", "csv.json") == 0);
  CHECK(slurp("csv.json") == slurp("out.txt"));
  write("junk.txt", "1 2 x3\n");
  CHECK(run("conditions --p 8 --n 1000 --q 5 --spectrum junk.txt") == 2);
}

TEST_CASE("sweep, chi2 and table1 configs") {
  write("sw.json", R"({"name": "sw", "variable": "n", "grid": [100, 300], "trials": 5, "seed": 1,
    "estimators": ["mpt-krylov", "mpt-full", "mdl"], "model": {"p": 30, "lambdas": [10, 7], "sigma": 1}})");
  REQUIRE(run("sweep sw.json --workers 1 --out-dir w1") == 0);
  REQUIRE(run("sweep sw.json --workers 8 --out-dir w8") == 0);
  CHECK(slurp("w1/sw.csv") == slurp("w8/sw.csv"));
  CHECK(slurp("w1/sw.svg") == slurp("w8/sw.svg"));
  CHECK(slurp("w1/sw.csv").rfind("grid,estimator,error_rate,mean_qhat,mean_time\n", 0) == 0);

  write("c.json", R"({"name": "c", "n_grid": [100, 200], "trials": 3, "model": {"p": 20, "lambdas": [8], "sigma": 1.2}})");
  REQUIRE(run("chi2 c.json --workers 1 --out-dir c1") == 0);
  REQUIRE(run("chi2 c.json --workers 8 --out-dir c8") == 0);
  CHECK(slurp("c1/c.csv") == slurp("c8/c.csv"));
  CHECK(slurp("c1/c.csv").rfind("n,mean_ratio\n", 0) == 0);

  write("t.json", R"({"name": "t", "matrices": [{"name": "z", "path": "nothing.mtx"}]})");
  REQUIRE(run("table1 t.json --out-dir t1") == 0);
  CHECK(slurp("t1/t.csv").find("error: cannot open") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run("estimate tiny.mtx --bogus") == 1);
  CHECK(slurp("err.txt").find("Usage") != std::string::npos);
  CHECK(run("") == 1);
  CHECK(run("estimate tiny.mtx --mode sideways") == 1);
  CHECK(run("estimate tiny.mtx --sigma -1") == 1);
  CHECK(run("conditions --p 10 --n 10 --q 9") == 1);
  CHECK(run("estimate does-not-exist.mtx") == 2);
  write("broken.mtx", "%%MatrixMarket matrix coordinate real general\n2 2 1\n5 5 1\n");
  CHECK(run("estimate broken.mtx") == 2);
  CHECK(slurp("err.txt").find("line 3") != std::string::npos);
  write("bad_sweep.json", R"({"variable": "n"})");
  CHECK(run("sweep bad_sweep.json") == 2);
  CHECK(run("--help") == 0);
}
