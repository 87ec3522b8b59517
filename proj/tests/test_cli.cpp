#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "gmacldpc/alist.hpp"
#include "gmacldpc/code.hpp"
#include "gmacldpc/protograph.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = gmacldpc::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  auto dir = fs::temp_directory_path() / "gmacldpc_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string write(const std::string& name, const std::string& text) {
  auto p = scratch() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string drop_last_column(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

std::string tmp(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("missing config file is a usage error naming the file") {
  auto r = run({"simulate", "--config", "missing.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("missing.json") != std::string::npos);
}

TEST_CASE("unknown config keys are listed with the valid ones") {
  auto cfg = write("bad.json", R"({"protograph": [[3,3]], "ebn0_db": [1], "colour": "red"})");
  auto r = run({"simulate", "--config", cfg});
  CHECK(r.code == 1);
  CHECK(r.err.find("'colour'") != std::string::npos);
  CHECK(r.err.find("stop_after_errors") != std::string::npos);
}

TEST_CASE("unknown subcommand and bad flags are usage errors") {
  auto r = run({"transmogrify"});
  CHECK(r.code == 1);
  CHECK(r.err.find("spread-sim") != std::string::npos);
  CHECK(run({"simulate"}).code == 1);
  CHECK(run({}).code == 1);
  auto cfg = write("wrongtype.json", R"({"protograph": [[3,3]], "ebn0_db": [1], "frames": "many"})");
  r = run({"simulate", "--config", cfg});
  CHECK(r.code == 1);
  CHECK(r.err.find("frames") != std::string::npos);
}

TEST_CASE("help documents every key") {
  auto r = run({"spread-sim", "--help"});
  CHECK(r.code == 0);
  for (const char* key : {"protograph", "alist", "lift_size", "users", "ebn0_db", "frames", "stop_after_errors",
                          "outer_iterations", "inner_iterations", "seed", "out", "chips", "groups", "signature"}) {
    CHECK_MESSAGE(r.out.find(key) != std::string::npos, key);
  }
  r = run({"optimize", "--help"});
  CHECK(r.code == 0);
  CHECK(r.out.find("initial_temperature") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("pexit prints the threshold and writes the trajectory") {
  auto cfg = write("base.json", R"({"protograph": [[3,3]], "samples": 2000, "resolution_db": 0.05})");
  const auto traj = tmp("traj.csv");
  auto r = run({"pexit", "--config", cfg, "--out", traj});
  REQUIRE(r.code == 0);
  const auto pos = r.out.find("threshold_db=");
  REQUIRE(pos != std::string::npos);
  const double t = std::stod(r.out.substr(pos + 13));
  CHECK(t > 0.9);
  CHECK(t < 1.4);
  const auto csv = slurp(traj);
  CHECK(csv.rfind("iteration,min_app,state_info_0,state_info_1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') > 2);
}

TEST_CASE("runtime failures exit with 2") {
  auto cfg = write("hopeless.json", R"({"protograph": [[3,3]], "samples": 500, "search_hi_db": -1.5})");
  auto r = run({"pexit", "--config", cfg, "--out", tmp("hopeless.csv")});
  CHECK(r.code == 2);
  CHECK(r.err.find("no threshold") != std::string::npos);
}

TEST_CASE("simulate output is reproducible byte for byte apart from timing") {
  auto cfg = write("sim.json", R"({"protograph": [[3,3]], "lift_size": 20, "users": 2,
                                   "ebn0_start": 2, "ebn0_stop": 4, "ebn0_step": 1, "frames": 40})");
  REQUIRE(run({"simulate", "--config", cfg, "--seed", "3", "--out", tmp("a.csv")}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg, "--seed", "3", "--out", tmp("b.csv")}).code == 0);
  REQUIRE(run({"simulate", "--config", cfg, "--seed", "4", "--out", tmp("c.csv")}).code == 0);
  const auto a = slurp(tmp("a.csv"));
  CHECK(std::count(a.begin(), a.end(), '\n') == 4);
  CHECK(drop_last_column(a) == drop_last_column(slurp(tmp("b.csv"))));
  CHECK(drop_last_column(a) != drop_last_column(slurp(tmp("c.csv"))));
}

TEST_CASE("lift writes the same matrix as the library") {
  auto cfg = write("lift.json", R"({"protograph": [[3,3]], "lift_size": 30})");
  REQUIRE(run({"lift", "--config", cfg, "--seed", "7", "--out", tmp("code.alist")}).code == 0);
  auto H = gmacldpc::load_alist(tmp("code.alist"));
  CHECK(H == gmacldpc::lift_matrix(gmacldpc::Protograph({{3, 3}}), 30, 7));
}

TEST_CASE("optimize then simulate its protograph") {
  auto opt = write("opt.json", R"({"users": 2, "steps": 4, "samples": 1000, "resolution_db": 0.1,
                                   "max_iters": 300})");
  const auto proto = tmp("best.proto");
  auto r = run({"optimize", "--config", opt, "--out", proto});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("threshold_db=") != std::string::npos);
  auto p = gmacldpc::load_protograph(proto);
  CHECK(p.rows() == 3);
  CHECK(p.cols() == 4);
  const auto log = slurp(proto + ".log.json");
  CHECK(log.find("\"steps\"") != std::string::npos);

  auto sim = write("pipeline.json", R"({"protograph": "best.proto", "lift_size": 10, "users": 2,
                                        "ebn0_db": [4], "frames": 20})");
  r = run({"spread-sim", "--config", sim, "--out", tmp("unused.csv")});
  CHECK(r.code == 1);  // no chips for spread mode
  r = run({"simulate", "--config", sim, "--out", tmp("pipeline.csv")});
  REQUIRE(r.code == 0);
  const auto csv = slurp(tmp("pipeline.csv"));
  CHECK(csv.rfind("ebn0_db,frames,frame_errors,fer,ber,ci_low,ci_high,seed,seconds\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("spread-sim writes and reuses its signature") {
  auto cfg = write("spread.json", R"({"protograph": [[3,3]], "lift_size": 10, "repetition": true, "users": 4,
                                      "transmitted": 36, "chips": 72, "ebn0_db": [8], "frames": 10,
                                      "signature_out": ")" + tmp("sig.json") + R"("})");
  REQUIRE(run({"spread-sim", "--config", cfg, "--out", tmp("s1.csv")}).code == 0);
  auto reuse = write("spread2.json", R"({"protograph": [[3,3]], "lift_size": 10, "repetition": true, "users": 4,
                                       "transmitted": 36, "signature": "sig.json", "ebn0_db": [8], "frames": 10})");
  REQUIRE(run({"spread-sim", "--config", reuse, "--out", tmp("s2.csv")}).code == 0);
  CHECK(drop_last_column(slurp(tmp("s1.csv"))) == drop_last_column(slurp(tmp("s2.csv"))));
  auto split = write("split.json", R"({"protograph": [[3,3]], "lift_size": 10, "repetition": true, "users": 4,
                                     "mode": "split", "ebn0_db": [8], "frames": 10})");
  CHECK(run({"spread-sim", "--config", split, "--out", tmp("s3.csv")}).code == 0);
}
