#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dearest/dataset.hpp"
#include "dearest/error.hpp"
#include "dearest/experiment.hpp"

using namespace dearest;
namespace fs = std::filesystem;

namespace {

ExperimentSpec parse(const std::string &text) {
  std::istringstream in(text);
  return parse_spec(in);
}

std::string read_all(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("dearest_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const std::string kQuadratic =
    "objective = quadratic\n"
    "topology = ring\n"
    "m = 4\n"
    "n = 50\n"
    "d = 10\n"
    "epsilon = 1e-3\n"
    "seeds = 1, 2\n"
    "telemetry_stride = 50\n";

std::string message_of(const std::string &text) {
  try {
    parse(text);
  } catch (const ConfigError &e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("ring description with the usual experiment values") {
  const auto s = parse(
      "# circle graph\n"
      "objective = logistic\n"
      "dataset = synthetic   # generated\n"
      "samples = 200\n"
      "features = 5\n"
      "topology = ring\n"
      "m = 20\n"
      "lambda = 1e-4\n"
      "epsilon = 1e-3\n"
      "seeds = 3,4 , 5\n");
  CHECK(s.topology == "ring");
  CHECK(s.m == 20);
  CHECK(s.lambda == 1e-4);
  CHECK(s.seeds == std::vector<std::uint64_t>{3, 4, 5});
  CHECK_FALSE(s.eta.has_value());
}

TEST_CASE("overrides reach the run configuration") {
  auto s = parse(kQuadratic + "eta = 0.01\nbig_k = 5\nhat_k = 2\nt_max = 7\n");
  CHECK(*s.eta == 0.01);
  const auto obj = make_quadratic(4, 50, 10, s.data_seed);
  const auto w = gossip_for(build_ring(4));
  const auto cfg = resolve_config(s, obj, w, Vector::Zero(10));
  CHECK(cfg.eta == 0.01);
  CHECK(cfg.big_k == 5);
  CHECK(cfg.hat_k == 2);
  CHECK(cfg.t_max == 7);
  CHECK(cfg.b == 22);  // not overridden
}

TEST_CASE("empty description lists the required keys") {
  const auto msg = message_of("");
  CHECK(msg.find("objective") != std::string::npos);
  CHECK(msg.find("topology") != std::string::npos);
  CHECK(msg.find("epsilon") != std::string::npos);
  CHECK(msg.find("seeds") != std::string::npos);
}

TEST_CASE("errors name the key and line") {
  auto msg = message_of("objective = quadratic\nmx = 4\n");
  CHECK(msg.find("line 2") != std::string::npos);
  CHECK(msg.find("mx") != std::string::npos);

  msg = message_of("objective = quadratic\n\nm = four\n");
  CHECK(msg.find("line 3") != std::string::npos);
  CHECK(msg.find("'m'") != std::string::npos);

  msg = message_of(kQuadratic + "eta = fast\n");
  CHECK(msg.find("eta") != std::string::npos);

  CHECK(message_of(kQuadratic + "m = 5\n").find("twice") != std::string::npos);
  CHECK(message_of("just words\n").find("line 1") != std::string::npos);
  CHECK(message_of(kQuadratic + "normalize = maybe\n").find("normalize") != std::string::npos);
  CHECK(!message_of("objective = svm\ntopology = ring\nm = 4\nepsilon = 1\nseeds = 1\n").empty());
  CHECK(!message_of("objective = quadratic\ntopology = ring\nm = 1\nn = 2\nd = 2\nepsilon = 1\nseeds = 1\n").empty());
  CHECK_THROWS_AS(load_spec("/nonexistent/spec.cfg"), ConfigError);
}

TEST_CASE("quadratic smoke run writes telemetry and summary") {
  const auto dir = fresh_dir("smoke");
  auto s = parse(kQuadratic);
  s.output_dir = dir.string();
  std::ostringstream log;
  const auto rows = execute_experiment(s, log);
  REQUIRE(rows.size() == 2);
  CHECK(fs::exists(dir / "telemetry_1.csv"));
  CHECK(fs::exists(dir / "telemetry_2.csv"));
  const auto summary = read_all(dir / "summary.csv");
  CHECK(summary.rfind(kSummaryHeader, 0) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);
  const auto telemetry = read_all(dir / "telemetry_1.csv");
  CHECK(telemetry.rfind("t,y_t,k_t,f_bar,grad_norm,u_t,v_t,c_t,phi_t,ifo_cum,comm_cum\n", 0) == 0);
  CHECK(rows[0].n == 50);
  CHECK(rows[0].comm_rounds_both > rows[0].comm_rounds);
}

TEST_CASE("same description and seed give byte-identical telemetry") {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  auto s = parse(kQuadratic);
  std::ostringstream log;
  s.output_dir = a.string();
  execute_experiment(s, log);
  s.output_dir = b.string();
  execute_experiment(s, log);
  CHECK(read_all(a / "telemetry_1.csv") == read_all(b / "telemetry_1.csv"));
  CHECK(read_all(a / "telemetry_2.csv") == read_all(b / "telemetry_2.csv"));
  CHECK(read_all(a / "telemetry_1.csv") != read_all(a / "telemetry_2.csv"));
}

TEST_CASE("bad dataset path fails without writing anything") {
  const auto dir = fresh_dir("bad_path");
  auto s = parse(
      "objective = logistic\ndataset = /nonexistent/a9a\ntopology = ring\nm = 4\n"
      "epsilon = 1e-3\nseeds = 1\n");
  s.output_dir = dir.string();
  std::ostringstream log, err;
  CHECK(run_experiment(s, log, err) != 0);
  CHECK(err.str().find("/nonexistent/a9a") != std::string::npos);
  CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("output directory environment override") {
  const auto dir = fresh_dir("env");
  auto s = parse(kQuadratic + "t_max = 3\n");
  s.output_dir = "/nonexistent/should/not/be/used";
  setenv(kOutputDirEnv, dir.string().c_str(), 1);
  std::ostringstream log, err;
  const int code = run_experiment(s, log, err);
  unsetenv(kOutputDirEnv);
  CHECK(code == 0);
  CHECK(fs::exists(dir / "summary.csv"));
}

TEST_CASE("a 32,561-row LIBSVM file on 20 agents gives 1628 samples per agent") {
  const auto dir = fresh_dir("a9a_shape");
  fs::create_directories(dir);
  auto samples = make_synthetic_binary(32561, 8, 3);
  {
    std::ofstream out(dir / "data.libsvm");
    write_libsvm(out, samples);
  }
  std::ostringstream text;
  text << "objective = logistic\ndataset = " << (dir / "data.libsvm").string()
       << "\ntopology = ring\nm = 20\nepsilon = 1e-3\nseeds = 1\nt_max = 2\n"
       << "telemetry_stride = 0\noutput_dir = " << (dir / "out").string() << "\n";
  std::ostringstream log;
  const auto rows = execute_experiment(parse(text.str()), log);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].n == 1628);
  CHECK(rows[0].m == 20);
}
