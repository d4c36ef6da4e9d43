#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "experiments.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ckn_lab_unit" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run(const std::string& text, const fs::path& dir) {
  lab::Config cfg = lab::Config::parse(text);
  cfg.set("output.dir", dir.string());
  std::ostringstream out, err;
  const int code = lab::run_config(cfg, {}, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("config parsing") {
  const lab::Config cfg = lab::Config::parse("# comment\n\nparams.a = 0.25\nname=x\n grid.list = 1, 2,3 \nseed = 7\n");
  CHECK(cfg.get_double("params.a") == 0.25);
  CHECK(cfg.get_string("name") == "x");
  CHECK(cfg.get_list("grid.list", {}) == std::vector<double>{1, 2, 3});
  CHECK(cfg.get_int("missing", 5) == 5);
  CHECK(cfg.get_seed() == 7);
  CHECK_THROWS_AS(lab::Config::parse("no equals sign\n"), lab::ConfigError);
  CHECK_THROWS_AS(lab::Config::parse("a = 1\na = 2\n"), lab::ConfigError);
  const lab::Config bad = lab::Config::parse("x = abc\n");
  CHECK_THROWS_AS(bad.get_double("x"), lab::ConfigError);
}

TEST_CASE("unused keys are rejected by name") {
  const lab::Config cfg = lab::Config::parse("params.a = 0\nparams.typo = 1\n");
  cfg.get_double("params.a");
  try {
    cfg.check_unused();
    FAIL("expected ConfigError");
  } catch (const lab::ConfigError& e) {
    CHECK(std::string(e.what()).find("params.typo") != std::string::npos);
  }
}

TEST_CASE("list contains the registered experiments") {
  std::ostringstream out;
  lab::list_experiments(out);
  const std::string s = out.str();
  for (const char* name : {"measure_identities", "regularity_report", "lemma_a2_property", "mms_convergence"})
    CHECK(s.find(name) != std::string::npos);
  std::ostringstream again;
  lab::list_experiments(again);
  CHECK(again.str() == s);
}

TEST_CASE("measure_identities passes and writes its report") {
  const fs::path dir = scratch("measure");
  const RunResult r = run("experiment = measure_identities\n", dir);
  CHECK(r.code == 0);
  const std::string report = slurp(dir / "measure_report.csv");
  CHECK(report.rfind("# ckn-lab experiment=measure_identities", 0) == 0);
}

TEST_CASE("mms_convergence rows follow the schema") {
  const fs::path dir = scratch("mms");
  const RunResult r = run(
      "experiment = mms_convergence\nparams.N = 3\nparams.a = 0\nparams.b = 0\nmms.gamma = 0\n"
      "grid.r_min = 0.01\ngrid.spacing = geometric\ngrid.n0 = 32\ngrid.levels = 4\n"
      "check.max_error = 1e-3\n",
      dir);
  CHECK(r.code == 0);
  std::istringstream in(slurp(dir / "mms_convergence.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("# ckn-lab", 0) == 0);
  CHECK(line.find("output.dir") == std::string::npos);
  std::getline(in, line);
  CHECK(line == "level,h,max_error,observed_order");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}

TEST_CASE("reruns are byte-identical") {
  const std::string text = "experiment = lemma_a2_property\nseed = 9\nparams.N = 3\nparams.a = 0.3\nparams.b = 0.4\n"
                           "lemma_a2.envelopes = 2\nlemma_a2.trials = 20\n";
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  CHECK(run(text, a).code == 0);
  CHECK(run(text, b).code == 0);
  CHECK(slurp(a / "lemma_a2.csv") == slurp(b / "lemma_a2.csv"));
  CHECK_FALSE(slurp(a / "lemma_a2.csv").empty());
}

TEST_CASE("usage errors exit with 1") {
  const fs::path dir = scratch("errors");
  SUBCASE("missing seed on a randomized suite") {
    const RunResult r = run("experiment = lemma_a2_property\nparams.N = 3\nparams.a = 0.3\nparams.b = 0.4\n", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("seed") != std::string::npos);
  }
  SUBCASE("unknown experiment") {
    const RunResult r = run("experiment = no_such_thing\n", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("no_such_thing") != std::string::npos);
  }
  SUBCASE("unknown key") {
    const RunResult r = run("experiment = measure_identities\nsolver.tolerance = 1\n", dir);
    CHECK(r.code == 1);
    CHECK(r.err.find("solver.tolerance") != std::string::npos);
  }
  SUBCASE("missing experiment") {
    CHECK(run("seed = 1\n", dir).code == 1);
  }
  SUBCASE("invalid parameters") {
    const RunResult r = run("experiment = mms_convergence\nparams.N = 3\nparams.a = 0.6\nparams.b = 0.6\n", dir);
    CHECK(r.code == 1);
  }
}
