#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cmcfol/errors.hpp"
#include "cmcfol/run_config.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string bin() { return CMCFOL_BIN; }

int run(const std::string& args) {
  const std::string cmd = bin() + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("cmcfol_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string sub(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("run config parsing") {
  using cmcfol::cli::RunConfig;
  SUBCASE("dotted keys and overrides") {
    RunConfig c;
    c.apply_key("mass", "2.5");
    c.apply_key("perturbation.epsilon", "1e-3");
    c.apply_key("perturbation.component", "thetaphi");
    CHECK(c.mass == 2.5);
    CHECK(c.perturbation.epsilon == 1e-3);
    CHECK(c.perturbation.component == "thetaphi");
  }
  SUBCASE("unknown keys rejected") {
    RunConfig c;
    CHECK_THROWS_AS(c.apply_key("no_such_key", "1"), cmcfol::ConfigError);
    CHECK_THROWS_AS(c.apply_key("mass", "not-a-number"), cmcfol::ConfigError);
  }
  SUBCASE("inline perturbation spec") {
    RunConfig c;
    c.apply_perturbation_arg("l=2,m=1,component=rphi,epsilon=5e-4");
    CHECK(c.perturbation.family == "harmonic");
    CHECK(c.perturbation.l == 2);
    CHECK(c.perturbation.m == 1);
    CHECK(c.perturbation.epsilon == 5e-4);
  }
  SUBCASE("config file round trip") {
    Scratch scratch;
    const fs::path cfg = scratch.dir / "run.cfg";
    std::ofstream(cfg) << "# comment\nmass = 0.5\nband_limit=8\nperturbation.epsilon = 2e-3\n";
    RunConfig c;
    c.load_file(cfg.string());
    CHECK(c.mass == 0.5);
    CHECK(c.band_limit == 8);
    CHECK(c.perturbation.epsilon == 2e-3);
  }
  SUBCASE("validation catches bad values") {
    RunConfig c;
    c.format = "xml";
    CHECK_THROWS_AS(c.validate(), cmcfol::ConfigError);
    c.format = "json";
    c.band_limit = 1;
    CHECK_THROWS_AS(c.validate(), cmcfol::ConfigError);
  }
}

TEST_CASE("solve exit codes and artifacts") {
  Scratch scratch;
  SUBCASE("successful solve") {
    const int rc = run("solve --m 1 --r 5 --L 12 --stability-band 8 --out " + scratch.sub("ok"));
    CHECK(rc == 0);
    const std::string body = slurp(fs::path(scratch.sub("ok")) / "leaf_r5.json");
    CHECK(body.find("\"schema_version\": \"cmcfol-1\"") != std::string::npos);
    CHECK(body.find("\"converged\": true") != std::string::npos);
  }
  SUBCASE("band limit below minimum") {
    CHECK(run("solve --m 1 --r 5 --L 1 --out " + scratch.sub("bad")) == 1);
  }
  SUBCASE("m=0 without projection is the documented singular case") {
    const int rc = run("solve --m 0 --r 5 --L 12 --stability-band 8 --out " + scratch.sub("m0"));
    CHECK(rc == 2);
    const std::string body = slurp(fs::path(scratch.sub("m0")) / "leaf_r5.json");
    CHECK(body.find("singular") != std::string::npos);
  }
  SUBCASE("m=0 with projection succeeds") {
    CHECK(run("solve --m 0 --r 5 --L 12 --stability-band 8 --project-kernel --out " +
              scratch.sub("m0p")) == 0);
  }
}

TEST_CASE("foliate artifacts and determinism") {
  Scratch scratch;
  const std::string common =
      " --m 1 --L 12 --stability-band 8 --r-min 4 --r-max 6 --dr 0.5 "
      "--perturbation l=1,m=0,component=rr,epsilon=1e-3 --out ";
  // identical config twice into the same directory, snapshotting in between
  REQUIRE(run("foliate" + common + scratch.sub("a")) == 0);
  fs::copy(scratch.sub("a"), scratch.sub("b"));
  REQUIRE(run("foliate" + common + scratch.sub("a")) == 0);

  SUBCASE("csv schema") {
    const std::string csv = slurp(fs::path(scratch.sub("a")) / "foliation.csv");
    CHECK(csv.rfind("r,area,H_target,H_achieved,sup_phi,sup_beta,lambda_min,m_hat,kw_norm,"
                    "lemma_h_residual,gb_residual\n",
                    0) == 0);
    int rows = -1;  // don't count the header
    for (char ch : csv) rows += (ch == '\n');
    CHECK(rows == 5);
  }
  SUBCASE("byte-identical artifacts across runs") {
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(scratch.sub("a"))) {
      const fs::path other = fs::path(scratch.sub("b")) / entry.path().filename();
      REQUIRE(fs::exists(other));
      CHECK(slurp(entry.path()) == slurp(other));
      ++compared;
    }
    CHECK(compared == 7);  // 5 leaves + foliation.json + foliation.csv
  }
  SUBCASE("empty radius range is a config error") {
    CHECK(run("foliate --m 1 --L 12 --r-min 6 --r-max 4 --out " + scratch.sub("c")) == 1);
  }
}

TEST_CASE("probe artifacts") {
  Scratch scratch;
  SUBCASE("positive mass returns to the fixed point") {
    const int rc = run("probe --m 1 --r 5 --L 12 --stability-band 8 --offset-axis 2 "
                       "--offset-amp 1e-4 --out " +
                       scratch.sub("p1"));
    CHECK(rc == 0);
    const std::string body = slurp(fs::path(scratch.sub("p1")) / "probe_r5.json");
    CHECK(body.find("\"returned_to_original\": true") != std::string::npos);
  }
  SUBCASE("hyperbolic space does not") {
    const int rc = run("probe --m 0 --r 4 --L 12 --stability-band 8 --project-kernel "
                       "--offset-axis 1 --offset-amp 0.1 --out " +
                       scratch.sub("p0"));
    CHECK(rc == 0);
    const std::string body = slurp(fs::path(scratch.sub("p0")) / "probe_r4.json");
    CHECK(body.find("\"returned_to_original\": false") != std::string::npos);
  }
}

TEST_CASE("verify command") {
  Scratch scratch;
  SUBCASE("hyperbolic space with kernel projection") {
    const int rc0 = run("verify --m 0 --project-kernel --L 12 --stability-band 8 "
                        "--r-min 4 --r-max 5 --dr 0.5 --out " +
                        scratch.sub("v0"));
    CHECK(rc0 == 0);
    const std::string body = slurp(fs::path(scratch.sub("v0")) / "verify.json");
    CHECK(body.find("mass_zero_recovery") != std::string::npos);
    CHECK(body.find("translation_kernel") != std::string::npos);
  }

  const int rc = run("verify --m 1 --L 12 --stability-band 8 --r-min 4 --r-max 6 --dr 0.5 --out " +
                     scratch.sub("v"));
  CHECK(rc == 0);
  const std::string body = slurp(fs::path(scratch.sub("v")) / "verify.json");
  CHECK(body.find("\"passed\": true") != std::string::npos);
  CHECK(body.find("scalar_curvature_minus_6") != std::string::npos);
  CHECK(body.find("dual_path_gauss_curvature") != std::string::npos);

  SUBCASE("thread count does not change the artifact bytes") {
    REQUIRE(run("verify --m 1 --L 12 --stability-band 8 --r-min 4 --r-max 6 --dr 0.5 "
                "--threads 1 --out " +
                scratch.sub("v1")) == 0);
    REQUIRE(run("verify --m 1 --L 12 --stability-band 8 --r-min 4 --r-max 6 --dr 0.5 "
                "--threads 3 --out " +
                scratch.sub("v3")) == 0);
    std::string a = slurp(fs::path(scratch.sub("v1")) / "verify.json");
    std::string b = slurp(fs::path(scratch.sub("v3")) / "verify.json");
    // the echoes legitimately differ in the threads and out_dir keys
    const auto strip = [](std::string s) {
      for (const char* key : {"\"threads\"", "\"out_dir\""}) {
        const auto pos = s.find(key);
        s.erase(pos, s.find('\n', pos) - pos);
      }
      return s;
    };
    CHECK(strip(a) == strip(b));
  }
}
