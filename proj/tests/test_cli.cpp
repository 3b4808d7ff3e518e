#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "odt/metrics.hpp"
#include "odt/volio.hpp"

namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / "odt_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string p(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = std::string(ODTREG_BIN) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc < 0 ? rc : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kConfig = R"(
[grid]
nx = 32
ny = 32
nz = 32
dx = 0.11
dy = 0.11
dz = 0.11

[phantom]
kind = sphere
radius = 0.7
contrast = 0.12
)";

}  // namespace

TEST_CASE("full pipeline: phantom -> mask -> degrade -> regularize -> eval") {
  Workspace ws;
  {
    std::ofstream cfg(ws.p("run.cfg"));
    cfg << kConfig;
  }

  REQUIRE(run("phantom --config " + ws.p("run.cfg") + " -o " + ws.p("truth.vol3")) == 0);
  REQUIRE(run("mask --config " + ws.p("run.cfg") + " -o " + ws.p("mask.vol3")) == 0);
  REQUIRE(run("degrade --truth " + ws.p("truth.vol3") + " --mask " + ws.p("mask.vol3") +
              " --out-spectrum " + ws.p("g.vol3") + " --out-raw " + ws.p("raw.vol3")) == 0);
  REQUIRE(run("regularize --input " + ws.p("raw.vol3") + " --mask " + ws.p("mask.vol3") +
              " --preset bead --inner 60 -o " + ws.p("reg.vol3") + " --report " +
              ws.p("reg.json")) == 0);
  REQUIRE(run("eval --a " + ws.p("reg.vol3") + " --b " + ws.p("truth.vol3") + " --zrange 0 -o " +
              ws.p("eval.csv")) == 0);

  // Regularization must improve the data fit to the ground truth.
  const odt::Volume3 truth = odt::read_vol(ws.p("truth.vol3"));
  const odt::Volume3 raw = odt::read_vol(ws.p("raw.vol3"));
  const odt::Volume3 reg = odt::read_vol(ws.p("reg.vol3"));
  CHECK(odt::mse(reg, truth) < odt::mse(raw, truth));

  const std::string report = slurp(ws.p("reg.json"));
  CHECK(report.find("\"residuals\"") != std::string::npos);
  CHECK(report.find("\"preset\"") != std::string::npos);

  const std::string csv = slurp(ws.p("eval.csv"));
  CHECK(csv.rfind("z_um,", 0) == 0);
  CHECK(csv.find("\nall,") != std::string::npos);

  // Re-running the solve overwrites the output with identical bytes.
  REQUIRE(run("regularize --input " + ws.p("raw.vol3") + " --mask " + ws.p("mask.vol3") +
              " --preset bead --inner 60 -o " + ws.p("reg2.vol3")) == 0);
  CHECK(slurp(ws.p("reg.vol3")) == slurp(ws.p("reg2.vol3")));

  // Spectrum input path gives the same result as the raw path.
  REQUIRE(run("regularize --spectrum " + ws.p("g.vol3") + " --mask " + ws.p("mask.vol3") +
              " --preset bead --inner 60 -o " + ws.p("reg3.vol3")) == 0);
  CHECK(fs::exists(ws.p("reg3.vol3")));

  // Export round trip.
  REQUIRE(run("export --input " + ws.p("reg.vol3") + " -o " + ws.p("reg.f32")) == 0);
  CHECK(fs::file_size(ws.p("reg.f32")) == 32 * 32 * 32 * 4);
}

TEST_CASE("patched flag runs the patch pipeline") {
  Workspace ws;
  {
    std::ofstream cfg(ws.p("run.cfg"));
    cfg << kConfig << "\n[patch]\npatch = 16\nstride = 8\n";
  }
  REQUIRE(run("phantom --config " + ws.p("run.cfg") + " -o " + ws.p("truth.vol3")) == 0);
  REQUIRE(run("mask --config " + ws.p("run.cfg") + " -o " + ws.p("mask.vol3")) == 0);
  REQUIRE(run("degrade --truth " + ws.p("truth.vol3") + " --mask " + ws.p("mask.vol3") +
              " --out-spectrum " + ws.p("g.vol3") + " --out-raw " + ws.p("raw.vol3")) == 0);
  REQUIRE(run("regularize --config " + ws.p("run.cfg") + " --input " + ws.p("raw.vol3") +
              " --mask " + ws.p("mask.vol3") +
              " --inner 20 --outer 1 --patched --threads 2 -o " + ws.p("reg.vol3") +
              " --report " + ws.p("rep.json")) == 0);
  CHECK(slurp(ws.p("rep.json")).find("n_patches") != std::string::npos);
}

TEST_CASE("distinct exit codes per failure class") {
  Workspace ws;
  {
    std::ofstream cfg(ws.p("run.cfg"));
    cfg << kConfig;
  }
  REQUIRE(run("phantom --config " + ws.p("run.cfg") + " -o " + ws.p("truth.vol3")) == 0);
  REQUIRE(run("mask --config " + ws.p("run.cfg") + " -o " + ws.p("mask.vol3")) == 0);

  // invalid parameter -> 2
  CHECK(run("regularize --input " + ws.p("truth.vol3") + " --mask " + ws.p("mask.vol3") +
            " --mu 0 -o " + ws.p("x.vol3")) == 2);
  // missing file -> 3
  CHECK(run("degrade --truth " + ws.p("nothere.vol3") + " --mask " + ws.p("mask.vol3")) == 3);
  // malformed payload -> 5
  {
    std::ofstream bad(ws.p("bad.vol3"), std::ios::binary);
    bad << "XOL3 not a volume";
  }
  CHECK(run("eval --a " + ws.p("bad.vol3") + " --b " + ws.p("truth.vol3") + " -o " +
            ws.p("e.csv")) == 5);
  // unknown config key -> 2
  {
    std::ofstream cfg(ws.p("bad.cfg"));
    cfg << "[grid]\nbogus = 1\n";
  }
  CHECK(run("phantom --config " + ws.p("bad.cfg") + " -o " + ws.p("t.vol3")) == 2);
}

TEST_CASE("bench writes a complete CSV over the requested ladder") {
  Workspace ws;
  {
    const std::string cmd = std::string(ODTREG_BIN) + " bench --sizes 32,48 --inner 2 --outer 1 -o " +
                            ws.p("bench.csv") + " > " + ws.p("bench.log") + " 2>&1";
    REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  }
  // The active inner/outer interpretation is printed.
  CHECK(slurp(ws.p("bench.log")).find("inner=2 outer=1") != std::string::npos);
  CHECK(slurp(ws.p("bench.log")).find("inner=100, outer=5") != std::string::npos);

  const std::string csv = slurp(ws.p("bench.csv"));
  CHECK(csv.rfind("nx,ny,nz,voxels,wall_s,fupdate_s,shrink_s,bookkeep_s\n", 0) == 0);
  CHECK(csv.find("\n32,32,64,") != std::string::npos);
  CHECK(csv.find("\n48,48,64,") != std::string::npos);
  // Larger problem, more work.
  double wall32 = 0.0, wall48 = 0.0;
  std::sscanf(csv.c_str() + csv.find("\n32,32,64,"), "\n32,32,64,%*d,%lf", &wall32);
  std::sscanf(csv.c_str() + csv.find("\n48,48,64,"), "\n48,48,64,%*d,%lf", &wall48);
  CHECK(wall48 > wall32);
}
