#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dsm/io.hpp"

using namespace dsm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("dsm-test-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("csv surface round trip is byte-identical") {
  TempDir dir;
  const fs::path f = dir.path / "pts.csv";
  write_text(f, "x,y,z\n0.1,0.25,-3\n1e-3,2,0.30000000000000004\n7,8,9\n");
  const SurfaceGrid g = read_surface(f);
  REQUIRE(g.size() == 3);
  CHECK(g.points(1, 2) == 0.30000000000000004);
  CHECK_FALSE(g.has_triangles());
  const fs::path f2 = dir.path / "pts2.csv";
  write_surface(f2, g);
  const SurfaceGrid g2 = read_surface(f2);
  CHECK((g.points - g2.points).cwiseAbs().maxCoeff() == 0.0);
  write_surface(dir.path / "pts3.csv", g2);
  CHECK(read_text(f2) == read_text(dir.path / "pts3.csv"));
}

TEST_CASE("mesh format round trip with triangles") {
  TempDir dir;
  const fs::path f = dir.path / "tri.mesh";
  write_text(f, "3 1\n0 0 0\n1 0 0\n0 1 0\n0 1 2\n");
  const SurfaceGrid g = read_surface(f);
  REQUIRE(g.size() == 3);
  REQUIRE(g.triangles.size() == 1);
  CHECK(g.triangles[0] == std::array<int, 3>{0, 1, 2});
  const fs::path f2 = dir.path / "tri2.mesh";
  write_surface(f2, g);
  const SurfaceGrid g2 = read_surface(f2);
  CHECK((g.points - g2.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK(g2.triangles == g.triangles);
}

TEST_CASE("malformed csv row is reported with its 0-based data row") {
  TempDir dir;
  const fs::path f = dir.path / "bad.csv";
  write_text(f, "x,y,z\n0,0,0\n1,2,abc\n");
  CHECK_THROWS_WITH_AS(read_surface(f), doctest::Contains("row 1"), IoError);
}

TEST_CASE("csv rejects non-finite coordinates") {
  TempDir dir;
  const fs::path f = dir.path / "nan.csv";
  write_text(f, "x,y,z\n0,0,nan\n");
  CHECK_THROWS_AS(read_surface(f), IoError);
}

TEST_CASE("mesh face index out of range is rejected") {
  TempDir dir;
  const fs::path f = dir.path / "bad.mesh";
  write_text(f, "3 1\n0 0 0\n1 0 0\n0 1 0\n0 1 7\n");
  CHECK_THROWS_WITH_AS(read_surface(f), doctest::Contains("face 0"), IoError);
}

TEST_CASE("missing file names the path") {
  CHECK_THROWS_WITH_AS(read_surface("/nonexistent/abc.csv"),
                       doctest::Contains("/nonexistent/abc.csv"), IoError);
}

TEST_CASE("format_double writes shortest round-trip representations") {
  for (double v : {0.1, 1.0 / 3.0, 0.30000000000000004, -2.5e-17, 1e300, 0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("config round trip preserves every field") {
  TempDir dir;
  write_text(dir.path / "x0.csv", "x,y,z\n0,0,0\n1,0,0\n");
  write_text(dir.path / "y1.csv", "x,y,z\n0,0,1\n1,0,1\n");
  RunConfig cfg;
  cfg.initial = dir.path / "x0.csv";
  cfg.targets = {dir.path / "y1.csv"};
  cfg.times = {0.0, 0.5};
  cfg.solver.max_iterations = 17;
  cfg.solver.rho = 0.25;
  cfg.solver.lambda = 3.5;
  cfg.solver.frozen_u = true;
  cfg.solver.record_timing = false;
  cfg.solver.seed = 99;
  cfg.baseline.max_iterations = 7;
  cfg.out_dir = dir.path / "out";
  cfg.quantile = 0.9;
  write_config(dir.path / "run.ini", cfg);

  const RunConfig back = load_config(dir.path / "run.ini");
  CHECK(fs::equivalent(back.initial, cfg.initial));
  REQUIRE(back.targets.size() == 1);
  CHECK(fs::equivalent(back.targets[0], cfg.targets[0]));
  CHECK(back.times == cfg.times);
  CHECK(back.solver.max_iterations == 17);
  CHECK(back.solver.rho == 0.25);
  CHECK(back.solver.lambda == 3.5);
  CHECK(back.solver.frozen_u);
  CHECK_FALSE(back.solver.record_timing);
  CHECK(back.solver.seed == 99);
  CHECK(back.baseline.max_iterations == 7);
  CHECK(back.quantile == 0.9);

  const SnapshotProblem p = load_problem(back);
  CHECK(p.initial.size() == 2);
  CHECK(p.targets.size() == 1);
}

TEST_CASE("config parse errors carry location and context") {
  TempDir dir;
  write_text(dir.path / "bad.ini", "[problem]\ninitial x0.csv\n");
  CHECK_THROWS_WITH_AS(load_config(dir.path / "bad.ini"), doctest::Contains(":2"),
                       ValidationError);
  write_text(dir.path / "bad2.ini", "[problem]\nwhat = 3\n");
  CHECK_THROWS_WITH_AS(load_config(dir.path / "bad2.ini"),
                       doctest::Contains("problem.what"), ValidationError);
  write_text(dir.path / "bad3.ini", "[problem]\ninitial = a.csv\ntarget.2 = b.csv\n"
                                    "times = 0,1\n");
  CHECK_THROWS_AS(load_config(dir.path / "bad3.ini"), ValidationError);
}

TEST_CASE("end-to-end match run writes the full artifact set") {
  TempDir dir;
  SynthArgs synth;
  synth.spec.n_points = synth.spec.m_points = 30;
  synth.spec.n_snapshots = 2;
  synth.spec.magnitude = 0.2;
  synth.out_dir = dir.path;
  CHECK(run_synth(synth) == 0);

  RunConfig cfg = load_config(dir.path / "config.ini");
  cfg.solver.max_iterations = 5;
  cfg.solver.record_timing = false;
  CHECK(run_match(cfg) == 0);

  for (int k = 0; k <= 2; ++k)
    CHECK(fs::exists(cfg.out_dir / ("trajectory_" + std::to_string(k) + ".csv")));
  for (int k = 0; k < 2; ++k)
    CHECK(fs::exists(cfg.out_dir / ("controls_" + std::to_string(k) + ".csv")));
  REQUIRE(fs::exists(cfg.out_dir / "history.csv"));

  std::ifstream hist(cfg.out_dir / "history.csv");
  std::string header;
  std::getline(hist, header);
  CHECK(header == "iteration,cost,kin,disp,hausdorff_1,hausdorff_2,consensus_gap,seconds");
  int rows = 0;
  for (std::string line; std::getline(hist, line);)
    if (!line.empty()) ++rows;
  CHECK(rows >= 1);
  CHECK(rows <= 5);

  // Same config twice: determinism shows up as byte-identical history.
  const std::string first = read_text(cfg.out_dir / "history.csv");
  CHECK(run_match(cfg) == 0);
  CHECK(read_text(cfg.out_dir / "history.csv") == first);
}

TEST_CASE("strain run emits per-vertex values and 19 quantiles") {
  TempDir dir;
  const SurfaceGrid sphere = make_sphere(40);
  SurfaceGrid scaled = sphere;
  scaled.points *= 1.2;
  write_surface(dir.path / "ref.mesh", sphere);
  SurfaceGrid bare;
  bare.points = scaled.points;
  write_surface(dir.path / "def.csv", bare);

  StrainArgs args;
  args.reference = dir.path / "ref.mesh";
  args.deformed = dir.path / "def.csv";
  args.out_dir = dir.path / "out";
  CHECK(run_strain(args) == 0);

  std::ifstream q(dir.path / "out" / "strain_quantiles.csv");
  std::string header;
  std::getline(q, header);
  CHECK(header == "quantile,value");
  int rows = 0;
  double value = -1.0;
  for (std::string line; std::getline(q, line);)
    if (!line.empty()) {
      ++rows;
      value = std::stod(line.substr(line.find(',') + 1));
      CHECK(value == doctest::Approx(0.2).epsilon(1e-9));
    }
  CHECK(rows == 19);
}
