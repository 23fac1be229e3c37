#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <sys/wait.h>

#include "mlcs/error.hpp"
#include "mlcs/experiment.hpp"
#include "mlcs/grid_io.hpp"
#include "support.hpp"

using namespace mlcs;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << text;
}

std::string tiny_points(const std::string& out) {
  return R"({
    "seed": 5,
    "output_dir": ")" + out + R"(",
    "scene": {"kind": "points", "n_azimuth": 32, "n_range": 32,
              "points": [{"azimuth": 16, "range": 16, "amplitude": 1.0}]},
    "sampling": {"rate": 0.5},
    "solver": {"lambda": 0.05, "max_iterations": 60}
  })";
}

std::string tiny_sweep(const std::string& out, const std::string& extra_solver = "") {
  return R"({
    "seed": 11,
    "output_dir": ")" + out + R"(",
    "noise_snr_db": 20,
    "scene": {"kind": "rayleigh", "n_azimuth": 24, "n_range": 24,
              "region": {"az_begin": 4, "az_end": 20, "rg_begin": 4, "rg_end": 20}},
    "solver": {"lambda": 0.02, "max_iterations": 30)" + extra_solver + R"(},
    "sweep": {"rates": [1.0, 0.5], "looks": [1, 2], "repetitions": 2, "workers": 2}
  })";
}

int cli(const std::string& args) {
  const std::string cmd = std::string(MLCS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> pgm_header_and_pixels(const fs::path& p, std::string& pixels) {
  std::istringstream is(slurp(p));
  std::string magic, w, h, maxval;
  is >> magic >> w >> h >> maxval;
  is.get();
  pixels.assign(std::istreambuf_iterator<char>(is), {});
  return {magic, w, h, maxval};
}

}  // namespace

TEST_CASE("config parsing rejects unknown and mistyped keys") {
  CHECK_NOTHROW(experiment::parse_config("{}"));
  CHECK_THROWS_AS(experiment::parse_config(R"({"sed": 1})"), ConfigError);
  CHECK_THROWS_AS(experiment::parse_config(R"({"solver": {"lamda": 0.1}})"), ConfigError);
  CHECK_THROWS_AS(experiment::parse_config(R"({"scene": {"region": {"az_begin": 0, "extra": 1}}})"), ConfigError);
  CHECK_THROWS_AS(experiment::parse_config(R"({"seed": "one"})"), ConfigError);
  CHECK_THROWS_AS(experiment::parse_config(R"({"radar": {"azimuth_window": "kaiser"}})"), ConfigError);
  CHECK_THROWS_AS(experiment::parse_config("{ not json"), ConfigError);
  CHECK_THROWS_AS(experiment::load_config("/nonexistent/config.json"), Error);

  const auto c = experiment::parse_config(tiny_points("x"));
  CHECK(c.seed == 5);
  CHECK(c.scene.shape == Shape{32, 32});
  CHECK(c.scene.points.size() == 1);
  CHECK(c.solver.lambda == 0.05);
  CHECK(c.solver.lambda_relative);

  // Canonical text round-trips and hashes stably.
  const auto again = experiment::parse_config(c.canonical_json());
  CHECK(again.canonical_json() == c.canonical_json());
  CHECK(again.hash() == c.hash());
  auto other = c;
  other.seed = 6;
  CHECK(other.hash() != c.hash());
}

TEST_CASE("config validation") {
  const auto base = experiment::parse_config(tiny_points("x"));
  CHECK_NOTHROW(base.validate());
  auto c = base;
  c.sampling.rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base;
  c.solver.look_count = 3;  // does not divide 32
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base;
  c.scene.points.push_back({40, 0, 1.0});
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = base;
  c.evaluation.export_pgm_db = -3.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);

  auto sweep = experiment::parse_config(tiny_sweep("x"));
  CHECK_NOTHROW(sweep.validate());
  sweep.sweep->repetitions = 0;
  CHECK_THROWS_AS(sweep.validate(), ConfigError);
  sweep.sweep->repetitions = 1;
  sweep.sweep->rates.clear();
  CHECK_THROWS_AS(sweep.validate(), ConfigError);
  CHECK_THROWS_AS(experiment::parse_config(R"({"sweep": {"rates": [1], "looks": [1], "repetitions": 0}})").validate(),
                  ConfigError);
}

TEST_CASE("speckle and ENL regions") {
  experiment::ExperimentConfig c;
  c.scene.kind = experiment::SceneKind::rayleigh;
  const auto r = experiment::speckle_region(c);
  CHECK(r.az_end - r.az_begin == 12);
  CHECK(r.az_begin == 26);
  c.scene.full_scale = true;
  CHECK(experiment::scene_shape(c) == Shape{150, 150});
  const auto big = experiment::speckle_region(c);
  CHECK(big.az_end - big.az_begin == 24);

  const auto look = experiment::look_region({6, 18, 6, 18}, 3);
  CHECK(look.az_begin == 3);  // rows 3 and 4 cover cells 9..14, inside 7..16
  CHECK(look.az_end == 5);
  CHECK(look.rg_begin == 7);
  CHECK(look.rg_end == 17);
  const auto single = experiment::look_region({6, 18, 6, 18}, 1);
  CHECK(single.az_begin == 7);
  CHECK(single.az_end == 17);
}

TEST_CASE("single run writes a complete manifest and is reproducible") {
  const auto dir = test::scratch_dir("single_run");
  const auto c = experiment::parse_config(tiny_points(dir.string()));
  const auto m = experiment::run_single(c);
  CHECK(m.files.size() >= 5);
  for (const auto& f : m.files) CHECK(fs::exists(dir / f));
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(m.config_hash == c.hash());
  const auto metrics = experiment::read_metrics_csv((dir / "metrics.csv").string());
  CHECK(metrics.peak_azimuth == 16);
  CHECK(metrics.peak_range == 16);
  CHECK(metrics.looks == 1);

  const std::string first = slurp(dir / "metrics.csv");
  const std::string trace = slurp(dir / "trace.csv");
  experiment::run_single(c);
  CHECK(slurp(dir / "metrics.csv") == first);
  CHECK(slurp(dir / "trace.csv") == trace);

  const auto image = io::load_real_grid((dir / "image.mlcs").string());
  CHECK(image.shape() == Shape{32, 32});
}

TEST_CASE("full sampling with vanishing weight reproduces the multilook baseline") {
  auto c = experiment::load_config(std::string(MLCS_SOURCE_DIR) + "/configs/unitary_check.json");
  const auto p = experiment::evaluate(c);
  REQUIRE(p.metrics.error_vs_rda_db);
  CHECK(*p.metrics.error_vs_rda_db <= -40.0);
  c.solver.look_count = 2;
  const auto p2 = experiment::evaluate(c);
  CHECK(*p2.metrics.error_vs_rda_db <= -40.0);
}

TEST_CASE("failed runs leave no files behind") {
  const auto dir = test::scratch_dir("failed_run");
  auto c = experiment::parse_config(tiny_points(dir.string()));
  c.solver.mu = 50.0;
  try {
    experiment::run_single(c);
    FAIL("expected divergence");
  } catch (const solver::DivergenceError& e) {
    CHECK(std::string(e.what()).find("reconstruct") != std::string::npos);
  }
  CHECK(fs::is_empty(dir));
}

TEST_CASE("graymap export") {
  const auto dir = test::scratch_dir("pgm");
  std::string pixels;

  experiment::export_image(RealGrid(Shape{3, 5}, 0.0), (dir / "zero.pgm").string(), experiment::ExportFormat::pgm);
  CHECK(pgm_header_and_pixels(dir / "zero.pgm", pixels) == std::vector<std::string>{"P5", "5", "3", "255"});
  CHECK(pixels == std::string(15, '\0'));

  RealGrid impulse(Shape{4, 4}, 0.0);
  impulse(1, 2) = 3.0;
  experiment::export_image(impulse, (dir / "impulse.pgm").string(), experiment::ExportFormat::pgm);
  pgm_header_and_pixels(dir / "impulse.pgm", pixels);
  REQUIRE(pixels.size() == 16);
  for (std::size_t j = 0; j < 16; ++j) CHECK((unsigned char)pixels[j] == (j == 6 ? 255 : 0));

  RealGrid ramp(Shape{1, 4}, 0.0);
  ramp[0] = 1.0;
  ramp[1] = 0.1;    // -20 dB
  ramp[2] = 0.01;   // -40 dB, at the clip
  ramp[3] = 0.001;  // below the clip
  experiment::export_image(ramp, (dir / "ramp.pgm").string(), experiment::ExportFormat::pgm, 40.0);
  pgm_header_and_pixels(dir / "ramp.pgm", pixels);
  CHECK((unsigned char)pixels[0] == 255);
  CHECK((unsigned char)pixels[1] == 128);
  CHECK((unsigned char)pixels[2] == 0);
  CHECK((unsigned char)pixels[3] == 0);

  experiment::export_image(ramp, (dir / "ramp.mlcs").string(), experiment::ExportFormat::binary);
  const auto back = io::load_real_grid((dir / "ramp.mlcs").string());
  for (std::size_t j = 0; j < 4; ++j) CHECK(back[j] == double(float(ramp[j])));
  CHECK_THROWS_AS(
      experiment::export_image(ramp, (dir / "bad.pgm").string(), experiment::ExportFormat::pgm, 0.0),
      ConfigError);
}

TEST_CASE("sweep aggregate equals recomputation from per-run metrics") {
  const auto dir = test::scratch_dir("sweep");
  const auto c = experiment::parse_config(tiny_sweep(dir.string()));
  const auto m = experiment::run_sweep(c);
  CHECK(m.failed_runs == 0);
  CHECK(!fs::exists(dir / "failures.csv"));
  for (const auto& f : m.files) CHECK(fs::exists(dir / f));

  std::vector<experiment::RunMetrics> runs;
  for (const auto& entry : fs::directory_iterator(dir / "runs")) {
    runs.push_back(experiment::read_metrics_csv((entry.path() / "metrics.csv").string()));
  }
  CHECK(runs.size() == 8);
  std::sort(runs.begin(), runs.end(), [](const auto& a, const auto& b) { return a.run_id < b.run_id; });
  const auto recomputed = (dir / "recomputed.csv").string();
  experiment::write_aggregate_csv(recomputed, experiment::aggregate(runs));
  CHECK(slurp(recomputed) == slurp(dir / "aggregate.csv"));

  const auto rows = experiment::aggregate(runs);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].rate == 1.0);
  CHECK(rows[0].looks == 1);
  CHECK(rows[1].looks == 2);
  CHECK(rows[0].runs == 2);
  for (const auto& r : runs) {
    CHECK(r.enl_mlcs);
    CHECK(r.enl_rda);
  }
  // Repetitions draw distinct seeds.
  CHECK(runs[0].seed != runs[1].seed);
}

TEST_CASE("aggregate statistics") {
  std::vector<experiment::RunMetrics> runs(3);
  const double enl[] = {1.0, 2.0, 4.0};
  for (std::size_t j = 0; j < 3; ++j) {
    runs[j].rate = 0.5;
    runs[j].looks = 2;
    runs[j].enl_mlcs = enl[j];
    runs[j].enl_rda = 2.0;
    runs[j].error_vs_rda_db = -10.0 * double(j);
  }
  const auto rows = experiment::aggregate(runs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].runs == 3);
  CHECK(rows[0].enl_mlcs_mean == doctest::Approx(7.0 / 3.0));
  CHECK(rows[0].enl_mlcs_std == doctest::Approx(std::sqrt(7.0 / 3.0)));
  CHECK(rows[0].enl_rda_std == 0.0);
  CHECK(rows[0].error_vs_rda_db_mean == doctest::Approx(-10.0));
}

TEST_CASE("command line exit codes") {
  const auto dir = test::scratch_dir("cli");
  spit(dir / "ok.json", tiny_points((dir / "ok").string()));
  spit(dir / "typo.json", R"({"seeed": 1})");
  spit(dir / "bad_looks.json", tiny_points((dir / "bl").string()));
  spit(dir / "sweep_fail.json", tiny_sweep((dir / "sf").string(), R"(, "mu": 50.0)"));

  CHECK(cli("validate-config " + (dir / "ok.json").string()) == 0);
  CHECK(cli("validate-config " + (dir / "typo.json").string()) == 1);
  CHECK(cli("reconstruct " + (dir / "bad_looks.json").string() + " --looks 3") == 1);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("reconstruct " + (dir / "ok.json").string() + " --iters 20") == 0);
  CHECK(fs::exists(dir / "ok" / "manifest.json"));
  CHECK(cli("reconstruct " + (dir / "ok.json").string() + " --data " + (dir / "missing").string()) == 2);
  CHECK(cli("sweep " + (dir / "sweep_fail.json").string()) == 3);
  CHECK(fs::exists(dir / "sf" / "failures.csv"));

  CHECK(cli("simulate " + (dir / "ok.json").string() + " --out " + (dir / "sim").string()) == 0);
  CHECK(fs::exists(dir / "sim" / "data.mask.u64"));
  CHECK(cli("reconstruct " + (dir / "ok.json").string() + " --data " + (dir / "sim" / "data").string() + " --raw " +
            (dir / "sim" / "raw.mlcs").string() + " --out " + (dir / "from_sim").string()) == 0);
  const auto from_sim = experiment::read_metrics_csv((dir / "from_sim" / "metrics.csv").string());
  CHECK(from_sim.peak_azimuth == 16);
  CHECK(from_sim.peak_range == 16);
  CHECK(cli("export " + (dir / "ok" / "image.mlcs").string() + " " + (dir / "ok.pgm").string()) == 0);
  CHECK(fs::exists(dir / "ok.pgm"));
}
