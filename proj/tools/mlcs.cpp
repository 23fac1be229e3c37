// Command-line front end: simulate, reconstruct, sweep, export, validate-config.
//
// Exit codes: 0 success, 1 config error, 2 runtime error, 3 partial sweep failure.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mlcs/error.hpp"
#include "mlcs/experiment.hpp"
#include "mlcs/grid_io.hpp"

namespace {

using namespace mlcs;

struct Overrides {
  std::optional<double> rate;
  std::optional<std::size_t> looks;
  std::optional<double> lambda;
  std::optional<std::size_t> iters;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--rate", o.rate, "sampling rate in (0, 1]");
  cmd->add_option("--looks", o.looks, "number of looks L");
  cmd->add_option("--lambda", o.lambda, "regularization weight");
  cmd->add_option("--iters", o.iters, "maximum solver iterations");
  cmd->add_option("--seed", o.seed, "experiment seed");
  cmd->add_option("--out", o.out, "output directory");
}

experiment::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto c = experiment::load_config(path);
  if (o.rate) {
    c.sampling.rate = *o.rate;
    if (c.sweep) c.sweep->rates = {*o.rate};
  }
  if (o.looks) {
    c.solver.look_count = *o.looks;
    if (c.sweep) c.sweep->looks = {*o.looks};
  }
  if (o.lambda) c.solver.lambda = *o.lambda;
  if (o.iters) c.solver.max_iterations = *o.iters;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  return c;
}

void report(const experiment::RunManifest& m) {
  std::cout << "wrote " << m.files.size() << " files to " << m.output_dir << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multilook compressed-sensing SAR imaging"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "simulate raw echo and compressed samples");
  simulate->add_option("config", config_path, "experiment config (JSON)")->required();
  add_overrides(simulate, o);

  std::optional<std::string> data_stem, raw_path;
  auto* reconstruct = app.add_subcommand("reconstruct", "run the full single-experiment pipeline");
  reconstruct->add_option("config", config_path, "experiment config (JSON)")->required();
  reconstruct->add_option("--data", data_stem, "load compressed data <stem>.mask.u64/.values.cf32");
  reconstruct->add_option("--raw", raw_path, "full-rate raw grid for the RDA baseline");
  add_overrides(reconstruct, o);

  auto* sweep = app.add_subcommand("sweep", "sweep sampling rate x looks x repetitions");
  sweep->add_option("config", config_path, "experiment config (JSON) with a sweep block")->required();
  add_overrides(sweep, o);

  std::string input, output, format = "pgm";
  double dynamic_range = 40.0;
  auto* exporter = app.add_subcommand("export", "export a grid file as an image");
  exporter->add_option("input", input, "grid file (complex grids export their magnitude)")->required();
  exporter->add_option("output", output, "output path")->required();
  exporter->add_option("--format", format, "pgm or binary")->check(CLI::IsMember({"pgm", "binary"}));
  exporter->add_option("--dynamic-range", dynamic_range, "dB below peak mapped to black");

  auto* validate = app.add_subcommand("validate-config", "check a config file and print it canonically");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      report(experiment::run_simulate(load(config_path, o)));
    } else if (*reconstruct) {
      const auto config = load(config_path, o);
      experiment::RunInputs in;
      if (data_stem) in.data = sim::load_compressed(*data_stem);
      if (raw_path) in.raw = io::load_complex_grid(*raw_path);
      report(experiment::run_single(config, in));
    } else if (*sweep) {
      const auto m = experiment::run_sweep(load(config_path, o));
      report(m);
      if (m.failed_runs > 0) {
        std::cerr << m.failed_runs << " sweep runs failed; see " << m.output_dir << "/failures.csv\n";
        return 3;
      }
    } else if (*exporter) {
      RealGrid mag = io::grid_dtype(input) == io::DType::complex64
                         ? metrics::magnitude(io::load_complex_grid(input))
                         : io::load_real_grid(input);
      experiment::export_image(mag, output,
                               format == "pgm" ? experiment::ExportFormat::pgm : experiment::ExportFormat::binary,
                               dynamic_range);
    } else if (*validate) {
      const auto config = experiment::load_config(config_path);
      config.validate();
      std::cout << config.canonical_json() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
