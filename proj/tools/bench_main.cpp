// bench: command line front end for the mesh gemm stack.
//
//   bench kernel    --k 4096 --mode inproc|service --seed N --format text|csv|json
//   bench testsuite --m 768 --n 768 --k 768 --precision single|false-double
//                   --variants all|nn,nt,...
//   bench calibrate --targets <file> [--output <config>]
//
// A --config file (key=value) overrides the mesh geometry and cost model.
// Exits nonzero when any testsuite row reports FAILED.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "meshgemm/bench.hpp"

int main(int argc, char** argv) {
  using namespace meshgemm;

  CLI::App app{"Mesh-accelerated sgemm benchmark and verification tool"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --config appear after the subcommand too

  std::string config_path;
  app.add_option("--config", config_path,
                 "key=value simulator/cost-model config file")
      ->check(CLI::ExistingFile);

  auto* kernel = app.add_subcommand("kernel", "Benchmark the inner u-kernel");
  std::int64_t k = 4096;
  std::string mode = "inproc";
  std::uint64_t seed = 1;
  std::string format = "text";
  kernel->add_option("--k", k, "K depth (multiple of 64)");
  kernel->add_option("--mode", mode, "inproc|service")
      ->check(CLI::IsMember({"inproc", "service"}));
  kernel->add_option("--seed", seed, "RNG seed for the input data");
  kernel->add_option("--format", format, "text|csv|json")
      ->check(CLI::IsMember({"text", "csv", "json"}));

  auto* suite = app.add_subcommand("testsuite", "Residue testsuite over gemm variants");
  std::int64_t m = 768, n = 768, kk = 768;
  std::string precision = "single";
  std::string variants = "all";
  std::int64_t size = 0;
  suite->add_option("--m", m, "rows of C");
  suite->add_option("--n", n, "columns of C");
  suite->add_option("--k", kk, "inner dimension");
  suite->add_option("--size", size, "set m = n = k at once (e.g. 4096)");
  suite->add_option("--precision", precision, "single|false-double")
      ->check(CLI::IsMember({"single", "false-double"}));
  suite->add_option("--variants", variants, "all or comma list like nn,nt,tn");
  suite->add_option("--seed", seed, "RNG seed for the input data");
  suite->add_option("--format", format, "text|csv|json")
      ->check(CLI::IsMember({"text", "csv", "json"}));

  auto* cal = app.add_subcommand("calibrate", "Fit the cost model to timing targets");
  std::string targets_path;
  std::string output_path;
  cal->add_option("--targets", targets_path,
                  "key=value timing targets file (defaults to built-in targets)")
      ->check(CLI::ExistingFile);
  cal->add_option("--output", output_path, "write the fitted config here");

  CLI11_PARSE(app, argc, argv);

  try {
    SimSettings settings;
    if (!config_path.empty()) settings = load_config(config_path);

    if (kernel->parsed()) {
      const auto run_mode = mode == "service" ? GemmEngine::Mode::Service
                                              : GemmEngine::Mode::Inproc;
      BenchReport rep =
          run_kernel_bench(settings.mesh, settings.cost, k, run_mode, seed);
      std::cout << emit_report(rep, parse_format(format));
      return rep.failed ? 1 : 0;
    }

    if (suite->parsed()) {
      if (size > 0) m = n = kk = size;
      BenchReport rep = run_testsuite(settings.mesh, settings.cost, m, n, kk,
                                      parse_precision(precision),
                                      parse_variants(variants), seed);
      std::cout << emit_report(rep, parse_format(format));
      return rep.failed ? 1 : 0;
    }

    // calibrate
    CalibrationTargets targets =
        targets_path.empty() ? reference_targets() : load_targets(targets_path);
    settings.cost = calibrate_cost_model(targets, settings.mesh, {}, settings.cost);
    if (!output_path.empty()) {
      save_config(output_path, settings);
      std::cout << "wrote " << output_path << "\n";
    } else {
      write_config(std::cout, settings);
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "bench: " << e.what() << "\n";
    return 2;
  }
}
