#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "meshgemm/blas.hpp"
#include "meshgemm/config.hpp"

namespace meshgemm {

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BenchRow {
  std::string description;
  double model_time_s = nan_;
  double percent = nan_;
  double gflops = nan_;
  double wall_time_s = nan_;
  double residue = nan_;
  std::string status;

  static constexpr double nan_ = std::numeric_limits<double>::quiet_NaN();
};

struct BenchReport {
  std::string title;
  std::vector<BenchRow> rows;
  double mean_rel_err = BenchRow::nan_;
  double max_rel_err = BenchRow::nan_;
  bool failed = false;
};

/// NaN-tolerant structural equality (NaN == NaN holds field-wise).
bool reports_equal(const BenchReport& a, const BenchReport& b);

enum class ReportFormat { Text, Csv, Json };

std::string emit_report(const BenchReport& report, ReportFormat format);
BenchReport parse_report_json(const std::string& text);
ReportFormat parse_format(const std::string& name);

/// Timing rows the cost model is fitted against, for the kernel geometry
/// given by m, n, k.
struct CalibrationTargets {
  int m = 192;
  int n = 256;
  int k = 4096;
  double input_s = 0.0;
  double device_s = 0.0;
  double post_s = 0.0;
  double total_s = 0.0;
  double service_total_s = 0.0;
};

/// Timings measured on the reference platform the simulator models.
CalibrationTargets reference_targets();

/// key=value targets file: m, n, k, input_s, device_s, post_s, total_s,
/// service_total_s.
CalibrationTargets load_targets(const std::string& path);

/// Solves the cost-model free parameters (the four bandwidths and the
/// per-task host overhead) so that a kernel run at the targets' geometry
/// reproduces the target rows. Throws CalibrationError when the targets
/// imply a non-positive bandwidth or overhead.
CostParams calibrate_cost_model(const CalibrationTargets& targets,
                                const MeshConfig& mesh = {},
                                const KernelConfig& kc = {},
                                const CostParams& base = {});

enum class Precision { Single, FalseDouble };
Precision parse_precision(const std::string& name);

/// "all" or a comma list like "nn,nt,th"; returns (opA, opB) pairs.
std::vector<std::pair<Op, Op>> parse_variants(const std::string& spec);

/// One kernel benchmark run: staged-input / device / post rows,
/// the overlapped total, model GFLOPS, and error metrics against the f64
/// oracle on seeded uniform(-1,1) inputs.
BenchReport run_kernel_bench(const MeshConfig& mesh_cfg,
                             const CostParams& cost, std::int64_t K,
                             GemmEngine::Mode mode, std::uint64_t seed,
                             const KernelConfig& kc = {});

/// Testsuite sweep: one row per transpose variant with model GFLOPS and
/// the normalized residue against the f64 oracle. Residues above the
/// per-precision threshold flag the row (and the report) FAILED.
BenchReport run_testsuite(const MeshConfig& mesh_cfg, const CostParams& cost,
                          std::int64_t M, std::int64_t N, std::int64_t K,
                          Precision precision,
                          const std::vector<std::pair<Op, Op>>& variants,
                          std::uint64_t seed, const KernelConfig& kc = {});

inline constexpr double kResidueThresholdSingle = 1e-6;
inline constexpr double kResidueThresholdFalseDouble = 1e-7;

void fill_uniform(std::mt19937& rng, float* p, std::size_t n);
void fill_uniform(std::mt19937& rng, double* p, std::size_t n);

}  // namespace meshgemm
