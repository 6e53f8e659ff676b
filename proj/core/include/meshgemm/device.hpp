#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "meshgemm/sim.hpp"

namespace meshgemm {

/// Fixed geometry of the device kernel. Defaults are the production
/// configuration; smaller configurations are accepted for desk-scale tests
/// as long as the divisibility constraints hold.
struct KernelConfig {
  int m = 192;
  int n = 256;
  int ksub = 64;   // k-depth of one task
  int nsub = 4;    // columns of one subMatmul result
  int cores = 16;

  int k_per_core() const { return ksub / cores; }
  int cols_per_core() const { return n / cores; }
  /// Each column iteration finalizes `cores` blocks of nsub columns, so a
  /// task completes after n / (nsub * cores) of them.
  int col_iters() const { return n / (nsub * cores); }

  // per-core local buffer sizes, bytes
  std::uint32_t a_bytes() const { return 4u * m * k_per_core(); }
  std::uint32_t b_bytes() const { return 4u * k_per_core() * n; }
  std::uint32_t res1_bytes() const { return 4u * m * nsub; }
  std::uint32_t res2_bytes() const { return 4u * m * cols_per_core(); }

  // HC-RAM staging buffer sizes, bytes
  std::size_t a_ti_bytes() const { return 4u * m * ksub; }
  std::size_t b_ti_bytes() const { return 4u * ksub * n; }
  std::size_t c_ti_bytes() const { return 4u * m * n; }

  void validate() const;
};

/// Shared control variables, resident in the HC-RAM control buffer.
/// The host writes command/selector only while done_flag says idle; the
/// device raises done_flag at task end.
struct ControlBlock {
  std::uint32_t command = 0;   // 0..3, see command semantics below
  std::uint32_t selector = 0;  // which input double-buffer holds this task
  std::uint32_t done_flag = 1;
};

// Command semantics:
//   0: clear result buffers, run one task, keep results on-chip
//   1: run one task, accumulate onto the existing results
//   2: run one task, accumulate, write c_ti back to HC-RAM
//   3: single-task run: clear, run, write back

ControlBlock read_control(const Mesh& mesh);
void write_control(Mesh& mesh, const ControlBlock& cb);

/// Single-core primitive: out = prev + a*b in single precision, with the
/// device's fixed summation order (per output column, per 32-row strip,
/// the kpc products accumulate in registers before the store; k is the
/// innermost index). prev == nullptr reads as zero.
///   a: m x kpc column-major, b: kpc x nsub column-major,
///   prev/out: m x nsub column-major.
void sub_matmul(const float* a, int m, int kpc, const float* b, int nsub,
                const float* prev, float* out);

/// The coprocessor-side program. Construction allocates the per-core
/// regions (A, B, RES1, RES2 after the code bank) and the HC-RAM staging
/// buffers [a0 | a1 | b0 | b1 | c | control].
class DeviceKernel {
 public:
  DeviceKernel(Mesh& mesh, const KernelConfig& cfg);

  const KernelConfig& config() const { return cfg_; }

  /// dest(j, iter_k) = (j - iter_k - 1) mod cores: the core that will
  /// ultimately own the block computed by core j at this K iteration.
  static int dest_core(int core, int iter_k, int cores);

  /// Runs one device task as instructed by the shared control block and
  /// raises the done flag.
  void run_task();

  // Sub-phases, exposed for tests. run_task composes them.
  void stage_inputs(int selector);
  void clear_result_buffers();
  void run_column_iteration(int col_iter_idx);
  void run_k_iteration(int col_iter_idx, int iter_k);
  void writeback_results();

  /// Invoked after the barrier that closes each K iteration.
  std::function<void(int col_iter_idx, int iter_k)> on_k_iteration_end;

  static constexpr const char* kRegionA = "A";
  static constexpr const char* kRegionB = "B";
  static constexpr const char* kRegionRes1 = "RES1";
  static constexpr const char* kRegionRes2 = "RES2";

 private:
  Mesh& mesh_;
  KernelConfig cfg_;
  std::vector<float> scratch_b4_;
  std::vector<float> scratch_out_;
};

}  // namespace meshgemm
