#pragma once

#include <cstdint>
#include <vector>

#include "meshgemm/device.hpp"
#include "meshgemm/matrix.hpp"
#include "meshgemm/sim.hpp"

namespace meshgemm {

/// One inner micro-kernel invocation: c_out = alpha * a1 * b1 + beta * c_in
/// with m x n fixed by the kernel geometry and K an arbitrary multiple of
/// KSUB (padding is the BLAS layer's job).
struct InnerKernelRequest {
  const float* a1 = nullptr;  // m x K, column-major, contiguous
  const float* b1 = nullptr;  // K x n, row-major, contiguous
  std::int64_t k = 0;
  float alpha = 1.0f;
  float beta = 0.0f;
  MatrixView<const float> c_in;  // m x n, arbitrary strides
  MatrixView<float> c_out;       // m x n, arbitrary strides
};

/// Model-time decomposition of one inner-kernel run. All values are model
/// seconds derived from the cycle ledger and the cost parameters.
struct TimingBreakdown {
  double input_stage_time = 0.0;
  double device_time = 0.0;
  double post_time = 0.0;
  double total_time = 0.0;
  double ir = 0.0;  // input_stage_time / total_time
  double or_ratio = 0.0;  // post_time / total_time
  double hh_time = 0.0;   // nonzero only when going through the service
};

/// Command sequence for a run of `num_tasks` tasks: a single task gets the
/// one-shot command [3]; longer runs clear once, accumulate, and write back
/// on the last task: [0, 1, ..., 1, 2].
std::vector<int> command_schedule(int num_tasks);

/// c_out[i,j] = alpha * acc[i,j] + beta * c_in[i,j] honoring both views'
/// strides. beta == 0 never reads c_in (quiet-NaN safe).
void postprocess(MatrixView<const float> acc, float alpha, float beta,
                 MatrixView<const float> c_in, MatrixView<float> c_out);

/// The host side of the micro-kernel: slices K into KSUB tasks, stages the
/// double-buffered inputs, sequences commands, retrieves the accumulated
/// device result once, and applies alpha/beta.
class InnerKernel {
 public:
  /// Allocates the device regions and HC staging buffers on the mesh.
  InnerKernel(Mesh& mesh, const KernelConfig& cfg = {});

  TimingBreakdown run(const InnerKernelRequest& req);

  DeviceKernel& device() { return device_; }
  const KernelConfig& config() const { return cfg_; }

  /// When false, the timing model charges staging and device work
  /// sequentially instead of overlapping them. Numeric results are
  /// unaffected.
  bool model_overlap = true;

 private:
  void stage_task(const InnerKernelRequest& req, int task, int selector);

  Mesh& mesh_;
  KernelConfig cfg_;
  DeviceKernel device_;
};

}  // namespace meshgemm
