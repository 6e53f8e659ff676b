#pragma once

#include <memory>
#include <vector>

#include "meshgemm/host.hpp"
#include "meshgemm/matrix.hpp"
#include "meshgemm/service.hpp"

namespace meshgemm {

/// One m-tile x n-tile invocation of the inner kernel.
struct Tile {
  std::int64_t i0 = 0;     // first row of C covered by this tile
  std::int64_t j0 = 0;     // first column
  std::int64_t m_len = 0;  // valid rows (may be shorter than the tile on edges)
  std::int64_t n_len = 0;
  bool edge = false;
};

struct BlockPlan {
  std::vector<Tile> tiles;
  std::int64_t padded_k = 0;
};

/// Tiles an M x N output into m_tile x n_tile blocks, each covering every
/// C entry exactly once; K is padded up to a multiple of ksub.
BlockPlan plan_blocks(std::int64_t M, std::int64_t N, std::int64_t K,
                      const KernelConfig& kc = {});

/// Executes inner-kernel requests either in-process or through the
/// offload service. One engine owns one coprocessor (or one service) and
/// serializes tile invocations.
class GemmEngine {
 public:
  enum class Mode { Inproc, Service };

  GemmEngine(const MeshConfig& mesh_cfg, const CostParams& cost,
             Mode mode = Mode::Inproc, const KernelConfig& kernel_cfg = {});
  ~GemmEngine();

  TimingBreakdown run_inner(const InnerKernelRequest& req);

  const KernelConfig& kernel_config() const { return kernel_cfg_; }
  Mode mode() const { return mode_; }
  const Mesh& mesh() const;

  /// Sum of model total times over all inner runs since the last reset.
  double accumulated_model_time() const { return accumulated_time_; }
  void reset_accumulated_time() { accumulated_time_ = 0.0; }

 private:
  KernelConfig kernel_cfg_;
  Mode mode_;
  std::unique_ptr<Mesh> mesh_;          // inproc mode
  std::unique_ptr<InnerKernel> inner_;  // inproc mode
  std::unique_ptr<Service> service_;    // service mode
  double accumulated_time_ = 0.0;
};

/// User-facing single-precision gemm, classic BLAS surface:
/// C = alpha * op(A) * op(B) + beta * C with column-major views and
/// arbitrary leading dimensions. Equivalent C-ABI shape:
///   sgemm(transa, transb, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc)
void sgemm(GemmEngine& engine, Op opA, Op opB, std::int64_t M, std::int64_t N,
           std::int64_t K, float alpha, MatrixView<const float> A,
           MatrixView<const float> B, float beta, MatrixView<float> C);

/// Double-precision interface over the single-precision path: downcasts
/// the inputs, runs sgemm, upcasts the outputs. Bit-identical to doing
/// exactly that.
void dgemm_false(GemmEngine& engine, Op opA, Op opB, std::int64_t M,
                 std::int64_t N, std::int64_t K, double alpha,
                 MatrixView<const double> A, MatrixView<const double> B,
                 double beta, MatrixView<double> C);

}  // namespace meshgemm
