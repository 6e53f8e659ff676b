#include "meshgemm/blas.hpp"

#include <algorithm>

namespace meshgemm {

BlockPlan plan_blocks(std::int64_t M, std::int64_t N, std::int64_t K,
                      const KernelConfig& kc) {
  if (M <= 0 || N <= 0 || K <= 0) {
    throw std::invalid_argument("plan_blocks: dimensions must be positive");
  }
  BlockPlan plan;
  plan.padded_k = (K + kc.ksub - 1) / kc.ksub * kc.ksub;
  for (std::int64_t j0 = 0; j0 < N; j0 += kc.n) {
    for (std::int64_t i0 = 0; i0 < M; i0 += kc.m) {
      Tile t;
      t.i0 = i0;
      t.j0 = j0;
      t.m_len = std::min<std::int64_t>(kc.m, M - i0);
      t.n_len = std::min<std::int64_t>(kc.n, N - j0);
      t.edge = t.m_len != kc.m || t.n_len != kc.n;
      plan.tiles.push_back(t);
    }
  }
  return plan;
}

GemmEngine::GemmEngine(const MeshConfig& mesh_cfg, const CostParams& cost,
                       Mode mode, const KernelConfig& kernel_cfg)
    : kernel_cfg_(kernel_cfg), mode_(mode) {
  if (mode_ == Mode::Inproc) {
    mesh_ = std::make_unique<Mesh>(mesh_cfg, cost);
    inner_ = std::make_unique<InnerKernel>(*mesh_, kernel_cfg_);
  } else {
    service_ = std::make_unique<Service>(mesh_cfg, cost, kernel_cfg_);
    service_->start();
  }
}

GemmEngine::~GemmEngine() {
  if (service_) service_->stop();
}

const Mesh& GemmEngine::mesh() const {
  return mode_ == Mode::Inproc ? *mesh_ : *service_->mesh();
}

TimingBreakdown GemmEngine::run_inner(const InnerKernelRequest& req) {
  TimingBreakdown tb = mode_ == Mode::Inproc ? inner_->run(req)
                                             : service_->submit(req);
  accumulated_time_ += tb.total_time;
  return tb;
}

void sgemm(GemmEngine& engine, Op opA, Op opB, std::int64_t M, std::int64_t N,
           std::int64_t K, float alpha, MatrixView<const float> A,
           MatrixView<const float> B, float beta, MatrixView<float> C) {
  opA = normalize(opA);
  opB = normalize(opB);
  const std::int64_t a_rows = is_transposed(opA) ? K : M;
  const std::int64_t a_cols = is_transposed(opA) ? M : K;
  const std::int64_t b_rows = is_transposed(opB) ? N : K;
  const std::int64_t b_cols = is_transposed(opB) ? K : N;
  if (A.rows != a_rows || A.cols != a_cols || B.rows != b_rows ||
      B.cols != b_cols || C.rows != M || C.cols != N) {
    throw std::invalid_argument("sgemm: dimension mismatch");
  }
  const KernelConfig& kc = engine.kernel_config();
  const BlockPlan plan = plan_blocks(M, N, K, kc);

  Matrix<float> c_scratch(kc.m, kc.n, Layout::ColMajor);
  for (const Tile& t : plan.tiles) {
    // The full (padded) K panel goes to one inner call; the device
    // accumulator absorbs all K/KSUB tasks.
    Matrix<float> a_panel = pack_a(A, opA, t.i0, K, kc.m, kc.ksub);
    Matrix<float> b_panel = pack_b(B, opB, t.j0, K, kc.n, kc.ksub);

    InnerKernelRequest req;
    req.a1 = a_panel.data();
    req.b1 = b_panel.data();
    req.k = plan.padded_k;
    req.alpha = alpha;
    req.beta = beta;
    if (!t.edge) {
      auto c_block = C.block(t.i0, t.j0, kc.m, kc.n);
      req.c_in = c_block.as_const();
      req.c_out = c_block;
      engine.run_inner(req);
    } else {
      // Edge tile: work in a full-size scratch block, touching only the
      // valid sub-region of C for beta and for the writeback.
      std::fill(c_scratch.data(), c_scratch.data() + c_scratch.size(), 0.0f);
      if (beta != 0.0f) {
        for (std::int64_t j = 0; j < t.n_len; ++j) {
          for (std::int64_t i = 0; i < t.m_len; ++i) {
            c_scratch.at(i, j) = C.at(t.i0 + i, t.j0 + j);
          }
        }
      }
      req.c_in = c_scratch.cview();
      req.c_out = c_scratch.view();
      engine.run_inner(req);
      for (std::int64_t j = 0; j < t.n_len; ++j) {
        for (std::int64_t i = 0; i < t.m_len; ++i) {
          C.at(t.i0 + i, t.j0 + j) = c_scratch.at(i, j);
        }
      }
    }
  }
}

void dgemm_false(GemmEngine& engine, Op opA, Op opB, std::int64_t M,
                 std::int64_t N, std::int64_t K, double alpha,
                 MatrixView<const double> A, MatrixView<const double> B,
                 double beta, MatrixView<double> C) {
  Matrix<float> a_single = cast<float>(A);
  Matrix<float> b_single = cast<float>(B);
  Matrix<float> c_single = cast<float>(C.as_const());
  sgemm(engine, opA, opB, M, N, K, static_cast<float>(alpha),
        a_single.cview(), b_single.cview(), static_cast<float>(beta),
        c_single.view());
  for (std::int64_t j = 0; j < C.cols; ++j) {
    for (std::int64_t i = 0; i < C.rows; ++i) {
      C.at(i, j) = static_cast<double>(c_single.at(i, j));
    }
  }
}

}  // namespace meshgemm
