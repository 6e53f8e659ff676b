// Wall-clock microbenchmarks for the simulator hot paths. These measure
// how fast the simulation itself runs; modeled device time is a separate
// concept reported by the bench tool.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "meshgemm/bench.hpp"

namespace {

using namespace meshgemm;

void BM_SubMatmul(benchmark::State& state) {
  const KernelConfig kc;
  const int kpc = kc.k_per_core();
  std::mt19937 rng(7);
  std::vector<float> a(std::size_t(kc.m) * kpc), b(std::size_t(kpc) * kc.nsub),
      out(std::size_t(kc.m) * kc.nsub);
  fill_uniform(rng, a.data(), a.size());
  fill_uniform(rng, b.data(), b.size());
  for (auto _ : state) {
    sub_matmul(a.data(), kc.m, kpc, b.data(), kc.nsub, nullptr, out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * kc.m * kpc * kc.nsub);
}
BENCHMARK(BM_SubMatmul);

void BM_InnerKernel(benchmark::State& state) {
  const std::int64_t K = state.range(0);
  const KernelConfig kc;
  std::mt19937 rng(7);
  Matrix<float> a1(kc.m, K, Layout::ColMajor);
  Matrix<float> b1(K, kc.n, Layout::RowMajor);
  Matrix<float> c(kc.m, kc.n, Layout::ColMajor);
  fill_uniform(rng, a1.data(), a1.size());
  fill_uniform(rng, b1.data(), b1.size());
  InnerKernelRequest req;
  req.a1 = a1.data();
  req.b1 = b1.data();
  req.k = K;
  req.c_out = c.view();
  for (auto _ : state) {
    GemmEngine engine({}, {}, GemmEngine::Mode::Inproc, kc);
    engine.run_inner(req);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * kc.m * kc.n * K);
}
BENCHMARK(BM_InnerKernel)->Arg(64)->Arg(256)->Arg(1024);

void BM_RefGemm(benchmark::State& state) {
  const std::int64_t d = state.range(0);
  std::mt19937 rng(7);
  Matrix<float> A(d, d), B(d, d), C(d, d);
  fill_uniform(rng, A.data(), A.size());
  fill_uniform(rng, B.data(), B.size());
  for (auto _ : state) {
    ref_gemm<float>(1.0, A.cview(), Op::None, B.cview(), Op::None, 0.0,
                    C.view());
    benchmark::DoNotOptimize(C.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * d * d * d);
}
BENCHMARK(BM_RefGemm)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
