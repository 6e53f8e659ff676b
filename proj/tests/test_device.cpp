#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <doctest.h>

#include "meshgemm/device.hpp"
#include "meshgemm/matrix.hpp"

using namespace meshgemm;

namespace {

// Desk-scale geometry: 4 cores, 32x32 tiles, KSUB=8.
MeshConfig desk_mesh() {
  MeshConfig cfg;
  cfg.cores = 4;
  cfg.grid_rows = 2;
  cfg.grid_cols = 2;
  return cfg;
}

KernelConfig desk_kernel() {
  KernelConfig kc;
  kc.m = 32;
  kc.n = 32;
  kc.ksub = 8;
  kc.nsub = 4;
  kc.cores = 4;
  return kc;
}

void fill_rand(std::mt19937& rng, std::span<float> s) {
  std::uniform_real_distribution<float> d(-1.0f, 1.0f);
  for (auto& v : s) v = d(rng);
}

// Loads one task's inputs into the selected staging buffers.
void stage_hc(Mesh& mesh, const KernelConfig& kc, int selector,
              const Matrix<float>& a, const Matrix<float>& b) {
  auto a_ti = mesh.hc_f32(selector ? "a1" : "a0");
  auto b_ti = mesh.hc_f32(selector ? "b1" : "b0");
  std::copy(a.data(), a.data() + a.size(), a_ti.begin());
  std::copy(b.data(), b.data() + b.size(), b_ti.begin());
}

void issue(Mesh& mesh, DeviceKernel& dev, int command, int selector) {
  write_control(mesh, {std::uint32_t(command), std::uint32_t(selector), 0});
  dev.run_task();
}

Matrix<float> read_c(Mesh& mesh, const KernelConfig& kc) {
  Matrix<float> c(kc.m, kc.n, Layout::ColMajor);
  auto span = mesh.hc_f32("c");
  std::copy(span.begin(), span.begin() + c.size(), c.data());
  return c;
}

}  // namespace

TEST_CASE("kernel config constraints") {
  KernelConfig kc = desk_kernel();
  CHECK_NOTHROW(kc.validate());
  kc.ksub = 6;  // not divisible by cores
  CHECK_THROWS_AS(kc.validate(), std::invalid_argument);
  kc = desk_kernel();
  kc.n = 24;  // not divisible by nsub*cores
  CHECK_THROWS_AS(kc.validate(), std::invalid_argument);
  kc = desk_kernel();
  kc.m = 48;  // not a multiple of 32
  CHECK_THROWS_AS(kc.validate(), std::invalid_argument);

  const KernelConfig prod;
  CHECK(prod.a_bytes() == 3072);
  CHECK(prod.b_bytes() == 4096);
  CHECK(prod.res1_bytes() == 3072);
  CHECK(prod.res2_bytes() == 12288);
  CHECK(prod.col_iters() == 4);
}

TEST_CASE("dest_core is a permutation per iteration and ends at home") {
  for (int cores : {4, 16}) {
    for (int k = 0; k < cores; ++k) {
      std::set<int> seen;
      for (int j = 0; j < cores; ++j) {
        const int d = DeviceKernel::dest_core(j, k, cores);
        CHECK(d >= 0);
        CHECK(d < cores);
        seen.insert(d);
      }
      CHECK(int(seen.size()) == cores);  // every block has exactly one owner
    }
    // the last K iteration computes the core's own block
    for (int j = 0; j < cores; ++j) {
      CHECK(DeviceKernel::dest_core(j, cores - 1, cores) == j);
    }
  }
}

TEST_CASE("sub_matmul uses the fixed strip-register summation order") {
  const int m = 64, kpc = 4, nsub = 4;
  std::mt19937 rng(11);
  std::vector<float> a(std::size_t(m) * kpc), b(std::size_t(kpc) * nsub),
      prev(std::size_t(m) * nsub), out(std::size_t(m) * nsub);
  fill_rand(rng, a);
  fill_rand(rng, b);
  fill_rand(rng, prev);
  sub_matmul(a.data(), m, kpc, b.data(), nsub, prev.data(), out.data());

  // reference with the same order: per element, k innermost in registers
  for (int c = 0; c < nsub; ++c) {
    for (int r = 0; r < m; ++r) {
      float acc = prev[r + c * m];
      for (int k = 0; k < kpc; ++k) acc += a[r + k * m] * b[k + c * kpc];
      CHECK(out[r + c * m] == acc);  // bitwise
    }
  }

  // prev == nullptr reads as zero
  std::vector<float> out0(out.size());
  sub_matmul(a.data(), m, kpc, b.data(), nsub, nullptr, out0.data());
  for (int c = 0; c < nsub; ++c) {
    for (int r = 0; r < m; ++r) {
      float acc = 0.0f;
      for (int k = 0; k < kpc; ++k) acc += a[r + k * m] * b[k + c * kpc];
      CHECK(out0[r + c * m] == acc);
    }
  }
}

TEST_CASE("a single task computes a_ti * b_ti") {
  const KernelConfig kc = desk_kernel();
  Mesh mesh(desk_mesh(), {});
  DeviceKernel dev(mesh, kc);
  CHECK(read_control(mesh).done_flag == 1);

  std::mt19937 rng(21);
  Matrix<float> a(kc.m, kc.ksub, Layout::ColMajor);
  Matrix<float> b(kc.ksub, kc.n, Layout::RowMajor);
  fill_rand(rng, {a.data(), a.size()});
  fill_rand(rng, {b.data(), b.size()});
  stage_hc(mesh, kc, 0, a, b);
  issue(mesh, dev, 3, 0);
  CHECK(read_control(mesh).done_flag == 1);

  Matrix<float> got = read_c(mesh, kc);
  Matrix<float> want(kc.m, kc.n);
  ref_gemm<float>(1.0, a.cview(), Op::None, b.cview(), Op::None, 0.0,
                  want.view());
  const double scale = gemm_norm_scale(kc.ksub, 1.0, inf_norm(a.cview()),
                                       inf_norm(b.cview()), 0.0, 0.0);
  CHECK(compare<float>(got.cview(), want.cview(), scale).normalized_residue <
        1.0);
}

TEST_CASE("commands accumulate: [0,1,2] equals the sum of three single tasks") {
  const KernelConfig kc = desk_kernel();
  std::mt19937 rng(22);
  std::vector<Matrix<float>> as, bs;
  for (int t = 0; t < 3; ++t) {
    as.emplace_back(kc.m, kc.ksub, Layout::ColMajor);
    bs.emplace_back(kc.ksub, kc.n, Layout::RowMajor);
    fill_rand(rng, {as.back().data(), as.back().size()});
    fill_rand(rng, {bs.back().data(), bs.back().size()});
  }

  // chained run
  Mesh mesh(desk_mesh(), {});
  DeviceKernel dev(mesh, kc);
  const int cmds[3] = {0, 1, 2};
  for (int t = 0; t < 3; ++t) {
    stage_hc(mesh, kc, t % 2, as[t], bs[t]);
    issue(mesh, dev, cmds[t], t % 2);
  }
  Matrix<float> chained = read_c(mesh, kc);

  // three independent single-task runs, summed in task order
  Matrix<float> summed(kc.m, kc.n);
  for (int t = 0; t < 3; ++t) {
    Mesh m2(desk_mesh(), {});
    DeviceKernel d2(m2, kc);
    stage_hc(m2, kc, 0, as[t], bs[t]);
    issue(m2, d2, 3, 0);
    Matrix<float> part = read_c(m2, kc);
    for (std::size_t i = 0; i < summed.size(); ++i)
      summed.data()[i] += part.data()[i];
  }
  for (std::size_t i = 0; i < summed.size(); ++i) {
    CHECK(chained.data()[i] == summed.data()[i]);  // bitwise
  }
}

TEST_CASE("command 0 discards previous results; command 3 is clear+writeback") {
  const KernelConfig kc = desk_kernel();
  Mesh mesh(desk_mesh(), {});
  DeviceKernel dev(mesh, kc);
  std::mt19937 rng(23);
  Matrix<float> a(kc.m, kc.ksub, Layout::ColMajor);
  Matrix<float> b(kc.ksub, kc.n, Layout::RowMajor);
  fill_rand(rng, {a.data(), a.size()});
  fill_rand(rng, {b.data(), b.size()});

  stage_hc(mesh, kc, 0, a, b);
  issue(mesh, dev, 3, 0);
  Matrix<float> first = read_c(mesh, kc);

  // re-running with command 3 after prior state must give the same result
  issue(mesh, dev, 3, 0);
  Matrix<float> second = read_c(mesh, kc);
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first.data()[i] == second.data()[i]);
  }

  CHECK_THROWS_AS(issue(mesh, dev, 4, 0), SimFault);
}

TEST_CASE("writeback places core j's RES2 at columns j*cols_per_core") {
  const KernelConfig kc = desk_kernel();
  Mesh mesh(desk_mesh(), {});
  DeviceKernel dev(mesh, kc);
  std::mt19937 rng(24);
  Matrix<float> a(kc.m, kc.ksub, Layout::ColMajor);
  Matrix<float> b(kc.ksub, kc.n, Layout::RowMajor);
  fill_rand(rng, {a.data(), a.size()});
  fill_rand(rng, {b.data(), b.size()});
  stage_hc(mesh, kc, 0, a, b);
  issue(mesh, dev, 3, 0);

  auto c_ti = mesh.hc_f32("c");
  const int cpc = kc.cols_per_core();
  for (int j = 0; j < kc.cores; ++j) {
    auto res2 = mesh.region_f32(j, DeviceKernel::kRegionRes2);
    for (int col = 0; col < cpc; ++col) {
      for (int r = 0; r < kc.m; ++r) {
        CHECK(c_ti[std::size_t(j * cpc + col) * kc.m + r] ==
              res2[std::size_t(col) * kc.m + r]);
      }
    }
  }
}

TEST_CASE("the k-iteration observer sees every (column, k) pair in order") {
  const KernelConfig kc = desk_kernel();
  Mesh mesh(desk_mesh(), {});
  DeviceKernel dev(mesh, kc);
  std::vector<std::pair<int, int>> seen;
  dev.on_k_iteration_end = [&](int ci, int k) { seen.emplace_back(ci, k); };

  std::mt19937 rng(25);
  Matrix<float> a(kc.m, kc.ksub, Layout::ColMajor);
  Matrix<float> b(kc.ksub, kc.n, Layout::RowMajor);
  fill_rand(rng, {a.data(), a.size()});
  fill_rand(rng, {b.data(), b.size()});
  stage_hc(mesh, kc, 0, a, b);
  issue(mesh, dev, 3, 0);

  REQUIRE(int(seen.size()) == kc.col_iters() * kc.cores);
  int idx = 0;
  for (int ci = 0; ci < kc.col_iters(); ++ci) {
    for (int k = 0; k < kc.cores; ++k) {
      CHECK(seen[idx].first == ci);
      CHECK(seen[idx].second == k);
      ++idx;
    }
  }
}

TEST_CASE("per-task flop and byte accounting") {
  const KernelConfig kc = desk_kernel();
  Mesh mesh(desk_mesh(), {});
  DeviceKernel dev(mesh, kc);
  std::mt19937 rng(26);
  Matrix<float> a(kc.m, kc.ksub, Layout::ColMajor);
  Matrix<float> b(kc.ksub, kc.n, Layout::RowMajor);
  fill_rand(rng, {a.data(), a.size()});
  fill_rand(rng, {b.data(), b.size()});
  stage_hc(mesh, kc, 0, a, b);
  issue(mesh, dev, 3, 0);

  const CycleLedger& led = mesh.ledger();
  // one task multiplies the full m x ksub by ksub x n slice
  CHECK(led.flop_count == 2ull * kc.m * kc.ksub * kc.n);
  CHECK(led.hc_to_core_bytes ==
        std::uint64_t(kc.cores) * (kc.a_bytes() + kc.b_bytes()));
  CHECK(led.core_to_hc_bytes == std::uint64_t(kc.cores) * kc.res2_bytes());
  // stage barrier + one per K iteration
  CHECK(led.barrier_count == 1ull + std::uint64_t(kc.col_iters()) * kc.cores);
}

TEST_CASE("device and mesh core counts must agree") {
  Mesh mesh(desk_mesh(), {});
  KernelConfig kc = desk_kernel();
  kc.cores = 8;
  kc.ksub = 8;
  kc.n = 32;
  CHECK_THROWS_AS(DeviceKernel(mesh, kc), std::invalid_argument);
}
