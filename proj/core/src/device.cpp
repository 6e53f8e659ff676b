#include "meshgemm/device.hpp"

#include <cstring>

namespace meshgemm {

void KernelConfig::validate() const {
  if (m <= 0 || n <= 0 || ksub <= 0 || nsub <= 0 || cores <= 0) {
    throw std::invalid_argument("KernelConfig: non-positive dimension");
  }
  if (ksub % cores != 0) {
    throw std::invalid_argument("KernelConfig: KSUB must divide by CORES");
  }
  if (n % (nsub * cores) != 0) {
    throw std::invalid_argument("KernelConfig: n must divide by NSUB*CORES");
  }
  if (m % 32 != 0) {
    throw std::invalid_argument("KernelConfig: m must be a multiple of 32");
  }
}

ControlBlock read_control(const Mesh& mesh) {
  ControlBlock cb;
  auto b = mesh.hc_bytes("control");
  std::memcpy(&cb, b.data(), sizeof(cb));
  return cb;
}

void write_control(Mesh& mesh, const ControlBlock& cb) {
  auto b = mesh.hc_bytes("control");
  std::memcpy(b.data(), &cb, sizeof(cb));
}

void sub_matmul(const float* a, int m, int kpc, const float* b, int nsub,
                const float* prev, float* out) {
  const int strips = m / 32;
  for (int c = 0; c < nsub; ++c) {
    for (int s = 0; s < strips; ++s) {
      for (int r0 = 0; r0 < 32; ++r0) {
        const int r = s * 32 + r0;
        float acc = prev ? prev[r + c * m] : 0.0f;
        for (int k = 0; k < kpc; ++k) {
          acc += a[r + k * m] * b[k + c * kpc];
        }
        out[r + c * m] = acc;
      }
    }
  }
}

DeviceKernel::DeviceKernel(Mesh& mesh, const KernelConfig& cfg)
    : mesh_(mesh), cfg_(cfg) {
  cfg_.validate();
  if (mesh_.config().cores != cfg_.cores) {
    throw std::invalid_argument("DeviceKernel: mesh/kernel core count mismatch");
  }
  for (int j = 0; j < cfg_.cores; ++j) {
    mesh_.allocate_region(j, kRegionA, cfg_.a_bytes());
    mesh_.allocate_region(j, kRegionB, cfg_.b_bytes());
    mesh_.allocate_region(j, kRegionRes1, cfg_.res1_bytes());
    mesh_.allocate_region(j, kRegionRes2, cfg_.res2_bytes());
  }
  mesh_.alloc_hc_buffer("a0", cfg_.a_ti_bytes());
  mesh_.alloc_hc_buffer("a1", cfg_.a_ti_bytes());
  mesh_.alloc_hc_buffer("b0", cfg_.b_ti_bytes());
  mesh_.alloc_hc_buffer("b1", cfg_.b_ti_bytes());
  mesh_.alloc_hc_buffer("c", cfg_.c_ti_bytes());
  mesh_.alloc_hc_buffer("control", 64);
  write_control(mesh_, ControlBlock{});
  scratch_b4_.resize(static_cast<std::size_t>(cfg_.k_per_core()) * cfg_.nsub);
  scratch_out_.resize(static_cast<std::size_t>(cfg_.m) * cfg_.nsub);
}

int DeviceKernel::dest_core(int core, int iter_k, int cores) {
  return ((core - iter_k - 1) % cores + cores) % cores;
}

void DeviceKernel::stage_inputs(int selector) {
  const int kpc = cfg_.k_per_core();
  auto a_ti = mesh_.hc_f32(selector ? "a1" : "a0");  // m x ksub, col-major
  auto b_ti = mesh_.hc_f32(selector ? "b1" : "b0");  // ksub x n, row-major
  for (int j = 0; j < cfg_.cores; ++j) {
    mesh_.hc_transfer(Direction::HcToCore, cfg_.a_bytes() + cfg_.b_bytes());
    // Core j's slices are contiguous in both staging layouts: columns
    // j*kpc.. of the column-major a_ti, rows j*kpc.. of the row-major b_ti.
    auto a_dst = mesh_.region_f32(j, kRegionA);
    std::memcpy(a_dst.data(), a_ti.data() + std::size_t(j) * kpc * cfg_.m,
                cfg_.a_bytes());
    auto b_dst = mesh_.region_f32(j, kRegionB);
    std::memcpy(b_dst.data(), b_ti.data() + std::size_t(j) * kpc * cfg_.n,
                cfg_.b_bytes());
  }
}

void DeviceKernel::clear_result_buffers() {
  for (int j = 0; j < cfg_.cores; ++j) {
    auto r1 = mesh_.region_bytes(j, kRegionRes1);
    std::memset(r1.data(), 0, r1.size());
    auto r2 = mesh_.region_bytes(j, kRegionRes2);
    std::memset(r2.data(), 0, r2.size());
  }
}

void DeviceKernel::run_k_iteration(int col_iter_idx, int iter_k) {
  const int m = cfg_.m;
  const int kpc = cfg_.k_per_core();
  const int nsub = cfg_.nsub;
  const std::uint64_t fma_cycles = static_cast<std::uint64_t>(
      double(m) * kpc * nsub / mesh_.params().fma_per_cycle_per_core);

  for (int j = 0; j < cfg_.cores; ++j) {
    const int dest = dest_core(j, iter_k, cfg_.cores);
    auto a = mesh_.region_f32(j, kRegionA);
    auto b = mesh_.region_f32(j, kRegionB);  // kpc x n, row-major
    // Extract the kpc x nsub sub-block of b at the destination core's
    // columns for the current column-iteration window.
    const int col0 = dest * cfg_.cols_per_core() + col_iter_idx * nsub;
    float* b4 = scratch_b4_.data();
    for (int c = 0; c < nsub; ++c) {
      for (int k = 0; k < kpc; ++k) {
        b4[k + c * kpc] = b[std::size_t(k) * cfg_.n + col0 + c];
      }
    }
    // The traveling partial arrives in RES1 (put there by the previous
    // core's remote store, visible since the last barrier). The first
    // K iteration of a task starts the chain from zero.
    const float* prev =
        iter_k == 0 ? nullptr : mesh_.region_f32(j, kRegionRes1).data();
    float* out = scratch_out_.data();
    sub_matmul(a.data(), m, kpc, b4, nsub, prev, out);
    mesh_.add_compute_cycles(j, fma_cycles);
    mesh_.add_flops(2ull * m * kpc * nsub);

    if (iter_k < cfg_.cores - 1) {
      // Forward alongside the compute; the store slot is free.
      mesh_.remote_write(
          j, (j + 1) % cfg_.cores, kRegionRes1, 0,
          std::as_bytes(std::span<const float>(out, std::size_t(m) * nsub)),
          /*overlapped=*/true);
    } else {
      // Own-destination block: accumulate into this core's RES2 at the
      // current column window.
      auto res2 = mesh_.region_f32(j, kRegionRes2);
      for (int c = 0; c < nsub; ++c) {
        float* dst = res2.data() + std::size_t(col_iter_idx * nsub + c) * m;
        const float* src = out + std::size_t(c) * m;
        for (int r = 0; r < m; ++r) dst[r] += src[r];
      }
      mesh_.add_compute_cycles(j, static_cast<std::uint64_t>(m) * nsub);
    }
  }
  mesh_.barrier_all();
  if (on_k_iteration_end) on_k_iteration_end(col_iter_idx, iter_k);
}

void DeviceKernel::run_column_iteration(int col_iter_idx) {
  for (int k = 0; k < cfg_.cores; ++k) {
    run_k_iteration(col_iter_idx, k);
  }
}

void DeviceKernel::writeback_results() {
  auto c_ti = mesh_.hc_f32("c");  // m x n, col-major
  for (int j = 0; j < cfg_.cores; ++j) {
    mesh_.hc_transfer(Direction::CoreToHc, cfg_.res2_bytes());
    auto res2 = mesh_.region_f32(j, kRegionRes2);
    // Core j owns columns [j*cols_per_core, (j+1)*cols_per_core).
    std::memcpy(c_ti.data() + std::size_t(j) * cfg_.cols_per_core() * cfg_.m,
                res2.data(), cfg_.res2_bytes());
  }
}

void DeviceKernel::run_task() {
  const ControlBlock cb = read_control(mesh_);
  if (cb.command > 3) {
    throw SimFault("device fault: invalid command " +
                   std::to_string(cb.command));
  }
  stage_inputs(static_cast<int>(cb.selector));
  if (cb.command == 0 || cb.command == 3) {
    clear_result_buffers();
  }
  mesh_.barrier_all();  // the barrier before the first K iteration
  for (int ci = 0; ci < cfg_.col_iters(); ++ci) {
    run_column_iteration(ci);
  }
  if (cb.command >= 2) {
    writeback_results();
  }
  ControlBlock done = cb;
  done.done_flag = 1;
  write_control(mesh_, done);
}

}  // namespace meshgemm
