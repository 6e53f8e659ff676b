#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshgemm {

/// Geometry of the simulated coprocessor.
struct MeshConfig {
  int cores = 16;
  int grid_rows = 4;
  int grid_cols = 4;
  std::uint32_t local_mem_bytes = 32768;
  std::uint32_t bank_bytes = 8192;
  int banks = 4;
  double clock_hz = 600e6;

  void validate() const;
};

/// Free parameters of the analytic cost model. The bandwidth defaults are
/// calibration outputs for the modeled platform (see calibrate_cost_model),
/// not architectural constants.
struct CostParams {
  double fma_per_cycle_per_core = 1.0;  // one fused multiply-add = 2 FLOPs
  bool remote_store_overlapped = true;
  std::uint64_t barrier_cycles = 50;
  double bw_host_write_hc = 77550841.010903567;   // bytes/s, host -> HC-RAM
  double bw_host_read_hc = 37292867.981790595;    // bytes/s, HC-RAM -> host
  double bw_core_hc = 89715354.117000982;         // bytes/s, core <-> HC-RAM
  double bw_hh = 175003915.00147092;  // bytes/s, host <-> host shared region
  double host_task_overhead_s = 2.6736328125000122e-05;  // per-task host cost

  void validate() const;
};

struct SimFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct CapacityExceeded : SimFault {
  using SimFault::SimFault;
};
struct NameCollision : SimFault {
  using SimFault::SimFault;
};
struct DeadlockFault : SimFault {
  using SimFault::SimFault;
};

/// Measurement counters behind the timing model. All counters are monotone.
struct CycleLedger {
  std::vector<std::uint64_t> compute_cycles;     // per core, includes barrier cost
  std::vector<std::uint64_t> remote_store_bytes; // per core
  std::uint64_t host_to_hc_bytes = 0;
  std::uint64_t hc_to_host_bytes = 0;
  std::uint64_t hc_to_core_bytes = 0;
  std::uint64_t core_to_hc_bytes = 0;
  std::uint64_t barrier_count = 0;
  std::uint64_t flop_count = 0;

  bool operator==(const CycleLedger&) const = default;
};

enum class Direction { HostToHc, HcToHost, HcToCore, CoreToHc };

/// Named region of one core's 32 KB local store.
struct Region {
  std::string name;
  std::uint32_t offset = 0;
  std::uint32_t length = 0;
};

/// Deterministic functional + cost simulation of the mesh coprocessor:
/// per-core banked scratchpads, stores into other cores' memory (visible
/// only after the next barrier), and a bandwidth-limited shared external
/// RAM. Driven single-threaded; cores execute in lockstep phases.
class Mesh {
 public:
  Mesh(const MeshConfig& cfg, const CostParams& params);

  const MeshConfig& config() const { return cfg_; }
  const CostParams& params() const { return params_; }
  const CycleLedger& ledger() const { return ledger_; }

  // --- local memory map ---------------------------------------------------

  /// Places a new region at the lowest free offset after the code bank.
  const Region& allocate_region(int core, const std::string& name,
                                std::uint32_t length_bytes);
  const Region& region(int core, const std::string& name) const;
  bool has_region(int core, const std::string& name) const;

  std::span<std::byte> region_bytes(int core, const std::string& name);
  std::span<const std::byte> region_bytes(int core,
                                          const std::string& name) const;
  std::span<float> region_f32(int core, const std::string& name);
  std::span<const float> region_f32(int core, const std::string& name) const;

  // --- inter-core traffic ---------------------------------------------------

  /// Store into another core's region. The bytes become visible to the
  /// destination only after the next barrier. When `overlapped` and the
  /// cost model allows overlap, the store costs zero cycles (it shares the
  /// issue slot with compute); otherwise one cycle per 4-byte word.
  void remote_write(int src_core, int dst_core, const std::string& region,
                    std::uint32_t offset, std::span<const std::byte> values,
                    bool overlapped = true);

  /// Synchronizes the given workgroup: applies pending remote writes in
  /// issue order, charges barrier_cycles to every member, bumps the phase.
  void barrier(std::span<const int> workgroup);
  void barrier_all();

  /// Marks a core as finished; reaching a barrier that includes a
  /// terminated core is a deadlock.
  void mark_terminated(int core);
  std::uint64_t phase() const { return phase_; }

  // --- shared external RAM ---------------------------------------------------

  void alloc_hc_buffer(const std::string& name, std::size_t bytes);
  std::span<std::byte> hc_bytes(const std::string& name);
  std::span<const std::byte> hc_bytes(const std::string& name) const;
  std::span<float> hc_f32(const std::string& name);

  /// Charges the ledger and returns the modeled transfer time in seconds.
  double hc_transfer(Direction dir, std::uint64_t byte_count);

  // --- instrumentation ---------------------------------------------------

  void add_compute_cycles(int core, std::uint64_t cycles);
  void add_flops(std::uint64_t flops);

 private:
  struct PendingWrite {
    int dst_core;
    std::size_t abs_offset;
    std::vector<std::byte> data;
  };
  struct CoreState {
    std::vector<std::byte> mem;
    std::vector<Region> regions;  // in allocation order
    std::uint32_t next_free = 0;
    bool terminated = false;
  };

  void check_core(int core) const;
  const Region* find_region(int core, const std::string& name) const;
  double bandwidth(Direction dir) const;

  MeshConfig cfg_;
  CostParams params_;
  CycleLedger ledger_;
  std::vector<CoreState> cores_;
  std::vector<PendingWrite> pending_;
  std::uint64_t phase_ = 0;

  std::vector<std::byte> hc_mem_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> hc_buffers_;
  std::size_t hc_next_free_ = 0;
};

inline constexpr std::size_t kDefaultHcRamBytes = 32u << 20;  // shared DRAM window

}  // namespace meshgemm
