#include "meshgemm/sim.hpp"

#include <algorithm>
#include <cstring>

namespace meshgemm {

namespace {
constexpr char kCodeRegion[] = "CODE";
}

void MeshConfig::validate() const {
  if (cores < 1) throw std::invalid_argument("MeshConfig: cores < 1");
  if (static_cast<std::uint64_t>(banks) * bank_bytes != local_mem_bytes) {
    throw std::invalid_argument("MeshConfig: banks * bank_bytes != local_mem_bytes");
  }
  if (clock_hz <= 0) throw std::invalid_argument("MeshConfig: clock_hz <= 0");
}

void CostParams::validate() const {
  if (fma_per_cycle_per_core <= 0 || bw_host_write_hc <= 0 ||
      bw_host_read_hc <= 0 || bw_core_hc <= 0 || bw_hh <= 0 ||
      host_task_overhead_s < 0) {
    throw std::invalid_argument("CostParams: non-positive parameter");
  }
}

Mesh::Mesh(const MeshConfig& cfg, const CostParams& params)
    : cfg_(cfg), params_(params) {
  cfg_.validate();
  params_.validate();
  ledger_.compute_cycles.assign(cfg_.cores, 0);
  ledger_.remote_store_bytes.assign(cfg_.cores, 0);
  cores_.resize(cfg_.cores);
  for (auto& c : cores_) {
    c.mem.assign(cfg_.local_mem_bytes, std::byte{0});
    // Bank 0 holds the kernel's code; it exists before any other region.
    c.regions.push_back({kCodeRegion, 0, cfg_.bank_bytes});
    c.next_free = cfg_.bank_bytes;
  }
  hc_mem_.assign(kDefaultHcRamBytes, std::byte{0});
}

void Mesh::check_core(int core) const {
  if (core < 0 || core >= cfg_.cores) {
    throw SimFault("core id out of range: " + std::to_string(core));
  }
}

const Region* Mesh::find_region(int core, const std::string& name) const {
  for (const auto& r : cores_[core].regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

const Region& Mesh::allocate_region(int core, const std::string& name,
                                    std::uint32_t length_bytes) {
  check_core(core);
  if (length_bytes == 0) throw SimFault("allocate_region: zero length");
  auto& state = cores_[core];
  if (find_region(core, name)) {
    throw NameCollision("core " + std::to_string(core) +
                        ": duplicate region name " + name);
  }
  if (static_cast<std::uint64_t>(state.next_free) + length_bytes >
      cfg_.local_mem_bytes) {
    throw CapacityExceeded("core " + std::to_string(core) + ": region " +
                           name + " of " + std::to_string(length_bytes) +
                           " bytes does not fit (free offset " +
                           std::to_string(state.next_free) + ")");
  }
  state.regions.push_back({name, state.next_free, length_bytes});
  state.next_free += length_bytes;
  return state.regions.back();
}

const Region& Mesh::region(int core, const std::string& name) const {
  check_core(core);
  const Region* r = find_region(core, name);
  if (!r) {
    throw SimFault("core " + std::to_string(core) + ": no region " + name);
  }
  return *r;
}

bool Mesh::has_region(int core, const std::string& name) const {
  check_core(core);
  return find_region(core, name) != nullptr;
}

std::span<std::byte> Mesh::region_bytes(int core, const std::string& name) {
  const Region& r = region(core, name);
  return {cores_[core].mem.data() + r.offset, r.length};
}

std::span<const std::byte> Mesh::region_bytes(int core,
                                              const std::string& name) const {
  const Region& r = region(core, name);
  return {cores_[core].mem.data() + r.offset, r.length};
}

std::span<float> Mesh::region_f32(int core, const std::string& name) {
  auto b = region_bytes(core, name);
  return {reinterpret_cast<float*>(b.data()), b.size() / sizeof(float)};
}

std::span<const float> Mesh::region_f32(int core,
                                        const std::string& name) const {
  auto b = region_bytes(core, name);
  return {reinterpret_cast<const float*>(b.data()), b.size() / sizeof(float)};
}

void Mesh::remote_write(int src_core, int dst_core, const std::string& name,
                        std::uint32_t offset,
                        std::span<const std::byte> values, bool overlapped) {
  check_core(src_core);
  const Region& r = region(dst_core, name);
  if (static_cast<std::uint64_t>(offset) + values.size() > r.length) {
    throw SimFault("remote_write past end of core " +
                   std::to_string(dst_core) + " region " + name + " (offset " +
                   std::to_string(offset) + ", " +
                   std::to_string(values.size()) + " bytes)");
  }
  pending_.push_back({dst_core,
                      static_cast<std::size_t>(r.offset) + offset,
                      {values.begin(), values.end()}});
  ledger_.remote_store_bytes[src_core] += values.size();
  if (!(overlapped && params_.remote_store_overlapped)) {
    // One store cycle per 4-byte word when the store cannot share the
    // compute issue slot.
    ledger_.compute_cycles[src_core] += (values.size() + 3) / 4;
  }
}

void Mesh::barrier(std::span<const int> workgroup) {
  for (int core : workgroup) {
    check_core(core);
    if (cores_[core].terminated) {
      throw DeadlockFault("core " + std::to_string(core) +
                          " terminated before reaching the barrier");
    }
  }
  for (auto& w : pending_) {
    std::memcpy(cores_[w.dst_core].mem.data() + w.abs_offset, w.data.data(),
                w.data.size());
  }
  pending_.clear();
  for (int core : workgroup) {
    ledger_.compute_cycles[core] += params_.barrier_cycles;
  }
  ledger_.barrier_count += 1;
  phase_ += 1;
}

void Mesh::barrier_all() {
  std::vector<int> all(cfg_.cores);
  for (int i = 0; i < cfg_.cores; ++i) all[i] = i;
  barrier(all);
}

void Mesh::mark_terminated(int core) {
  check_core(core);
  cores_[core].terminated = true;
}

void Mesh::alloc_hc_buffer(const std::string& name, std::size_t bytes) {
  if (hc_buffers_.count(name)) {
    throw NameCollision("HC buffer already exists: " + name);
  }
  if (hc_next_free_ + bytes > hc_mem_.size()) {
    throw CapacityExceeded("HC-RAM exhausted allocating " + name);
  }
  hc_buffers_[name] = {hc_next_free_, bytes};
  hc_next_free_ += bytes;
}

std::span<std::byte> Mesh::hc_bytes(const std::string& name) {
  auto it = hc_buffers_.find(name);
  if (it == hc_buffers_.end()) throw SimFault("no HC buffer: " + name);
  return {hc_mem_.data() + it->second.first, it->second.second};
}

std::span<const std::byte> Mesh::hc_bytes(const std::string& name) const {
  auto it = hc_buffers_.find(name);
  if (it == hc_buffers_.end()) throw SimFault("no HC buffer: " + name);
  return {hc_mem_.data() + it->second.first, it->second.second};
}

std::span<float> Mesh::hc_f32(const std::string& name) {
  auto b = hc_bytes(name);
  return {reinterpret_cast<float*>(b.data()), b.size() / sizeof(float)};
}

double Mesh::bandwidth(Direction dir) const {
  switch (dir) {
    case Direction::HostToHc: return params_.bw_host_write_hc;
    case Direction::HcToHost: return params_.bw_host_read_hc;
    case Direction::HcToCore:
    case Direction::CoreToHc: return params_.bw_core_hc;
  }
  return params_.bw_core_hc;
}

double Mesh::hc_transfer(Direction dir, std::uint64_t byte_count) {
  if (byte_count == 0) return 0.0;
  switch (dir) {
    case Direction::HostToHc: ledger_.host_to_hc_bytes += byte_count; break;
    case Direction::HcToHost: ledger_.hc_to_host_bytes += byte_count; break;
    case Direction::HcToCore: ledger_.hc_to_core_bytes += byte_count; break;
    case Direction::CoreToHc: ledger_.core_to_hc_bytes += byte_count; break;
  }
  return static_cast<double>(byte_count) / bandwidth(dir);
}

void Mesh::add_compute_cycles(int core, std::uint64_t cycles) {
  check_core(core);
  ledger_.compute_cycles[core] += cycles;
}

void Mesh::add_flops(std::uint64_t flops) { ledger_.flop_count += flops; }

}  // namespace meshgemm
