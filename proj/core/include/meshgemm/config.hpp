#pragma once

#include <iosfwd>
#include <string>

#include "meshgemm/sim.hpp"

namespace meshgemm {

/// Line-based key=value config for the mesh geometry and cost model.
/// Recognized keys: cores, local_mem_bytes, clock_hz, barrier_cycles,
/// bw_host_write_hc, bw_host_read_hc, bw_core_hc, bw_hh,
/// remote_store_overlapped, host_task_overhead_s.
/// Unknown keys are rejected; '#' starts a comment.
struct SimSettings {
  MeshConfig mesh;
  CostParams cost;
};

SimSettings parse_config(std::istream& in);
SimSettings load_config(const std::string& path);
void write_config(std::ostream& out, const SimSettings& s);
void save_config(const std::string& path, const SimSettings& s);

}  // namespace meshgemm
