#include "meshgemm/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace meshgemm {

namespace {

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("config: bad boolean value: " + v);
}

}  // namespace

SimSettings parse_config(std::istream& in) {
  SimSettings s;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    // trim
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    }
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto strip = [](std::string& x) {
      auto a = x.find_first_not_of(" \t");
      auto b = x.find_last_not_of(" \t");
      x = (a == std::string::npos) ? "" : x.substr(a, b - a + 1);
    };
    strip(key);
    strip(val);

    if (key == "cores") s.mesh.cores = std::stoi(val);
    else if (key == "local_mem_bytes") s.mesh.local_mem_bytes = std::stoul(val);
    else if (key == "bank_bytes") s.mesh.bank_bytes = std::stoul(val);
    else if (key == "banks") s.mesh.banks = std::stoi(val);
    else if (key == "clock_hz") s.mesh.clock_hz = std::stod(val);
    else if (key == "barrier_cycles") s.cost.barrier_cycles = std::stoull(val);
    else if (key == "bw_host_write_hc") s.cost.bw_host_write_hc = std::stod(val);
    else if (key == "bw_host_read_hc") s.cost.bw_host_read_hc = std::stod(val);
    else if (key == "bw_core_hc") s.cost.bw_core_hc = std::stod(val);
    else if (key == "bw_hh") s.cost.bw_hh = std::stod(val);
    else if (key == "remote_store_overlapped")
      s.cost.remote_store_overlapped = parse_bool(val);
    else if (key == "host_task_overhead_s")
      s.cost.host_task_overhead_s = std::stod(val);
    else if (key == "fma_per_cycle_per_core")
      s.cost.fma_per_cycle_per_core = std::stod(val);
    else
      throw std::invalid_argument("config: unknown key: " + key);
  }
  s.mesh.validate();
  s.cost.validate();
  return s;
}

SimSettings load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

void write_config(std::ostream& out, const SimSettings& s) {
  out << std::setprecision(17);
  out << "cores=" << s.mesh.cores << "\n";
  out << "local_mem_bytes=" << s.mesh.local_mem_bytes << "\n";
  out << "bank_bytes=" << s.mesh.bank_bytes << "\n";
  out << "banks=" << s.mesh.banks << "\n";
  out << "clock_hz=" << s.mesh.clock_hz << "\n";
  out << "barrier_cycles=" << s.cost.barrier_cycles << "\n";
  out << "bw_host_write_hc=" << s.cost.bw_host_write_hc << "\n";
  out << "bw_host_read_hc=" << s.cost.bw_host_read_hc << "\n";
  out << "bw_core_hc=" << s.cost.bw_core_hc << "\n";
  out << "bw_hh=" << s.cost.bw_hh << "\n";
  out << "remote_store_overlapped="
      << (s.cost.remote_store_overlapped ? "true" : "false") << "\n";
  out << "host_task_overhead_s=" << s.cost.host_task_overhead_s << "\n";
  out << "fma_per_cycle_per_core=" << s.cost.fma_per_cycle_per_core << "\n";
}

void save_config(const std::string& path, const SimSettings& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  write_config(out, s);
}

}  // namespace meshgemm
