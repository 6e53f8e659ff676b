#include "meshgemm/host.hpp"

#include <algorithm>
#include <cstring>

namespace meshgemm {

std::vector<int> command_schedule(int num_tasks) {
  if (num_tasks < 1) {
    throw std::invalid_argument("command_schedule: need at least one task");
  }
  if (num_tasks == 1) return {3};
  std::vector<int> sched(num_tasks, 1);
  sched.front() = 0;
  sched.back() = 2;
  return sched;
}

void postprocess(MatrixView<const float> acc, float alpha, float beta,
                 MatrixView<const float> c_in, MatrixView<float> c_out) {
  if (acc.rows != c_out.rows || acc.cols != c_out.cols ||
      (beta != 0.0f && (c_in.rows != c_out.rows || c_in.cols != c_out.cols))) {
    throw std::invalid_argument("postprocess: shape mismatch");
  }
  for (std::int64_t j = 0; j < c_out.cols; ++j) {
    for (std::int64_t i = 0; i < c_out.rows; ++i) {
      if (beta == 0.0f) {
        c_out.at(i, j) = alpha * acc.at(i, j);
      } else if (alpha == 0.0f) {
        c_out.at(i, j) = beta * c_in.at(i, j);
      } else {
        c_out.at(i, j) = alpha * acc.at(i, j) + beta * c_in.at(i, j);
      }
    }
  }
}

InnerKernel::InnerKernel(Mesh& mesh, const KernelConfig& cfg)
    : mesh_(mesh), cfg_(cfg), device_(mesh, cfg) {}

void InnerKernel::stage_task(const InnerKernelRequest& req, int task,
                             int selector) {
  auto a_buf = mesh_.hc_f32(selector ? "a1" : "a0");
  auto b_buf = mesh_.hc_f32(selector ? "b1" : "b0");
  // Task t consumes columns [t*ksub, (t+1)*ksub) of the column-major a1 and
  // rows [t*ksub, (t+1)*ksub) of the row-major b1; both are contiguous.
  const std::size_t a_off = std::size_t(task) * cfg_.ksub * cfg_.m;
  const std::size_t b_off = std::size_t(task) * cfg_.ksub * cfg_.n;
  std::memcpy(a_buf.data(), req.a1 + a_off, cfg_.a_ti_bytes());
  std::memcpy(b_buf.data(), req.b1 + b_off, cfg_.b_ti_bytes());
}

TimingBreakdown InnerKernel::run(const InnerKernelRequest& req) {
  if (req.k <= 0 || req.k % cfg_.ksub != 0) {
    throw std::invalid_argument("InnerKernel: K must be a positive multiple of KSUB");
  }
  if (req.c_out.rows != cfg_.m || req.c_out.cols != cfg_.n) {
    throw std::invalid_argument("InnerKernel: c_out must be m x n");
  }
  const int num_tasks = static_cast<int>(req.k / cfg_.ksub);
  const std::vector<int> sched = command_schedule(num_tasks);
  const double clock = mesh_.config().clock_hz;
  const double bw_core = mesh_.params().bw_core_hc;
  const std::size_t in_bytes = cfg_.a_ti_bytes() + cfg_.b_ti_bytes();

  std::vector<double> stage_t(num_tasks), dev_t(num_tasks);
  std::vector<std::uint64_t> cyc_before;
  int selector = 0;
  for (int t = 0; t < num_tasks; ++t) {
    ControlBlock cb = read_control(mesh_);
    if (!cb.done_flag) {
      throw SimFault("host protocol violation: device busy while staging");
    }
    stage_task(req, t, selector);
    stage_t[t] = mesh_.hc_transfer(Direction::HostToHc, in_bytes);

    cb.command = static_cast<std::uint32_t>(sched[t]);
    cb.selector = static_cast<std::uint32_t>(selector);
    cb.done_flag = 0;
    write_control(mesh_, cb);

    const CycleLedger& led = mesh_.ledger();
    cyc_before = led.compute_cycles;
    const std::uint64_t to_core0 = led.hc_to_core_bytes;
    const std::uint64_t from_core0 = led.core_to_hc_bytes;

    device_.run_task();

    std::uint64_t max_cyc = 0;
    for (int j = 0; j < cfg_.cores; ++j) {
      max_cyc = std::max(max_cyc, led.compute_cycles[j] - cyc_before[j]);
    }
    dev_t[t] = static_cast<double>(max_cyc) / clock +
               static_cast<double>((led.hc_to_core_bytes - to_core0) +
                                   (led.core_to_hc_bytes - from_core0)) /
                   bw_core;
    selector ^= 1;
  }

  TimingBreakdown tb;
  tb.post_time = mesh_.hc_transfer(Direction::HcToHost, cfg_.c_ti_bytes());
  auto acc_span = mesh_.hc_f32("c");
  auto acc = MatrixView<const float>::col_major(acc_span.data(), cfg_.m,
                                                cfg_.n, cfg_.m);
  postprocess(acc, req.alpha, req.beta, req.c_in, req.c_out);

  for (double s : stage_t) tb.input_stage_time += s;
  for (double d : dev_t) tb.device_time += d;

  // Staging of task t+1 overlaps device execution of task t; each steady
  // task costs max(staging, device).
  double total = 0.0;
  if (model_overlap) {
    total = stage_t[0];
    for (int t = 1; t < num_tasks; ++t) {
      total += std::max(stage_t[t], dev_t[t - 1]);
    }
    total += dev_t[num_tasks - 1];
  } else {
    total = tb.input_stage_time + tb.device_time;
  }
  total += num_tasks * mesh_.params().host_task_overhead_s;
  total += tb.post_time;
  tb.total_time = total;
  tb.ir = tb.input_stage_time / tb.total_time;
  tb.or_ratio = tb.post_time / tb.total_time;
  return tb;
}

}  // namespace meshgemm
