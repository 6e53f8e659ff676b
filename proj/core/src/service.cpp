#include "meshgemm/service.hpp"

#include <cstring>

namespace meshgemm {

Service::Service(const MeshConfig& mesh_cfg, const CostParams& cost,
                 const KernelConfig& kernel_cfg)
    : mesh_cfg_(mesh_cfg), cost_(cost), kernel_cfg_(kernel_cfg) {}

void Service::start() {
  if (lifecycle_ != ServiceLifecycle::Stopped) {
    throw ServiceError("service already started");
  }
  mesh_ = std::make_unique<Mesh>(mesh_cfg_, cost_);
  kernel_ = std::make_unique<InnerKernel>(*mesh_, kernel_cfg_);
  lifecycle_ = ServiceLifecycle::Ready;
}

void Service::stop() {
  if (lifecycle_ == ServiceLifecycle::Stopped) {
    throw ServiceError("service not running");
  }
  if (lifecycle_ == ServiceLifecycle::Busy || slot_.request_ready) {
    throw ServiceError("cannot stop with a request in flight");
  }
  kernel_.reset();
  mesh_.reset();
  lifecycle_ = ServiceLifecycle::Stopped;
}

TimingBreakdown Service::submit(const InnerKernelRequest& req) {
  if (lifecycle_ == ServiceLifecycle::Stopped) {
    throw ServiceError("submit on stopped service");
  }
  if (lifecycle_ == ServiceLifecycle::Busy || slot_.request_ready) {
    throw ServiceError("request already in flight");
  }
  lifecycle_ = ServiceLifecycle::Busy;
  const KernelConfig& kc = kernel_->config();
  const std::size_t a_elems = std::size_t(kc.m) * req.k;
  const std::size_t b_elems = std::size_t(req.k) * kc.n;
  const std::size_t c_elems = std::size_t(kc.m) * kc.n;

  // client side: copy into the HH payload and raise request_ready
  slot_.a1.assign(req.a1, req.a1 + a_elems);
  slot_.b1.assign(req.b1, req.b1 + b_elems);
  slot_.c_in.resize(c_elems);
  for (std::int64_t j = 0; j < kc.n; ++j) {
    for (std::int64_t i = 0; i < kc.m; ++i) {
      slot_.c_in[i + j * kc.m] = req.beta != 0.0f ? req.c_in.at(i, j) : 0.0f;
    }
  }
  slot_.request_ready = true;
  trace_.push_back(SlotEvent::RequestReady);
  const std::size_t hh_in_bytes = (a_elems + b_elems + c_elems) * sizeof(float);

  // service side: consume the request and run the inner kernel
  slot_.c_out.assign(c_elems, 0.0f);
  InnerKernelRequest inner = req;
  inner.a1 = slot_.a1.data();
  inner.b1 = slot_.b1.data();
  inner.c_in = MatrixView<const float>::col_major(slot_.c_in.data(), kc.m,
                                                  kc.n, kc.m);
  inner.c_out =
      MatrixView<float>::col_major(slot_.c_out.data(), kc.m, kc.n, kc.m);
  TimingBreakdown tb = kernel_->run(inner);
  slot_.request_ready = false;
  slot_.response_ready = true;
  trace_.push_back(SlotEvent::ResponseReady);

  // client side: copy the output payload out
  for (std::int64_t j = 0; j < kc.n; ++j) {
    for (std::int64_t i = 0; i < kc.m; ++i) {
      req.c_out.at(i, j) = slot_.c_out[i + j * kc.m];
    }
  }
  slot_.response_ready = false;
  const std::size_t hh_out_bytes = c_elems * sizeof(float);

  tb.hh_time = static_cast<double>(hh_in_bytes + hh_out_bytes) / cost_.bw_hh;
  tb.total_time += tb.hh_time;
  tb.ir = tb.input_stage_time / tb.total_time;
  tb.or_ratio = tb.post_time / tb.total_time;
  lifecycle_ = ServiceLifecycle::Ready;
  return tb;
}

}  // namespace meshgemm
