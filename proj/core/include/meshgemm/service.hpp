#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "meshgemm/host.hpp"

namespace meshgemm {

struct ServiceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ServiceLifecycle { Stopped, Ready, Busy };

/// The HH-RAM handoff slot between the caller and the service. One request
/// outstanding at a time; request_ready and response_ready strictly
/// alternate, starting with request_ready.
struct RequestSlot {
  bool request_ready = false;
  bool response_ready = false;
  // payload areas (modeled host-host shared memory)
  std::vector<float> a1;
  std::vector<float> b1;
  std::vector<float> c_in;
  std::vector<float> c_out;
};

/// Order of flag events observed on the slot, for protocol checks.
enum class SlotEvent { RequestReady, ResponseReady };

/// The coprocessor-owning service: initializes the mesh and loads the
/// kernel once, then serves inner-kernel requests through the HH slot.
/// Realized as a second logical execution context in the same process;
/// the handoff protocol and the modeled HH copy costs are preserved.
class Service {
 public:
  Service(const MeshConfig& mesh_cfg, const CostParams& cost,
          const KernelConfig& kernel_cfg = {});

  /// Initializes the mesh, allocates regions, loads the kernel. Error if
  /// already started.
  void start();
  /// Releases the mesh. Error if not started or a request is in flight.
  void stop();

  ServiceLifecycle lifecycle() const { return lifecycle_; }

  /// Copies the request into the HH payload, raises request_ready, runs
  /// the inner kernel service-side, raises response_ready, and copies the
  /// result back out. Numerically bit-identical to a direct InnerKernel
  /// run; the timing additionally charges the HH copies both ways.
  TimingBreakdown submit(const InnerKernelRequest& req);

  const std::vector<SlotEvent>& trace() const { return trace_; }
  RequestSlot& slot() { return slot_; }
  const Mesh* mesh() const { return mesh_.get(); }

 private:
  MeshConfig mesh_cfg_;
  CostParams cost_;
  KernelConfig kernel_cfg_;
  ServiceLifecycle lifecycle_ = ServiceLifecycle::Stopped;
  std::unique_ptr<Mesh> mesh_;
  std::unique_ptr<InnerKernel> kernel_;
  RequestSlot slot_;
  std::vector<SlotEvent> trace_;
};

}  // namespace meshgemm
