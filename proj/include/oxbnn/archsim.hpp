#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "oxbnn/common.hpp"
#include "oxbnn/link_budget.hpp"
#include "oxbnn/mapping.hpp"
#include "oxbnn/pca.hpp"
#include "oxbnn/workloads.hpp"

// Transaction-level, event-driven performance and energy simulator. Passes
// chain at period tau = 1/DR per XPE after a per-layer pipeline fill; the
// oxbnn policy accumulates slices in each XPE's PCA and reads out once per
// output, while the baseline policy pays per-psum eDRAM traffic plus serial
// reduction-network additions per output.
namespace oxbnn::archsim {

struct PeripheralParams {
  double reduction_power_mW = 0.050;
  double reduction_latency_s = 3.125e-9;
  double reduction_area_mm2 = 3.0e-5;
  double activation_power_mW = 0.52;
  double activation_latency_s = 0.78e-9;
  double activation_area_mm2 = 6.0e-5;
  double io_power_mW = 140.18;
  double io_latency_s = 0.78e-9;
  double io_area_mm2 = 2.44e-2;
  double pooling_power_mW = 0.4;
  double pooling_latency_s = 3.125e-9;
  double pooling_area_mm2 = 2.4e-4;
  double edram_power_mW = 41.1;
  double edram_latency_s = 1.56e-9;
  double edram_area_mm2 = 1.66e-1;
  double bus_power_mW = 7.0;
  int bus_latency_cycles = 5;  // one cycle = one PASS period tau
  double bus_area_mm2 = 9.0e-3;
  double router_power_mW = 42.0;
  int router_latency_cycles = 2;
  double router_area_mm2 = 1.5e-2;
  double eo_tuning_power_W = 80e-6;  // per FSR
  double eo_tuning_latency_s = 20e-9;
  double to_tuning_power_W = 275e-3;  // per FSR
  double to_tuning_latency_s = 4e-6;
};

struct AcceleratorConfig {
  std::string name;
  double datarate_GSps = 0.0;
  int xpe_size = 0;        // N
  int xpe_count = 0;       // total across all XPCs
  int xpes_per_xpc = 0;    // M
  int xpcs_per_tile = 4;
  mapping::Policy policy = mapping::Policy::oxbnn;
  double oxg_energy_per_op_J = 0.032e-9;
  double oxg_area_mm2 = 0.011;
  pca::PcaCapacity pca_capacity;
  pca::PcaParams pca;
  PeripheralParams peripherals;
  linkbudget::LinkBudgetParams link;
  double laser_power_per_wavelength_dBm = 0.0;

  double tau_s() const { return 1.0 / (datarate_GSps * 1e9); }
  int xpc_count() const { return (xpe_count + xpes_per_xpc - 1) / xpes_per_xpc; }
  int tile_count() const { return (xpc_count() + xpcs_per_tile - 1) / xpcs_per_tile; }
  void validate() const;
};

const std::vector<std::string>& builtin_config_names();
AcceleratorConfig build_config(const std::string& variant,
                               const std::map<std::string, std::string>& overrides = {});
AcceleratorConfig load_config_file(const std::string& path);

struct Metrics {
  double latency_s = 0.0;
  double fps = 0.0;
  double total_power_W = 0.0;
  double fps_per_watt = 0.0;
  std::map<std::string, double> energy_breakdown;  // J
  long long event_count = 0;
  std::map<std::string, long long> events_by_kind;

  double total_energy_J() const;
};

// Trace sink: one line per occupancy interval, `timestamp resource kind payload`.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void event(double t_start_s, double duration_s, std::string_view resource,
                     std::string_view kind, std::string_view payload) = 0;
};

class FileTraceSink final : public TraceSink {
 public:
  explicit FileTraceSink(const std::string& path);
  ~FileTraceSink() override;
  void event(double t, double dur, std::string_view res, std::string_view kind,
             std::string_view payload) override;

 private:
  struct Impl;
  Impl* impl_;
};

struct AuditResult {
  long long intervals_checked = 0;
  long long overlaps = 0;
  bool clean() const { return overlaps == 0; }
};

struct SimOptions {
  TraceSink* trace = nullptr;
  // Layers with at most this many passes emit individual pass events; larger
  // layers aggregate each XPE round into one interval (identical timing).
  long fine_pass_limit = 200000;
};

// Raw-shape entry point: `pairs` vector pairs of size s each.
Metrics simulate_pairs(long pairs, int s, const AcceleratorConfig& config,
                       const SimOptions& options = {}, AuditResult* audit = nullptr);
Metrics simulate_layer(const workloads::Layer& layer, const AcceleratorConfig& config,
                       const SimOptions& options = {}, AuditResult* audit = nullptr);
Metrics simulate_network(const workloads::ModelSpec& model,
                         const AcceleratorConfig& config,
                         const SimOptions& options = {}, AuditResult* audit = nullptr);

std::string metrics_csv_header();
std::string metrics_csv_row(const std::string& config, const std::string& workload,
                            const Metrics& m);

}  // namespace oxbnn::archsim
