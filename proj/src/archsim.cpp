#include "oxbnn/archsim.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

namespace oxbnn::archsim {

namespace {

long ceil_div(long a, long b) { return (a + b - 1) / b; }

}  // namespace

double Metrics::total_energy_J() const {
  double sum = 0.0;
  for (const auto& [k, v] : energy_breakdown) sum += v;
  return sum;
}

// Buffers rows and writes them sorted by timestamp, so the exported trace is
// non-decreasing in time regardless of generation order. Intended for small
// runs; large layers aggregate their pass events anyway.
struct FileTraceSink::Impl {
  struct Row {
    double t;
    std::string line;
  };
  std::ofstream out;
  std::vector<Row> rows;
};

FileTraceSink::FileTraceSink(const std::string& path) : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out) {
    delete impl_;
    throw ValidationError("cannot open trace file: " + path);
  }
}

FileTraceSink::~FileTraceSink() {
  std::stable_sort(impl_->rows.begin(), impl_->rows.end(),
                   [](const auto& a, const auto& b) { return a.t < b.t; });
  for (const auto& r : impl_->rows) impl_->out << r.line << "\n";
  delete impl_;
}

void FileTraceSink::event(double t, double dur, std::string_view res,
                          std::string_view kind, std::string_view payload) {
  char head[32];
  std::snprintf(head, sizeof head, "%.9e ", t);
  std::string line = head;
  line.append(res);
  line.append(" ");
  line.append(kind);
  char tail[32];
  std::snprintf(tail, sizeof tail, " dur=%.9e", dur);
  line.append(tail);
  if (!payload.empty()) {
    line.append(" ");
    line.append(payload);
  }
  impl_->rows.push_back(Impl::Row{t, std::move(line)});
}

namespace {

// One simulation run: resource clocks, online occupancy audit, event
// counters, and dynamic-energy accumulators. All service orders are fixed by
// generation order, so repeated runs are bit-identical.
class Engine {
 public:
  Engine(const AcceleratorConfig& cfg, const SimOptions& opt, AuditResult* audit)
      : cfg_(cfg),
        opt_(opt),
        audit_(audit),
        n_xpes_(cfg.xpe_count),
        n_tiles_(cfg.tile_count()),
        n_xpcs_(cfg.xpc_count()),
        tau_(cfg.tau_s()) {
    // dense resource ids: xpe | edram | act | pool | bus | router | red | io
    base_edram_ = n_xpes_;
    base_act_ = base_edram_ + n_tiles_;
    base_pool_ = base_act_ + n_tiles_;
    base_bus_ = base_pool_ + n_tiles_;
    base_router_ = base_bus_ + n_tiles_;
    base_red_ = base_router_ + n_tiles_;
    io_rid_ = base_red_ + n_xpcs_;
    clock_.assign(static_cast<std::size_t>(io_rid_) + 1, 0.0);
    audit_end_.assign(clock_.size(), 0.0);
    pca_states_.assign(static_cast<std::size_t>(n_xpes_), pca::PcaState{});
    pca_needs_swap_.assign(static_cast<std::size_t>(n_xpes_), 0);
  }

  int tile_of_xpe(int x) const { return x / cfg_.xpes_per_xpc / cfg_.xpcs_per_tile; }
  int xpc_of_xpe(int x) const { return x / cfg_.xpes_per_xpc; }

  void occupy(int rid, double start, double end, const char* kind,
              const std::string& payload = {}) {
    if (audit_ != nullptr) {
      ++audit_->intervals_checked;
      if (start < audit_end_[static_cast<std::size_t>(rid)]) ++audit_->overlaps;
    }
    if (end > audit_end_[static_cast<std::size_t>(rid)])
      audit_end_[static_cast<std::size_t>(rid)] = end;
    if (end > finish_) finish_ = end;
    if (opt_.trace != nullptr)
      opt_.trace->event(start, end - start, resource_name(rid), kind, payload);
  }

  // Serve one request on a FIFO resource: start when both the request and the
  // resource are ready.
  double chain(int rid, double ready, double dur, const char* kind,
               const std::string& payload = {}) {
    double& free = clock_[static_cast<std::size_t>(rid)];
    const double start = std::max(ready, free);
    const double end = start + dur;
    occupy(rid, start, end, kind, payload);
    free = end;
    return end;
  }

  std::string resource_name(int rid) const {
    auto tag = [](const char* base, int i) {
      return std::string(base) + ":" + std::to_string(i);
    };
    if (rid < base_edram_) return tag("xpe", rid);
    if (rid < base_act_) return tag("edram", rid - base_edram_);
    if (rid < base_pool_) return tag("act", rid - base_act_);
    if (rid < base_bus_) return tag("pool", rid - base_pool_);
    if (rid < base_router_) return tag("bus", rid - base_bus_);
    if (rid < base_red_) return tag("router", rid - base_router_);
    if (rid < io_rid_) return tag("reduce", rid - base_red_);
    return "io:0";
  }

  // Pipeline fill: stage the layer's first operands through eDRAM, bus and
  // router on every tile before the first pass.
  double prologue(double t0) {
    const auto& p = cfg_.peripherals;
    const double bus_lat = p.bus_latency_cycles * tau_;
    const double router_lat = p.router_latency_cycles * tau_;
    for (int t = 0; t < n_tiles_; ++t) {
      chain(base_edram_ + t, t0, p.edram_latency_s, "memory_read");
      chain(base_bus_ + t, t0 + p.edram_latency_s, bus_lat, "transfer");
      chain(base_router_ + t, t0 + p.edram_latency_s + bus_lat, router_lat, "transfer");
    }
    n_memread_ += n_tiles_;
    n_transfer_ += 2LL * n_tiles_;
    return t0 + p.edram_latency_s + bus_lat + router_lat;
  }

  double run_pairs(double t0, long pairs, int s) {
    if (pairs < 1 || s < 1) throw ValidationError("layer must have work");
    const int n = cfg_.xpe_size;
    const int k = static_cast<int>(ceil_div(s, n));
    const bool fine = pairs * k <= opt_.fine_pass_limit;
    const double prep_end = prologue(t0);

    oxg_ops_ += static_cast<double>(pairs) * s;
    n_pass_ += pairs * static_cast<long long>(k);

    if (cfg_.policy == mapping::Policy::oxbnn)
      run_oxbnn(prep_end, pairs, k, fine);
    else
      run_baseline(prep_end, pairs, k, fine);
    return finish_;
  }

  // Swap to the fresh integrator at time t; accumulation resumes once its
  // discharge has finished. Returns the (possibly stalled) resume time.
  double do_swap(int x, double t) {
    const auto sw = pca::swap_integrator(pca_states_[static_cast<std::size_t>(x)],
                                         t, cfg_.pca);
    pca_states_[static_cast<std::size_t>(x)] = sw.state;
    if (sw.stall_s > 0.0) {
      occupy(x, t, t + sw.stall_s, "stall");
      ++n_stall_;
      t += sw.stall_s;
    }
    return t;
  }

  void run_oxbnn(double prep_end, long pairs, int k, bool fine) {
    const auto& p = cfg_.peripherals;
    const int P = cfg_.xpe_count;
    const long alpha = std::max<long>(1, cfg_.pca_capacity.alpha);
    const int segments = static_cast<int>(ceil_div(k, alpha));
    std::vector<double> xpe_time(static_cast<std::size_t>(P), prep_end);

    for (long pr = 0; pr < pairs; ++pr) {
      const int x = static_cast<int>(pr % P);
      double t = xpe_time[static_cast<std::size_t>(x)];

      // a readout pends from this XPE's previous vector: swap first
      if (pca_needs_swap_[static_cast<std::size_t>(x)]) t = do_swap(x, t);

      double last_readout = 0.0;
      for (int g = 0; g < segments; ++g) {
        const int seg_len =
            static_cast<int>(std::min<long>(alpha, k - g * static_cast<long>(alpha)));
        const double seg_end = t + seg_len * tau_;
        if (fine) {
          for (int j = 0; j < seg_len; ++j) {
            occupy(x, t + j * tau_, t + (j + 1) * tau_, "pass",
                   "vec=" + std::to_string(pr) + " slice=" +
                       std::to_string(g * alpha + j));
          }
        } else {
          occupy(x, t, seg_end, "pass");
        }
        occupy(x, seg_end, seg_end, "readout",
               fine ? "vec=" + std::to_string(pr) : std::string());
        ++n_readout_;
        last_readout = seg_end;
        t = seg_end;
        // mid-vector capacity overflow forces an immediate swap
        if (g + 1 < segments) t = do_swap(x, t);
      }
      pca_needs_swap_[static_cast<std::size_t>(x)] = true;
      xpe_time[static_cast<std::size_t>(x)] = t;
      ++n_tuning_eo_;  // weight vector reload for the next assignment

      double ready = last_readout;
      if (segments > 1) {
        // capacity overflow: fold the segment psums on the reduction unit
        const int red = base_red_ + xpc_of_xpe(x);
        ready = chain(red, ready, (segments - 1) * p.reduction_latency_s, "reduction",
                      fine ? "vec=" + std::to_string(pr) : std::string());
        n_reduction_ += segments - 1;
      }
      chain(base_act_ + tile_of_xpe(x), ready, p.activation_latency_s, "activation",
            fine ? "vec=" + std::to_string(pr) : std::string());
      ++n_activation_;
    }
  }

  void run_baseline(double prep_end, long pairs, int k, bool fine) {
    const auto& p = cfg_.peripherals;
    const int P = cfg_.xpe_count;

    for (long pr = 0; pr < pairs; ++pr) {
      const long slot0 = pr * k;
      const int first_xpe = static_cast<int>(slot0 % P);
      const int home_tile = tile_of_xpe(first_xpe);
      double last_write = 0.0;
      double single_ready = 0.0;

      for (int j = 0; j < k; ++j) {
        const long slot = slot0 + j;
        const long row = slot / P;
        const int x = static_cast<int>(slot % P);
        const double ps = prep_end + static_cast<double>(row) * tau_;
        const double pe = prep_end + static_cast<double>(row + 1) * tau_;
        occupy(x, ps, pe, "pass",
               fine ? "vec=" + std::to_string(pr) + " slice=" + std::to_string(j)
                    : std::string());
        ++n_tuning_eo_;  // per-slot weight slice reload
        if (k == 1) {
          single_ready = pe;
        } else {
          // psum spilled to the producing tile's buffer
          const double done = chain(base_edram_ + tile_of_xpe(x), pe,
                                    p.edram_latency_s, "transfer",
                                    fine ? "psum=" + std::to_string(pr) + "." +
                                               std::to_string(j)
                                         : std::string());
          ++n_transfer_;
          last_write = std::max(last_write, done);
        }
      }

      double ready;
      if (k == 1) {
        ready = single_ready;
      } else {
        // gather the psums, then fold them on the reduction network
        double reads_done = last_write;
        for (int j = 0; j < k; ++j) {
          reads_done = chain(base_edram_ + home_tile, reads_done, p.edram_latency_s,
                             "memory_read",
                             fine ? "psum=" + std::to_string(pr) + "." +
                                        std::to_string(j)
                                  : std::string());
        }
        n_memread_ += k;
        const int red = base_red_ + xpc_of_xpe(first_xpe);
        if (fine) {
          double r = reads_done;
          for (int j = 1; j < k; ++j)
            r = chain(red, r, p.reduction_latency_s, "reduction",
                      "vec=" + std::to_string(pr) + " step=" + std::to_string(j));
          ready = r;
        } else {
          ready = chain(red, reads_done, (k - 1) * p.reduction_latency_s, "reduction");
        }
        n_reduction_ += k - 1;
      }
      chain(base_act_ + home_tile, ready, p.activation_latency_s, "activation",
            fine ? "vec=" + std::to_string(pr) : std::string());
      ++n_activation_;
    }
  }

  double run_pool(double t0, const mapping::ConvWorkload& shape) {
    const auto& p = cfg_.peripherals;
    const long items = shape.window_count() * shape.output_channels;
    const bool fine = items <= opt_.fine_pass_limit;
    for (int t = 0; t < n_tiles_; ++t) {
      const long mine = items / n_tiles_ + (t < items % n_tiles_ ? 1 : 0);
      if (mine == 0) continue;
      if (fine) {
        for (long i = 0; i < mine; ++i)
          chain(base_pool_ + t, t0, p.pooling_latency_s, "pooling");
      } else {
        chain(base_pool_ + t, t0, static_cast<double>(mine) * p.pooling_latency_s,
              "pooling");
      }
    }
    n_pooling_ += items;
    return finish_;
  }

  double run_layer(double t0, const workloads::Layer& layer) {
    if (layer.kind == workloads::LayerKind::pool) return run_pool(t0, layer.shape);
    const auto dims = mapping::flatten(layer.shape);
    (void)dims;
    return run_pairs(t0, layer.shape.pair_count(), layer.shape.vector_size());
  }

  double io_event(double t, const char* tag) {
    ++n_io_;
    return chain(io_rid_, t, cfg_.peripherals.io_latency_s, "transfer", tag);
  }

  void charge_model_load() {
    // one-time microheater calibration per XPC, off the data path
    to_tuning_energy_ += cfg_.peripherals.to_tuning_power_W *
                         cfg_.peripherals.to_tuning_latency_s * n_xpcs_;
    n_tuning_to_ += n_xpcs_;
  }

  Metrics finalize(double latency) {
    Metrics m;
    m.latency_s = latency;
    m.fps = 1.0 / latency;

    const auto& p = cfg_.peripherals;
    auto static_energy = [&](double mW, int units) {
      return mW * 1e-3 * units * latency;
    };
    const double laser_optical_W =
        dbm_to_watts(cfg_.laser_power_per_wavelength_dBm) * cfg_.xpe_size * n_xpcs_;
    m.energy_breakdown["laser"] = laser_optical_W / cfg_.link.wall_plug_efficiency * latency;
    m.energy_breakdown["oxg_dynamic"] = oxg_ops_ * cfg_.oxg_energy_per_op_J;
    m.energy_breakdown["edram"] = static_energy(p.edram_power_mW, n_tiles_);
    m.energy_breakdown["bus"] = static_energy(p.bus_power_mW, n_tiles_);
    m.energy_breakdown["router"] = static_energy(p.router_power_mW, n_tiles_);
    m.energy_breakdown["activation"] = static_energy(p.activation_power_mW, n_tiles_);
    m.energy_breakdown["pooling"] = static_energy(p.pooling_power_mW, n_tiles_);
    m.energy_breakdown["io"] = static_energy(p.io_power_mW, 1);
    if (cfg_.policy == mapping::Policy::baseline)
      m.energy_breakdown["reduction_network"] = static_energy(p.reduction_power_mW, n_xpcs_);
    m.energy_breakdown["eo_tuning"] =
        static_cast<double>(n_tuning_eo_) * p.eo_tuning_power_W * p.eo_tuning_latency_s;
    m.energy_breakdown["to_tuning"] = to_tuning_energy_;

    m.total_power_W = m.total_energy_J() / latency;
    m.fps_per_watt = m.fps / m.total_power_W;

    auto put = [&](const char* kind, long long v) {
      if (v != 0) m.events_by_kind[kind] = v;
    };
    put("pass", n_pass_);
    put("readout", n_readout_);
    put("memory_read", n_memread_);
    put("transfer", n_transfer_);
    put("reduction", n_reduction_);
    put("activation", n_activation_);
    put("pooling", n_pooling_);
    put("stall", n_stall_);
    put("tuning", n_tuning_eo_ + n_tuning_to_);
    put("io", n_io_);
    m.event_count = 0;
    for (const auto& [k, v] : m.events_by_kind) m.event_count += v;
    return m;
  }

  double finish() const { return finish_; }

 private:
  const AcceleratorConfig& cfg_;
  const SimOptions& opt_;
  AuditResult* audit_;
  int n_xpes_, n_tiles_, n_xpcs_;
  double tau_;
  int base_edram_ = 0, base_act_ = 0, base_pool_ = 0, base_bus_ = 0,
      base_router_ = 0, base_red_ = 0, io_rid_ = 0;
  std::vector<double> clock_;
  std::vector<double> audit_end_;
  std::vector<pca::PcaState> pca_states_;
  std::vector<char> pca_needs_swap_;
  double finish_ = 0.0;
  double oxg_ops_ = 0.0;
  double to_tuning_energy_ = 0.0;
  long long n_pass_ = 0, n_readout_ = 0, n_memread_ = 0, n_transfer_ = 0,
            n_reduction_ = 0, n_activation_ = 0, n_pooling_ = 0, n_stall_ = 0,
            n_tuning_eo_ = 0, n_tuning_to_ = 0, n_io_ = 0;
};

}  // namespace

Metrics simulate_pairs(long pairs, int s, const AcceleratorConfig& config,
                       const SimOptions& options, AuditResult* audit) {
  config.validate();
  Engine eng(config, options, audit);
  const double end = eng.run_pairs(0.0, pairs, s);
  return eng.finalize(end);
}

Metrics simulate_layer(const workloads::Layer& layer, const AcceleratorConfig& config,
                       const SimOptions& options, AuditResult* audit) {
  config.validate();
  Engine eng(config, options, audit);
  const double end = eng.run_layer(0.0, layer);
  return eng.finalize(end);
}

Metrics simulate_network(const workloads::ModelSpec& model,
                         const AcceleratorConfig& config, const SimOptions& options,
                         AuditResult* audit) {
  config.validate();
  model.validate();
  Engine eng(config, options, audit);
  eng.charge_model_load();
  double t = eng.io_event(0.0, "io_in");
  for (const auto& layer : model.layers) t = eng.run_layer(t, layer);
  t = eng.io_event(t, "io_out");
  return eng.finalize(t);
}

std::string metrics_csv_header() {
  return "config,workload,latency_s,fps,power_w,fps_per_w";
}

std::string metrics_csv_row(const std::string& config, const std::string& workload,
                            const Metrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%s,%.9e,%.9e,%.9e,%.9e", config.c_str(),
                workload.c_str(), m.latency_s, m.fps, m.total_power_W,
                m.fps_per_watt);
  return buf;
}

}  // namespace oxbnn::archsim
