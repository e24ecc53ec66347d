#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "oxbnn/archsim.hpp"
#include "oxbnn/report.hpp"

using namespace oxbnn;
using namespace oxbnn::archsim;

namespace {

// In-memory sink collecting (t, dur, resource, kind) tuples.
class VectorTraceSink final : public TraceSink {
 public:
  struct Row {
    double t, dur;
    std::string resource, kind, payload;
  };
  std::vector<Row> rows;

  void event(double t, double dur, std::string_view res, std::string_view kind,
             std::string_view payload) override {
    rows.push_back(Row{t, dur, std::string(res), std::string(kind),
                       std::string(payload)});
  }

  long count(const std::string& kind) const {
    long n = 0;
    for (const auto& r : rows) n += r.kind == kind;
    return n;
  }
};

AcceleratorConfig small_config(mapping::Policy policy, int n, int xpes, double dr,
                               bool zero_peripherals) {
  std::map<std::string, std::string> ov = {
      {"xpe_size", std::to_string(n)},
      {"xpe_count", std::to_string(xpes)},
      {"xpes_per_xpc", std::to_string(xpes)},
      {"datarate_GSps", std::to_string(dr)},
      {"policy", policy == mapping::Policy::oxbnn ? "oxbnn" : "baseline"},
  };
  if (zero_peripherals) {
    ov["peripherals.edram_latency_s"] = "0";
    ov["peripherals.bus_latency_cycles"] = "0";
    ov["peripherals.router_latency_cycles"] = "0";
    ov["peripherals.io_latency_s"] = "0";
  }
  return build_config("custom", ov);
}

workloads::Layer conv_layer(int in, int c, int k, int f, int stride, int pad) {
  workloads::Layer l;
  l.kind = workloads::LayerKind::conv;
  l.shape = mapping::ConvWorkload{in, in, c, k, k, f, stride, pad};
  return l;
}

}  // namespace

TEST_CASE("built-in configurations match the published variants") {
  const auto ox50 = build_config("OXBNN_50");
  CHECK(ox50.xpe_size == 19);
  CHECK(ox50.datarate_GSps == 50.0);
  CHECK(ox50.xpe_count == 1123);
  CHECK(ox50.policy == mapping::Policy::oxbnn);
  CHECK(ox50.pca_capacity.gamma == 8503);
  CHECK(ox50.pca_capacity.alpha == 447);
  CHECK(ox50.xpes_per_xpc == 19);  // M = N
  CHECK(ox50.oxg_energy_per_op_J == 0.032e-9);

  const auto ox5 = build_config("OXBNN_5");
  CHECK(ox5.xpe_size == 53);
  CHECK(ox5.datarate_GSps == 5.0);
  CHECK(ox5.xpe_count == 100);
  CHECK(ox5.pca_capacity.gamma == 29761);
  CHECK(ox5.pca_capacity.alpha == 561);

  const auto robin_eo = build_config("ROBIN_EO");
  CHECK(robin_eo.xpe_size == 10);
  CHECK(robin_eo.xpe_count == 916);
  CHECK(robin_eo.policy == mapping::Policy::baseline);
  CHECK(robin_eo.datarate_GSps == 5.0);

  const auto robin_po = build_config("ROBIN_PO");
  CHECK(robin_po.xpe_size == 50);
  CHECK(robin_po.xpe_count == 183);

  const auto lb = build_config("LIGHTBULB");
  CHECK(lb.xpe_size == 16);
  CHECK(lb.xpe_count == 1139);
  CHECK(lb.datarate_GSps == 50.0);

  // custom passthrough of overrides
  const auto custom = build_config("custom", {{"xpe_size", "9"},
                                              {"xpes_per_xpc", "2"},
                                              {"xpe_count", "2"}});
  CHECK(custom.xpe_size == 9);
  CHECK(custom.xpes_per_xpc == 2);

  CHECK_THROWS_AS(build_config("UNKNOWN_ACCEL"), ValidationError);
  CHECK_THROWS_AS(build_config("custom", {{"bogus_key", "1"}}), ValidationError);
}

TEST_CASE("config files load section by section") {
  const std::string path = "archsim_test.cfg";
  {
    std::ofstream out(path);
    out << "[accelerator]\n"
        << "name = demo\n"
        << "datarate_GSps = 10\n"
        << "xpe_size = 39\n"
        << "xpe_count = 78\n"
        << "policy = oxbnn\n"
        << "[peripherals]\n"
        << "reduction_latency_s = 1e-9\n"
        << "[link]\n"
        << "il_ec_dB = 2.0\n"
        << "[pca]\n"
        << "discharge_latency_s = 1e-9\n";
  }
  const auto cfg = load_config_file(path);
  CHECK(cfg.name == "demo");
  CHECK(cfg.xpe_size == 39);
  CHECK(cfg.pca_capacity.gamma == 19841);  // table capacity at 10 GS/s
  CHECK(cfg.peripherals.reduction_latency_s == 1e-9);
  CHECK(cfg.link.il_ec_dB == 2.0);
  CHECK(cfg.pca.discharge_latency_s == 1e-9);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_config_file("missing.cfg"), ValidationError);
}

TEST_CASE("one-pass critical path: latency is tau plus activation") {
  const auto cfg = small_config(mapping::Policy::oxbnn, 9, 1, 5.0, true);
  const auto m = simulate_pairs(1, 9, cfg);
  CHECK(m.latency_s ==
        doctest::Approx(cfg.tau_s() + cfg.peripherals.activation_latency_s)
            .epsilon(1e-12));
  CHECK(m.fps == doctest::Approx(1.0 / m.latency_s).epsilon(1e-12));
}

TEST_CASE("243 consecutive passes fill the accumulator before readout") {
  auto cfg = small_config(mapping::Policy::oxbnn, 19, 1, 50.0, true);
  VectorTraceSink sink;
  SimOptions opt;
  opt.trace = &sink;
  AuditResult audit;
  const auto m = simulate_pairs(1, 4608, cfg, opt, &audit);

  std::vector<VectorTraceSink::Row> passes;
  double readout_t = -1;
  for (const auto& r : sink.rows) {
    if (r.kind == "pass") passes.push_back(r);
    if (r.kind == "readout") readout_t = r.t;
  }
  REQUIRE(passes.size() == 243);
  const double tau = cfg.tau_s();
  for (std::size_t i = 0; i < passes.size(); ++i) {
    CHECK(passes[i].dur == doctest::Approx(tau).epsilon(1e-12));
    if (i > 0) CHECK(passes[i].t == passes[i - 1].t + passes[i - 1].dur);
  }
  const double span = passes.back().t + passes.back().dur - passes.front().t;
  CHECK(span == doctest::Approx(243 * tau).epsilon(1e-12));
  CHECK(span == doctest::Approx(4.86e-9).epsilon(1e-12));
  CHECK(readout_t == doctest::Approx(passes.back().t + tau).epsilon(1e-12));
  CHECK(audit.clean());
  CHECK(m.events_by_kind.at("pass") == 243);
}

TEST_CASE("baseline pays one reduction per final result; oxbnn pays none") {
  // two vectors of S=15 on two N=9 XPEs
  auto base_cfg = small_config(mapping::Policy::baseline, 9, 2, 5.0, false);
  VectorTraceSink sink;
  SimOptions opt;
  opt.trace = &sink;
  const auto base = simulate_pairs(2, 15, base_cfg, opt);
  CHECK(base.events_by_kind.at("reduction") == 2);
  long reductions = 0;
  for (const auto& r : sink.rows) {
    if (r.kind == "reduction") {
      ++reductions;
      CHECK(r.dur == doctest::Approx(3.125e-9).epsilon(1e-12));
    }
  }
  CHECK(reductions == 2);

  auto ox_cfg = small_config(mapping::Policy::oxbnn, 9, 2, 5.0, false);
  const auto ox = simulate_pairs(2, 15, ox_cfg);
  CHECK(ox.events_by_kind.count("reduction") == 0);

  // psum accounting against the schedule
  const auto sched = mapping::schedule_baseline(2, 15, base_cfg.xpe_count, 9);
  CHECK(base.events_by_kind.at("reduction") ==
        static_cast<long long>(sched.reduction_ops.size()));
}

TEST_CASE("simulation is deterministic") {
  const auto cfg = build_config("OXBNN_50");
  const auto layer = conv_layer(14, 64, 3, 32, 1, 1);
  const auto a = simulate_layer(layer, cfg);
  const auto b = simulate_layer(layer, cfg);
  CHECK(metrics_csv_row(cfg.name, "layer", a) == metrics_csv_row(cfg.name, "layer", b));
  CHECK(a.event_count == b.event_count);
}

TEST_CASE("energy breakdown is additive and powers the totals") {
  const auto cfg = build_config("OXBNN_50");
  const auto m = simulate_layer(conv_layer(14, 64, 3, 32, 1, 1), cfg);
  double sum = 0;
  for (const auto& [k, v] : m.energy_breakdown) sum += v;
  CHECK(m.total_power_W * m.latency_s == doctest::Approx(sum).epsilon(1e-9));
  CHECK(m.fps_per_watt == doctest::Approx(m.fps / m.total_power_W).epsilon(1e-12));
  // dynamic gate energy equals bit-ops times the per-op energy
  const auto layer = conv_layer(14, 64, 3, 32, 1, 1);
  const double bitops = static_cast<double>(layer.shape.pair_count()) *
                        layer.shape.vector_size();
  CHECK(m.energy_breakdown.at("oxg_dynamic") ==
        doctest::Approx(bitops * 0.032e-9).epsilon(1e-12));
}

TEST_CASE("the audit sees no overlapping occupancies") {
  AuditResult audit;
  const auto cfg = build_config("LIGHTBULB");
  simulate_layer(conv_layer(14, 64, 3, 32, 1, 1), cfg, {}, &audit);
  CHECK(audit.intervals_checked > 0);
  CHECK(audit.clean());
}

TEST_CASE("more XPEs never increase latency") {
  double prev = 1e18;
  for (int xpes : {1, 2, 4, 8, 16}) {
    const auto cfg = small_config(mapping::Policy::oxbnn, 9, xpes, 5.0, false);
    const auto m = simulate_pairs(64, 45, cfg);
    CHECK(m.latency_s <= prev);
    prev = m.latency_s;
  }
  prev = 1e18;
  for (int xpes : {1, 2, 4, 8, 16}) {
    const auto cfg = small_config(mapping::Policy::baseline, 9, xpes, 5.0, false);
    const auto m = simulate_pairs(64, 45, cfg);
    CHECK(m.latency_s <= prev);
    prev = m.latency_s;
  }
}

TEST_CASE("network composition: IO events and layer duplication") {
  const auto cfg = build_config("OXBNN_50");

  workloads::ModelSpec one;
  one.name = "one";
  one.layers = {conv_layer(8, 4, 3, 4, 1, 1)};
  const auto net = simulate_network(one, cfg);
  const auto single = simulate_layer(one.layers.front(), cfg);
  CHECK(net.latency_s == doctest::Approx(single.latency_s +
                                         2 * cfg.peripherals.io_latency_s)
                             .epsilon(1e-12));
  CHECK(net.events_by_kind.at("io") == 2);
  CHECK(net.events_by_kind.at("tuning") >= cfg.xpc_count());

  // duplicating a layer doubles the compute-event count (8x8x4 conv with
  // stride 1 and padding 1 preserves its own shape, so the chain holds)
  workloads::ModelSpec two = one;
  two.layers.push_back(one.layers.front());
  const auto dbl = simulate_network(two, cfg);
  CHECK(dbl.events_by_kind.at("pass") == 2 * net.events_by_kind.at("pass"));
}

TEST_CASE("integrator swap stalls appear when discharge outlasts a round") {
  // k = 1 rounds of tau each against a 100 ns discharge: from the third
  // round on, every swap waits discharge minus round
  auto cfg = build_config("custom", {{"xpe_size", "9"},
                                     {"xpe_count", "1"},
                                     {"xpes_per_xpc", "1"},
                                     {"datarate_GSps", "5"},
                                     {"policy", "oxbnn"},
                                     {"pca.discharge_latency_s", "100e-9"},
                                     {"peripherals.edram_latency_s", "0"},
                                     {"peripherals.bus_latency_cycles", "0"},
                                     {"peripherals.router_latency_cycles", "0"}});
  VectorTraceSink sink;
  SimOptions opt;
  opt.trace = &sink;
  const auto m = simulate_pairs(3, 9, cfg, opt);
  const double tau = cfg.tau_s();

  std::vector<VectorTraceSink::Row> stalls;
  for (const auto& r : sink.rows)
    if (r.kind == "stall") stalls.push_back(r);
  REQUIRE(stalls.size() == 1);  // pair 2 waits for integrator 1's discharge
  CHECK(stalls[0].dur == doctest::Approx(100e-9 - tau).epsilon(1e-9));
  CHECK(m.events_by_kind.at("stall") == 1);

  // with the default (one pass period) discharge, steady alternation is free
  auto free_cfg = small_config(mapping::Policy::oxbnn, 9, 1, 5.0, true);
  const auto free_run = simulate_pairs(8, 9, free_cfg);
  CHECK(free_run.events_by_kind.count("stall") == 0);
}

TEST_CASE("comparison report ratios and geometric means") {
  Metrics a, b;
  a.fps = 2.0;
  a.fps_per_watt = 1.0;
  b.fps = 8.0;
  b.fps_per_watt = 1.0;
  Metrics base_a = a, base_b = b;
  base_a.fps = 1.0;
  base_b.fps = 1.0;

  report::MetricsTable table;
  table["subject"]["w1"] = a;
  table["subject"]["w2"] = b;
  table["base"]["w1"] = base_a;
  table["base"]["w2"] = base_b;

  const auto rep = report::compare(table, "subject");
  REQUIRE(rep.summaries.size() == 1);
  CHECK(rep.summaries[0].gmean_fps_ratio == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(rep.summaries[0].gmean_fps_per_watt_ratio ==
        doctest::Approx(1.0).epsilon(1e-12));

  // identical metrics: all ratios are 1
  report::MetricsTable same;
  same["x"]["w"] = a;
  same["y"]["w"] = a;
  const auto rep2 = report::compare(same, "x");
  CHECK(rep2.rows[0].fps_ratio == doctest::Approx(1.0).epsilon(1e-12));

  // mismatched workload sets are rejected
  report::MetricsTable bad;
  bad["x"]["w1"] = a;
  bad["y"]["w2"] = a;
  CHECK_THROWS_AS(report::compare(bad, "x"), ValidationError);
}

TEST_CASE("metrics CSV schema is stable") {
  CHECK(metrics_csv_header() == "config,workload,latency_s,fps,power_w,fps_per_w");
  Metrics m;
  m.latency_s = 0.5;
  m.fps = 2.0;
  m.total_power_W = 4.0;
  m.fps_per_watt = 0.5;
  CHECK(metrics_csv_row("c", "w", m) ==
        "c,w,5.000000000e-01,2.000000000e+00,4.000000000e+00,5.000000000e-01");
}
