#pragma once

#include <optional>

#include "oxbnn/common.hpp"
#include "oxbnn/link_budget.hpp"

// Photo-Charge Accumulator model: photocurrent, linear capacitor charging per
// detected '1', capacity limits (gamma in ones, alpha in whole vector slices),
// the dual time-integrating-receiver swap, and threshold readout.
namespace oxbnn::pca {

struct PcaParams {
  double capacitance = 10e-12;        // F
  double tir_gain = 50.0;
  double dynamic_range_volts = 5.0;
  double v_ref_volts = 2.5;           // dynamic range / 2
  double responsivity = 1.2;          // A/W
  double pulse_width_s = 20e-12;      // 1/DR
  // Effective output-voltage increment per detected '1'. Unset means
  // calibrated per datarate so the published capacity table is reproduced.
  std::optional<double> charge_per_one;
  // Unset means one PASS period (pulse_width_s); swaps are then free whenever
  // a vector spans at least one pass.
  std::optional<double> discharge_latency_s;

  void validate() const;
  double resolved_discharge_latency_s() const {
    return discharge_latency_s.value_or(pulse_width_s);
  }
};

struct PcaCapacity {
  long gamma = 0;  // max accumulable '1's
  long alpha = 0;  // max whole vector slices, floor(gamma / n)
  int n = 0;       // XPE size
};

struct PcaState {
  long accumulated_ones = 0;
  double output_volts = 0.0;
  int active_integrator = 1;  // 1 or 2
  bool saturated = false;
  // Discharge bookkeeping for the inactive integrator and a per-integrator
  // tally of everything ever counted (conservation across swaps).
  double inactive_ready_at_s = 0.0;
  long integrator_ones[2] = {0, 0};
};

struct AccumulateResult {
  PcaState state;
  long rejected_ones = 0;       // overflow beyond gamma, not counted
  bool saturation_event = false;  // accumulation phase ended this step
};

struct SwapResult {
  PcaState state;
  double stall_s = 0.0;  // wait for the incoming integrator's discharge
};

// i = R_s * P.
double photocurrent(double optical_power_watts, double responsivity);

// dV = i * dt / C.
double charge_step(double current_amperes, double pulse_width_s,
                   double capacitance_farads);

// Voltage increment per '1' used by accumulate/readout: the calibrated
// override when set, otherwise dynamic range spread over the capacity gamma.
double resolved_charge_per_one(const PcaParams& params, const PcaCapacity& cap);

// Capacity for XPE size n at the given datarate. Table mode returns the
// published gamma; analytic mode derives gamma from the dynamic range and the
// (possibly calibrated) charge per one. Both enforce alpha = floor(gamma/n).
PcaCapacity capacity(const PcaParams& params, int n, double datarate_GSps,
                     linkbudget::Mode mode);

// Counts ones_in_pass into the active integrator. Throws UsageError when the
// state is already saturated; ones beyond gamma are rejected and reported.
AccumulateResult accumulate(const PcaState& state, long ones_in_pass,
                            const PcaCapacity& cap, const PcaParams& params);

// Toggles integrators at time now_s. The retiring integrator starts its
// discharge; if the incoming one is still discharging, the result carries the
// remaining wait as stall_s.
SwapResult swap_integrator(const PcaState& state, double now_s,
                           const PcaParams& params);

// 1 if the accrued voltage exceeds v_ref, else 0 (tie maps to 0).
int readout(const PcaState& state, const PcaParams& params);

}  // namespace oxbnn::pca
