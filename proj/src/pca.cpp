#include "oxbnn/pca.hpp"

#include <algorithm>
#include <cmath>

namespace oxbnn::pca {

void PcaParams::validate() const {
  if (capacitance <= 0 || tir_gain <= 0 || dynamic_range_volts <= 0 ||
      v_ref_volts <= 0 || responsivity <= 0 || pulse_width_s <= 0)
    throw ValidationError("PCA parameters must be strictly positive");
  if (v_ref_volts > dynamic_range_volts)
    throw ValidationError("v_ref must not exceed the dynamic range");
  if (charge_per_one && *charge_per_one <= 0)
    throw ValidationError("charge_per_one must be positive");
  if (discharge_latency_s && *discharge_latency_s < 0)
    throw ValidationError("discharge latency must be non-negative");
}

double photocurrent(double optical_power_watts, double responsivity) {
  if (optical_power_watts < 0)
    throw ValidationError("optical power must be non-negative");
  return responsivity * optical_power_watts;
}

double charge_step(double current_amperes, double pulse_width_s,
                   double capacitance_farads) {
  if (current_amperes <= 0 || pulse_width_s <= 0 || capacitance_farads <= 0)
    throw ValidationError("charge_step arguments must be positive");
  return current_amperes * pulse_width_s / capacitance_farads;
}

double resolved_charge_per_one(const PcaParams& params, const PcaCapacity& cap) {
  if (params.charge_per_one) return *params.charge_per_one;
  return params.dynamic_range_volts / static_cast<double>(cap.gamma);
}

PcaCapacity capacity(const PcaParams& params, int n, double datarate_GSps,
                     linkbudget::Mode mode) {
  params.validate();
  if (n < 1) throw ValidationError("XPE size must be positive");

  long gamma;
  if (mode == linkbudget::Mode::table) {
    const auto* row = linkbudget::find_table_row(datarate_GSps);
    if (row == nullptr)
      throw ValidationError("no published capacity row for this datarate");
    gamma = row->gamma;
  } else {
    double cpo;
    if (params.charge_per_one) {
      cpo = *params.charge_per_one;
    } else {
      const auto* row = linkbudget::find_table_row(datarate_GSps);
      if (row == nullptr)
        throw ValidationError("analytic capacity needs charge_per_one or a published datarate");
      cpo = params.dynamic_range_volts / static_cast<double>(row->gamma);
    }
    // Epsilon before the floor so a calibrated cpo reproduces table gamma
    // despite the round trip through division.
    gamma = static_cast<long>(std::floor(params.dynamic_range_volts / cpo + 1e-9));
  }
  if (gamma < 1) throw ValidationError("capacity gamma must be positive");
  return PcaCapacity{gamma, gamma / n, n};
}

AccumulateResult accumulate(const PcaState& state, long ones_in_pass,
                            const PcaCapacity& cap, const PcaParams& params) {
  if (ones_in_pass < 0) throw ValidationError("ones_in_pass must be non-negative");
  if (ones_in_pass > cap.n)
    throw ValidationError("a pass cannot carry more ones than the XPE size");
  if (state.saturated)
    throw UsageError("accumulating into a saturated integrator; swap first");

  AccumulateResult r;
  r.state = state;
  const long room = cap.gamma - state.accumulated_ones;
  const long accepted = std::min(ones_in_pass, room);
  r.rejected_ones = ones_in_pass - accepted;
  r.state.accumulated_ones += accepted;
  r.state.integrator_ones[state.active_integrator - 1] += accepted;
  r.state.output_volts =
      static_cast<double>(r.state.accumulated_ones) * resolved_charge_per_one(params, cap);
  if (r.state.accumulated_ones >= cap.gamma) {
    r.state.saturated = true;
    r.saturation_event = true;
  }
  return r;
}

SwapResult swap_integrator(const PcaState& state, double now_s,
                           const PcaParams& params) {
  params.validate();
  SwapResult r;
  r.stall_s = std::max(0.0, state.inactive_ready_at_s - now_s);
  r.state = state;
  r.state.active_integrator = state.active_integrator == 1 ? 2 : 1;
  r.state.accumulated_ones = 0;
  r.state.output_volts = 0.0;
  r.state.saturated = false;
  // The retiring integrator begins discharging once the swap completes.
  r.state.inactive_ready_at_s =
      now_s + r.stall_s + params.resolved_discharge_latency_s();
  return r;
}

int readout(const PcaState& state, const PcaParams& params) {
  return state.output_volts > params.v_ref_volts ? 1 : 0;
}

}  // namespace oxbnn::pca
