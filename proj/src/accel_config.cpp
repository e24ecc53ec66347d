#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "oxbnn/archsim.hpp"

namespace oxbnn::archsim {

namespace {

std::string normalize(std::string s) {
  for (char& c : s) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    if (c == '-') c = '_';
  }
  return s;
}

// Per-wavelength laser requirement for this geometry at its datarate, from
// the link-budget equation with the table-fitted calibration.
double default_laser_dBm(int n, int m, double dr_GSps,
                         const linkbudget::LinkBudgetParams& link) {
  const auto* row = linkbudget::find_table_row(dr_GSps);
  linkbudget::LinkBudgetParams p = link;
  if (!p.calibration_offset_dB) {
    p.calibration_offset_dB = row != nullptr
                                  ? linkbudget::fitted_calibration_offset_dB(dr_GSps)
                                  : linkbudget::default_analytic_offset_dB();
  }
  const double pd = row != nullptr
                        ? row->pd_dBm
                        : linkbudget::solve_pd_sensitivity(dr_GSps * 1e9, 1.0, p);
  return linkbudget::required_laser_power_dBm(n, m, pd, p);
}

struct BuiltinDef {
  const char* name;
  double dr_GSps;
  int n;
  int xpes;
  mapping::Policy policy;
  double oxg_energy_J;  // baselines use two resonators per gate
};

// Area-proportionate accelerator variants.
const BuiltinDef kBuiltins[] = {
    {"OXBNN_5", 5.0, 53, 100, mapping::Policy::oxbnn, 0.032e-9},
    {"OXBNN_50", 50.0, 19, 1123, mapping::Policy::oxbnn, 0.032e-9},
    {"ROBIN_PO", 5.0, 50, 183, mapping::Policy::baseline, 2 * 0.032e-9},
    {"ROBIN_EO", 5.0, 10, 916, mapping::Policy::baseline, 2 * 0.032e-9},
    {"LIGHTBULB", 50.0, 16, 1139, mapping::Policy::baseline, 2 * 0.032e-9},
};

void finalize(AcceleratorConfig& cfg, bool laser_overridden) {
  if (cfg.xpes_per_xpc == 0) cfg.xpes_per_xpc = cfg.xpe_size;  // M = N
  cfg.pca.pulse_width_s = cfg.tau_s();
  if (cfg.pca_capacity.gamma == 0) {
    if (cfg.policy == mapping::Policy::oxbnn) {
      cfg.pca_capacity =
          pca::capacity(cfg.pca, cfg.xpe_size, cfg.datarate_GSps, linkbudget::Mode::table);
    } else {
      // Baseline bitcount circuits read out every pass; capacity is unused.
      cfg.pca_capacity = pca::PcaCapacity{cfg.xpe_size, 1, cfg.xpe_size};
    }
  }
  if (!laser_overridden) {
    cfg.laser_power_per_wavelength_dBm =
        default_laser_dBm(cfg.xpe_size, cfg.xpes_per_xpc, cfg.datarate_GSps, cfg.link);
  }
  cfg.validate();
}

using Setter = std::function<void(AcceleratorConfig&, const std::string&)>;

double to_double(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ValidationError("bad numeric value for " + key + ": " + v);
  }
  if (pos != v.size()) throw ValidationError("bad numeric value for " + key + ": " + v);
  return d;
}

long to_long(const std::string& v, const std::string& key) {
  const double d = to_double(v, key);
  if (d != std::floor(d)) throw ValidationError(key + " must be an integer");
  return static_cast<long>(d);
}

bool apply_accelerator_key(AcceleratorConfig& cfg, const std::string& key,
                           const std::string& value, bool& laser_overridden) {
  if (key == "name") cfg.name = value;
  else if (key == "datarate_GSps") cfg.datarate_GSps = to_double(value, key);
  else if (key == "xpe_size") cfg.xpe_size = static_cast<int>(to_long(value, key));
  else if (key == "xpe_count") cfg.xpe_count = static_cast<int>(to_long(value, key));
  else if (key == "xpes_per_xpc") cfg.xpes_per_xpc = static_cast<int>(to_long(value, key));
  else if (key == "xpcs_per_tile") cfg.xpcs_per_tile = static_cast<int>(to_long(value, key));
  else if (key == "policy") {
    if (value == "oxbnn") cfg.policy = mapping::Policy::oxbnn;
    else if (value == "baseline") cfg.policy = mapping::Policy::baseline;
    else throw ValidationError("policy must be oxbnn or baseline");
  } else if (key == "oxg_energy_per_op_J") cfg.oxg_energy_per_op_J = to_double(value, key);
  else if (key == "oxg_area_mm2") cfg.oxg_area_mm2 = to_double(value, key);
  else if (key == "laser_power_per_wavelength_dBm") {
    cfg.laser_power_per_wavelength_dBm = to_double(value, key);
    laser_overridden = true;
  } else if (key == "pca_gamma") {
    cfg.pca_capacity.gamma = to_long(value, key);
    cfg.pca_capacity.n = cfg.xpe_size;
    cfg.pca_capacity.alpha = cfg.pca_capacity.gamma / std::max(1, cfg.xpe_size);
  } else {
    return false;
  }
  return true;
}

bool apply_peripheral_key(PeripheralParams& p, const std::string& key,
                          const std::string& value) {
  auto d = [&]() { return to_double(value, key); };
  if (key == "reduction_power_mW") p.reduction_power_mW = d();
  else if (key == "reduction_latency_s") p.reduction_latency_s = d();
  else if (key == "reduction_area_mm2") p.reduction_area_mm2 = d();
  else if (key == "activation_power_mW") p.activation_power_mW = d();
  else if (key == "activation_latency_s") p.activation_latency_s = d();
  else if (key == "activation_area_mm2") p.activation_area_mm2 = d();
  else if (key == "io_power_mW") p.io_power_mW = d();
  else if (key == "io_latency_s") p.io_latency_s = d();
  else if (key == "io_area_mm2") p.io_area_mm2 = d();
  else if (key == "pooling_power_mW") p.pooling_power_mW = d();
  else if (key == "pooling_latency_s") p.pooling_latency_s = d();
  else if (key == "pooling_area_mm2") p.pooling_area_mm2 = d();
  else if (key == "edram_power_mW") p.edram_power_mW = d();
  else if (key == "edram_latency_s") p.edram_latency_s = d();
  else if (key == "edram_area_mm2") p.edram_area_mm2 = d();
  else if (key == "bus_power_mW") p.bus_power_mW = d();
  else if (key == "bus_latency_cycles") p.bus_latency_cycles = static_cast<int>(to_long(value, key));
  else if (key == "bus_area_mm2") p.bus_area_mm2 = d();
  else if (key == "router_power_mW") p.router_power_mW = d();
  else if (key == "router_latency_cycles") p.router_latency_cycles = static_cast<int>(to_long(value, key));
  else if (key == "router_area_mm2") p.router_area_mm2 = d();
  else if (key == "eo_tuning_power_W") p.eo_tuning_power_W = d();
  else if (key == "eo_tuning_latency_s") p.eo_tuning_latency_s = d();
  else if (key == "to_tuning_power_W") p.to_tuning_power_W = d();
  else if (key == "to_tuning_latency_s") p.to_tuning_latency_s = d();
  else return false;
  return true;
}

bool apply_pca_key(pca::PcaParams& p, const std::string& key, const std::string& value) {
  if (key == "capacitance") p.capacitance = to_double(value, key);
  else if (key == "tir_gain") p.tir_gain = to_double(value, key);
  else if (key == "dynamic_range_volts") p.dynamic_range_volts = to_double(value, key);
  else if (key == "v_ref_volts") p.v_ref_volts = to_double(value, key);
  else if (key == "responsivity") p.responsivity = to_double(value, key);
  else if (key == "charge_per_one") p.charge_per_one = to_double(value, key);
  else if (key == "discharge_latency_s") p.discharge_latency_s = to_double(value, key);
  else return false;
  return true;
}

void apply_key(AcceleratorConfig& cfg, const std::string& section, const std::string& key,
               const std::string& value, bool& laser_overridden) {
  if (section == "accelerator") {
    if (!apply_accelerator_key(cfg, key, value, laser_overridden))
      throw ValidationError("unknown [accelerator] key: " + key);
  } else if (section == "peripherals") {
    if (!apply_peripheral_key(cfg.peripherals, key, value))
      throw ValidationError("unknown [peripherals] key: " + key);
  } else if (section == "link") {
    linkbudget::apply_param_override(cfg.link, key, value);
  } else if (section == "pca") {
    if (!apply_pca_key(cfg.pca, key, value))
      throw ValidationError("unknown [pca] key: " + key);
  } else {
    throw ValidationError("unknown config section: [" + section + "]");
  }
}

}  // namespace

void AcceleratorConfig::validate() const {
  if (datarate_GSps <= 0) throw ValidationError("datarate must be positive");
  if (xpe_size < 1 || xpe_count < 1 || xpes_per_xpc < 1 || xpcs_per_tile < 1)
    throw ValidationError("accelerator geometry must be positive");
  if (oxg_energy_per_op_J < 0) throw ValidationError("gate energy must be non-negative");
  if (policy == mapping::Policy::oxbnn && pca_capacity.gamma < 1)
    throw ValidationError("oxbnn policy needs a positive PCA capacity");
  pca.validate();
  link.validate();
}

const std::vector<std::string>& builtin_config_names() {
  static const std::vector<std::string> names = {"OXBNN_5", "OXBNN_50", "ROBIN_PO",
                                                 "ROBIN_EO", "LIGHTBULB"};
  return names;
}

AcceleratorConfig build_config(const std::string& variant,
                               const std::map<std::string, std::string>& overrides) {
  AcceleratorConfig cfg;
  const std::string key = normalize(variant);
  bool laser_overridden = false;

  if (key != "CUSTOM") {
    const BuiltinDef* def = nullptr;
    for (const auto& b : kBuiltins)
      if (key == b.name) def = &b;
    if (def == nullptr) throw ValidationError("unknown accelerator variant: " + variant);
    cfg.name = def->name;
    cfg.datarate_GSps = def->dr_GSps;
    cfg.xpe_size = def->n;
    cfg.xpe_count = def->xpes;
    cfg.policy = def->policy;
    cfg.oxg_energy_per_op_J = def->oxg_energy_J;
  } else {
    cfg.name = "custom";
    // sensible small defaults; overrides refine them
    cfg.datarate_GSps = 50.0;
    cfg.xpe_size = 19;
    cfg.xpe_count = 1;
  }

  for (const auto& [k, v] : overrides) {
    // flat override keys address the [accelerator] section; dotted keys pick
    // a section explicitly, e.g. "pca.discharge_latency_s"
    const auto dot = k.find('.');
    if (dot == std::string::npos) {
      apply_key(cfg, "accelerator", k, v, laser_overridden);
    } else {
      apply_key(cfg, k.substr(0, dot), k.substr(dot + 1), v, laser_overridden);
    }
  }
  finalize(cfg, laser_overridden);
  return cfg;
}

AcceleratorConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);

  AcceleratorConfig cfg;
  cfg.name = "custom";
  cfg.datarate_GSps = 50.0;
  cfg.xpe_size = 19;
  cfg.xpe_count = 1;
  bool laser_overridden = false;

  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok.front() == '[') {
      if (tok.back() != ']') throw ParseError("malformed section header", lineno);
      section = tok.substr(1, tok.size() - 2);
      continue;
    }
    if (section.empty()) throw ParseError("key outside of any section", lineno);
    std::string key = tok, value;
    const auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.erase(eq);
      if (value.empty()) ls >> value;
    } else {
      std::string sep;
      ls >> sep;
      if (sep == "=") ls >> value;
      else value = sep;
    }
    if (value.empty()) throw ParseError("expected key = value", lineno);
    try {
      apply_key(cfg, section, key, value, laser_overridden);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  finalize(cfg, laser_overridden);
  return cfg;
}

}  // namespace oxbnn::archsim
