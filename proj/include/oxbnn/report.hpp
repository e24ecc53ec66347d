#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "oxbnn/archsim.hpp"

// Comparative reporting: per-workload FPS and FPS/W ratios of a subject
// configuration against each other configuration, with geometric means.
namespace oxbnn::report {

using MetricsTable = std::map<std::string, std::map<std::string, archsim::Metrics>>;

struct RatioRow {
  std::string baseline;
  std::string workload;
  double fps_ratio = 0.0;
  double fps_per_watt_ratio = 0.0;
};

struct BaselineSummary {
  std::string baseline;
  double gmean_fps_ratio = 0.0;
  double gmean_fps_per_watt_ratio = 0.0;
};

struct ComparisonReport {
  std::string subject;
  std::vector<std::string> workloads;
  std::vector<RatioRow> rows;
  std::vector<BaselineSummary> summaries;

  std::string to_text() const;
  std::string to_csv() const;
};

double geometric_mean(std::span<const double> values);

// metrics_by_config[config][workload]; the workload sets must match across
// configs. `subject` defaults to the first config in map order.
ComparisonReport compare(const MetricsTable& metrics_by_config,
                         const std::string& subject = {});

}  // namespace oxbnn::report
