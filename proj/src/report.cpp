#include "oxbnn/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace oxbnn::report {

double geometric_mean(std::span<const double> values) {
  if (values.empty()) throw ValidationError("geometric mean of an empty set");
  double log_sum = 0.0;
  for (double v : values) {
    if (v <= 0.0) throw ValidationError("geometric mean requires positive values");
    log_sum += std::log(v);
  }
  return std::exp(log_sum / static_cast<double>(values.size()));
}

ComparisonReport compare(const MetricsTable& metrics_by_config,
                         const std::string& subject) {
  if (metrics_by_config.size() < 2)
    throw ValidationError("comparison needs at least two configurations");

  ComparisonReport rep;
  rep.subject = subject.empty() ? metrics_by_config.begin()->first : subject;
  const auto subj_it = metrics_by_config.find(rep.subject);
  if (subj_it == metrics_by_config.end())
    throw ValidationError("subject configuration missing from the metrics table");

  for (const auto& [wl, m] : subj_it->second) rep.workloads.push_back(wl);
  for (const auto& [cfg, by_wl] : metrics_by_config) {
    if (by_wl.size() != rep.workloads.size())
      throw ValidationError("workload sets differ between configurations");
    for (const auto& wl : rep.workloads) {
      if (!by_wl.contains(wl))
        throw ValidationError("configuration " + cfg + " is missing workload " + wl);
    }
  }

  for (const auto& [cfg, by_wl] : metrics_by_config) {
    if (cfg == rep.subject) continue;
    std::vector<double> fps_ratios, fpw_ratios;
    for (const auto& wl : rep.workloads) {
      const auto& ours = subj_it->second.at(wl);
      const auto& theirs = by_wl.at(wl);
      RatioRow row;
      row.baseline = cfg;
      row.workload = wl;
      row.fps_ratio = ours.fps / theirs.fps;
      row.fps_per_watt_ratio = ours.fps_per_watt / theirs.fps_per_watt;
      fps_ratios.push_back(row.fps_ratio);
      fpw_ratios.push_back(row.fps_per_watt_ratio);
      rep.rows.push_back(row);
    }
    rep.summaries.push_back(BaselineSummary{cfg, geometric_mean(fps_ratios),
                                            geometric_mean(fpw_ratios)});
  }
  return rep;
}

std::string ComparisonReport::to_text() const {
  std::ostringstream out;
  char buf[160];
  out << "subject: " << subject << "\n";
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "  vs %-12s %-16s fps x%-10.4g fps/w x%-10.4g",
                  row.baseline.c_str(), row.workload.c_str(), row.fps_ratio,
                  row.fps_per_watt_ratio);
    out << buf << "\n";
  }
  for (const auto& s : summaries) {
    std::snprintf(buf, sizeof buf,
                  "  vs %-12s gmean            fps x%-10.4g fps/w x%-10.4g",
                  s.baseline.c_str(), s.gmean_fps_ratio, s.gmean_fps_per_watt_ratio);
    out << buf << "\n";
  }
  return out.str();
}

std::string ComparisonReport::to_csv() const {
  std::ostringstream out;
  char buf[160];
  out << "subject,baseline,workload,fps_ratio,fps_per_w_ratio\n";
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.9e,%.9e", subject.c_str(),
                  row.baseline.c_str(), row.workload.c_str(), row.fps_ratio,
                  row.fps_per_watt_ratio);
    out << buf << "\n";
  }
  for (const auto& s : summaries) {
    std::snprintf(buf, sizeof buf, "%s,%s,gmean,%.9e,%.9e", subject.c_str(),
                  s.baseline.c_str(), s.gmean_fps_ratio, s.gmean_fps_per_watt_ratio);
    out << buf << "\n";
  }
  return out.str();
}

}  // namespace oxbnn::report
