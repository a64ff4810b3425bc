#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clarity/stats.hpp"
#include "clarity/util.hpp"

namespace clarity {

/// One evaluation run's metric values. Absent metrics were not computed
/// (e.g. generation metrics for a label-only run).
struct MetricSet {
  std::uint64_t seed = 0;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::optional<double> bleu;
  std::optional<double> rouge_l;
  std::optional<double> similarity;

  /// (name, value) for every present metric, fixed order.
  std::vector<std::pair<std::string, double>> present() const;
};

struct SignificanceEntry {
  std::string baseline_tag;
  std::string metric;
  double t = 0.0;
  double p_value = 1.0;
};

struct EvalReport {
  std::string tag;  // which system/configuration produced this
  std::vector<MetricSet> per_seed;
  /// Aggregates keyed by metric name; stddev absent with a single seed.
  std::map<std::string, Aggregate> aggregates;
  std::size_t items = 0;        // scored instances per seed
  std::size_t unparseable = 0;  // responses that could not be graded
  std::vector<SignificanceEntry> significance;
};

/// Fills report.aggregates from report.per_seed.
void aggregate_report(EvalReport& report);

json to_json(const EvalReport& report);
EvalReport report_from_json(const json& j);
void save_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport load_report(const std::filesystem::path& path);

/// Per-seed rows as CSV: seed column plus one column per known metric.
void save_report_csv(const EvalReport& report, const std::filesystem::path& path);

}  // namespace clarity
