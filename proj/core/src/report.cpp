#include "clarity/report.hpp"

#include <sstream>

namespace clarity {

namespace {

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"accuracy", "macro_f1", "bleu",
                                                 "rouge_l", "similarity"};
  return names;
}

std::optional<double> metric_by_name(const MetricSet& m, const std::string& name) {
  if (name == "accuracy") return m.accuracy;
  if (name == "macro_f1") return m.macro_f1;
  if (name == "bleu") return m.bleu;
  if (name == "rouge_l") return m.rouge_l;
  if (name == "similarity") return m.similarity;
  throw std::invalid_argument("unknown metric: " + name);
}

void set_metric(MetricSet& m, const std::string& name, double value) {
  if (name == "accuracy") m.accuracy = value;
  else if (name == "macro_f1") m.macro_f1 = value;
  else if (name == "bleu") m.bleu = value;
  else if (name == "rouge_l") m.rouge_l = value;
  else if (name == "similarity") m.similarity = value;
  else throw std::invalid_argument("unknown metric: " + name);
}

}  // namespace

std::vector<std::pair<std::string, double>> MetricSet::present() const {
  std::vector<std::pair<std::string, double>> out;
  for (const std::string& name : metric_names())
    if (auto v = metric_by_name(*this, name)) out.emplace_back(name, *v);
  return out;
}

void aggregate_report(EvalReport& report) {
  report.aggregates.clear();
  for (const std::string& name : metric_names()) {
    std::vector<double> values;
    for (const MetricSet& m : report.per_seed)
      if (auto v = metric_by_name(m, name)) values.push_back(*v);
    if (!values.empty()) report.aggregates[name] = aggregate_seeds(values);
  }
}

json to_json(const EvalReport& report) {
  json per_seed = json::array();
  for (const MetricSet& m : report.per_seed) {
    json row{{"seed", m.seed}};
    for (auto& [name, value] : m.present()) row[name] = value;
    per_seed.push_back(std::move(row));
  }
  json aggregates = json::object();
  for (auto& [name, agg] : report.aggregates) {
    json a{{"mean", agg.mean}};
    if (agg.stddev) a["stddev"] = *agg.stddev;
    aggregates[name] = std::move(a);
  }
  json significance = json::array();
  for (const SignificanceEntry& s : report.significance)
    significance.push_back(json{{"baseline_tag", s.baseline_tag},
                                {"metric", s.metric},
                                {"t", s.t},
                                {"p_value", s.p_value}});
  return json{{"tag", report.tag},
              {"per_seed", std::move(per_seed)},
              {"aggregates", std::move(aggregates)},
              {"items", report.items},
              {"unparseable", report.unparseable},
              {"significance", std::move(significance)}};
}

EvalReport report_from_json(const json& j) {
  EvalReport report;
  report.tag = j.at("tag").get<std::string>();
  for (const json& row : j.at("per_seed")) {
    MetricSet m;
    m.seed = row.at("seed").get<std::uint64_t>();
    for (const std::string& name : metric_names())
      if (row.contains(name)) set_metric(m, name, row.at(name).get<double>());
    report.per_seed.push_back(std::move(m));
  }
  for (auto& [name, a] : j.at("aggregates").items()) {
    Aggregate agg;
    agg.mean = a.at("mean").get<double>();
    if (a.contains("stddev")) agg.stddev = a.at("stddev").get<double>();
    report.aggregates[name] = agg;
  }
  report.items = j.at("items").get<std::size_t>();
  report.unparseable = j.at("unparseable").get<std::size_t>();
  for (const json& s : j.at("significance")) {
    SignificanceEntry e;
    e.baseline_tag = s.at("baseline_tag").get<std::string>();
    e.metric = s.at("metric").get<std::string>();
    e.t = s.at("t").get<double>();
    e.p_value = s.at("p_value").get<double>();
    report.significance.push_back(std::move(e));
  }
  return report;
}

void save_report(const EvalReport& report, const std::filesystem::path& path) {
  atomic_write_file(path, to_json(report).dump(2) + "\n");
}

EvalReport load_report(const std::filesystem::path& path) {
  return report_from_json(json::parse(read_file(path)));
}

void save_report_csv(const EvalReport& report, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "seed";
  for (const std::string& name : metric_names()) out << "," << name;
  out << "\n";
  for (const MetricSet& m : report.per_seed) {
    out << m.seed;
    for (const std::string& name : metric_names()) {
      out << ",";
      if (auto v = metric_by_name(m, name)) out << json(*v).dump();
    }
    out << "\n";
  }
  atomic_write_file(path, out.str());
}

}  // namespace clarity
