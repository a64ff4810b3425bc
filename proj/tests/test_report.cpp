#include <doctest.h>

#include <string>
#include <vector>

#include "clarity/report.hpp"
#include "clarity/util.hpp"
#include "test_support.hpp"

using namespace clarity;

namespace {

EvalReport sample_report() {
  EvalReport report;
  report.tag = "clarityethic.norms";
  MetricSet s1;
  s1.seed = 1;
  s1.accuracy = 0.5;
  s1.bleu = 42.0;
  MetricSet s2;
  s2.seed = 2;
  s2.accuracy = 0.75;
  s2.bleu = 43.5;
  s2.rouge_l = 0.25;
  MetricSet s3;
  s3.seed = 3;
  s3.accuracy = 0.625;
  report.per_seed = {s1, s2, s3};
  report.items = 8;
  report.unparseable = 1;
  report.significance.push_back({"claritycot", "accuracy", 2.5, 0.04});
  aggregate_report(report);
  return report;
}

}  // namespace

TEST_CASE("present() lists metrics in fixed order, skipping absences") {
  MetricSet m;
  m.similarity = 0.9;
  m.accuracy = 0.8;
  auto rows = m.present();
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].first == "accuracy");
  CHECK(rows[0].second == 0.8);
  CHECK(rows[1].first == "similarity");
  CHECK(rows[1].second == 0.9);
  CHECK(MetricSet{}.present().empty());
}

TEST_CASE("aggregate_report pools only the seeds that carry each metric") {
  EvalReport report = sample_report();
  REQUIRE(report.aggregates.count("accuracy") == 1);
  Aggregate acc = report.aggregates.at("accuracy");
  Aggregate want_acc = aggregate_seeds({0.5, 0.75, 0.625});
  CHECK(acc.mean == doctest::Approx(want_acc.mean).epsilon(1e-15));
  CHECK(*acc.stddev == doctest::Approx(*want_acc.stddev).epsilon(1e-15));

  // bleu exists on two seeds only; rouge on one seed has no stddev.
  Aggregate bleu = report.aggregates.at("bleu");
  CHECK(bleu.mean == doctest::Approx(42.75).epsilon(1e-15));
  Aggregate rouge = report.aggregates.at("rouge_l");
  CHECK(rouge.mean == 0.25);
  CHECK_FALSE(rouge.stddev.has_value());

  CHECK(report.aggregates.count("macro_f1") == 0);
  CHECK(report.aggregates.count("similarity") == 0);
}

TEST_CASE("json round trip preserves every field") {
  EvalReport report = sample_report();
  EvalReport back = report_from_json(to_json(report));

  CHECK(back.tag == report.tag);
  CHECK(back.items == report.items);
  CHECK(back.unparseable == report.unparseable);
  REQUIRE(back.per_seed.size() == report.per_seed.size());
  for (std::size_t i = 0; i < back.per_seed.size(); ++i) {
    CHECK(back.per_seed[i].seed == report.per_seed[i].seed);
    CHECK(back.per_seed[i].accuracy == report.per_seed[i].accuracy);
    CHECK(back.per_seed[i].macro_f1 == report.per_seed[i].macro_f1);
    CHECK(back.per_seed[i].bleu == report.per_seed[i].bleu);
    CHECK(back.per_seed[i].rouge_l == report.per_seed[i].rouge_l);
    CHECK(back.per_seed[i].similarity == report.per_seed[i].similarity);
  }
  REQUIRE(back.aggregates.size() == report.aggregates.size());
  for (auto& [name, agg] : report.aggregates) {
    REQUIRE(back.aggregates.count(name) == 1);
    CHECK(back.aggregates.at(name).mean == agg.mean);
    CHECK(back.aggregates.at(name).stddev == agg.stddev);
  }
  REQUIRE(back.significance.size() == 1);
  CHECK(back.significance[0].baseline_tag == "claritycot");
  CHECK(back.significance[0].metric == "accuracy");
  CHECK(back.significance[0].t == 2.5);
  CHECK(back.significance[0].p_value == 0.04);
}

TEST_CASE("save_report and load_report agree through the filesystem") {
  testsupport::TempDir dir;
  EvalReport report = sample_report();
  auto path = dir.path() / "report.json";
  save_report(report, path);
  EvalReport back = load_report(path);
  CHECK(to_json(back) == to_json(report));
}

TEST_CASE("csv export emits one row per seed with blanks for absences") {
  testsupport::TempDir dir;
  EvalReport report = sample_report();
  auto path = dir.path() / "report.csv";
  save_report_csv(report, path);
  std::string csv = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < csv.size()) {
    std::size_t nl = csv.find('\n', start);
    lines.push_back(csv.substr(start, nl - start));
    start = nl + 1;
  }
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "seed,accuracy,macro_f1,bleu,rouge_l,similarity");
  CHECK(lines[1] == "1,0.5,,42.0,,");
  CHECK(lines[2] == "2,0.75,,43.5,0.25,");
  CHECK(lines[3] == "3,0.625,,,,");
}
