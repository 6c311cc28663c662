#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mobgen/errors.hpp"
#include "mobgen/ingest/csv.hpp"
#include "mobgen/ingest/preprocess.hpp"
#include "mobgen/ingest/split.hpp"
#include "mobgen/numerics/rng.hpp"
#include "record_fixtures.hpp"

using namespace mobgen::ingest;
using mobgen::numerics::Rng;
using mobgen::testing::make_panel;
using mobgen::testing::make_record;

namespace {

std::vector<double> column_of(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

const char* kHeader =
    "tract_id,year,pop,pct_25_34,pct_35_50,pct_over_65,pct_white,pct_nonwhite,pct_black,pct_college,income,"
    "travel_time,auto_users,active_users,transit_users,other_users\n";

}  // namespace

TEST_CASE("iqr_filter reference cases") {
  const std::vector<double> a{1, 2, 3, 4, 100};
  CHECK(iqr_filter(a) == std::vector<std::size_t>{0, 1, 2, 3});
  Fences fa = iqr_fences(a);
  CHECK(fa.q1 == 2.0);
  CHECK(fa.q3 == 4.0);
  CHECK(fa.upper == 7.0);

  CHECK(iqr_filter(std::vector<double>{5, 5, 5, 5}).size() == 4);

  // Positions 0.75 and 2.25 of the sorted sample: Q1 = 1.75, Q3 = 3.25.
  Fences fb = iqr_fences(std::vector<double>{4, 1, 3, 2});
  CHECK(fb.q1 == doctest::Approx(1.75));
  CHECK(fb.q3 == doctest::Approx(3.25));
  CHECK(fb.lower == doctest::Approx(-0.5));
  CHECK(fb.upper == doctest::Approx(5.5));
  CHECK(iqr_filter(std::vector<double>{1, 2, 3, 4}).size() == 4);

  CHECK_THROWS_AS(iqr_filter(std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST_CASE("iqr_filter is permutation-invariant and its fences keep the retained set") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4 + rng.index(40);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal() * (rng.uniform() < 0.1 ? 8.0 : 1.0);
    const auto kept = iqr_filter(v);
    std::vector<double> kept_values = column_of(v, kept);

    auto perm = rng.permutation(n);
    std::vector<double> shuffled(n);
    for (std::size_t i = 0; i < n; ++i) shuffled[i] = v[perm[i]];
    std::vector<double> kept_shuffled = column_of(shuffled, iqr_filter(shuffled));
    std::sort(kept_values.begin(), kept_values.end());
    std::sort(kept_shuffled.begin(), kept_shuffled.end());
    CHECK(kept_values == kept_shuffled);

    const Fences f = iqr_fences(v);
    for (double x : kept_values) CHECK(f.contains(x));
    // Refitting on an outlier-free sample is the identity.
    if (kept.size() == n) CHECK(iqr_filter(v).size() == n);
  }
}

TEST_CASE("zscore reference cases and round trip") {
  ZScore z = zscore(std::vector<double>{0, 10});
  CHECK(z.stats.mu == 5.0);
  CHECK(z.stats.sigma == 5.0);
  CHECK(z.z == std::vector<double>{-1, 1});
  CHECK(standardize(5.0, z.stats) == 0.0);

  ZScore c = zscore(std::vector<double>{3, 3, 3});
  CHECK(c.stats.constant());
  CHECK(c.z.empty());

  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(2 + rng.index(50));
    for (double& x : v) x = rng.uniform(-1e4, 1e4);
    ZScore s = zscore(v);
    double mean = 0, var = 0;
    for (double x : s.z) mean += x;
    mean /= static_cast<double>(v.size());
    for (double x : s.z) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-10);
    for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(destandardize(s.z[i], s.stats) - v[i]) < 1e-9);
  }
}

TEST_CASE("zero_row_drop") {
  Rng rng(1);
  auto ok = make_record("A", 2012, rng);
  auto no_pop = make_record("B", 2012, rng);
  no_pop.demographic[kPopulation] = 0.0;
  auto no_travel = make_record("C", 2012, rng);
  no_travel.travel = {0, 0, 0, 0, 0};
  auto one_zero = make_record("D", 2012, rng);
  one_zero.travel[2] = 0.0;
  auto zero_pct = make_record("E", 2012, rng);
  zero_pct.demographic[6] = 0.0;
  const auto kept = zero_row_drop({ok, no_pop, no_travel, one_zero, zero_pct});
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].tract_id == "A");
  CHECK(kept[1].tract_id == "D");
  CHECK(kept[2].tract_id == "E");
  CHECK(zero_row_drop({}).empty());
}

TEST_CASE("csv loading") {
  SUBCASE("valid rows round-trip through the writer") {
    auto panel = make_panel(1, 2012, 2014, 3);
    std::stringstream ss;
    write_csv(ss, panel);
    LoadResult r = parse_csv(ss);
    CHECK(r.rejected.empty());
    REQUIRE(r.records.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(r.records[i].tract_id == panel[i].tract_id);
      CHECK(r.records[i].year == panel[i].year);
      for (std::size_t f = 0; f < kFeatureCount; ++f) CHECK(r.records[i].feature(f) == panel[i].feature(f));
    }
  }
  SUBCASE("bad cells are rejected with line numbers, others kept") {
    std::stringstream ss;
    ss << kHeader << "A,2012,100,10,20,10,50,50,5,30,30000,25,500,50,50,10\n"
       << "A,2013,abc,10,20,10,50,50,5,30,30000,25,500,50,50,10\n"
       << "A,2014,100,10,20,10,50,150,5,30,30000,25,500,50,50,10\n"
       << "A,2012,100,10,20,10,50,50,5,30,30000,25,500,50,50,10\n"
       << "A,2015,100,10,20,10,50,50,5,30,30000,0,500,50,50,10\n"
       << "A,2016,100,10\n"
       << "B,2012,100,10,20,10,50,50,5,30,30000,25,500,50,50,10\n";
    LoadResult r = parse_csv(ss);
    CHECK(r.records.size() == 2);
    REQUIRE(r.rejected.size() == 5);
    CHECK(r.rejected[0].line == 3);
    CHECK(r.rejected[0].message.find("pop") != std::string::npos);
    CHECK(r.rejected[1].line == 4);
    CHECK(r.rejected[2].message.find("duplicate") != std::string::npos);
    CHECK(r.rejected[3].message.find("travel_time") != std::string::npos);
    CHECK(r.rejected[4].line == 7);
  }
  SUBCASE("header only gives no records") {
    std::stringstream ss(kHeader);
    LoadResult r = parse_csv(ss);
    CHECK(r.records.empty());
    CHECK(r.rejected.empty());
  }
  SUBCASE("columns are found by name") {
    std::stringstream ss;
    ss << "year,tract_id,pop,pct_25_34,pct_35_50,pct_over_65,pct_white,pct_nonwhite,pct_black,pct_college,"
          "income,travel_time,auto_users,active_users,transit_users,other_users\n"
       << "2012,\"X,1\",100,10,20,10,50,50,5,30,30000,25,500,50,50,10\n";
    LoadResult r = parse_csv(ss);
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].tract_id == "X,1");
    CHECK(r.records[0].year == 2012);
  }
  SUBCASE("missing column is fatal") {
    std::stringstream ss("tract_id,year,pop\nA,2012,5\n");
    CHECK_THROWS_AS(parse_csv(ss), mobgen::DataError);
    std::stringstream empty;
    CHECK_THROWS_AS(parse_csv(empty), mobgen::DataError);
  }
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), mobgen::IoError);
}

TEST_CASE("split window counts match hand enumeration for 2012-2023") {
  // Six-year spans start in 2012..2018. 2012 ends in 2017 (train); starts
  // 2015..2018 have targets from 2018 on (test); 2013 and 2014 straddle.
  const auto panel = make_panel(3, 2012, 2023, 9);
  SplitDataset d = chronological_split(panel);
  CHECK(d.report.series == 3);
  CHECK(d.train.size() == 3);
  CHECK(d.test.size() == 12);
  CHECK(d.report.straddling_windows == 6);
  for (const Window& w : d.train) {
    CHECK(w.first_year == 2012);
    CHECK(w.last_target_year(3, 3) <= 2017);
  }
  for (const Window& w : d.test) CHECK(w.first_year + 3 >= 2018);
  CHECK(d.train.front().inputs.size() == 3 * 9);
  CHECK(d.train.front().targets.size() == 3 * 5);
}

TEST_CASE("short series and gaps are skipped and counted") {
  auto panel = make_panel(1, 2012, 2015, 2);
  auto longer = make_panel(1, 2012, 2023, 5);
  for (auto& r : longer) r.tract_id = "L";
  longer.erase(longer.begin() + 8);  // remove 2020
  panel.insert(panel.end(), longer.begin(), longer.end());
  SplitConfig cfg;
  cfg.iqr_multiplier = 1e6;  // keep every row of this tiny panel
  SplitDataset d = chronological_split(panel, cfg);
  CHECK(d.report.series_too_short == 1);
  CHECK(d.report.windows_with_gaps > 0);
  CHECK(d.train.size() == 1);
  // Test windows need six contiguous years ending <= 2023 without 2020: only 2014-2019 would, but straddles.
  CHECK(d.test.empty());
}

TEST_CASE("statistics come from training years only and invert exactly") {
  auto panel = make_panel(20, 2012, 2023, 17);
  SplitDataset d = chronological_split(panel);
  auto shifted = panel;
  for (auto& r : shifted) {
    if (r.year > 2017) r.travel[1] += 1.0;  // stays within fences
  }
  SplitDataset e = chronological_split(shifted);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    CHECK(d.stats.columns[f].mu == e.stats.columns[f].mu);
    CHECK(d.stats.columns[f].sigma == e.stats.columns[f].sigma);
  }
  // Raw values recovered from the standardized windows.
  const Window& w = d.train.front();
  const TractRecord* src = nullptr;
  for (const auto& r : panel) {
    if (r.tract_id == w.tract_id && r.year == w.first_year) src = &r;
  }
  REQUIRE(src != nullptr);
  for (std::size_t j = 0; j < d.input_features.size(); ++j) {
    const std::size_t f = d.input_features[j];
    CHECK(std::abs(d.stats.destandardize(f, w.inputs[j]) - src->feature(f)) < 1e-9);
  }
}

TEST_CASE("constant inputs are dropped and constant targets kept raw") {
  auto panel = make_panel(5, 2012, 2023, 23);
  for (auto& r : panel) {
    r.demographic[6] = 7.0;
    r.travel[4] = 12.0;
  }
  SplitDataset d = chronological_split(panel);
  CHECK(d.input_features.size() == 8);
  CHECK(std::find(d.input_features.begin(), d.input_features.end(), 6) == d.input_features.end());
  REQUIRE(d.report.dropped_constant_inputs.size() == 1);
  CHECK(d.report.raw_constant_targets.size() == 1);
  CHECK(d.train.front().targets[4] == 12.0);
}

TEST_CASE("outliers fitted on the training pool are removed from every year") {
  auto panel = make_panel(30, 2012, 2023, 41);
  panel[20].demographic[kIncome] = 1e7;  // tract 1, 2020
  SplitDataset d = chronological_split(panel);
  CHECK(d.report.outlier_rows_dropped >= 1);
  CHECK(d.report.outliers_per_feature[kIncome] >= 1);
}

TEST_CASE("split is deterministic and the report is complete") {
  auto panel = make_panel(10, 2012, 2023, 77);
  const std::string a = split_digest(chronological_split(panel));
  const std::string b = split_digest(chronological_split(panel));
  CHECK(a == b);
  CHECK(a.size() == 64);
  auto text = split_report_text(chronological_split(panel));
  for (const char* key : {"boundary_year: 2017", "train_windows: 10", "test_windows: 40", "straddling_windows: 20"}) {
    CHECK_MESSAGE(text.find(key) != std::string::npos, key);
  }
}
