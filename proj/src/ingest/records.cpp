#include "mobgen/ingest/records.hpp"

#include <cmath>

namespace mobgen::ingest {

const std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "pop",         "pct_25_34",  "pct_35_50",    "pct_over_65",   "pct_white",
    "pct_nonwhite", "pct_black", "pct_college",  "income",        "travel_time",
    "auto_users",  "active_users", "transit_users", "other_users"};

const std::array<std::string_view, kFeatureCount + 2> kCsvColumns = {
    "tract_id",    "year",       "pop",          "pct_25_34",     "pct_35_50",   "pct_over_65",
    "pct_white",   "pct_nonwhite", "pct_black",  "pct_college",   "income",      "travel_time",
    "auto_users",  "active_users", "transit_users", "other_users"};

std::optional<std::string> validate(const TractRecord& record) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!std::isfinite(record.feature(i))) return std::string(kFeatureNames[i]) + " is not finite";
  }
  for (std::size_t i = kFirstPercent; i <= kLastPercent; ++i) {
    const double v = record.feature(i);
    if (v < 0.0 || v > 100.0) return std::string(kFeatureNames[i]) + " outside [0,100]";
  }
  if (record.feature(kPopulation) < 0.0) return "pop is negative";
  if (record.feature(kIncome) < 0.0) return "income is negative";
  if (record.feature(kTravelTime) <= 0.0) return "travel_time must be positive";
  for (std::size_t i = kAutoUsers; i < kFeatureCount; ++i) {
    if (record.feature(i) < 0.0) return std::string(kFeatureNames[i]) + " is negative";
  }
  return std::nullopt;
}

}  // namespace mobgen::ingest
