#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mobgen::ingest {

inline constexpr std::size_t kDemographicCount = 9;
inline constexpr std::size_t kTravelCount = 5;
inline constexpr std::size_t kFeatureCount = kDemographicCount + kTravelCount;

/// Feature names in CSV order (demographic first, then travel).
extern const std::array<std::string_view, kFeatureCount> kFeatureNames;
/// Full CSV header: tract_id, year, then the 14 features.
extern const std::array<std::string_view, kFeatureCount + 2> kCsvColumns;

// Indices into the 14-feature vector.
inline constexpr std::size_t kPopulation = 0;
inline constexpr std::size_t kFirstPercent = 1;  // pct_25_34 .. pct_college
inline constexpr std::size_t kLastPercent = 7;
inline constexpr std::size_t kIncome = 8;
inline constexpr std::size_t kTravelTime = 9;
inline constexpr std::size_t kAutoUsers = 10;

/// One tract, one year.
struct TractRecord {
  std::string tract_id;
  int year = 0;
  std::array<double, kDemographicCount> demographic{};
  std::array<double, kTravelCount> travel{};

  double feature(std::size_t index) const {
    return index < kDemographicCount ? demographic[index] : travel[index - kDemographicCount];
  }
  double& feature(std::size_t index) {
    return index < kDemographicCount ? demographic[index] : travel[index - kDemographicCount];
  }
};

/// Describes the first domain violation (percentage out of [0,100], negative
/// count, non-positive travel time, non-finite value), or nullopt if valid.
std::optional<std::string> validate(const TractRecord& record);

}  // namespace mobgen::ingest
