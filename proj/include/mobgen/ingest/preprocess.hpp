#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mobgen/ingest/records.hpp"

namespace mobgen::ingest {

/// Quantile by linear interpolation between order statistics of an already
/// sorted sample (position p*(n-1)).
double quantile_sorted(std::span<const double> sorted, double p);

struct Fences {
  double q1 = 0.0;
  double q3 = 0.0;
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double x) const { return x >= lower && x <= upper; }
};

/// Q1 - m*IQR and Q3 + m*IQR. Needs at least 4 finite values.
Fences iqr_fences(std::span<const double> values, double multiplier = 1.5);

/// Indices (ascending) of the values inside the IQR fences.
std::vector<std::size_t> iqr_filter(std::span<const double> values, double multiplier = 1.5);

struct ColumnStats {
  double mu = 0.0;
  double sigma = 0.0;  // population convention

  bool constant() const { return sigma == 0.0; }
};

ColumnStats column_stats(std::span<const double> values);

struct ZScore {
  std::vector<double> z;  // empty when the column is constant
  ColumnStats stats;
};

/// Standardizes a column. A constant column comes back flagged (stats.constant())
/// with no z values; the caller decides whether to drop it or keep it raw.
ZScore zscore(std::span<const double> values);

inline double standardize(double x, const ColumnStats& s) { return (x - s.mu) / s.sigma; }
inline double destandardize(double z, const ColumnStats& s) { return z * s.sigma + s.mu; }

/// Drops records whose population is zero or whose five travel values are all zero.
std::vector<TractRecord> zero_row_drop(const std::vector<TractRecord>& records);

}  // namespace mobgen::ingest
