#include "mobgen/ingest/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mobgen::ingest {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Fences iqr_fences(std::span<const double> values, double multiplier) {
  if (values.size() < 4) {
    throw std::invalid_argument("iqr_filter needs at least 4 values, got " + std::to_string(values.size()));
  }
  std::vector<double> sorted(values.begin(), values.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw std::invalid_argument("iqr_filter: non-finite value");
  }
  std::sort(sorted.begin(), sorted.end());
  Fences f;
  f.q1 = quantile_sorted(sorted, 0.25);
  f.q3 = quantile_sorted(sorted, 0.75);
  const double iqr = f.q3 - f.q1;
  f.lower = f.q1 - multiplier * iqr;
  f.upper = f.q3 + multiplier * iqr;
  return f;
}

std::vector<std::size_t> iqr_filter(std::span<const double> values, double multiplier) {
  const Fences f = iqr_fences(values, multiplier);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (f.contains(values[i])) kept.push_back(i);
  }
  return kept;
}

ColumnStats column_stats(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("statistics of an empty column");
  const double n = static_cast<double>(values.size());
  double mu = 0.0;
  for (double v : values) mu += v;
  mu /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  ColumnStats s;
  s.mu = mu;
  s.sigma = std::sqrt(ss / n);
  // Rounding can leave a tiny positive spread on a constant column.
  if (s.sigma <= 1e-12 * std::max(1.0, std::abs(mu))) s.sigma = 0.0;
  return s;
}

ZScore zscore(std::span<const double> values) {
  ZScore out;
  out.stats = column_stats(values);
  if (out.stats.constant()) return out;
  out.z.reserve(values.size());
  for (double v : values) out.z.push_back(standardize(v, out.stats));
  return out;
}

std::vector<TractRecord> zero_row_drop(const std::vector<TractRecord>& records) {
  std::vector<TractRecord> kept;
  kept.reserve(records.size());
  for (const TractRecord& r : records) {
    const bool no_travel = std::all_of(r.travel.begin(), r.travel.end(), [](double v) { return v == 0.0; });
    if (r.feature(kPopulation) == 0.0 || no_travel) continue;
    kept.push_back(r);
  }
  return kept;
}

}  // namespace mobgen::ingest
