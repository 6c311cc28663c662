#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mobgen/ingest/records.hpp"

namespace mobgen::synthdata {

using ingest::kDemographicCount;
using ingest::kTravelCount;

struct WorldConfig {
  std::size_t n_tracts = 200;
  int first_year = 2012;
  int last_year = 2023;
  std::uint64_t seed = 0;
  /// Std of the Gaussian noise added to each latent travel value.
  double noise_std = 0.1;
  /// Per-year drift of each latent demographic is drawn from U(-max_drift, max_drift).
  double max_drift = 0.02;
  /// Std of the yearly random-walk innovation of latent demographics.
  double innovation_std = 0.005;
  /// Std of the entries of the demographic -> travel mixing matrix.
  double coupling_std = 0.6;
  /// From this year on, transit use drops and active/other modes rise.
  std::optional<int> shock_year;
  double shock_magnitude = 0.5;
};

/// The known generating map from latent demographics to latent travel:
///   m(t)   = sum_l lag_weights[l] * s(t-1-l)       (s centred to about [-0.6, 0.6])
///   g_k(t) = tanh(A_k . m(t) + c_k)
///   raw_k  = travel_offset_k + travel_scale_k * (g_k + noise)
struct TruthModel {
  std::array<std::array<double, kDemographicCount>, kTravelCount> a{};
  std::array<double, kTravelCount> c{};
  std::array<double, 3> lag_weights{0.5, 0.3, 0.2};
  std::array<double, kTravelCount> travel_offset{};
  std::array<double, kTravelCount> travel_scale{};
  std::optional<int> shock_year;
  std::array<double, kTravelCount> shock_shift{};

  /// Latent travel given the three previous years of centred latent demographics
  /// (history[0] = t-1, history[1] = t-2, history[2] = t-3).
  std::array<double, kTravelCount> latent_travel(
      const std::array<std::array<double, kDemographicCount>, 3>& history, int year) const;
};

struct World {
  WorldConfig config;
  TruthModel truth;
  /// Observed records (travel includes noise).
  std::vector<ingest::TractRecord> records;
  /// The same records with noiseless travel values g(demographics).
  std::vector<ingest::TractRecord> noiseless;
};

/// Demographics follow a per-tract random walk with drift; travel is the truth
/// map plus Gaussian noise. Fully determined by the config (seed included).
World gen_tracts(const WorldConfig& config);

/// Truth-model parameters as JSON.
std::string truth_json(const TruthModel& truth);

}  // namespace mobgen::synthdata
