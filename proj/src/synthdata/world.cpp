#include "mobgen/synthdata/world.hpp"

#include <cmath>

#include "json.hpp"
#include "mobgen/numerics/rng.hpp"

namespace mobgen::synthdata {

namespace {

// Raw demographic value = lo + (hi - lo) * s. Starting latents lie in [0.2, 0.8]
// and drift at most 0.28 over the horizon, so every range keeps its value valid.
// pct_nonwhite (index 5) is 100 - pct_white; its latent is 1 - s_white.
constexpr std::array<std::array<double, 2>, kDemographicCount> kDemographicRange = {{
    {1500.0, 8000.0},    // pop
    {5.0, 30.0},         // pct_25_34
    {10.0, 30.0},        // pct_35_50
    {5.0, 30.0},         // pct_over_65
    {20.0, 80.0},        // pct_white
    {20.0, 80.0},        // pct_nonwhite, latent tied to 1 - s_white
    {5.0, 35.0},         // pct_black
    {10.0, 60.0},        // pct_college
    {15000.0, 75000.0},  // income
}};

constexpr std::array<double, kTravelCount> kTravelOffset = {25.0, 1500.0, 200.0, 300.0, 100.0};
constexpr std::array<double, kTravelCount> kTravelScale = {8.0, 1000.0, 100.0, 200.0, 60.0};

constexpr int kBurnIn = 3;

using Latent = std::array<double, kDemographicCount>;

Latent centred(const Latent& s) {
  Latent out{};
  for (std::size_t j = 0; j < kDemographicCount; ++j) out[j] = 2.0 * s[j] - 1.0;
  return out;
}

std::array<double, kDemographicCount> raw_demographics(const Latent& s) {
  std::array<double, kDemographicCount> raw{};
  for (std::size_t j = 0; j < kDemographicCount; ++j) {
    raw[j] = kDemographicRange[j][0] + (kDemographicRange[j][1] - kDemographicRange[j][0]) * s[j];
  }
  raw[5] = 100.0 - raw[4];
  return raw;
}

}  // namespace

std::array<double, kTravelCount> TruthModel::latent_travel(const std::array<Latent, 3>& history, int year) const {
  Latent m{};
  for (std::size_t l = 0; l < 3; ++l) {
    for (std::size_t j = 0; j < kDemographicCount; ++j) m[j] += lag_weights[l] * history[l][j];
  }
  std::array<double, kTravelCount> g{};
  for (std::size_t k = 0; k < kTravelCount; ++k) {
    double pre = c[k];
    if (shock_year && year >= *shock_year) pre += shock_shift[k];
    for (std::size_t j = 0; j < kDemographicCount; ++j) pre += a[k][j] * m[j];
    g[k] = std::tanh(pre);
  }
  return g;
}

World gen_tracts(const WorldConfig& config) {
  if (config.last_year < config.first_year) throw std::invalid_argument("last_year before first_year");
  if (config.noise_std < 0.0) throw std::invalid_argument("noise_std must be non-negative");
  World world;
  world.config = config;

  numerics::Rng model_rng(numerics::Rng::substream(config.seed, "truth_model"));
  TruthModel& truth = world.truth;
  for (auto& row : truth.a)
    for (double& v : row) v = model_rng.normal(0.0, config.coupling_std);
  for (double& v : truth.c) v = model_rng.uniform(-0.3, 0.3);
  truth.travel_offset = kTravelOffset;
  truth.travel_scale = kTravelScale;
  truth.shock_year = config.shock_year;
  truth.shock_shift = {0.0, 0.0, 0.5 * config.shock_magnitude, -config.shock_magnitude, 0.5 * config.shock_magnitude};

  const int years = config.last_year - config.first_year + 1;
  for (std::size_t t = 0; t < config.n_tracts; ++t) {
    numerics::Rng rng(numerics::Rng::substream(config.seed, "tract/" + std::to_string(t)));
    Latent s{}, drift{};
    for (std::size_t j = 0; j < kDemographicCount; ++j) {
      s[j] = rng.uniform(0.2, 0.8);
      drift[j] = rng.uniform(-config.max_drift, config.max_drift);
    }
    s[5] = 1.0 - s[4];
    const std::string id = "T" + std::to_string(100000 + t);
    std::vector<Latent> path;  // latent demographics from first_year - kBurnIn
    for (int y = 0; y < years + kBurnIn; ++y) {
      path.push_back(s);
      for (std::size_t j = 0; j < kDemographicCount; ++j) s[j] += drift[j] + rng.normal(0.0, config.innovation_std);
      s[5] = 1.0 - s[4];
    }
    for (int y = 0; y < years; ++y) {
      const std::size_t now = static_cast<std::size_t>(y + kBurnIn);
      const std::array<Latent, 3> history = {centred(path[now - 1]), centred(path[now - 2]), centred(path[now - 3])};
      const int year = config.first_year + y;
      const auto g = truth.latent_travel(history, year);
      ingest::TractRecord rec;
      rec.tract_id = id;
      rec.year = year;
      rec.demographic = raw_demographics(path[now]);
      ingest::TractRecord clean = rec;
      for (std::size_t k = 0; k < kTravelCount; ++k) {
        const double noisy = g[k] + rng.normal(0.0, config.noise_std);
        rec.travel[k] = truth.travel_offset[k] + truth.travel_scale[k] * noisy;
        clean.travel[k] = truth.travel_offset[k] + truth.travel_scale[k] * g[k];
      }
      world.records.push_back(std::move(rec));
      world.noiseless.push_back(std::move(clean));
    }
  }
  return world;
}

std::string truth_json(const TruthModel& truth) {
  nlohmann::json j;
  j["form"] = "raw_k = travel_offset_k + travel_scale_k * (tanh(sum_j a[k][j] * m_j + c_k) + noise), "
              "m = sum_l lag_weights[l] * (2 s(t-1-l) - 1)";
  j["a"] = truth.a;
  j["c"] = truth.c;
  j["lag_weights"] = truth.lag_weights;
  j["travel_offset"] = truth.travel_offset;
  j["travel_scale"] = truth.travel_scale;
  if (truth.shock_year) {
    j["shock_year"] = *truth.shock_year;
    j["shock_shift"] = truth.shock_shift;
  }
  return j.dump(2);
}

}  // namespace mobgen::synthdata
