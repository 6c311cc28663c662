#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "dtw_oracle.hpp"
#include "json.hpp"
#include "mobgen/metrics/dtw.hpp"
#include "mobgen/metrics/features.hpp"
#include "mobgen/metrics/frechet.hpp"
#include "mobgen/metrics/regression.hpp"
#include "mobgen/metrics/report.hpp"
#include "mobgen/metrics/ssim.hpp"
#include "mobgen/numerics/rng.hpp"
#include "test_util.hpp"

using namespace mobgen::metrics;
using mobgen::numerics::Rng;
using mobgen::numerics::Tensor;

namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

FeatureMatrix matrix(std::size_t rows, std::size_t cols, std::vector<double> v) { return {rows, cols, std::move(v)}; }

// Long-double two-pass reference for rmse and r^2.
double ref_rmse(const std::vector<double>& p, const std::vector<double>& y) {
  long double ss = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ss += (long double)(p[i] - y[i]) * (p[i] - y[i]);
  return static_cast<double>(std::sqrt(ss / y.size()));
}

double ref_r2(const std::vector<double>& p, const std::vector<double>& y) {
  const long double mean = std::accumulate(y.begin(), y.end(), 0.0L) / y.size();
  long double res = 0, tot = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    res += (long double)(y[i] - p[i]) * (y[i] - p[i]);
    tot += (y[i] - mean) * (y[i] - mean);
  }
  return static_cast<double>(1.0L - res / tot);
}

}  // namespace

TEST_CASE("rmse reference values") {
  std::vector<double> y{1, 2, 3};
  CHECK(rmse(y, y) == 0.0);
  CHECK(rmse(std::vector<double>{2, 3, 4}, y) == doctest::Approx(1.0));
  CHECK(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}) == doctest::Approx(std::sqrt(12.5)));
  CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(rmse(std::vector<double>{1}, y), std::invalid_argument);
}

TEST_CASE("r squared reference values") {
  std::vector<double> y{1, 2, 3, 7};
  CHECK(*r_squared(y, y) == 1.0);
  std::vector<double> mean_pred(4, 13.0 / 4.0);
  CHECK(std::abs(*r_squared(mean_pred, y)) <= 1e-12);
  CHECK(*r_squared(std::vector<double>{7, 3, 2, 1}, y) < 0.0);
  CHECK_FALSE(r_squared(y, std::vector<double>{2, 2, 2, 2}).has_value());
}

TEST_CASE("regression metrics agree with a long-double reference") {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(60);
    auto y = random_vec(n, rng, -50, 50);
    auto p = random_vec(n, rng, -50, 50);
    CHECK(std::abs(rmse(p, y) - ref_rmse(p, y)) < 1e-12 * std::max(1.0, ref_rmse(p, y)));
    CHECK(std::abs(*r_squared(p, y) - ref_r2(p, y)) < 1e-12 * std::max(1.0, std::abs(ref_r2(p, y))));
  }
}

TEST_CASE("multi-target scores average per-target values") {
  // rows x 2 targets: target 0 perfect, target 1 offset by 2.
  std::vector<double> y{1, 5, 2, 6, 3, 8};
  std::vector<double> p{1, 7, 2, 8, 3, 10};
  RegressionScores s = regression_scores(p, y, 2);
  CHECK(s.rmse_per_target[0] == 0.0);
  CHECK(s.rmse_per_target[1] == doctest::Approx(2.0));
  CHECK(s.rmse_mean == doctest::Approx(1.0));
  CHECK(*s.r2_per_target[0] == 1.0);
  CHECK(s.r2_mean.has_value());
}

TEST_CASE("dtw identities") {
  std::vector<double> a{0, 1, 2, 1};
  CHECK(dtw(a, a) == 0.0);
  std::vector<double> x{0, 0, 1}, y{0, 1};
  CHECK(dtw(x, y) == mobgen::testing::brute_force_dtw(x, y, 1));
  CHECK(dtw(x, y) == 0.0);
  CHECK_THROWS_AS(dtw(std::vector<double>{}, y), std::invalid_argument);
}

TEST_CASE("dtw equals brute-force enumeration on 200 seeded pairs") {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t dim = 1 + rng.index(3);
    auto a = random_vec((1 + rng.index(6)) * dim, rng, -3, 3);
    auto b = random_vec((1 + rng.index(6)) * dim, rng, -3, 3);
    CHECK(dtw(a, b, dim) == mobgen::testing::brute_force_dtw(a, b, dim));
  }
}

TEST_CASE("dtw is symmetric, bounded by the diagonal and its path is valid") {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.index(12);
    auto a = random_vec(n, rng);
    auto b = random_vec(n, rng);
    CHECK(dtw(a, b) == dtw(b, a));
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag += std::abs(a[i] - b[i]);
    CHECK(dtw(a, b) <= diag + 1e-12);
    CHECK(dtw(a, b) >= 0.0);

    auto c = random_vec(1 + rng.index(9), rng);
    DtwResult r = dtw_align(a, c);
    REQUIRE(!r.path.empty());
    CHECK(r.path.front() == std::pair<std::size_t, std::size_t>{0, 0});
    CHECK(r.path.back() == std::pair<std::size_t, std::size_t>{a.size() - 1, c.size() - 1});
    double along = 0.0;
    for (std::size_t s = 0; s < r.path.size(); ++s) {
      along += std::abs(a[r.path[s].first] - c[r.path[s].second]);
      if (s == 0) continue;
      const auto di = r.path[s].first - r.path[s - 1].first, dj = r.path[s].second - r.path[s - 1].second;
      CHECK(di <= 1);
      CHECK(dj <= 1);
      CHECK(di + dj >= 1);
    }
    CHECK(along == doctest::Approx(r.cost).epsilon(1e-12));
  }
}

TEST_CASE("frechet distance identities and closed forms") {
  Rng rng(8);
  SUBCASE("identical sets give zero") {
    FeatureMatrix x = matrix(50, 6, random_vec(300, rng));
    CHECK(frechet_distance(x, x) <= 1e-6);
  }
  SUBCASE("one-dimensional closed form") {
    for (int trial = 0; trial < 20; ++trial) {
      auto a = random_vec(30, rng, -2, 2);
      auto b = random_vec(40, rng, 0, 5);
      auto stats = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m += x;
        m /= v.size();
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return std::pair{m, std::sqrt(s / (v.size() - 1))};
      };
      auto [ma, sa] = stats(a);
      auto [mb, sb] = stats(b);
      const double expect = (ma - mb) * (ma - mb) + (sa - sb) * (sa - sb);
      CHECK(std::abs(frechet_distance(matrix(30, 1, a), matrix(40, 1, b)) - expect) <= 1e-10);
    }
  }
  SUBCASE("a pure shift costs the squared shift") {
    auto base = random_vec(60 * 4, rng);
    auto shifted = base;
    const double d[4] = {0.5, -1.0, 0.25, 2.0};
    for (std::size_t r = 0; r < 60; ++r)
      for (std::size_t c = 0; c < 4; ++c) shifted[r * 4 + c] += d[c];
    CHECK(frechet_distance(matrix(60, 4, base), matrix(60, 4, shifted)) ==
          doctest::Approx(0.25 + 1.0 + 0.0625 + 4.0).epsilon(1e-9));
  }
  SUBCASE("never negative, even for rank-deficient covariances") {
    for (int trial = 0; trial < 20; ++trial) {
      FeatureMatrix a = matrix(3, 8, random_vec(24, rng));
      FeatureMatrix b = matrix(4, 8, random_vec(32, rng));
      CHECK(frechet_distance(a, b) >= 0.0);
    }
  }
  CHECK_THROWS_AS(frechet_distance(matrix(1, 2, {1, 2}), matrix(3, 2, random_vec(6, rng))), std::invalid_argument);
}

TEST_CASE("ssim identities") {
  Rng rng(3);
  const std::size_t c = 3, h = 16, w = 24;
  auto img = random_vec(c * h * w, rng);
  CHECK(std::abs(ssim(img, img, c, h, w) - 1.0) <= 1e-9);

  // Zero-mean windows make the luminance term exactly 1, so the sign comes
  // from the structure term.
  auto centered = img;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y0 = 0; y0 < h; y0 += 8)
      for (std::size_t x0 = 0; x0 < w; x0 += 8) {
        double m = 0;
        for (std::size_t y = y0; y < y0 + 8; ++y)
          for (std::size_t x = x0; x < x0 + 8; ++x) m += centered[(ch * h + y) * w + x];
        m /= 64;
        for (std::size_t y = y0; y < y0 + 8; ++y)
          for (std::size_t x = x0; x < x0 + 8; ++x) centered[(ch * h + y) * w + x] -= m;
      }
  std::vector<double> negated(centered.size());
  for (std::size_t i = 0; i < centered.size(); ++i) negated[i] = -centered[i];
  CHECK(ssim(centered, negated, c, h, w) < 0.0);

  for (int trial = 0; trial < 50; ++trial) {
    auto a = random_vec(c * h * w, rng);
    auto b = random_vec(c * h * w, rng);
    const double s = ssim(a, b, c, h, w);
    CHECK(s == ssim(b, a, c, h, w));
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
  CHECK_THROWS_AS(ssim(img, random_vec(10, rng), c, h, w), std::invalid_argument);
}

TEST_CASE("ssim of a noisy copy drops below one") {
  Rng rng(31);
  auto a = random_vec(3 * 32 * 32, rng);
  auto b = a;
  for (double& v : b) v += rng.normal(0.0, 0.3);
  const double s = ssim(a, b, 3, 32, 32);
  CHECK(s < 0.95);
  CHECK(s > 0.0);
}

TEST_CASE("feature extractors") {
  Rng rng(6);
  Tensor images = mobgen::testing::random_tensor({5, 3, 32, 32}, rng);
  FeatureExtractor conv(ExtractorKind::kRandomConv, 7);
  FeatureMatrix f1 = conv.extract(images);
  FeatureMatrix f2 = FeatureExtractor(ExtractorKind::kRandomConv, 7).extract(images);
  CHECK(f1.cols == 64);
  CHECK(f1.rows == 5);
  CHECK(f1.values == f2.values);
  FeatureMatrix f3 = FeatureExtractor(ExtractorKind::kRandomConv, 8).extract(images);
  CHECK(f1.values != f3.values);

  Tensor constant = Tensor::full({4, 3, 32, 32}, 0.3);
  for (ExtractorKind kind : {ExtractorKind::kRandomConv, ExtractorKind::kGray8}) {
    FeatureMatrix f = FeatureExtractor(kind, 1).extract(constant);
    for (std::size_t c = 0; c < f.cols; ++c) {
      for (std::size_t r = 1; r < f.rows; ++r) CHECK(f.at(r, c) == f.at(0, c));
    }
  }
  FeatureMatrix g = FeatureExtractor(ExtractorKind::kGray8).extract(constant);
  CHECK(g.at(0, 0) == doctest::Approx(0.3));
}

TEST_CASE("report serializes to JSON and an aligned table") {
  MetricsReport r;
  r.metadata["dataset_digest"] = "abc";
  ForecastRow row;
  row.model = "tft";
  row.rmse = 1.5;
  row.r2 = 0.9;
  row.dtw = 3.0;
  row.rmse_per_target = {1, 2};
  row.r2_per_target = {0.8, std::nullopt};
  r.forecast.push_back(row);
  r.images.push_back({"latent-128", 128, 12.5, 0.7});
  const std::string text = to_json(r);
  MetricsReport back = report_from_json(text);
  CHECK(back.forecast.size() == 1);
  CHECK(back.forecast[0].model == "tft");
  CHECK(*back.forecast[0].r2 == 0.9);
  CHECK_FALSE(back.forecast[0].r2_per_target[1].has_value());
  CHECK(back.images[0].latent_dim == 128);
  CHECK(back.metadata.at("dataset_digest") == "abc");
  CHECK(to_json(back) == text);
  const std::string table = to_table(r);
  CHECK(table.find("Model") != std::string::npos);
  CHECK(table.find("1.5000") != std::string::npos);
  CHECK(table.find("12.5000") != std::string::npos);
}
