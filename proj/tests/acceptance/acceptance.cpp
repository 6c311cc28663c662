// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
//   mobgen_acceptance [--mobgen PATH] [--work DIR] [criterion ...]
//
// With no criteria every one runs. Criteria 9 and 10 drive the mobgen binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dtw_oracle.hpp"
#include "json.hpp"
#include "mobgen/forecaster/train.hpp"
#include "mobgen/metrics/dtw.hpp"
#include "mobgen/metrics/features.hpp"
#include "mobgen/metrics/frechet.hpp"
#include "mobgen/metrics/regression.hpp"
#include "mobgen/metrics/ssim.hpp"
#include "mobgen/numerics/digest.hpp"
#include "mobgen/numerics/grad_check.hpp"
#include "mobgen/numerics/ops.hpp"
#include "mobgen/spatialgen/blocks.hpp"
#include "mobgen/spatialgen/losses.hpp"
#include "mobgen/spatialgen/model.hpp"
#include "mobgen/spatialgen/train.hpp"
#include "mobgen/synthdata/render.hpp"
#include "mobgen/synthdata/world.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace mobgen;
using numerics::Rng;
using numerics::Tensor;
using testing::random_tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// sum(f * r) for a fixed random r turns a block output into a scalar whose
// gradient exercises every output component.
Tensor probe(const Tensor& y, const Tensor& r) { return numerics::sum(numerics::mul(y, r)); }

spatialgen::GanConfig tiny_gan() {
  spatialgen::GanConfig c;
  c.latent_dim = 4;
  c.image_size = 8;
  c.base_channels = 4;
  c.fusion_dim = 6;
  c.batch = 3;
  return c;
}

// --- 1: gradient fidelity ---------------------------------------------------

Outcome gradient_fidelity() {
  const auto t0 = Clock::now();
  std::map<std::string, double> worst;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    {
      numerics::ParameterSet params;
      Rng rng(seed);
      forecaster::LstmCell cell(params, "cell", 3, 4, rng);
      Tensor x = random_tensor({2, 3}, rng, -1, 1, true);
      Tensor h = random_tensor({2, 4}, rng, -1, 1, true);
      Tensor c = random_tensor({2, 4}, rng, -1, 1, true);
      const Tensor rh = random_tensor({2, 4}, rng), rc = random_tensor({2, 4}, rng);
      auto leaves = params.tensors();
      leaves.insert(leaves.end(), {x, h, c});
      const double err = numerics::grad_check(
          [&] {
            auto [h2, c2] = cell.step(x, h, c);
            return numerics::add(probe(h2, rh), probe(c2, rc));
          },
          leaves);
      worst["lstm_cell"] = std::max(worst["lstm_cell"], err);
    }
    {
      numerics::ParameterSet params;
      Rng rng(seed);
      forecaster::MultiHeadAttention mha(params, "mha", 4, 2, rng);
      Tensor q = random_tensor({2, 3, 4}, rng, -1, 1, true);
      Tensor kv = random_tensor({2, 3, 4}, rng, -1, 1, true);
      const Tensor r = random_tensor({2, 3, 4}, rng);
      auto leaves = params.tensors();
      leaves.insert(leaves.end(), {q, kv});
      const double err = numerics::grad_check([&] { return probe(mha(q, kv, kv), r); }, leaves);
      worst["multi_head_attention"] = std::max(worst["multi_head_attention"], err);
    }
    {
      numerics::ParameterSet params;
      Rng rng(seed);
      forecaster::FfnHead head(params, "head", 4, 6, 5, rng);
      Tensor x = random_tensor({3, 4}, rng, -1, 1, true);
      const Tensor r = random_tensor({3, 5}, rng);
      auto leaves = params.tensors();
      leaves.push_back(x);
      const double err = numerics::grad_check([&] { return probe(head(x), r); }, leaves);
      worst["ffn"] = std::max(worst["ffn"], err);
    }
    {
      numerics::ParameterSet params;
      Rng rng(seed);
      spatialgen::ConditionEncoder enc(params, "enc", 5, 4, rng);
      Tensor x = random_tensor({2, 5}, rng, -1, 1, true);
      Tensor z = random_tensor({2, 4}, rng, -1, 1, true);
      const Tensor r = random_tensor({2, 4}, rng);
      auto leaves = params.tensors();
      leaves.insert(leaves.end(), {x, z});
      const double err = numerics::grad_check([&] { return probe(enc(x, z), r); }, leaves);
      worst["f_enc"] = std::max(worst["f_enc"], err);
    }
    const spatialgen::GanConfig cfg = tiny_gan();
    {
      spatialgen::GanModel model(cfg, seed);
      Rng rng(100 + seed);
      Tensor w = random_tensor({2, cfg.latent_dim}, rng, -1, 1, true);
      // Non-zero noise gains so their gradients are exercised too.
      for (const auto& block : model.generator().blocks()) {
        Tensor gain = block.noise_gain;
        for (double& v : gain.mutable_values()) v = rng.uniform(-0.5, 0.5);
      }
      const Tensor r = random_tensor({2, 3, 8, 8}, rng);
      std::vector<Tensor> leaves;
      for (const auto& [name, t] : model.g_params().items())
        if (name.rfind("gen.", 0) == 0) leaves.push_back(t);
      leaves.push_back(w);
      const double err = numerics::grad_check(
          [&] {
            Rng noise(seed);
            return probe(model.generator()(w, noise), r);
          },
          leaves);
      worst["generator_block"] = std::max(worst["generator_block"], err);
    }
    {
      spatialgen::GanModel model(cfg, seed);
      Rng rng(200 + seed);
      Tensor images = random_tensor({3, 3, 8, 8}, rng, -1, 1, true);
      Tensor cond = random_tensor({3, 5}, rng, -1, 1, true);
      const Tensor r = random_tensor({3, 1}, rng);
      auto leaves = model.d_params().tensors();
      leaves.insert(leaves.end(), {images, cond});
      const double err = numerics::grad_check([&] { return probe(model.discriminator()(images, cond), r); }, leaves);
      worst["discriminator"] = std::max(worst["discriminator"], err);
    }
  }
  double max_err = 0.0;
  std::string detail;
  for (const auto& [name, err] : worst) {
    max_err = std::max(max_err, err);
    detail += fmt("%s %.1e, ", name.c_str(), err);
  }
  const double secs = seconds_since(t0);
  return {max_err < 1e-4 && secs < 120.0, detail + fmt("%.1f s", secs)};
}

// --- 2: DTW exactness -------------------------------------------------------

Outcome dtw_exactness() {
  const auto t0 = Clock::now();
  Rng rng(2024);
  std::size_t mismatches = 0;
  for (int pair = 0; pair < 200; ++pair) {
    const std::size_t n = 1 + rng.index(6), m = 1 + rng.index(6), dim = 1 + rng.index(3);
    std::vector<double> a(n * dim), b(m * dim);
    for (double& v : a) v = rng.uniform(-5, 5);
    for (double& v : b) v = rng.uniform(-5, 5);
    if (metrics::dtw(a, b, dim) != testing::brute_force_dtw(a, b, dim)) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 10.0, fmt("%zu of 200 pairs differ, %.2f s", mismatches, secs)};
}

// --- 3: metric identities ---------------------------------------------------

Outcome metric_identities() {
  Rng rng(3);
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  std::vector<double> y(50);
  for (double& v : y) v = rng.normal(3, 2);
  expect(metrics::rmse(y, y) == 0.0, "rmse(y,y)");
  expect(std::abs(*metrics::r_squared(y, y) - 1.0) <= 1e-12, "r2 perfect");
  double mean = 0;
  for (double v : y) mean += v / y.size();
  const std::vector<double> mean_pred(y.size(), mean);
  expect(std::abs(*metrics::r_squared(mean_pred, y)) <= 1e-12, "r2 mean predictor");

  const Tensor img = random_tensor({1, 3, 32, 32}, rng);
  expect(std::abs(metrics::ssim(img, 0, img, 0) - 1.0) <= 1e-9, "ssim(I,I)");

  metrics::FeatureMatrix x{40, 8, {}};
  for (std::size_t i = 0; i < 40 * 8; ++i) x.values.push_back(rng.normal());
  expect(std::abs(metrics::frechet_distance(x, x)) <= 1e-6, "frechet(X,X)");

  double worst_1d = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    metrics::FeatureMatrix r{30, 1, {}}, g{25, 1, {}};
    for (std::size_t i = 0; i < 30; ++i) r.values.push_back(rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3)));
    for (std::size_t i = 0; i < 25; ++i) g.values.push_back(rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 3)));
    auto moments = [](const std::vector<double>& v) {
      double m = 0, ss = 0;
      for (double e : v) m += e / v.size();
      for (double e : v) ss += (e - m) * (e - m);
      return std::pair{m, std::sqrt(ss / (v.size() - 1))};
    };
    const auto [mr, sr] = moments(r.values);
    const auto [mg, sg] = moments(g.values);
    const double closed = (mr - mg) * (mr - mg) + (sr - sg) * (sr - sg);
    worst_1d = std::max(worst_1d, std::abs(metrics::frechet_distance(r, g) - closed));
  }
  expect(worst_1d <= 1e-10, "1-D frechet closed form");

  std::string detail = fmt("1-D frechet max deviation %.1e", worst_1d);
  for (const auto& f : failures) detail += "; failed " + f;
  return {failures.empty(), detail};
}

// --- 4: loss spot values ----------------------------------------------------

Outcome loss_spot_values() {
  std::vector<std::string> failures;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };
  const Tensor zero = Tensor::zeros({1, 1});
  expect(std::abs(numerics::smooth_l1(Tensor::full({1, 1}, 0.5), zero).item() - 0.125) <= 1e-15, "smooth_l1(0.5)");
  expect(std::abs(numerics::smooth_l1(Tensor::full({1, 1}, 2.0), zero).item() - 1.5) <= 1e-15, "smooth_l1(2)");

  // The log terms carry a 1e-8 stabilizer, so agreement is to ~4e-8.
  const Tensor half = Tensor::full({6, 1}, 0.5);
  const double objective = spatialgen::discriminator_objective(half, half).item();
  expect(std::abs(objective - 2.0 * std::log(0.5)) <= 1e-7, "discriminator objective at D=0.5");

  Rng rng(4);
  const Tensor real = random_tensor({4, 3, 4, 4}, rng), fake = random_tensor({4, 3, 4, 4}, rng);
  const double lambda = 10.0;
  auto linear_score = [&](double norm) {
    std::vector<double> v(48);
    double ss = 0;
    for (double& e : v) {
      e = rng.normal();
      ss += e * e;
    }
    for (double& e : v) e *= norm / std::sqrt(ss);
    const Tensor w({48, 1}, v);
    return [w](const Tensor& images) { return numerics::matmul(spatialgen::flatten(images), w); };
  };
  const double gp1 = spatialgen::gradient_penalty(linear_score(1.0), real, fake, lambda, rng).item();
  const double gp3 = spatialgen::gradient_penalty(linear_score(3.0), real, fake, lambda, rng).item();
  expect(std::abs(gp1) <= 1e-6, "gradient penalty at unit norm");
  expect(std::abs(gp3 - 4.0 * lambda) <= 1e-9 * 4.0 * lambda, "gradient penalty at norm 3");

  std::string detail = fmt("D objective %.9f vs %.9f, GP %.1e / %.6f", objective, 2.0 * std::log(0.5), gp1, gp3);
  for (const auto& f : failures) detail += "; failed " + f;
  return {failures.empty(), detail};
}

// --- 5 and 6: forecaster learning and model ordering ------------------------

struct ForecastRun {
  double r2 = 0.0;
  double rmse_std = 0.0;
  double floor = 0.0;
  double train_seconds = 0.0;
};

// RMSE in standardized units between the observed test targets and the
// noiseless truth: the best any predictor can do on this corpus.
double noise_floor(const synthdata::World& world, const ingest::SplitDataset& data) {
  std::map<std::pair<std::string, int>, const ingest::TractRecord*> clean;
  for (const auto& rec : world.noiseless) clean[{rec.tract_id, rec.year}] = &rec;
  const std::size_t tin = data.config.input_len, tout = data.config.horizon;
  double ss = 0.0;
  std::size_t n = 0;
  for (const auto& win : data.test) {
    for (std::size_t t = 0; t < tout; ++t) {
      const auto* rec = clean.at({win.tract_id, win.first_year + static_cast<int>(tin + t)});
      for (std::size_t k = 0; k < ingest::kTravelCount; ++k) {
        const std::size_t f = ingest::kDemographicCount + k;
        const double d = data.stats.standardize(f, rec->feature(f)) - win.targets[t * ingest::kTravelCount + k];
        ss += d * d;
        ++n;
      }
    }
  }
  return std::sqrt(ss / static_cast<double>(n));
}

ForecastRun run_forecaster(forecaster::ModelKind kind, std::uint64_t seed) {
  synthdata::WorldConfig w;
  w.n_tracts = 200;
  w.noise_std = 0.1;
  w.seed = seed;
  const synthdata::World world = synthdata::gen_tracts(w);
  const ingest::SplitDataset data = ingest::chronological_split(world.records);
  forecaster::ForecastConfig cfg = forecaster::ForecastConfig::defaults(kind);
  cfg.seed = seed;
  const auto t0 = Clock::now();
  const auto result = forecaster::train_forecaster(data, forecaster::fit_config_to_split(cfg, data));
  ForecastRun run;
  run.train_seconds = seconds_since(t0);
  const metrics::ForecastRow row = forecaster::evaluate_forecaster(result.model, data.test, data.stats);
  run.r2 = row.r2.value_or(-1.0);
  run.rmse_std = row.rmse_standardized;
  run.floor = noise_floor(world, data);
  std::printf("  %-9s seed %llu: R2 %.4f, RMSE %.4f, floor %.4f, %.0f s\n", forecaster::to_string(kind).c_str(),
              static_cast<unsigned long long>(seed), run.r2, run.rmse_std, run.floor, run.train_seconds);
  std::fflush(stdout);
  return run;
}

Outcome forecaster_learning(const std::vector<ForecastRun>& tft) {
  std::vector<double> r2, ratio;
  double total = 0.0;
  for (const auto& r : tft) {
    r2.push_back(r.r2);
    ratio.push_back(r.rmse_std / r.floor);
    total += r.train_seconds;
  }
  const double r2_med = median(r2), ratio_med = median(ratio);
  return {r2_med >= 0.85 && ratio_med <= 1.5 && total < 600.0,
          fmt("median R2 %.4f (>= 0.85), median RMSE/floor %.3f (<= 1.5), %.0f s for 5 seeds", r2_med, ratio_med,
              total)};
}

Outcome model_ordering(const std::map<std::string, std::vector<ForecastRun>>& runs) {
  std::map<std::string, double> med;
  for (const auto& [name, v] : runs) {
    std::vector<double> rmse;
    for (const auto& r : v) rmse.push_back(r.rmse_std);
    med[name] = median(rmse);
  }
  const double tft = med.at("tft"), attn = med.at("lstm_attn"), rnn = med.at("rnn");
  return {tft <= attn && attn <= rnn,
          fmt("median RMSE tft %.4f, lstm_attn %.4f, rnn %.4f (need tft <= lstm_attn <= rnn)", tft, attn, rnn)};
}

// --- 7: GAN overfit ---------------------------------------------------------

spatialgen::ImageDataset overfit_corpus() {
  synthdata::WorldConfig w;
  w.n_tracts = 8;
  w.last_year = w.first_year;
  return synthdata::render_dataset(synthdata::gen_tracts(w).records, {});
}

Outcome gan_overfit(double lr) {
  const auto t0 = Clock::now();
  const spatialgen::ImageDataset data = overfit_corpus();
  spatialgen::GanConfig cfg;
  cfg.latent_dim = 128;
  cfg.iterations = 2000;
  cfg.lr_g = lr;
  cfg.lr_d = lr;
  const spatialgen::ConditionStats stats = spatialgen::fit_condition_stats(data.conditions);
  spatialgen::GanModel model(cfg, 0);
  spatialgen::GanTrainer trainer(model, data.images, stats.standardize(data.conditions), 0);
  bool finite = true, in_range = true;
  for (std::size_t i = 0; i < cfg.iterations; ++i) {
    const spatialgen::GanLogEntry e = trainer.step();
    finite = finite && std::isfinite(e.loss_d) && std::isfinite(e.loss_g) && std::isfinite(e.d_penalty) &&
             std::isfinite(e.path_penalty);
    in_range = in_range && e.d_real > 0.0 && e.d_real < 1.0 && e.d_fake > 0.0 && e.d_fake < 1.0;
  }
  const Tensor fake = spatialgen::generate_images(model, stats, data.conditions, 99);
  const Tensor cond = stats.standardize(data.conditions);
  for (const Tensor& batch : {data.images, fake}) {
    for (double p : model.discriminator()(batch, cond).values()) in_range = in_range && p > 0.0 && p < 1.0;
  }
  const std::vector<double> best = metrics::best_match_ssim(fake, data.images);
  const double worst = *std::min_element(best.begin(), best.end());
  double mean = 0.0;
  for (double v : best) mean += v / best.size();
  const double secs = seconds_since(t0);
  return {worst >= 0.6 && finite && in_range && secs < 900.0,
          fmt("lr %.0e, best-match SSIM min %.3f (>= 0.6) mean %.3f, D in (0,1) %s, finite %s, %.0f s", lr, worst,
              mean, in_range ? "yes" : "no", finite ? "yes" : "no", secs)};
}

// --- 8: latent-dim sweep ----------------------------------------------------

Outcome latent_sweep(std::size_t iterations, double lr) {
  const auto t0 = Clock::now();
  synthdata::WorldConfig w;
  w.n_tracts = 64;
  w.last_year = w.first_year + 3;
  const spatialgen::ImageDataset data = synthdata::render_dataset(synthdata::gen_tracts(w).records, {});
  const metrics::FeatureExtractor extractor(metrics::ExtractorKind::kRandomConv, 0);
  const metrics::FeatureMatrix real = extractor.extract(data.images);
  std::map<std::size_t, std::vector<double>> fid;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    for (std::size_t dim : {128u, 512u}) {
      spatialgen::GanConfig cfg;
      cfg.latent_dim = dim;
      cfg.iterations = iterations;
      cfg.seed = seed;
      cfg.lr_g = lr;
      cfg.lr_d = lr;
      cfg.sample_every = 0;
      cfg.checkpoint_every = 0;
      const auto result = spatialgen::train_gan(data, cfg);
      const Tensor fake = spatialgen::generate_images(result.model, result.stats, data.conditions, 1000 + seed);
      fid[dim].push_back(metrics::frechet_distance(real, extractor.extract(fake)));
      std::printf("  latent %zu seed %llu: FID %.4f\n", dim, static_cast<unsigned long long>(seed), fid[dim].back());
      std::fflush(stdout);
    }
  }
  const double f128 = median(fid[128]), f512 = median(fid[512]);
  return {f512 <= f128, fmt("%zu images, %zu iterations, lr %.0e, median FID 512: %.4f, 128: %.4f, %.0f s",
                            data.images.dim(0), iterations, lr, f512, f128, seconds_since(t0))};
}

// --- 9 and 10: CLI determinism and pipeline ---------------------------------

int run_mobgen(const std::string& exe, const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + exe + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Log lines with the wall-clock field removed.
std::string stripped_log(const fs::path& path) {
  std::ifstream in(path);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    j.erase("wall_time");
    out += j.dump() + "\n";
  }
  return out;
}

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

Outcome determinism(const std::string& exe, const fs::path& work) {
  const fs::path root = work / "determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  if (run_mobgen(exe, "synth --seed 5 --tracts 24 --out " + quoted(root / "synth"), root / "synth.log") != 0)
    return {false, "synth failed"};
  std::vector<std::string> diffs;
  std::vector<std::string> codes;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    codes.push_back(std::to_string(run_mobgen(
        exe,
        "train-forecaster --seed 5 --data " + quoted(root / "synth" / "tracts.csv") +
            " --models tft,rnn --epochs 8 --hidden 16 --layers 2 --heads 2 --out " + quoted(dir / "forecaster"),
        dir.string() + "_forecaster.log")));
    codes.push_back(std::to_string(
        run_mobgen(exe,
                   "train-gan --seed 5 --images " + quoted(root / "synth" / "images") +
                       " --latent-dim 32 --iterations 30 --base-channels 8 --sample-every 10 --checkpoint-every 15"
                       " --eval-count 32 --out " +
                       quoted(dir / "gan"),
                   dir.string() + "_gan.log")));
  }
  for (const auto& c : codes)
    if (c != "0") return {false, "a training run exited with " + c};
  const std::vector<fs::path> files = {"forecaster/tft/forecaster.ckpt", "forecaster/rnn/forecaster.ckpt",
                                       "gan/latent_32/gan.ckpt"};
  for (const auto& f : files) {
    if (numerics::sha256_file(root / "a" / f) != numerics::sha256_file(root / "b" / f)) diffs.push_back(f.string());
  }
  const std::vector<fs::path> logs = {"forecaster/tft/log.jsonl", "forecaster/rnn/log.jsonl",
                                      "gan/latent_32/log.jsonl"};
  for (const auto& f : logs) {
    if (numerics::sha256_hex(stripped_log(root / "a" / f)) != numerics::sha256_hex(stripped_log(root / "b" / f)))
      diffs.push_back(f.string());
  }
  std::string detail = fmt("%zu checkpoints and %zu logs compared", files.size(), logs.size());
  for (const auto& d : diffs) detail += "; differs: " + d;
  return {diffs.empty(), detail};
}

std::size_t count_png(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".png") ++n;
  return n;
}

std::size_t csv_rows(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::size_t n = 0;
  std::getline(in, line);
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return n;
}

Outcome pipeline(const std::string& exe, const fs::path& work) {
  const fs::path root = work / "pipeline";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path ini = root / "pipeline.ini";
  std::ofstream(ini) << "seed = 3\n"
                     << "[synth]\ntracts = 16\nnoise = 0.1\n"
                     << "[train-forecaster]\ndata = " << (root / "synth" / "tracts.csv").string()
                     << "\nmodels = tft\nepochs = 5\nhidden = 16\nlayers = 2\nheads = 2\n"
                     << "[forecast]\ncheckpoint = " << (root / "forecaster" / "tft" / "forecaster.ckpt").string()
                     << "\ndata = " << (root / "synth" / "tracts.csv").string() << "\nwindows = latest\n"
                     << "[train-gan]\nimages = " << (root / "synth" / "images").string()
                     << "\ncondition-stats = " << (root / "forecaster" / "condition_stats.json").string()
                     << "\nlatent-dim = 32\niterations = 20\nbase-channels = 8\neval-count = 16\n"
                     << "[generate]\ncheckpoint = " << (root / "gan" / "latent_32" / "gan.ckpt").string()
                     << "\nforecast = " << (root / "forecast" / "forecast.csv").string() << "\n";
  const std::vector<std::pair<std::string, std::string>> steps = {
      {"synth", "synth"}, {"train-forecaster", "forecaster"}, {"forecast", "forecast"},
      {"train-gan", "gan"}, {"generate", "generate"}};
  for (const auto& [cmd, dir] : steps) {
    const int code = run_mobgen(exe, "--config " + quoted(ini) + " " + cmd + " --out " + quoted(root / dir),
                                root / (dir + ".log"));
    if (code != 0) return {false, cmd + " exited with " + std::to_string(code)};
  }
  const std::size_t rows = csv_rows(root / "forecast" / "forecast.csv");
  const std::size_t pngs = count_png(root / "generate");
  return {rows > 0 && pngs == rows, fmt("5 steps exited 0, %zu forecast rows, %zu PNGs", rows, pngs)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  std::string exe = "mobgen";
  fs::path work = fs::temp_directory_path() / "mobgen_acceptance";
  double overfit_lr = 1e-3;
  std::size_t sweep_iterations = 2000;
  double sweep_lr = 1e-3;
  app.add_option("criteria", selected, "Criterion numbers (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--mobgen", exe, "Path to the mobgen binary");
  app.add_option("--work", work, "Scratch directory");
  app.add_option("--overfit-lr", overfit_lr, "Adam step size of both networks in the overfit run")
      ->capture_default_str();
  app.add_option("--sweep-iterations", sweep_iterations)->capture_default_str();
  app.add_option("--sweep-lr", sweep_lr)->capture_default_str();
  CLI11_PARSE(app, argc, argv);
  std::set<int> want(selected.begin(), selected.end());
  if (want.empty())
    for (int i = 1; i <= 10; ++i) want.insert(i);
  fs::create_directories(work);

  int failures = 0;
  auto report = [&](int id, const std::string& name, const Outcome& o) {
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  auto guarded = [&](int id, const std::string& name, const std::function<Outcome()>& f) {
    if (!want.count(id)) return;
    try {
      report(id, name, f());
    } catch (const std::exception& e) {
      report(id, name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, "gradient fidelity", gradient_fidelity);
  guarded(2, "DTW exactness", dtw_exactness);
  guarded(3, "metric identities", metric_identities);
  guarded(4, "loss spot values", loss_spot_values);

  if (want.count(5) || want.count(6)) {
    std::map<std::string, std::vector<ForecastRun>> runs;
    std::vector<forecaster::ModelKind> kinds = {forecaster::ModelKind::kTft};
    if (want.count(6)) kinds.insert(kinds.end(), {forecaster::ModelKind::kLstmAttn, forecaster::ModelKind::kRnn});
    std::string error;
    try {
      for (std::uint64_t seed = 0; seed < 5; ++seed)
        for (auto kind : kinds) runs[forecaster::to_string(kind)].push_back(run_forecaster(kind, seed));
    } catch (const std::exception& e) {
      error = e.what();
    }
    if (!error.empty()) {
      if (want.count(5)) report(5, "forecaster learning", {false, "exception: " + error});
      if (want.count(6)) report(6, "model ordering", {false, "exception: " + error});
    } else {
      guarded(5, "forecaster learning", [&] { return forecaster_learning(runs.at("tft")); });
      guarded(6, "model ordering", [&] { return model_ordering(runs); });
    }
  }

  guarded(7, "GAN overfit", [&] { return gan_overfit(overfit_lr); });
  guarded(8, "latent-dim sweep", [&] { return latent_sweep(sweep_iterations, sweep_lr); });
  guarded(9, "determinism", [&] { return determinism(exe, work); });
  guarded(10, "pipeline integrity", [&] { return pipeline(exe, work); });
  return failures == 0 ? 0 : 1;
}
