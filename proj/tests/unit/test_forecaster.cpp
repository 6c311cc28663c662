#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "mobgen/errors.hpp"
#include "mobgen/forecaster/train.hpp"
#include "mobgen/numerics/grad_check.hpp"
#include "mobgen/numerics/ops.hpp"
#include "mobgen/synthdata/world.hpp"
#include "test_util.hpp"

using namespace mobgen;
using namespace mobgen::forecaster;
using numerics::Rng;
using numerics::Shape;
using numerics::ShapeError;
using testing::random_tensor;
using testing::to_vector;

namespace {

void fill(const Tensor& t, double value) {
  Tensor handle = t;
  for (double& v : handle.mutable_values()) v = value;
}

void set_identity(const numerics::Linear& lin) {
  Tensor w = lin.weight();
  auto v = w.mutable_values();
  const std::size_t out = lin.out_features();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i / out == i % out) ? 1.0 : 0.0;
  fill(lin.bias(), 0.0);
}

ForecastConfig tiny(ModelKind kind) {
  ForecastConfig c = ForecastConfig::defaults(kind);
  c.input_dim = 4;
  c.hidden = 8;
  c.layers = 2;
  c.heads = 2;
  c.dropout = 0.0;
  return c;
}

ingest::SplitDataset world_split(std::size_t tracts, double noise, std::uint64_t seed) {
  synthdata::WorldConfig w;
  w.n_tracts = tracts;
  w.noise_std = noise;
  w.seed = seed;
  return ingest::chronological_split(synthdata::gen_tracts(w).records, ingest::SplitConfig{});
}

double mean_of(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("model kinds and config JSON round trip") {
  for (auto kind : {ModelKind::kRnn, ModelKind::kLstm, ModelKind::kLstmAttn, ModelKind::kTft}) {
    CHECK(parse_model_kind(to_string(kind)) == kind);
    const ForecastConfig c = ForecastConfig::defaults(kind);
    const ForecastConfig back = forecast_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
  }
  CHECK_THROWS_AS(parse_model_kind("gru"), std::invalid_argument);
  ForecastConfig bad = ForecastConfig::defaults(ModelKind::kTft);
  bad.heads = 3;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(forecast_config_from_json(nlohmann::json{{"kind", "tft"}, {"hidden", "x"}}), CompatError);
}

TEST_CASE("lstm cell with zero weights keeps zero state, states stay bounded") {
  numerics::ParameterSet params;
  Rng rng(1);
  LstmCell cell(params, "cell", 3, 4, rng);
  for (const auto& [name, t] : params.items()) fill(t, 0.0);
  const Tensor x = random_tensor({2, 3}, rng);
  auto [h, c] = cell.step(x, Tensor::zeros({2, 4}), Tensor::zeros({2, 4}));
  for (double v : h.values()) CHECK(v == 0.0);
  for (double v : c.values()) CHECK(v == 0.0);

  Rng init(2);
  numerics::ParameterSet p2;
  LstmCell big(p2, "cell", 3, 4, init);
  Tensor hh = Tensor::zeros({2, 4}), cc = Tensor::zeros({2, 4});
  for (int t = 0; t < 50; ++t) {
    std::tie(hh, cc) = big.step(random_tensor({2, 3}, init, -20, 20), hh, cc);
    for (double v : hh.values()) CHECK(std::abs(v) < 1.0);
  }
}

TEST_CASE("lstm cell gate arithmetic") {
  // Only the candidate gate bias is non-zero: i = f = o = 0.5, g = tanh(1).
  numerics::ParameterSet params;
  Rng rng(3);
  LstmCell cell(params, "cell", 2, 1, rng);
  for (const auto& [name, t] : params.items()) fill(t, 0.0);
  Tensor bias = cell.gates().bias();
  bias.mutable_values()[2] = 1.0;
  auto [h, c] = cell.step(Tensor({1, 2}, {0.3, -0.7}), Tensor({1, 1}, {0.0}), Tensor({1, 1}, {0.8}));
  const double c_expect = 0.5 * 0.8 + 0.5 * std::tanh(1.0);
  CHECK(c.item() == doctest::Approx(c_expect).epsilon(1e-14));
  CHECK(h.item() == doctest::Approx(0.5 * std::tanh(c_expect)).epsilon(1e-14));
}

TEST_CASE("lstm cell passes grad_check at 10 seeded points") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    numerics::ParameterSet params;
    Rng rng(seed);
    LstmCell cell(params, "cell", 3, 4, rng);
    Tensor x = random_tensor({2, 3}, rng, -1, 1, true);
    Tensor h = random_tensor({2, 4}, rng, -1, 1, true);
    Tensor c = random_tensor({2, 4}, rng, -1, 1, true);
    const Tensor rh = random_tensor({2, 4}, rng), rc = random_tensor({2, 4}, rng);
    auto leaves = params.tensors();
    leaves.insert(leaves.end(), {x, h, c});
    const double err = numerics::grad_check(
        [&] {
          auto [h2, c2] = cell.step(x, h, c);
          return numerics::add(numerics::sum(numerics::mul(h2, rh)), numerics::sum(numerics::mul(c2, rc)));
        },
        leaves);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("encoder is causal and matches composed single layers") {
  Rng rng(4);
  numerics::ParameterSet params;
  Encoder enc(params, "enc", true, 3, 5, 2, rng);
  const Tensor x = random_tensor({2, 4, 3}, rng);
  const Encoded full = enc(x);
  REQUIRE(full.outputs.size() == 4);
  CHECK(full.stacked().shape() == Shape{2, 4, 5});

  // Changing step 2 leaves steps 0 and 1 bit-identical.
  std::vector<double> changed = to_vector(x);
  for (std::size_t b = 0; b < 2; ++b) {
    for (std::size_t f = 0; f < 3; ++f) changed[(b * 4 + 2) * 3 + f] += 0.5;
  }
  const Encoded other = enc(Tensor({2, 4, 3}, changed));
  for (std::size_t t = 0; t < 2; ++t) CHECK(to_vector(full.outputs[t]) == to_vector(other.outputs[t]));
  CHECK(to_vector(full.outputs[2]) != to_vector(other.outputs[2]));

  // Layer by layer with the same cells.
  const auto& cells = enc.lstm_cells();
  std::vector<Tensor> seq;
  const Tensor flat = numerics::reshape(x, {2, 12});
  for (std::size_t t = 0; t < 4; ++t) seq.push_back(numerics::slice(flat, t * 3, t * 3 + 3));
  for (const LstmCell& cell : cells) {
    Tensor h = Tensor::zeros({2, 5}), c = Tensor::zeros({2, 5});
    std::vector<Tensor> next;
    for (const Tensor& s : seq) {
      std::tie(h, c) = cell.step(s, h, c);
      next.push_back(h);
    }
    seq = next;
  }
  for (std::size_t t = 0; t < 4; ++t) CHECK(testing::max_abs_diff(seq[t].values(), full.outputs[t].values()) == 0.0);
}

TEST_CASE("single-step sequence equals one cell step") {
  Rng rng(5);
  numerics::ParameterSet params;
  Encoder enc(params, "enc", true, 3, 4, 1, rng);
  const Tensor x = random_tensor({2, 1, 3}, rng);
  const Encoded out = enc(x);
  auto [h, c] = enc.lstm_cells()[0].step(numerics::reshape(x, {2, 3}), Tensor::zeros({2, 4}), Tensor::zeros({2, 4}));
  CHECK(to_vector(out.outputs[0]) == to_vector(h));
  CHECK(to_vector(out.c_final[0]) == to_vector(c));
  CHECK_THROWS_AS(enc(Tensor::zeros({2, 3})), ShapeError);
}

TEST_CASE("scaled dot attention examples") {
  Rng rng(6);
  SUBCASE("a single key returns its value with weight 1") {
    const Tensor q = random_tensor({1, 3, 2}, rng), k = random_tensor({1, 1, 2}, rng);
    const Tensor v = random_tensor({1, 1, 4}, rng);
    Tensor w;
    const Tensor out = scaled_dot_attention(q, k, v, &w);
    for (double x : w.values()) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t j = 0; j < 4; ++j) CHECK(out.values()[r * 4 + j] == doctest::Approx(v.values()[j]));
    }
  }
  SUBCASE("equal keys give the column mean of the values") {
    const Tensor q = random_tensor({1, 2, 3}, rng);
    const Tensor k({1, 4, 3}, std::vector<double>(12, 0.3));
    const Tensor v = random_tensor({1, 4, 2}, rng);
    const Tensor out = scaled_dot_attention(q, k, v);
    for (std::size_t j = 0; j < 2; ++j) {
      double m = 0;
      for (std::size_t t = 0; t < 4; ++t) m += v.values()[t * 2 + j] / 4;
      CHECK(out.values()[j] == doctest::Approx(m).epsilon(1e-14));
      CHECK(out.values()[2 + j] == doctest::Approx(m).epsilon(1e-14));
    }
  }
  SUBCASE("two by two hand case") {
    const Tensor q({1, 2, 2}, {1, 0, 0, 1});
    const Tensor k({1, 2, 2}, {1, 0, 0, 1});
    const Tensor v({1, 2, 2}, {1, 2, 3, 4});
    Tensor w;
    const Tensor out = scaled_dot_attention(q, k, v, &w);
    const double a = std::exp(1 / std::sqrt(2.0)) / (std::exp(1 / std::sqrt(2.0)) + 1.0);
    const std::vector<double> weights{a, 1 - a, 1 - a, a};
    const std::vector<double> expect{a * 1 + (1 - a) * 3, a * 2 + (1 - a) * 4, (1 - a) * 1 + a * 3,
                                     (1 - a) * 2 + a * 4};
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(w.values()[i] == doctest::Approx(weights[i]).epsilon(1e-14));
      CHECK(out.values()[i] == doctest::Approx(expect[i]).epsilon(1e-14));
    }
  }
  SUBCASE("rows sum to one") {
    Tensor w;
    scaled_dot_attention(random_tensor({3, 4, 5}, rng, -3, 3), random_tensor({3, 6, 5}, rng, -3, 3),
                         random_tensor({3, 6, 2}, rng), &w);
    for (std::size_t r = 0; r < 12; ++r) {
      double s = 0;
      for (std::size_t t = 0; t < 6; ++t) s += w.values()[r * 6 + t];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("one head with identity projections is plain attention") {
  Rng rng(7);
  numerics::ParameterSet params;
  MultiHeadAttention mha(params, "mha", 4, 1, rng);
  for (const auto* lin : {&mha.wq(), &mha.wk(), &mha.wv(), &mha.wo()}) set_identity(*lin);
  const Tensor q = random_tensor({2, 3, 4}, rng), kv = random_tensor({2, 5, 4}, rng);
  Tensor w;
  const Tensor out = mha(q, kv, kv, &w);
  const Tensor ref = scaled_dot_attention(q, kv, kv);
  CHECK(testing::max_abs_diff(out.values(), ref.values()) < 1e-14);
  CHECK(w.shape() == Shape{2, 1, 3, 5});
  CHECK_THROWS_AS(MultiHeadAttention(params, "bad", 6, 4, rng), std::invalid_argument);
}

TEST_CASE("multi-head attention passes grad_check at 10 seeded points") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    numerics::ParameterSet params;
    Rng rng(seed);
    MultiHeadAttention mha(params, "mha", 4, 2, rng);
    Tensor q = random_tensor({2, 3, 4}, rng, -1, 1, true);
    Tensor kv = random_tensor({2, 3, 4}, rng, -1, 1, true);
    const Tensor r = random_tensor({2, 3, 4}, rng);
    auto leaves = params.tensors();
    leaves.insert(leaves.end(), {q, kv});
    const double err =
        numerics::grad_check([&] { return numerics::sum(numerics::mul(mha(q, kv, kv), r)); }, leaves);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("ffn head examples and grad_check") {
  Rng rng(8);
  numerics::ParameterSet params;
  FfnHead head(params, "head", 4, 6, 5, rng);
  for (const auto& [name, t] : params.items()) {
    if (name != "head.w_out.bias") fill(t, 0.0);
  }
  const Tensor out = head(random_tensor({3, 4}, rng));
  for (std::size_t i = 0; i < 15; ++i) CHECK(out.values()[i] == head.output().bias().values()[i % 5]);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    numerics::ParameterSet p;
    Rng r(seed);
    FfnHead h(p, "head", 4, 6, 5, r);
    Tensor x = random_tensor({3, 4}, r, -1, 1, true);
    const Tensor w = random_tensor({3, 5}, r);
    auto leaves = p.tensors();
    leaves.push_back(x);
    CHECK(numerics::grad_check([&] { return numerics::sum(numerics::mul(h(x), w)); }, leaves) < 1e-4);
  }
}

TEST_CASE("every model kind maps [B,3,d] to [B,3,5] and passes grad_check") {
  for (auto kind : {ModelKind::kRnn, ModelKind::kLstm, ModelKind::kLstmAttn, ModelKind::kTft}) {
    CAPTURE(to_string(kind));
    const ForecastModel model(tiny(kind), 1);
    Rng rng(9);
    Tensor x = random_tensor({2, 3, 4}, rng, -1, 1, true);
    AttentionMaps maps;
    const Tensor y = model.forward(x, nullptr, &maps);
    CHECK(y.shape() == Shape{2, 3, 5});
    if (kind == ModelKind::kTft) {
      CHECK(maps.mean.shape() == Shape{2, 3, 3});
      CHECK(maps.per_head.shape() == Shape{2, 2, 3, 3});
    } else if (kind == ModelKind::kLstmAttn) {
      CHECK(maps.mean.shape() == Shape{2, 3, 3});
    } else {
      CHECK_FALSE(maps.mean.defined());
    }
    CHECK_THROWS_AS(model.forward(Tensor::zeros({2, 3, 7})), ShapeError);

    const Tensor r = random_tensor({2, 3, 5}, rng);
    auto leaves = model.params().tensors();
    leaves.push_back(x);
    const double err = numerics::grad_check([&] { return numerics::sum(numerics::mul(model.forward(x), r)); },
                                            leaves, {1e-5, 10, 3});
    CHECK(err < 1e-4);
  }
}

TEST_CASE("tft output at step s does not depend on later queries") {
  const ForecastModel model(tiny(ModelKind::kTft), 2);
  Rng rng(10);
  const Tensor x = random_tensor({1, 3, 4}, rng);
  const Tensor a = model.forward(x);
  // Each decoder step only reads its own query; perturbing the last one
  // changes only the last output row.
  Tensor queries = model.params().get("decoder.queries");
  auto q = queries.mutable_values();
  for (std::size_t j = 2 * 8; j < 3 * 8; ++j) q[j] += 0.3;
  const Tensor b = model.forward(x);
  for (std::size_t i = 0; i < 10; ++i) CHECK(a.values()[i] == b.values()[i]);
  CHECK(a.values()[12] != b.values()[12]);
}

TEST_CASE("model construction is deterministic and dropout is inactive at inference") {
  ForecastConfig cfg = tiny(ModelKind::kTft);
  cfg.dropout = 0.5;
  const ForecastModel a(cfg, 3), b(cfg, 3), c(cfg, 4);
  Rng rng(11);
  const Tensor x = random_tensor({2, 3, 4}, rng);
  CHECK(to_vector(a.forward(x)) == to_vector(b.forward(x)));
  CHECK(to_vector(a.forward(x)) == to_vector(a.forward(x)));
  CHECK(to_vector(a.forward(x)) != to_vector(c.forward(x)));
  Rng d1(1);
  CHECK(to_vector(a.forward(x, &d1)) != to_vector(a.forward(x)));
}

TEST_CASE("training on a small world") {
  const ingest::SplitDataset data = world_split(40, 0.1, 1);
  ForecastConfig cfg = tiny(ModelKind::kTft);
  cfg.hidden = 16;
  cfg.epochs = 30;
  cfg.lr = 3e-3;

  SUBCASE("deterministic with logs and best-epoch selection") {
    const auto dir = std::filesystem::temp_directory_path() / "mobgen_forecaster_test";
    std::filesystem::create_directories(dir);
    TrainResult a = train_forecaster(data, cfg, {dir / "a.jsonl", nullptr});
    TrainResult b = train_forecaster(data, cfg, {dir / "b.jsonl", nullptr});
    REQUIRE(a.curve.size() == 30);
    CHECK(a.val_windows == data.train.size() / 10);
    CHECK(a.train_windows + a.val_windows == data.train.size());
    for (std::size_t i = 0; i < a.curve.size(); ++i) {
      CHECK(a.curve[i].train_loss == b.curve[i].train_loss);
      CHECK(a.curve[i].val_loss == b.curve[i].val_loss);
    }
    for (std::size_t i = 0; i < a.model.params().items().size(); ++i) {
      CHECK(to_vector(a.model.params().items()[i].second) == to_vector(b.model.params().items()[i].second));
    }
    double best = INFINITY;
    for (const auto& e : a.curve) best = std::min(best, *e.val_loss);
    CHECK(*a.curve[a.best_epoch - 1].val_loss == best);

    // Five-epoch moving average of the training loss falls.
    std::vector<double> loss;
    for (const auto& e : a.curve) loss.push_back(e.train_loss);
    CHECK(mean_of(std::span(loss).subspan(25, 5)) < mean_of(std::span(loss).subspan(0, 5)));
    std::filesystem::remove_all(dir);
  }

  SUBCASE("zero epochs returns the initialized model") {
    cfg.epochs = 0;
    TrainResult r = train_forecaster(data, cfg);
    const ForecastModel fresh(fit_config_to_split(cfg, data), cfg.seed);
    CHECK(r.curve.empty());
    CHECK(r.best_epoch == 0);
    for (std::size_t i = 0; i < fresh.params().items().size(); ++i) {
      CHECK(to_vector(r.model.params().items()[i].second) == to_vector(fresh.params().items()[i].second));
    }
  }

  SUBCASE("checkpoint round trip") {
    cfg.epochs = 2;
    TrainResult r = train_forecaster(data, cfg);
    const numerics::Checkpoint ckpt =
        numerics::deserialize_checkpoint(numerics::serialize_checkpoint(forecast_checkpoint(r.model, data, 1)));
    LoadedForecaster loaded = load_forecaster(ckpt);
    CHECK(loaded.input_features == data.input_features);
    CHECK(loaded.split.boundary_year == data.config.boundary_year);
    for (std::size_t f = 0; f < ingest::kFeatureCount; ++f) {
      CHECK(loaded.stats.columns[f].mu == data.stats.columns[f].mu);
      CHECK(loaded.stats.columns[f].sigma == data.stats.columns[f].sigma);
    }
    CHECK(to_vector(predict(loaded.model, data.test).standardized) ==
          to_vector(predict(r.model, data.test).standardized));

    numerics::Checkpoint wrong = ckpt;
    wrong.metadata = R"({"kind":"mobgen.gan"})";
    CHECK_THROWS_AS(load_forecaster(wrong), CompatError);
    numerics::Checkpoint shapes = ckpt;
    shapes.tensors.pop_back();
    CHECK_THROWS_AS(load_forecaster(shapes), CompatError);
  }
}

TEST_CASE("scores of oracle predictors") {
  const ingest::SplitDataset data = world_split(30, 0.1, 2);
  REQUIRE(!data.test.empty());
  const Tensor truth = window_targets(data.test, 3, 5);

  const metrics::ForecastRow perfect = score_predictions("perfect", truth, data.test, data.stats);
  CHECK(perfect.rmse == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(*perfect.r2 == doctest::Approx(1.0));
  CHECK(perfect.dtw == doctest::Approx(0.0).epsilon(1e-12));

  // Per-target test mean: R^2 is 0.
  std::vector<double> means(5, 0.0);
  const auto tv = truth.values();
  const std::size_t rows = tv.size() / 5;
  for (std::size_t i = 0; i < tv.size(); ++i) means[i % 5] += tv[i] / static_cast<double>(rows);
  std::vector<double> flat(tv.size());
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = means[i % 5];
  const metrics::ForecastRow mean_row =
      score_predictions("mean", Tensor(truth.shape(), flat), data.test, data.stats);
  CHECK(*mean_row.r2 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(*mean_row.r2_standardized == doctest::Approx(0.0).epsilon(1e-9));

  CHECK_THROWS_AS(score_predictions("x", truth, {}, data.stats), DataError);
}

TEST_CASE("attention csv lists one row per window and decoder step") {
  const ingest::SplitDataset data = world_split(5, 0.1, 3);
  ForecastConfig cfg = fit_config_to_split(tiny(ModelKind::kTft), data);
  const ForecastModel model(cfg, 1);
  const Prediction p = predict(model, data.test);
  const std::string csv = attention_csv(data.test, p.attention);
  CHECK(csv.rfind("window,tract_id,first_year,decoder_step,encoder_0,encoder_1,encoder_2\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == 1 + data.test.size() * 3);
}
