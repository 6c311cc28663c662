#include "mobgen/cli/app.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "mobgen/cli/commands.hpp"
#include "mobgen/errors.hpp"
#include "mobgen/numerics/tensor.hpp"

namespace mobgen::cli {

namespace {

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json path_opt(const std::optional<fs::path>& v) {
  return v ? nlohmann::json(v->string()) : nlohmann::json(nullptr);
}

struct Global {
  std::uint64_t seed = 0;
  fs::path out = "out";
  std::string log_level = "info";
};

int run_command(const std::string& name, const Global& global, nlohmann::json config,
                const std::function<void(RunManifest&)>& body) {
  RunManifest manifest(name, global.seed, std::move(config));
  int code = kOk;
  std::string message;
  try {
    body(manifest);
  } catch (const IoError& e) {
    code = kIo;
    message = e.what();
  } catch (const DataError& e) {
    code = kData;
    message = e.what();
  } catch (const CompatError& e) {
    code = kCompat;
    message = e.what();
  } catch (const std::invalid_argument& e) {
    code = kData;
    message = e.what();
  } catch (const std::exception& e) {
    code = kInternal;
    message = e.what();
  }
  if (code != kOk) spdlog::error("{}", message);
  manifest.set_status(code, message);
  std::error_code ec;
  fs::create_directories(global.out, ec);
  if (fs::is_directory(global.out, ec)) {
    try {
      manifest.write(global.out);
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
      if (code == kOk) code = kIo;
    }
  }
  return code;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Demographic travel-behaviour forecasting and conditional satellite-tile generation", "mobgen"};
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "INI file of key = value options ([subcommand] sections); flags win");
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  app.fallthrough();

  Global global;
  app.add_option("--seed", global.seed, "Seed for every random stream")->capture_default_str();
  app.add_option("--out", global.out, "Output directory (created if missing)")->capture_default_str();
  app.add_option("--log-level", global.log_level, "trace, debug, info, warn, error, critical or off")
      ->capture_default_str()
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic tract corpus with paired images");
  synth_cmd->add_option("--tracts", synth.tracts, "Number of tracts")->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "Std of the noise on latent travel values")->capture_default_str();
  synth_cmd->add_option("--first-year", synth.first_year)->capture_default_str();
  synth_cmd->add_option("--last-year", synth.last_year)->capture_default_str();
  synth_cmd->add_option("--shock-year", synth.shock_year, "Year from which transit use drops");
  synth_cmd->add_option("--image-size", synth.image_size)->capture_default_str();
  synth_cmd->add_flag("!--no-images", synth.images, "Skip image rendering");

  TrainForecasterOptions tf;
  auto* tf_cmd = app.add_subcommand("train-forecaster", "Train and score forecasting models on a tract CSV");
  tf_cmd->add_option("--data", tf.data, "Tract CSV")->required();
  tf_cmd->add_option("--models", tf.models, "Comma-separated: rnn, lstm, lstm_attn, tft")
      ->delimiter(',')
      ->capture_default_str();
  tf_cmd->add_option("--boundary-year", tf.boundary_year, "Last year of the training period")->capture_default_str();
  tf_cmd->add_option("--epochs", tf.epochs);
  tf_cmd->add_option("--hidden", tf.hidden);
  tf_cmd->add_option("--layers", tf.layers);
  tf_cmd->add_option("--heads", tf.heads);
  tf_cmd->add_option("--batch", tf.batch);
  tf_cmd->add_option("--dropout", tf.dropout);
  tf_cmd->add_option("--lr", tf.lr);

  ForecastOptions fc;
  auto* fc_cmd = app.add_subcommand("forecast", "Forecast travel features with a trained checkpoint");
  fc_cmd->add_option("--checkpoint", fc.checkpoint, "forecaster.ckpt")->required();
  fc_cmd->add_option("--data", fc.data, "Tract CSV with the input years")->required();
  fc_cmd->add_option("--windows", fc.windows, "latest or all")
      ->capture_default_str()
      ->check(CLI::IsMember({"latest", "all"}));

  TrainGanOptions tg;
  auto* tg_cmd = app.add_subcommand("train-gan", "Train the conditional image generator");
  tg_cmd->add_option("--images", tg.images, "Paired image directory")->required();
  tg_cmd->add_option("--latent-dim", tg.latent_dims, "One or more latent sizes (comma-separated sweep)")
      ->delimiter(',');
  tg_cmd->add_option("--iterations", tg.iterations);
  tg_cmd->add_option("--batch", tg.batch);
  tg_cmd->add_option("--base-channels", tg.base_channels);
  tg_cmd->add_option("--lr-g", tg.lr_g);
  tg_cmd->add_option("--lr-d", tg.lr_d);
  tg_cmd->add_option("--regularizer", tg.regularizer, "r1 or wgan_gp");
  tg_cmd->add_option("--sample-every", tg.sample_every);
  tg_cmd->add_option("--checkpoint-every", tg.checkpoint_every);
  tg_cmd->add_option("--condition-stats", tg.condition_stats,
                     "condition_stats.json or forecast.meta.json to standardize conditions with");
  tg_cmd->add_option("--eval-count", tg.eval_count, "Images generated for the FID/SSIM rows (0: all)")
      ->capture_default_str();

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Render one image per forecast row");
  gen_cmd->add_option("--checkpoint", gen.checkpoint, "gan.ckpt")->required();
  gen_cmd->add_option("--forecast", gen.forecast, "forecast.csv")->required();
  gen_cmd->add_option("--meta", gen.meta, "Forecast statistics sidecar (default <forecast stem>.meta.json)");

  EvaluateOptions ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score forecasts against records and images against references");
  ev_cmd->add_option("--forecast", ev.forecast, "forecast.csv");
  ev_cmd->add_option("--truth", ev.truth, "Tract CSV with the actual values");
  ev_cmd->add_option("--images", ev.images, "Directory of generated PNGs");
  ev_cmd->add_option("--reference", ev.reference, "Directory of reference PNGs (same count, matched by sorted name)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kData;
  }

  auto logger = spdlog::get("mobgen");
  if (!logger) {
    logger = spdlog::stderr_color_mt("mobgen");
    logger->set_pattern("[%H:%M:%S] [%^%l%$] %v");
  }
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(global.log_level));

  if (synth_cmd->parsed()) {
    synth.out = global.out;
    synth.seed = global.seed;
    const nlohmann::json config{{"tracts", synth.tracts},         {"noise", synth.noise},
                                {"first_year", synth.first_year}, {"last_year", synth.last_year},
                                {"shock_year", opt(synth.shock_year)}, {"image_size", synth.image_size},
                                {"images", synth.images}};
    return run_command("synth", global, config, [&](RunManifest& m) { cmd_synth(synth, m); });
  }
  if (tf_cmd->parsed()) {
    tf.out = global.out;
    tf.seed = global.seed;
    const nlohmann::json config{{"models", tf.models}, {"boundary_year", tf.boundary_year},
                                {"epochs", opt(tf.epochs)}, {"hidden", opt(tf.hidden)},
                                {"layers", opt(tf.layers)}, {"heads", opt(tf.heads)},
                                {"batch", opt(tf.batch)},   {"dropout", opt(tf.dropout)},
                                {"lr", opt(tf.lr)}};
    return run_command("train-forecaster", global, config, [&](RunManifest& m) { cmd_train_forecaster(tf, m); });
  }
  if (fc_cmd->parsed()) {
    fc.out = global.out;
    fc.seed = global.seed;
    return run_command("forecast", global, {{"windows", fc.windows}}, [&](RunManifest& m) { cmd_forecast(fc, m); });
  }
  if (tg_cmd->parsed()) {
    tg.out = global.out;
    tg.seed = global.seed;
    const nlohmann::json config{{"latent_dims", tg.latent_dims},
                                {"iterations", opt(tg.iterations)},
                                {"batch", opt(tg.batch)},
                                {"base_channels", opt(tg.base_channels)},
                                {"lr_g", opt(tg.lr_g)},
                                {"lr_d", opt(tg.lr_d)},
                                {"regularizer", opt(tg.regularizer)},
                                {"sample_every", opt(tg.sample_every)},
                                {"checkpoint_every", opt(tg.checkpoint_every)},
                                {"condition_stats", path_opt(tg.condition_stats)},
                                {"eval_count", tg.eval_count}};
    return run_command("train-gan", global, config, [&](RunManifest& m) { cmd_train_gan(tg, m); });
  }
  if (gen_cmd->parsed()) {
    gen.out = global.out;
    gen.seed = global.seed;
    return run_command("generate", global, {{"meta", path_opt(gen.meta)}},
                       [&](RunManifest& m) { cmd_generate(gen, m); });
  }
  ev.out = global.out;
  ev.seed = global.seed;
  return run_command("evaluate", global, nlohmann::json::object(), [&](RunManifest& m) { cmd_evaluate(ev, m); });
}

}  // namespace mobgen::cli
