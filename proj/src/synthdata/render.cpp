#include "mobgen/synthdata/render.hpp"

#include <algorithm>
#include <cmath>

#include "mobgen/errors.hpp"
#include "mobgen/numerics/rng.hpp"

namespace mobgen::synthdata {

namespace {

constexpr std::size_t kCell = 4;

struct Canvas {
  std::size_t size;
  std::vector<double> rgb;  // [0,1], interleaved

  void set(std::size_t x, std::size_t y, double r, double g, double b) {
    double* p = &rgb[(y * size + x) * 3];
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }
};

// Road pixels in drawing order: the central lines first, then the outer ones,
// each traced from one edge to the other.
std::vector<std::pair<std::size_t, std::size_t>> road_order(std::size_t size) {
  const std::size_t q = size / 4;
  const std::pair<bool, std::size_t> lines[] = {{true, 2 * q}, {false, 2 * q}, {true, q},
                                                {false, 3 * q}, {true, 3 * q}, {false, q}};
  std::vector<std::pair<std::size_t, std::size_t>> order;
  std::vector<bool> used(size * size, false);
  for (auto [horizontal, at] : lines) {
    for (std::size_t s = 0; s < size; ++s) {
      const std::size_t x = horizontal ? s : at, y = horizontal ? at : s;
      if (used[y * size + x]) continue;
      used[y * size + x] = true;
      order.emplace_back(x, y);
    }
  }
  return order;
}

}  // namespace

spatialgen::Rgb8Image render_tract(const ingest::TractRecord& record, const RenderConfig& config,
                                   RenderStats* stats) {
  const std::size_t n = config.size;
  if (n < 8 || n % 8 != 0) throw std::invalid_argument("render size must be a positive multiple of 8");
  numerics::Rng texture(numerics::Rng::substream(config.seed, record.tract_id + "/" + std::to_string(record.year)));
  // Block placement depends on the tract only, so a tract's city grows in place.
  numerics::Rng layout(numerics::Rng::substream(config.seed, "layout/" + record.tract_id));

  Canvas canvas{n, std::vector<double>(n * n * 3)};
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const double t = texture.uniform(-0.01, 0.01);
      canvas.set(x, y, 0.30 + t, 0.45 + t, 0.25 + 0.5 * t);
    }

  const double pop = record.feature(ingest::kPopulation);
  const double autos = record.feature(ingest::kAutoUsers);
  const std::size_t cells_per_side = n / kCell;
  const std::size_t cells = cells_per_side * cells_per_side;
  const double built_fraction = 0.7 * std::clamp(pop / config.pop_max, 0.0, 1.0);
  const auto built = static_cast<std::size_t>(std::lround(built_fraction * static_cast<double>(cells)));
  const auto cell_order = layout.permutation(cells);
  for (std::size_t i = 0; i < built; ++i) {
    const std::size_t cx = cell_order[i] % cells_per_side, cy = cell_order[i] / cells_per_side;
    const double shade = 0.55 + layout.uniform(-0.05, 0.05);
    for (std::size_t y = cy * kCell + 1; y < (cy + 1) * kCell; ++y)
      for (std::size_t x = cx * kCell + 1; x < (cx + 1) * kCell; ++x) canvas.set(x, y, shade, shade, shade + 0.03);
  }

  const auto order = road_order(n);
  const double road_fraction =
      std::clamp(autos / config.auto_max, 0.0, 1.0) * std::clamp(pop / config.pop_ref, 0.0, 1.0);
  const auto roads = static_cast<std::size_t>(std::lround(road_fraction * static_cast<double>(order.size())));
  for (std::size_t i = 0; i < roads; ++i) canvas.set(order[i].first, order[i].second, 0.12, 0.12, 0.13);

  if (stats) *stats = {roads, built};
  spatialgen::Rgb8Image image{n, n, std::vector<std::uint8_t>(n * n * 3)};
  for (std::size_t i = 0; i < canvas.rgb.size(); ++i) {
    image.pixels[i] = static_cast<std::uint8_t>(std::lround(std::clamp(canvas.rgb[i], 0.0, 1.0) * 255.0));
  }
  return image;
}

spatialgen::ImageDataset render_dataset(const std::vector<ingest::TractRecord>& records, const RenderConfig& config) {
  spatialgen::ImageDataset out;
  std::vector<spatialgen::Rgb8Image> images;
  for (std::size_t i = 0; i < records.size(); ++i) {
    images.push_back(render_tract(records[i], config));
    out.conditions.push_back(records[i].travel);
    out.ids.push_back(spatialgen::item_id(i));
  }
  out.images = spatialgen::to_tensor(images);
  return out;
}

void gen_images(const std::vector<ingest::TractRecord>& records, const RenderConfig& config,
                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<spatialgen::IndexEntry> index;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::string id = spatialgen::item_id(i);
    spatialgen::write_png(dir / (id + ".png"), render_tract(records[i], config));
    spatialgen::write_condition(dir / (id + ".cond"), records[i].travel);
    index.push_back({id, records[i].tract_id, records[i].year});
  }
  spatialgen::write_index(dir, index);
}

}  // namespace mobgen::synthdata
