#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mobgen/ingest/records.hpp"
#include "mobgen/spatialgen/image_io.hpp"

namespace mobgen::synthdata {

struct RenderConfig {
  std::size_t size = 32;  // square, multiple of 8
  std::uint64_t seed = 0;
  /// Road coverage scales with auto_users / auto_max (clamped to 1).
  double auto_max = 3000.0;
  /// Roads fade in linearly until population reaches pop_ref.
  double pop_ref = 1500.0;
  /// Built-up coverage scales with pop / pop_max (clamped to 1).
  double pop_max = 9000.0;
};

/// Pixel counts behind a rendered image.
struct RenderStats {
  std::size_t road_pixels = 0;
  std::size_t built_cells = 0;
};

/// Procedural satellite-style tile: textured land, built-up blocks whose count
/// grows with population and a road grid whose drawn length grows with
/// automobile users. Zero population gives bare land.
spatialgen::Rgb8Image render_tract(const ingest::TractRecord& record, const RenderConfig& config,
                                   RenderStats* stats = nullptr);

/// Renders every record and pairs it with its five travel values.
spatialgen::ImageDataset render_dataset(const std::vector<ingest::TractRecord>& records, const RenderConfig& config);

/// Writes NNNN.png / NNNN.cond pairs and index.csv into `dir` (created if needed).
void gen_images(const std::vector<ingest::TractRecord>& records, const RenderConfig& config,
                const std::filesystem::path& dir);

}  // namespace mobgen::synthdata
