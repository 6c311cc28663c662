#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mobgen/numerics/tensor.hpp"

namespace mobgen::spatialgen {

inline constexpr std::size_t kConditionDim = 5;
using Condition = std::array<double, kConditionDim>;

/// 8-bit RGB, row-major, channels interleaved.
struct Rgb8Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

std::string encode_png(const Rgb8Image& image);
void write_png(const std::filesystem::path& path, const Rgb8Image& image);
/// IoError if unreadable, DataError if not a PNG.
Rgb8Image read_png(const std::filesystem::path& path);

/// Image `index` of a [B,3,H,W] batch in [-1,1] quantised to 8 bits.
Rgb8Image to_rgb8(const numerics::Tensor& batch, std::size_t index);
/// Stacks images into a [B,3,H,W] tensor in [-1,1]. All sizes must match.
numerics::Tensor to_tensor(const std::vector<Rgb8Image>& images);

/// Tiles a batch into one image with `columns` images per row.
Rgb8Image make_grid(const numerics::Tensor& batch, std::size_t columns);

/// A paired image directory: NNNN.png + NNNN.cond (five whitespace-separated
/// reals, raw travel units) and an index.csv listing id,tract_id,year.
struct ImageDataset {
  numerics::Tensor images;  // [N,3,H,W] in [-1,1]
  std::vector<Condition> conditions;
  std::vector<std::string> ids;
};

struct IndexEntry {
  std::string id;
  std::string tract_id;
  int year = 0;
};

/// Pairs every .png with its .cond; DataError when either side is missing.
ImageDataset load_image_dir(const std::filesystem::path& dir);

void write_condition(const std::filesystem::path& path, const Condition& condition);
Condition read_condition(const std::filesystem::path& path);
void write_index(const std::filesystem::path& dir, const std::vector<IndexEntry>& entries);

/// Zero-padded file stem for item i ("0000", "0001", ...).
std::string item_id(std::size_t index);

}  // namespace mobgen::spatialgen
