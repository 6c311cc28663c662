#include "mobgen/spatialgen/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "mobgen/errors.hpp"
#include "mobgen/ingest/csv.hpp"

namespace mobgen::spatialgen {

namespace fs = std::filesystem;

namespace {

png_image make_header(const Rgb8Image& image) {
  png_image header;
  std::memset(&header, 0, sizeof header);
  header.version = PNG_IMAGE_VERSION;
  header.width = static_cast<png_uint_32>(image.width);
  header.height = static_cast<png_uint_32>(image.height);
  header.format = PNG_FORMAT_RGB;
  return header;
}

void check_image(const Rgb8Image& image) {
  if (image.width == 0 || image.height == 0 || image.pixels.size() != image.width * image.height * 3) {
    throw std::invalid_argument("malformed RGB image buffer");
  }
}

}  // namespace

std::string encode_png(const Rgb8Image& image) {
  check_image(image);
  png_image header = make_header(image);
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&header, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + header.message);
  }
  std::string bytes(size, '\0');
  if (!png_image_write_to_memory(&header, bytes.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("PNG encode failed: ") + header.message);
  }
  bytes.resize(size);
  return bytes;
}

void write_png(const fs::path& path, const Rgb8Image& image) {
  const std::string bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

Rgb8Image read_png(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  png_image header;
  std::memset(&header, 0, sizeof header);
  header.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&header, bytes.data(), bytes.size())) {
    throw DataError("not a readable PNG: " + path.string() + " (" + header.message + ")");
  }
  header.format = PNG_FORMAT_RGB;
  Rgb8Image image;
  image.width = header.width;
  image.height = header.height;
  image.pixels.resize(PNG_IMAGE_SIZE(header));
  if (!png_image_finish_read(&header, nullptr, image.pixels.data(), 0, nullptr)) {
    png_image_free(&header);
    throw DataError("corrupt PNG: " + path.string() + " (" + header.message + ")");
  }
  return image;
}

Rgb8Image to_rgb8(const numerics::Tensor& batch, std::size_t index) {
  if (batch.rank() != 4 || batch.dim(1) != 3 || index >= batch.dim(0)) {
    throw numerics::ShapeError("to_rgb8 expects [B,3,H,W], got " + numerics::shape_str(batch.shape()));
  }
  const std::size_t h = batch.dim(2), w = batch.dim(3);
  Rgb8Image out{w, h, std::vector<std::uint8_t>(w * h * 3)};
  const auto v = batch.values();
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double u = std::clamp(v[((index * 3 + c) * h + y) * w + x], -1.0, 1.0);
        out.pixels[(y * w + x) * 3 + c] = static_cast<std::uint8_t>(std::lround((u + 1.0) * 127.5));
      }
  return out;
}

numerics::Tensor to_tensor(const std::vector<Rgb8Image>& images) {
  if (images.empty()) throw std::invalid_argument("to_tensor: no images");
  const std::size_t h = images.front().height, w = images.front().width;
  std::vector<double> values(images.size() * 3 * h * w);
  for (std::size_t b = 0; b < images.size(); ++b) {
    const Rgb8Image& im = images[b];
    if (im.height != h || im.width != w) throw DataError("images in a dataset must share one size");
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
          values[((b * 3 + c) * h + y) * w + x] = im.pixels[(y * w + x) * 3 + c] / 127.5 - 1.0;
        }
  }
  return numerics::Tensor({images.size(), 3, h, w}, std::move(values));
}

Rgb8Image make_grid(const numerics::Tensor& batch, std::size_t columns) {
  const std::size_t n = batch.dim(0), h = batch.dim(2), w = batch.dim(3);
  columns = std::max<std::size_t>(1, std::min(columns, n));
  const std::size_t rows = (n + columns - 1) / columns;
  Rgb8Image grid{columns * w, rows * h, std::vector<std::uint8_t>(columns * w * rows * h * 3, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    const Rgb8Image tile = to_rgb8(batch, i);
    const std::size_t ox = (i % columns) * w, oy = (i / columns) * h;
    for (std::size_t y = 0; y < h; ++y) {
      std::copy_n(tile.pixels.begin() + static_cast<std::ptrdiff_t>(y * w * 3), w * 3,
                  grid.pixels.begin() + static_cast<std::ptrdiff_t>(((oy + y) * grid.width + ox) * 3));
    }
  }
  return grid;
}

std::string item_id(std::size_t index) {
  std::ostringstream os;
  os << std::setw(4) << std::setfill('0') << index;
  return os.str();
}

void write_condition(const fs::path& path, const Condition& condition) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (std::size_t k = 0; k < kConditionDim; ++k) out << (k ? " " : "") << ingest::format_real(condition[k]);
  out << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Condition read_condition(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Condition c{};
  for (std::size_t k = 0; k < kConditionDim; ++k) {
    if (!(in >> c[k]) || !std::isfinite(c[k])) {
      throw DataError("condition file " + path.string() + " must hold " + std::to_string(kConditionDim) + " reals");
    }
  }
  double extra = 0.0;
  if (in >> extra) throw DataError("condition file " + path.string() + " has more than 5 values");
  return c;
}

void write_index(const fs::path& dir, const std::vector<IndexEntry>& entries) {
  std::ofstream out(dir / "index.csv", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "index.csv").string());
  out << "id,tract_id,year\n";
  for (const IndexEntry& e : entries) out << e.id << ',' << e.tract_id << ',' << e.year << '\n';
}

ImageDataset load_image_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::set<std::string> pngs, conds;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".png") pngs.insert(entry.path().stem().string());
    if (ext == ".cond") conds.insert(entry.path().stem().string());
  }
  for (const auto& stem : pngs) {
    if (!conds.count(stem)) throw DataError("image " + stem + ".png has no matching .cond file");
  }
  for (const auto& stem : conds) {
    if (!pngs.count(stem)) throw DataError("condition " + stem + ".cond has no matching .png file");
  }
  if (pngs.empty()) throw DataError("no image pairs in " + dir.string());
  ImageDataset out;
  std::vector<Rgb8Image> images;
  for (const auto& stem : pngs) {  // std::set keeps the ids sorted
    images.push_back(read_png(dir / (stem + ".png")));
    out.conditions.push_back(read_condition(dir / (stem + ".cond")));
    out.ids.push_back(stem);
  }
  out.images = to_tensor(images);
  return out;
}

}  // namespace mobgen::spatialgen
