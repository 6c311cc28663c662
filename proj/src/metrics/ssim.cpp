#include "mobgen/metrics/ssim.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mobgen::metrics {

double ssim(std::span<const double> a, std::span<const double> b, std::size_t channels, std::size_t height,
            std::size_t width, const SsimOptions& options) {
  if (a.size() != b.size()) throw std::invalid_argument("ssim: image sizes differ");
  if (a.size() != channels * height * width) throw std::invalid_argument("ssim: size does not match C*H*W");
  const std::size_t win = options.window;
  if (win == 0 || height < win || width < win) throw std::invalid_argument("ssim: image smaller than the window");
  const double c1 = (options.k1 * options.dynamic_range) * (options.k1 * options.dynamic_range);
  const double c2 = (options.k2 * options.dynamic_range) * (options.k2 * options.dynamic_range);
  const double n = static_cast<double>(win * win);

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    const std::size_t base = c * height * width;
    for (std::size_t y0 = 0; y0 + win <= height; y0 += win) {
      for (std::size_t x0 = 0; x0 + win <= width; x0 += win) {
        double ma = 0.0, mb = 0.0;
        for (std::size_t y = y0; y < y0 + win; ++y)
          for (std::size_t x = x0; x < x0 + win; ++x) {
            ma += a[base + y * width + x];
            mb += b[base + y * width + x];
          }
        ma /= n;
        mb /= n;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (std::size_t y = y0; y < y0 + win; ++y)
          for (std::size_t x = x0; x < x0 + win; ++x) {
            const double da = a[base + y * width + x] - ma;
            const double db = b[base + y * width + x] - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        va /= n;
        vb /= n;
        cov /= n;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

double ssim(const numerics::Tensor& a, std::size_t i, const numerics::Tensor& b, std::size_t j,
            const SsimOptions& options) {
  if (a.rank() != 4 || b.rank() != 4 || a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3)) {
    throw numerics::ShapeError("ssim: incompatible batches " + numerics::shape_str(a.shape()) + " and " +
                               numerics::shape_str(b.shape()));
  }
  const std::size_t per = a.dim(1) * a.dim(2) * a.dim(3);
  return ssim(a.values().subspan(i * per, per), b.values().subspan(j * per, per), a.dim(1), a.dim(2), a.dim(3),
              options);
}

std::vector<double> best_match_ssim(const numerics::Tensor& generated, const numerics::Tensor& reference,
                                    const SsimOptions& options) {
  std::vector<double> best(generated.dim(0), -std::numeric_limits<double>::infinity());
  for (std::size_t g = 0; g < generated.dim(0); ++g) {
    for (std::size_t r = 0; r < reference.dim(0); ++r) {
      best[g] = std::max(best[g], ssim(generated, g, reference, r, options));
    }
  }
  return best;
}

}  // namespace mobgen::metrics
