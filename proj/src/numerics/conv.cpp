#include <algorithm>

#include "mobgen/numerics/ops.hpp"
#include "mobgen/numerics/simd.hpp"

namespace mobgen::numerics {

namespace {

using Values = std::vector<double>;

struct ConvGeometry {
  std::size_t batch, in_c, in_h, in_w;
  std::size_t out_c, kernel, stride, pad;
  std::size_t out_h, out_w;

  std::size_t patch() const { return in_c * kernel * kernel; }
  std::size_t pixels() const { return out_h * out_w; }
};

std::size_t out_extent(std::size_t in, std::size_t kernel, std::size_t stride, std::size_t pad) {
  if (in + 2 * pad < kernel) throw ShapeError("conv: kernel larger than padded input");
  return (in + 2 * pad - kernel) / stride + 1;
}

void require_rank4(const Tensor& t, std::string_view what) {
  if (t.rank() != 4) throw ShapeError(std::string(what) + ": expected [B,C,H,W], got " + shape_str(t.shape()));
}

// Output columns [lo, hi) whose input column ox*stride + kx - pad is in range.
std::pair<std::size_t, std::size_t> valid_columns(const ConvGeometry& g, std::size_t kx) {
  const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(g.stride);
  const std::ptrdiff_t off = static_cast<std::ptrdiff_t>(kx) - static_cast<std::ptrdiff_t>(g.pad);
  const std::ptrdiff_t lo = off >= 0 ? 0 : (-off + s - 1) / s;
  const std::ptrdiff_t last = static_cast<std::ptrdiff_t>(g.in_w) - 1 - off;  // ox * s <= last
  const std::ptrdiff_t hi = last < 0 ? 0 : std::min<std::ptrdiff_t>(last / s + 1, static_cast<std::ptrdiff_t>(g.out_w));
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(std::max(lo, hi))};
}

// col[(c*k + ky)*k + kx][oy*out_w + ox] = x[c][oy*s + ky - pad][ox*s + kx - pad]
void im2col(const ConvGeometry& g, const double* x, double* col) {
  const std::size_t k = g.kernel;
  for (std::size_t c = 0; c < g.in_c; ++c) {
    const double* plane = x + c * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        double* row = col + ((c * k + ky) * k + kx) * g.pixels();
        const auto [lo, hi] = valid_columns(g, kx);
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          double* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) {
            std::fill_n(dst, g.out_w, 0.0);
            continue;
          }
          const double* src = plane + static_cast<std::size_t>(iy) * g.in_w;
          std::fill(dst, dst + lo, 0.0);
          if (lo < hi) {
            const std::size_t first = lo * g.stride + kx - g.pad;  // in range by construction
            if (g.stride == 1) {
              std::copy(src + first, src + first + (hi - lo), dst + lo);
            } else {
              for (std::size_t ox = lo; ox < hi; ++ox) dst[ox] = src[first + (ox - lo) * g.stride];
            }
          }
          std::fill(dst + hi, dst + g.out_w, 0.0);
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-add columns back into the image.
void col2im(const ConvGeometry& g, const double* col, double* x) {
  const std::size_t k = g.kernel;
  for (std::size_t c = 0; c < g.in_c; ++c) {
    double* plane = x + c * g.in_h * g.in_w;
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        const double* row = col + ((c * k + ky) * k + kx) * g.pixels();
        const auto [lo, hi] = valid_columns(g, kx);
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) - static_cast<std::ptrdiff_t>(g.pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.in_h)) continue;
          double* dst = plane + static_cast<std::size_t>(iy) * g.in_w;
          const double* src = row + oy * g.out_w;
          for (std::size_t ox = lo; ox < hi; ++ox) dst[ox * g.stride + kx - g.pad] += src[ox];
        }
      }
    }
  }
}

Values transposed(const double* src, std::size_t rows, std::size_t cols) {
  Values out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = src[i * cols + j];
  return out;
}

ConvGeometry geometry_from_input(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t pad) {
  require_rank4(x, "conv2d input");
  require_rank4(weight, "conv2d weight");
  const Shape& xs = x.shape();
  const Shape& ws = weight.shape();
  if (ws[1] != xs[1] || ws[2] != ws[3]) {
    throw ShapeError("conv2d: input " + shape_str(xs) + " incompatible with weight " + shape_str(ws));
  }
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  ConvGeometry g{xs[0], xs[1], xs[2], xs[3], ws[0], ws[2], stride, pad, 0, 0};
  g.out_h = out_extent(g.in_h, g.kernel, stride, pad);
  g.out_w = out_extent(g.in_w, g.kernel, stride, pad);
  return g;
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& weight, std::size_t stride, std::size_t pad) {
  const ConvGeometry g = geometry_from_input(x, weight, stride, pad);
  const auto& k = simd::kernels();
  Values out(g.batch * g.out_c * g.pixels());
  Values col(g.patch() * g.pixels());
  const double* xv = x.values().data();
  const double* wv = weight.values().data();
  for (std::size_t b = 0; b < g.batch; ++b) {
    im2col(g, xv + b * g.in_c * g.in_h * g.in_w, col.data());
    k.gemm(g.out_c, g.pixels(), g.patch(), wv, col.data(), out.data() + b * g.out_c * g.pixels(), false);
  }
  return Tensor::make_result(
      {g.batch, g.out_c, g.out_h, g.out_w}, std::move(out), "conv2d", {x, weight},
      [x, weight, g](const Tensor& grad_y, const Tensor&, const std::vector<bool>& n) {
        return std::vector<Tensor>{
            n[0] ? conv_transpose2d(grad_y, weight, g.stride, g.pad, g.in_h, g.in_w) : Tensor(),
            n[1] ? conv2d_weight_grad(x, grad_y, g.kernel, g.stride, g.pad) : Tensor()};
      });
}

Tensor conv_transpose2d(const Tensor& y, const Tensor& weight, std::size_t stride, std::size_t pad,
                        std::size_t out_h, std::size_t out_w) {
  require_rank4(y, "conv_transpose2d input");
  require_rank4(weight, "conv_transpose2d weight");
  const Shape& ys = y.shape();
  const Shape& ws = weight.shape();
  ConvGeometry g{ys[0], ws[1], out_h, out_w, ws[0], ws[2], stride, pad, 0, 0};
  g.out_h = out_extent(out_h, g.kernel, stride, pad);
  g.out_w = out_extent(out_w, g.kernel, stride, pad);
  if (ys[1] != g.out_c || ys[2] != g.out_h || ys[3] != g.out_w) {
    throw ShapeError("conv_transpose2d: input " + shape_str(ys) + " incompatible with weight " + shape_str(ws));
  }
  const auto& k = simd::kernels();
  const Values wt = transposed(weight.values().data(), g.out_c, g.patch());
  Values out(g.batch * g.in_c * out_h * out_w, 0.0);
  Values col(g.patch() * g.pixels());
  const double* yv = y.values().data();
  for (std::size_t b = 0; b < g.batch; ++b) {
    k.gemm(g.patch(), g.pixels(), g.out_c, wt.data(), yv + b * g.out_c * g.pixels(), col.data(), false);
    col2im(g, col.data(), out.data() + b * g.in_c * out_h * out_w);
  }
  return Tensor::make_result(
      {g.batch, g.in_c, out_h, out_w}, std::move(out), "conv_transpose2d", {y, weight},
      [y, weight, g](const Tensor& gz, const Tensor&, const std::vector<bool>& n) {
        return std::vector<Tensor>{n[0] ? conv2d(gz, weight, g.stride, g.pad) : Tensor(),
                                   n[1] ? conv2d_weight_grad(gz, y, g.kernel, g.stride, g.pad) : Tensor()};
      });
}

Tensor conv2d_weight_grad(const Tensor& x, const Tensor& grad_y, std::size_t kernel, std::size_t stride,
                          std::size_t pad) {
  require_rank4(x, "conv2d_weight_grad input");
  require_rank4(grad_y, "conv2d_weight_grad output grad");
  const Shape& xs = x.shape();
  const Shape& gs = grad_y.shape();
  ConvGeometry g{xs[0], xs[1], xs[2], xs[3], gs[1], kernel, stride, pad, 0, 0};
  g.out_h = out_extent(g.in_h, kernel, stride, pad);
  g.out_w = out_extent(g.in_w, kernel, stride, pad);
  if (gs[0] != g.batch || gs[2] != g.out_h || gs[3] != g.out_w) {
    throw ShapeError("conv2d_weight_grad: input " + shape_str(xs) + " incompatible with output grad " +
                     shape_str(gs));
  }
  const auto& k = simd::kernels();
  // Accumulate W^T = sum_b col_b * grad_b^T, then transpose once.
  Values wt(g.patch() * g.out_c, 0.0);
  Values col(g.patch() * g.pixels());
  const double* xv = x.values().data();
  const double* gv = grad_y.values().data();
  for (std::size_t b = 0; b < g.batch; ++b) {
    im2col(g, xv + b * g.in_c * g.in_h * g.in_w, col.data());
    const Values gt = transposed(gv + b * g.out_c * g.pixels(), g.out_c, g.pixels());
    k.gemm(g.patch(), g.out_c, g.pixels(), col.data(), gt.data(), wt.data(), true);
  }
  Values out = transposed(wt.data(), g.patch(), g.out_c);
  return Tensor::make_result(
      {g.out_c, g.in_c, kernel, kernel}, std::move(out), "conv2d_weight_grad", {x, grad_y},
      [x, grad_y, g](const Tensor& gz, const Tensor&, const std::vector<bool>& n) {
        return std::vector<Tensor>{
            n[0] ? conv_transpose2d(grad_y, gz, g.stride, g.pad, g.in_h, g.in_w) : Tensor(),
            n[1] ? conv2d(x, gz, g.stride, g.pad) : Tensor()};
      });
}

Tensor upsample2x(const Tensor& x) {
  require_rank4(x, "upsample2x");
  const Shape& s = x.shape();
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3];
  auto in = x.values();
  Values out(planes * 4 * h * w);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = in.data() + p * h * w;
    double* dst = out.data() + p * 4 * h * w;
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t xx = 0; xx < 2 * w; ++xx) dst[y * 2 * w + xx] = src[(y / 2) * w + xx / 2];
  }
  return Tensor::make_result({s[0], s[1], 2 * h, 2 * w}, std::move(out), "upsample2x", {x},
                             [](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return std::vector<Tensor>{n[0] ? pool_sum2x(g) : Tensor()};
                             });
}

Tensor pool_sum2x(const Tensor& x) {
  require_rank4(x, "pool_sum2x");
  const Shape& s = x.shape();
  if (s[2] % 2 || s[3] % 2) throw ShapeError("pool_sum2x: odd spatial extent in " + shape_str(s));
  const std::size_t planes = s[0] * s[1], h = s[2] / 2, w = s[3] / 2;
  auto in = x.values();
  Values out(planes * h * w, 0.0);
  for (std::size_t p = 0; p < planes; ++p) {
    const double* src = in.data() + p * 4 * h * w;
    double* dst = out.data() + p * h * w;
    for (std::size_t y = 0; y < 2 * h; ++y)
      for (std::size_t xx = 0; xx < 2 * w; ++xx) dst[(y / 2) * w + xx / 2] += src[y * 2 * w + xx];
  }
  return Tensor::make_result({s[0], s[1], h, w}, std::move(out), "pool_sum2x", {x},
                             [](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return std::vector<Tensor>{n[0] ? upsample2x(g) : Tensor()};
                             });
}

Tensor expand_channels(const Tensor& per_channel, const Shape& shape) {
  if (shape.size() != 4 || per_channel.rank() != 1 || per_channel.dim(0) != shape[1]) {
    throw ShapeError("expand_channels: " + shape_str(per_channel.shape()) + " cannot expand to " +
                     shape_str(shape));
  }
  const std::size_t plane = shape[2] * shape[3];
  auto in = per_channel.values();
  Values out(shape_numel(shape));
  for (std::size_t b = 0; b < shape[0]; ++b)
    for (std::size_t c = 0; c < shape[1]; ++c)
      std::fill_n(out.begin() + (b * shape[1] + c) * plane, plane, in[c]);
  return Tensor::make_result(shape, std::move(out), "expand_channels", {per_channel},
                             [](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return std::vector<Tensor>{n[0] ? channel_sum(g) : Tensor()};
                             });
}

Tensor channel_sum(const Tensor& x) {
  require_rank4(x, "channel_sum");
  const Shape& s = x.shape();
  const std::size_t plane = s[2] * s[3];
  const auto& k = simd::kernels();
  auto in = x.values();
  Values out(s[1], 0.0);
  for (std::size_t b = 0; b < s[0]; ++b)
    for (std::size_t c = 0; c < s[1]; ++c) out[c] += k.sum(in.data() + (b * s[1] + c) * plane, plane);
  return Tensor::make_result({s[1]}, std::move(out), "channel_sum", {x},
                             [x](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return std::vector<Tensor>{n[0] ? expand_channels(g, x.shape()) : Tensor()};
                             });
}

}  // namespace mobgen::numerics
