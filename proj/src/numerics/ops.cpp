#include "mobgen/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mobgen/numerics/rng.hpp"
#include "mobgen/numerics/simd.hpp"

namespace mobgen::numerics {

namespace {

using Values = std::vector<double>;

const simd::KernelTable& kern() { return simd::kernels(); }

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.begin(), small.end(), big.end() - static_cast<std::ptrdiff_t>(small.size()));
}

[[noreturn]] void shape_mismatch(std::string_view op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " + shape_str(b));
}

std::vector<Tensor> only(const std::vector<bool>& needed, Tensor g0) {
  return {needed[0] ? std::move(g0) : Tensor()};
}

Tensor constant(Shape shape, Values v) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->data = std::make_shared<Values>(std::move(v));
  node->op = "constant";
  return Tensor(std::move(node));
}

template <typename F>
Values map_values(const Tensor& a, F f) {
  auto in = a.values();
  Values out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return out;
}

// Elementwise on identical shapes.
Tensor add_same(const Tensor& a, const Tensor& b) {
  Values out(a.numel());
  kern().add(a.values().data(), b.values().data(), out.data(), out.size());
  return Tensor::make_result(a.shape(), std::move(out), "add", {a, b},
                             [](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return std::vector<Tensor>{n[0] ? g : Tensor(), n[1] ? g : Tensor()};
                             });
}

Tensor sub_same(const Tensor& a, const Tensor& b) {
  Values out(a.numel());
  kern().sub(a.values().data(), b.values().data(), out.data(), out.size());
  return Tensor::make_result(a.shape(), std::move(out), "sub", {a, b},
                             [](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return std::vector<Tensor>{n[0] ? g : Tensor(), n[1] ? neg(g) : Tensor()};
                             });
}

Tensor mul_same(const Tensor& a, const Tensor& b) {
  Values out(a.numel());
  kern().mul(a.values().data(), b.values().data(), out.data(), out.size());
  return Tensor::make_result(a.shape(), std::move(out), "mul", {a, b},
                             [a, b](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return std::vector<Tensor>{n[0] ? mul(g, b) : Tensor(),
                                                          n[1] ? mul(g, a) : Tensor()};
                             });
}

Tensor div_same(const Tensor& a, const Tensor& b) {
  auto av = a.values();
  auto bv = b.values();
  Values out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / bv[i];
  return Tensor::make_result(a.shape(), std::move(out), "div", {a, b},
                             [a, b](const Tensor& g, const Tensor& out, const std::vector<bool>& n) {
                               return std::vector<Tensor>{n[0] ? div(g, b) : Tensor(),
                                                          n[1] ? neg(div(mul(g, out), b)) : Tensor()};
                             });
}

template <typename SameOp>
Tensor broadcast_binary(std::string_view name, const Tensor& a, const Tensor& b, SameOp same) {
  if (a.shape() == b.shape()) return same(a, b);
  if (is_suffix(b.shape(), a.shape())) return same(a, broadcast_leading(b, a.shape()));
  if (is_suffix(a.shape(), b.shape())) return same(broadcast_leading(a, b.shape()), b);
  shape_mismatch(name, a.shape(), b.shape());
}

Tensor mask_mul(const Tensor& g, const Tensor& mask) { return mul(g, mask); }

Tensor matmul2d(const Tensor& a, const Tensor& b) {
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  Values out(n * m);
  kern().gemm(n, m, k, a.values().data(), b.values().data(), out.data(), false);
  return Tensor::make_result({n, m}, std::move(out), "matmul", {a, b},
                             [a, b](const Tensor& g, const Tensor&, const std::vector<bool>& nd) {
                               return std::vector<Tensor>{nd[0] ? matmul(g, transpose(b)) : Tensor(),
                                                          nd[1] ? matmul(transpose(a), g) : Tensor()};
                             });
}

Tensor matmul_batched(const Tensor& a, const Tensor& b) {
  const std::size_t batch = a.dim(0), n = a.dim(1), k = a.dim(2), m = b.dim(2);
  Values out(batch * n * m);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (std::size_t i = 0; i < batch; ++i) {
    kern().gemm(n, m, k, av + i * n * k, bv + i * k * m, out.data() + i * n * m, false);
  }
  return Tensor::make_result({batch, n, m}, std::move(out), "bmm", {a, b},
                             [a, b](const Tensor& g, const Tensor&, const std::vector<bool>& nd) {
                               return std::vector<Tensor>{nd[0] ? matmul(g, transpose(b)) : Tensor(),
                                                          nd[1] ? matmul(transpose(a), g) : Tensor()};
                             });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() == 2 && sb.size() == 2) {
    if (sa[1] != sb[0]) shape_mismatch("matmul", sa, sb);
    return matmul2d(a, b);
  }
  if (sa.size() == 3 && sb.size() == 3) {
    if (sa[0] != sb[0] || sa[2] != sb[1]) shape_mismatch("matmul", sa, sb);
    return matmul_batched(a, b);
  }
  if (sa.size() > 2 && sb.size() == 2) {
    if (sa.back() != sb[0]) shape_mismatch("matmul", sa, sb);
    const std::size_t rows = a.numel() / sa.back();
    Shape out_shape = sa;
    out_shape.back() = sb[1];
    return reshape(matmul2d(reshape(a, {rows, sa.back()}), b), out_shape);
  }
  shape_mismatch("matmul", sa, sb);
}

Tensor transpose(const Tensor& a) {
  const Shape& s = a.shape();
  if (s.size() != 2 && s.size() != 3) {
    throw ShapeError("transpose: expected rank 2 or 3, got " + shape_str(s));
  }
  const std::size_t batch = s.size() == 3 ? s[0] : 1;
  const std::size_t r = s[s.size() - 2], c = s[s.size() - 1];
  auto in = a.values();
  Values out(in.size());
  for (std::size_t bi = 0; bi < batch; ++bi) {
    const double* src = in.data() + bi * r * c;
    double* dst = out.data() + bi * r * c;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) dst[j * r + i] = src[i * c + j];
  }
  Shape out_shape = s;
  std::swap(out_shape[out_shape.size() - 1], out_shape[out_shape.size() - 2]);
  return Tensor::make_result(std::move(out_shape), std::move(out), "transpose", {a},
                             [](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, transpose(g));
                             });
}

Tensor add(const Tensor& a, const Tensor& b) { return broadcast_binary("add", a, b, add_same); }
Tensor sub(const Tensor& a, const Tensor& b) { return broadcast_binary("sub", a, b, sub_same); }
Tensor mul(const Tensor& a, const Tensor& b) { return broadcast_binary("mul", a, b, mul_same); }
Tensor div(const Tensor& a, const Tensor& b) { return broadcast_binary("div", a, b, div_same); }

Tensor scale(const Tensor& a, double factor) {
  Values out(a.numel());
  kern().scale(factor, a.values().data(), out.data(), out.size());
  return Tensor::make_result(a.shape(), std::move(out), "scale", {a},
                             [factor](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, scale(g, factor));
                             });
}

Tensor add_scalar(const Tensor& a, double value) {
  return Tensor::make_result(a.shape(), map_values(a, [value](double x) { return x + value; }),
                             "add_scalar", {a},
                             [](const Tensor& g, const Tensor&, const std::vector<bool>& n) { return only(n, g); });
}

Tensor neg(const Tensor& a) { return scale(a, -1.0); }

Tensor sigmoid(const Tensor& a) {
  auto f = [](double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  };
  return Tensor::make_result(a.shape(), map_values(a, f), "sigmoid", {a},
                             [](const Tensor& g, const Tensor& y, const std::vector<bool>& n) {
                               return only(n, mul(g, mul(y, add_scalar(neg(y), 1.0))));
                             });
}

Tensor tanh(const Tensor& a) {
  return Tensor::make_result(a.shape(), map_values(a, [](double x) { return std::tanh(x); }), "tanh", {a},
                             [](const Tensor& g, const Tensor& y, const std::vector<bool>& n) {
                               return only(n, mul(g, add_scalar(neg(square(y)), 1.0)));
                             });
}

Tensor relu(const Tensor& a) {
  return Tensor::make_result(a.shape(), map_values(a, [](double x) { return x > 0 ? x : 0.0; }), "relu", {a},
                             [a](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, mask_mul(g, constant(a.shape(), map_values(a, [](double x) {
                                                                     return x > 0 ? 1.0 : 0.0;
                                                                   }))));
                             });
}

Tensor leaky_relu(const Tensor& a, double slope) {
  return Tensor::make_result(
      a.shape(), map_values(a, [slope](double x) { return x > 0 ? x : slope * x; }), "leaky_relu", {a},
      [a, slope](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
        return only(n, mask_mul(g, constant(a.shape(), map_values(a, [slope](double x) {
                                              return x > 0 ? 1.0 : slope;
                                            }))));
      });
}

Tensor exp(const Tensor& a) {
  return Tensor::make_result(a.shape(), map_values(a, [](double x) { return std::exp(x); }), "exp", {a},
                             [](const Tensor& g, const Tensor& y, const std::vector<bool>& n) {
                               return only(n, mul(g, y));
                             });
}

Tensor log(const Tensor& a) {
  for (double x : a.values()) {
    if (!(x > 0)) throw DomainError("log of non-positive value " + std::to_string(x));
  }
  return Tensor::make_result(a.shape(), map_values(a, [](double x) { return std::log(x); }), "log", {a},
                             [a](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, div(g, a));
                             });
}

Tensor sqrt(const Tensor& a) {
  for (double x : a.values()) {
    if (x < 0) throw DomainError("sqrt of negative value " + std::to_string(x));
  }
  return Tensor::make_result(a.shape(), map_values(a, [](double x) { return std::sqrt(x); }), "sqrt", {a},
                             [](const Tensor& g, const Tensor& y, const std::vector<bool>& n) {
                               return only(n, mul(g, scale(reciprocal_or_zero(y), 0.5)));
                             });
}

Tensor square(const Tensor& a) {
  Values out(a.numel());
  kern().mul(a.values().data(), a.values().data(), out.data(), out.size());
  return Tensor::make_result(a.shape(), std::move(out), "square", {a},
                             [a](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, mul(g, scale(a, 2.0)));
                             });
}

Tensor clamp(const Tensor& a, double lo, double hi) {
  return Tensor::make_result(
      a.shape(), map_values(a, [lo, hi](double x) { return std::clamp(x, lo, hi); }), "clamp", {a},
      [a, lo, hi](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
        return only(n, mask_mul(g, constant(a.shape(), map_values(a, [lo, hi](double x) {
                                              return (x >= lo && x <= hi) ? 1.0 : 0.0;
                                            }))));
      });
}

Tensor reciprocal_or_zero(const Tensor& a) {
  return Tensor::make_result(a.shape(), map_values(a, [](double x) { return x == 0.0 ? 0.0 : 1.0 / x; }),
                             "reciprocal", {a},
                             [](const Tensor& g, const Tensor& y, const std::vector<bool>& n) {
                               return only(n, neg(mul(g, square(y))));
                             });
}

Tensor sum(const Tensor& a) {
  const double total = kern().sum(a.values().data(), a.numel());
  return Tensor::make_result({}, {total}, "sum", {a},
                             [a](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, broadcast_leading(g, a.shape()));
                             });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor sum_lastdim(const Tensor& a) {
  if (a.rank() == 0) throw ShapeError("sum_lastdim on a scalar");
  const std::size_t width = a.shape().back();
  const std::size_t rows = a.numel() / std::max<std::size_t>(width, 1);
  Values out(rows);
  auto in = a.values();
  for (std::size_t r = 0; r < rows; ++r) out[r] = kern().sum(in.data() + r * width, width);
  Shape out_shape = a.shape();
  out_shape.back() = 1;
  return Tensor::make_result(std::move(out_shape), std::move(out), "sum_lastdim", {a},
                             [width](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, expand_lastdim(g, width));
                             });
}

Tensor mean_lastdim(const Tensor& a) {
  return scale(sum_lastdim(a), 1.0 / static_cast<double>(a.shape().back()));
}

Tensor expand_lastdim(const Tensor& a, std::size_t width) {
  if (a.rank() == 0 || a.shape().back() != 1) {
    throw ShapeError("expand_lastdim: expected trailing extent 1, got " + shape_str(a.shape()));
  }
  auto in = a.values();
  Values out(in.size() * width);
  for (std::size_t r = 0; r < in.size(); ++r) std::fill_n(out.begin() + r * width, width, in[r]);
  Shape out_shape = a.shape();
  out_shape.back() = width;
  return Tensor::make_result(std::move(out_shape), std::move(out), "expand_lastdim", {a},
                             [](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, sum_lastdim(g));
                             });
}

Tensor broadcast_leading(const Tensor& a, const Shape& shape) {
  if (!is_suffix(a.shape(), shape)) shape_mismatch("broadcast_leading", a.shape(), shape);
  auto in = a.values();
  const std::size_t block = in.size();
  const std::size_t reps = shape_numel(shape) / std::max<std::size_t>(block, 1);
  Values out(block * reps);
  for (std::size_t r = 0; r < reps; ++r) std::copy(in.begin(), in.end(), out.begin() + r * block);
  return Tensor::make_result(shape, std::move(out), "broadcast_leading", {a},
                             [a](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, sum_leading(g, a.shape()));
                             });
}

Tensor sum_leading(const Tensor& a, const Shape& suffix) {
  if (!is_suffix(suffix, a.shape())) shape_mismatch("sum_leading", a.shape(), suffix);
  const std::size_t block = shape_numel(suffix);
  const std::size_t reps = a.numel() / std::max<std::size_t>(block, 1);
  auto in = a.values();
  Values out(block, 0.0);
  for (std::size_t r = 0; r < reps; ++r) kern().axpy(1.0, in.data() + r * block, out.data(), block);
  return Tensor::make_result(suffix, std::move(out), "sum_leading", {a},
                             [a](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, broadcast_leading(g, a.shape()));
                             });
}

Tensor stddev(const Tensor& a, std::size_t axis) {
  if (a.rank() != 2 || axis > 1) {
    throw ShapeError("stddev: expected rank-2 input and axis 0 or 1, got " + shape_str(a.shape()) +
                     " axis " + std::to_string(axis));
  }
  const Tensor rows = axis == 0 ? transpose(a) : a;
  const std::size_t width = rows.dim(1);
  const Tensor centered = sub(rows, expand_lastdim(mean_lastdim(rows), width));
  const Tensor variance = mean_lastdim(square(centered));
  return reshape(sqrt(variance), {rows.dim(0)});
}

Tensor softmax(const Tensor& a) {
  if (a.rank() == 0) throw ShapeError("softmax on a scalar");
  const std::size_t width = a.shape().back();
  const std::size_t rows = a.numel() / std::max<std::size_t>(width, 1);
  auto in = a.values();
  Values out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in.data() + r * width;
    double* y = out.data() + r * width;
    const double mx = *std::max_element(x, x + width);
    double total = 0.0;
    for (std::size_t j = 0; j < width; ++j) total += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < width; ++j) y[j] /= total;
  }
  return Tensor::make_result(a.shape(), std::move(out), "softmax", {a},
                             [width](const Tensor& g, const Tensor& y, const std::vector<bool>& n) {
                               Tensor inner = expand_lastdim(sum_lastdim(mul(g, y)), width);
                               return only(n, mul(y, sub(g, inner)));
                             });
}

Tensor concat(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  Shape lead = parts.front().shape();
  if (lead.empty()) throw ShapeError("concat of scalars");
  lead.pop_back();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    Shape pl = p.shape();
    if (pl.empty()) throw ShapeError("concat of scalars");
    widths.push_back(pl.back());
    total += pl.back();
    pl.pop_back();
    if (pl != lead) shape_mismatch("concat", parts.front().shape(), p.shape());
  }
  const std::size_t rows = shape_numel(lead);
  Values out(rows * total);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto in = parts[i].values();
    const std::size_t w = widths[i];
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(in.begin() + r * w, w, out.begin() + r * total + offset);
    }
    offset += w;
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  return Tensor::make_result(std::move(out_shape), std::move(out), "concat", parts,
                             [widths](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               std::vector<Tensor> grads(widths.size());
                               std::size_t off = 0;
                               for (std::size_t i = 0; i < widths.size(); ++i) {
                                 if (n[i]) grads[i] = slice(g, off, off + widths[i]);
                                 off += widths[i];
                               }
                               return grads;
                             });
}

Tensor slice(const Tensor& a, std::size_t begin, std::size_t end) {
  if (a.rank() == 0 || begin > end || end > a.shape().back()) {
    throw ShapeError("slice [" + std::to_string(begin) + "," + std::to_string(end) + ") out of range for " +
                     shape_str(a.shape()));
  }
  const std::size_t width = a.shape().back();
  const std::size_t rows = a.numel() / std::max<std::size_t>(width, 1);
  const std::size_t w = end - begin;
  auto in = a.values();
  Values out(rows * w);
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(in.begin() + r * width + begin, w, out.begin() + r * w);
  Shape out_shape = a.shape();
  out_shape.back() = w;
  return Tensor::make_result(std::move(out_shape), std::move(out), "slice", {a},
                             [begin, width](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, embed_lastdim(g, begin, width));
                             });
}

Tensor embed_lastdim(const Tensor& a, std::size_t begin, std::size_t width) {
  const std::size_t w = a.shape().back();
  if (begin + w > width) {
    throw ShapeError("embed_lastdim: " + shape_str(a.shape()) + " does not fit at " + std::to_string(begin) +
                     " in width " + std::to_string(width));
  }
  const std::size_t rows = a.numel() / std::max<std::size_t>(w, 1);
  auto in = a.values();
  Values out(rows * width, 0.0);
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(in.begin() + r * w, w, out.begin() + r * width + begin);
  Shape out_shape = a.shape();
  out_shape.back() = width;
  return Tensor::make_result(std::move(out_shape), std::move(out), "embed_lastdim", {a},
                             [begin, w](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, slice(g, begin, begin + w));
                             });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_numel(shape) != a.numel()) shape_mismatch("reshape", a.shape(), shape);
  auto in = a.values();
  return Tensor::make_result(std::move(shape), Values(in.begin(), in.end()), "reshape", {a},
                             [a](const Tensor& g, const Tensor&, const std::vector<bool>& n) {
                               return only(n, reshape(g, a.shape()));
                             });
}

Tensor dropout(const Tensor& a, double p, Rng& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw std::invalid_argument("dropout probability must be < 1");
  const double keep_scale = 1.0 / (1.0 - p);
  Values mask(a.numel());
  for (double& m : mask) m = rng.uniform() < p ? 0.0 : keep_scale;
  return mul(a, constant(a.shape(), std::move(mask)));
}

Tensor smooth_l1(const Tensor& prediction, const Tensor& target) {
  if (prediction.shape() != target.shape()) shape_mismatch("smooth_l1", prediction.shape(), target.shape());
  // With c = clamp(e,-1,1): c*e - c^2/2 is 0.5e^2 inside the unit band and |e|-0.5 outside.
  const Tensor e = sub(prediction, target);
  const Tensor c = clamp(e, -1.0, 1.0);
  return mean(sub(mul(c, e), scale(square(c), 0.5)));
}

}  // namespace mobgen::numerics
