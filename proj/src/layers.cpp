#include "taskprog/layers.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/Core>

#include "taskprog/errors.hpp"

namespace taskprog {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXf>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXf>;

std::atomic<std::uint64_t> g_normalize_guard_hits{0};

struct ConvDims {
  std::size_t c_in, c_out, h, w, k;
};

ConvDims check_conv(const Tensor& input, const Tensor& weights) {
  require_rank(input, 3, "conv2d input");
  require_rank(weights, 4, "conv2d weights");
  const ConvDims d{input.dim(0), weights.dim(0), input.dim(1), input.dim(2), weights.dim(2)};
  if (weights.dim(1) != d.c_in || weights.dim(3) != d.k || d.k == 0) {
    throw InvalidArgument("conv2d: weights " + shape_string(weights.shape()) + " incompatible with input " +
                          shape_string(input.shape()));
  }
  return d;
}

// cols is [C_in*k*k, H*W]; row (c,ky,kx) holds the input pixel that kernel tap
// (ky,kx) sees at every output position, zero where it falls in the padding.
void im2col(const float* in, const ConvDims& d, float* cols) {
  const std::ptrdiff_t pb = static_cast<std::ptrdiff_t>(pad_before(d.k));
  const auto h = static_cast<std::ptrdiff_t>(d.h);
  const auto w = static_cast<std::ptrdiff_t>(d.w);
  const auto k = static_cast<std::ptrdiff_t>(d.k);
  float* dst = cols;
  for (std::size_t c = 0; c < d.c_in; ++c) {
    const float* plane = in + c * d.h * d.w;
    for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
      for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
        const std::ptrdiff_t x_lo = std::clamp<std::ptrdiff_t>(pb - kx, 0, w);
        const std::ptrdiff_t x_hi = std::clamp<std::ptrdiff_t>(w + pb - kx, 0, w);
        for (std::ptrdiff_t oy = 0; oy < h; ++oy, dst += w) {
          const std::ptrdiff_t iy = oy + ky - pb;
          if (iy < 0 || iy >= h || x_lo >= x_hi) {
            std::fill(dst, dst + w, 0.0f);
            continue;
          }
          std::fill(dst, dst + x_lo, 0.0f);
          std::memcpy(dst + x_lo, plane + iy * w + (x_lo + kx - pb), sizeof(float) * (x_hi - x_lo));
          std::fill(dst + x_hi, dst + w, 0.0f);
        }
      }
    }
  }
}

void col2im(const float* cols, const ConvDims& d, float* out) {
  const std::ptrdiff_t pb = static_cast<std::ptrdiff_t>(pad_before(d.k));
  const auto h = static_cast<std::ptrdiff_t>(d.h);
  const auto w = static_cast<std::ptrdiff_t>(d.w);
  const auto k = static_cast<std::ptrdiff_t>(d.k);
  std::fill(out, out + d.c_in * d.h * d.w, 0.0f);
  const float* src = cols;
  for (std::size_t c = 0; c < d.c_in; ++c) {
    float* plane = out + c * d.h * d.w;
    for (std::ptrdiff_t ky = 0; ky < k; ++ky) {
      for (std::ptrdiff_t kx = 0; kx < k; ++kx) {
        const std::ptrdiff_t x_lo = std::clamp<std::ptrdiff_t>(pb - kx, 0, w);
        const std::ptrdiff_t x_hi = std::clamp<std::ptrdiff_t>(w + pb - kx, 0, w);
        for (std::ptrdiff_t oy = 0; oy < h; ++oy, src += w) {
          const std::ptrdiff_t iy = oy + ky - pb;
          if (iy < 0 || iy >= h) continue;
          float* row = plane + iy * w + (kx - pb);
          for (std::ptrdiff_t ox = x_lo; ox < x_hi; ++ox) row[ox] += src[ox];
        }
      }
    }
  }
}

float axis_coordinate(std::size_t i, std::size_t n) {
  if (n <= 1) return 0.0f;
  return -1.0f + 2.0f * static_cast<float>(i) / static_cast<float>(n - 1);
}

// Softmax over one channel plane, max-shifted.
void plane_softmax(const float* a, std::size_t n, float* s) {
  const float peak = *std::max_element(a, a + n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = std::exp(a[i] - peak);
    total += s[i];
  }
  const float inv = static_cast<float>(1.0 / total);
  for (std::size_t i = 0; i < n; ++i) s[i] *= inv;
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  const ConvDims d = check_conv(input, weights);
  require_shape(bias, {d.c_out}, "conv2d bias");
  const std::size_t taps = d.c_in * d.k * d.k;
  const std::size_t pixels = d.h * d.w;

  RowMatrix cols(taps, pixels);
  im2col(input.data(), d, cols.data());

  Tensor out({d.c_out, d.h, d.w});
  MatrixMap result(out.data(), d.c_out, pixels);
  result.noalias() = ConstMatrixMap(weights.data(), d.c_out, taps) * cols;
  result.colwise() += ConstVectorMap(bias.data(), d.c_out);
  return out;
}

LayerGrad conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream,
                          bool want_input_grad) {
  const ConvDims d = check_conv(input, weights);
  require_shape(upstream, {d.c_out, d.h, d.w}, "conv2d upstream");
  const std::size_t taps = d.c_in * d.k * d.k;
  const std::size_t pixels = d.h * d.w;

  RowMatrix cols(taps, pixels);
  im2col(input.data(), d, cols.data());
  const ConstMatrixMap grad(upstream.data(), d.c_out, pixels);
  const ConstMatrixMap w(weights.data(), d.c_out, taps);

  LayerGrad out;
  Tensor dw(weights.shape());
  MatrixMap(dw.data(), d.c_out, taps).noalias() = grad * cols.transpose();
  Tensor db({d.c_out});
  VectorMap(db.data(), d.c_out) = grad.rowwise().sum();
  out.param_grads.emplace("weight", std::move(dw));
  out.param_grads.emplace("bias", std::move(db));

  if (want_input_grad) {
    RowMatrix dcols(taps, pixels);
    dcols.noalias() = w.transpose() * grad;
    out.input_grad = Tensor(input.shape());
    col2im(dcols.data(), d, out.input_grad.data());
  }
  return out;
}

Tensor relu_forward(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.values()) v = v > 0.0f ? v : 0.0f;
  return out;
}

LayerGrad relu_backward(const Tensor& input, const Tensor& upstream) {
  require_shape(upstream, input.shape(), "relu upstream");
  LayerGrad out;
  out.input_grad = upstream;
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (!(input[i] > 0.0f)) out.input_grad[i] = 0.0f;
  }
  return out;
}

Tensor maxpool2x2_forward(const Tensor& input) {
  require_rank(input, 3, "maxpool input");
  const std::size_t c = input.dim(0), h = input.dim(1) / 2, w = input.dim(2) / 2;
  Tensor out({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out.at(ch, y, x) = std::max({input.at(ch, 2 * y, 2 * x), input.at(ch, 2 * y, 2 * x + 1),
                                     input.at(ch, 2 * y + 1, 2 * x), input.at(ch, 2 * y + 1, 2 * x + 1)});
      }
    }
  }
  return out;
}

LayerGrad maxpool2x2_backward(const Tensor& input, const Tensor& upstream) {
  require_rank(input, 3, "maxpool input");
  const std::size_t c = input.dim(0), h = input.dim(1) / 2, w = input.dim(2) / 2;
  require_shape(upstream, {c, h, w}, "maxpool upstream");
  LayerGrad out;
  out.input_grad = Tensor(input.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        std::size_t best_y = 2 * y, best_x = 2 * x;
        float best = input.at(ch, best_y, best_x);
        for (std::size_t dy = 0; dy < 2; ++dy) {
          for (std::size_t dx = 0; dx < 2; ++dx) {
            const float v = input.at(ch, 2 * y + dy, 2 * x + dx);
            if (v > best) {
              best = v;
              best_y = 2 * y + dy;
              best_x = 2 * x + dx;
            }
          }
        }
        out.input_grad.at(ch, best_y, best_x) += upstream.at(ch, y, x);
      }
    }
  }
  return out;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  require_rank(input, 1, "dense input");
  require_rank(weights, 2, "dense weights");
  const std::size_t n_out = weights.dim(0), n_in = weights.dim(1);
  if (input.dim(0) != n_in) {
    throw InvalidArgument("dense: input " + shape_string(input.shape()) + " incompatible with weights " +
                          shape_string(weights.shape()));
  }
  require_shape(bias, {n_out}, "dense bias");
  Tensor out({n_out});
  VectorMap(out.data(), n_out).noalias() =
      ConstMatrixMap(weights.data(), n_out, n_in) * ConstVectorMap(input.data(), n_in) +
      ConstVectorMap(bias.data(), n_out);
  return out;
}

LayerGrad dense_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream) {
  require_rank(input, 1, "dense input");
  require_rank(weights, 2, "dense weights");
  const std::size_t n_out = weights.dim(0), n_in = weights.dim(1);
  if (input.dim(0) != n_in) {
    throw InvalidArgument("dense: input " + shape_string(input.shape()) + " incompatible with weights " +
                          shape_string(weights.shape()));
  }
  require_shape(upstream, {n_out}, "dense upstream");
  const ConstVectorMap g(upstream.data(), n_out);
  LayerGrad out;
  out.input_grad = Tensor({n_in});
  VectorMap(out.input_grad.data(), n_in).noalias() = ConstMatrixMap(weights.data(), n_out, n_in).transpose() * g;
  Tensor dw(weights.shape());
  MatrixMap(dw.data(), n_out, n_in).noalias() = g * ConstVectorMap(input.data(), n_in).transpose();
  out.param_grads.emplace("weight", std::move(dw));
  out.param_grads.emplace("bias", upstream);
  return out;
}

Tensor spatial_softmax_forward(const Tensor& input) {
  require_rank(input, 3, "spatial softmax input");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  if (h == 0 || w == 0) throw InvalidArgument("spatial softmax: empty spatial map");
  const std::size_t n = h * w;
  std::vector<float> s(n);
  Tensor out({2 * c});
  for (std::size_t ch = 0; ch < c; ++ch) {
    plane_softmax(input.data() + ch * n, n, s.data());
    double ex = 0.0, ey = 0.0;
    for (std::size_t y = 0; y < h; ++y) {
      const double py = axis_coordinate(y, h);
      for (std::size_t x = 0; x < w; ++x) {
        const double p = s[y * w + x];
        ex += p * axis_coordinate(x, w);
        ey += p * py;
      }
    }
    out[2 * ch] = static_cast<float>(ex);
    out[2 * ch + 1] = static_cast<float>(ey);
  }
  return out;
}

LayerGrad spatial_softmax_backward(const Tensor& input, const Tensor& upstream) {
  require_rank(input, 3, "spatial softmax input");
  const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
  require_shape(upstream, {2 * c}, "spatial softmax upstream");
  const std::size_t n = h * w;
  std::vector<float> s(n);
  LayerGrad out;
  out.input_grad = Tensor(input.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    plane_softmax(input.data() + ch * n, n, s.data());
    float ex = 0.0f, ey = 0.0f;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        ex += s[y * w + x] * axis_coordinate(x, w);
        ey += s[y * w + x] * axis_coordinate(y, h);
      }
    }
    const float gx = upstream[2 * ch], gy = upstream[2 * ch + 1];
    float* dst = out.input_grad.data() + ch * n;
    // d(E[x])/da_m = s_m (x_m - E[x])
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t m = y * w + x;
        dst[m] = s[m] * (gx * (axis_coordinate(x, w) - ex) + gy * (axis_coordinate(y, h) - ey));
      }
    }
  }
  return out;
}

Tensor l2_normalize_forward(const Tensor& v) {
  require_rank(v, 1, "l2_normalize input");
  double sq = 0.0;
  for (float x : v.values()) sq += static_cast<double>(x) * x;
  const double norm = std::sqrt(sq);
  if (!(norm > kNormalizeEpsilon)) {
    g_normalize_guard_hits.fetch_add(1, std::memory_order_relaxed);
    return v;
  }
  Tensor out = v;
  const float inv = static_cast<float>(1.0 / norm);
  for (float& x : out.values()) x *= inv;
  return out;
}

LayerGrad l2_normalize_backward(const Tensor& v, const Tensor& upstream) {
  require_rank(v, 1, "l2_normalize input");
  require_shape(upstream, v.shape(), "l2_normalize upstream");
  double sq = 0.0;
  for (float x : v.values()) sq += static_cast<double>(x) * x;
  const double norm = std::sqrt(sq);
  LayerGrad out;
  if (!(norm > kNormalizeEpsilon)) {
    out.input_grad = upstream;
    return out;
  }
  // (I - y y^T) g / |v| with y = v / |v|
  double dot = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] / norm * upstream[i];
  out.input_grad = Tensor(v.shape());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.input_grad[i] = static_cast<float>((upstream[i] - v[i] / norm * dot) / norm);
  }
  return out;
}

std::uint64_t l2_normalize_guard_hits() { return g_normalize_guard_hits.load(std::memory_order_relaxed); }

}  // namespace taskprog
