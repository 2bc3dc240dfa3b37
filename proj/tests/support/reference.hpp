#pragma once

// Float64 reference implementations used as finite-difference oracles.
// Written as direct loops over the textbook definitions, independent of the
// im2col/GEMM code paths under test.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "taskprog/embedder.hpp"
#include "taskprog/rng.hpp"
#include "taskprog/tensor.hpp"

namespace taskprog::reference {

struct Array {
  Shape shape;
  std::vector<double> v;

  Array() = default;
  explicit Array(Shape s) : shape(std::move(s)), v(shape_size(shape), 0.0) {}
  static Array from(const Tensor& t) {
    Array a(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) a.v[i] = t[i];
    return a;
  }
  Tensor to_tensor() const {
    Tensor t(shape);
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = static_cast<float>(v[i]);
    return t;
  }
};

inline Array conv2d(const Array& in, const Array& w, const Array& b) {
  const std::size_t ci = in.shape[0], h = in.shape[1], wd = in.shape[2];
  const std::size_t co = w.shape[0], k = w.shape[2];
  const long pb = static_cast<long>(k / 2);
  Array out({co, h, wd});
  for (std::size_t o = 0; o < co; ++o)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < wd; ++x) {
        double s = b.v[o];
        for (std::size_t c = 0; c < ci; ++c)
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(y + ky) - pb, ix = static_cast<long>(x + kx) - pb;
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(wd)) continue;
              s += w.v[((o * ci + c) * k + ky) * k + kx] * in.v[(c * h + static_cast<std::size_t>(iy)) * wd + static_cast<std::size_t>(ix)];
            }
        out.v[(o * h + y) * wd + x] = s;
      }
  return out;
}

inline Array relu(Array a) {
  for (double& x : a.v) x = std::max(0.0, x);
  return a;
}

inline Array maxpool(const Array& in) {
  const std::size_t c = in.shape[0], h = in.shape[1] / 2, w = in.shape[2] / 2, W = in.shape[2], H = in.shape[1];
  Array out({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        double m = -INFINITY;
        for (std::size_t dy = 0; dy < 2; ++dy)
          for (std::size_t dx = 0; dx < 2; ++dx) m = std::max(m, in.v[(ch * H + 2 * y + dy) * W + 2 * x + dx]);
        out.v[(ch * h + y) * w + x] = m;
      }
  return out;
}

inline Array dense(const Array& in, const Array& w, const Array& b) {
  Array out({w.shape[0]});
  for (std::size_t o = 0; o < w.shape[0]; ++o) {
    double s = b.v[o];
    for (std::size_t i = 0; i < w.shape[1]; ++i) s += w.v[o * w.shape[1] + i] * in.v[i];
    out.v[o] = s;
  }
  return out;
}

inline Array spatial_softmax(const Array& in) {
  const std::size_t c = in.shape[0], h = in.shape[1], w = in.shape[2];
  Array out({2 * c});
  auto coord = [](std::size_t i, std::size_t n) { return n <= 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1); };
  for (std::size_t ch = 0; ch < c; ++ch) {
    double total = 0, ex = 0, ey = 0;
    for (std::size_t i = 0; i < h * w; ++i) total += std::exp(in.v[ch * h * w + i]);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double p = std::exp(in.v[(ch * h + y) * w + x]) / total;
        ex += p * coord(x, w);
        ey += p * coord(y, h);
      }
    out.v[2 * ch] = ex;
    out.v[2 * ch + 1] = ey;
  }
  return out;
}

inline Array l2_normalize(Array a) {
  double n = 0;
  for (double x : a.v) n += x * x;
  n = std::sqrt(n);
  for (double& x : a.v) x /= n;
  return a;
}

inline double dot(const Array& a, const Tensor& g) {
  double s = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * g[i];
  return s;
}

/// Full embedder forward in float64 following the documented layer order.
inline Array embed(const EmbedderParams& p, const Tensor& image) {
  Array x = Array::from(to_channels_first(image));
  for (std::size_t i = 0; i < p.convs.size(); ++i) {
    x = relu(conv2d(x, Array::from(p.convs[i].weight), Array::from(p.convs[i].bias)));
    if (p.config.pools_after(i + 1)) x = maxpool(x);
  }
  return l2_normalize(dense(spatial_softmax(x), Array::from(p.dense_weight), Array::from(p.dense_bias)));
}

/// Central difference of a scalar function of `values` at index i.
inline double central_difference(std::vector<double>& values, std::size_t i, double step,
                                 const std::function<double()>& f) {
  const double saved = values[i];
  values[i] = saved + step;
  const double up = f();
  values[i] = saved - step;
  const double down = f();
  values[i] = saved;
  return (up - down) / (2 * step);
}

/// |a - b| / max(|a|, |b|) over whole vectors; 0 when both are zero.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0 ? 0 : std::sqrt(diff) / scale;
}

inline Tensor random_tensor(Shape shape, Rng& rng, double lo = -1, double hi = 1) {
  Tensor t(std::move(shape));
  for (float& v : t.values()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

/// Values whose pairwise gaps exceed 0.01, so small perturbations never reorder them
/// and never cross zero.
inline Tensor separated_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  std::vector<std::size_t> order(t.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  const double n = static_cast<double>(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    double v = -1.0 + 2.0 * (static_cast<double>(order[i]) + 0.5) / n;
    if (std::abs(v) < 0.005) v = 0.02;
    t[i] = static_cast<float>(v);
  }
  return t;
}

}  // namespace taskprog::reference
