#pragma once

#include <cstdint>

#include "taskprog/tensor.hpp"

// Forward and reverse-mode kernels for the five layer types of the embedder.
// Every function is value-in/value-out; backward passes take the forward
// input again instead of relying on hidden caches.

namespace taskprog {

/// Same-size padding for a k-wide kernel: k/2 before, k-1-k/2 after.
/// For even k this is asymmetric (k=10 pads 5 left/top and 4 right/bottom).
constexpr std::size_t pad_before(std::size_t k) { return k / 2; }
constexpr std::size_t pad_after(std::size_t k) { return k - 1 - k / 2; }

/// Stride-1 cross-correlation with same-size output.
/// input [C_in,H,W], weights [C_out,C_in,k,k], bias [C_out] -> [C_out,H,W].
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

/// param_grads holds "weight" and "bias". When `want_input_grad` is false the
/// input gradient is left empty (first layer of a network).
LayerGrad conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream,
                          bool want_input_grad = true);

Tensor relu_forward(const Tensor& input);
LayerGrad relu_backward(const Tensor& input, const Tensor& upstream);

/// 2x2 max-pooling with stride 2 over [C,H,W]; odd trailing rows/cols are dropped.
Tensor maxpool2x2_forward(const Tensor& input);
/// Routes each upstream value to the first maximal element (row-major) of its window.
LayerGrad maxpool2x2_backward(const Tensor& input, const Tensor& upstream);

/// input [in], weights [out,in], bias [out] -> [out].
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
LayerGrad dense_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream);

/// Per-channel softmax over pixels, reduced to the expected image coordinate.
/// input [C,H,W] -> [2C] laid out as (x_0, y_0, x_1, y_1, ...), where columns map
/// linearly to x in [-1,1] and rows to y in [-1,1]. A size-1 axis maps to 0.
Tensor spatial_softmax_forward(const Tensor& input);
LayerGrad spatial_softmax_backward(const Tensor& input, const Tensor& upstream);

/// Norms at or below this are returned unchanged and counted as guard hits.
inline constexpr float kNormalizeEpsilon = 1e-8f;

Tensor l2_normalize_forward(const Tensor& v);
LayerGrad l2_normalize_backward(const Tensor& v, const Tensor& upstream);

/// Number of times l2_normalize hit the zero-norm guard in this process.
std::uint64_t l2_normalize_guard_hits();

}  // namespace taskprog
