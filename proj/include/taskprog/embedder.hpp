#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "taskprog/tensor.hpp"

namespace taskprog {

struct EmbedderConfig {
  std::size_t input_size = 64;
  std::size_t input_channels = 3;
  std::vector<std::size_t> conv_channels = {32, 32, 64, 64, 128, 128};
  std::size_t first_kernel = 10;
  std::size_t other_kernels = 3;
  std::size_t embed_dim = 32;
  /// 1-indexed conv layers followed by 2x2 max-pooling.
  std::vector<std::size_t> pool_after = {2, 3, 4, 5};

  /// Throws InvalidArgument unless there are six conv layers, a positive
  /// embedding width and a spatial map of at least 1x1 after pooling.
  void validate() const;
  bool pools_after(std::size_t layer) const;
  /// Side length of the map that enters the spatial softmax.
  std::size_t final_map_size() const;

  friend bool operator==(const EmbedderConfig&, const EmbedderConfig&) = default;
};

struct ConvParams {
  Tensor weight;  // [C_out, C_in, k, k]
  Tensor bias;    // [C_out]
};

/// Weights of the network; gradients share this layout.
struct EmbedderParams {
  EmbedderConfig config;
  std::vector<ConvParams> convs;
  Tensor dense_weight;  // [embed_dim, 2 * C_last]
  Tensor dense_bias;    // [embed_dim]

  /// Zero tensors shaped like `config` requires.
  static EmbedderParams zeros(const EmbedderConfig& config);

  /// Stable (name, tensor) listing: conv1.weight, conv1.bias, ..., dense.weight, dense.bias.
  std::vector<std::pair<std::string, Tensor*>> named();
  std::vector<std::pair<std::string, const Tensor*>> named() const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  /// CRC-64 over every named tensor in order.
  std::uint64_t digest() const;
};

using EmbedderGrads = EmbedderParams;

/// He-uniform weights in [-sqrt(6/fan_in), sqrt(6/fan_in)], zero biases.
EmbedderParams init_params(const EmbedderConfig& config, std::uint64_t seed);

/// Unit-norm embedding vector.
struct Embedding {
  std::vector<float> values;

  std::size_t size() const { return values.size(); }
  float operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

double squared_distance(const Embedding& a, const Embedding& b);
double distance(const Embedding& a, const Embedding& b);

/// Activations kept from a forward pass for the backward pass.
struct ForwardTrace {
  std::vector<Tensor> conv_inputs;   // input of each conv layer, CHW
  std::vector<Tensor> conv_outputs;  // pre-activation output of each conv layer
  std::vector<Tensor> pool_inputs;   // post-ReLU map fed to each pooling (empty when no pooling)
  Tensor softmax_input;
  Tensor features;   // spatial softmax output
  Tensor projected;  // dense output before normalization
  Embedding output;
};

/// HWC image [S,S,C] in [0,1] -> CHW tensor for the first convolution.
Tensor to_channels_first(const Tensor& image);

/// f(x): six convs with ReLU, pooling per config, spatial softmax, dense, L2 normalization.
Embedding embed(const EmbedderParams& params, const Tensor& image);
/// Same as embed, keeping every activation.
ForwardTrace embed_traced(const EmbedderParams& params, const Tensor& image);

/// Gradient of <upstream, f(x)> with respect to every parameter.
EmbedderGrads embed_backward(const EmbedderParams& params, const Tensor& image, const Tensor& upstream);
/// Backward pass reusing a trace; accumulates into `grads`.
void accumulate_backward(const EmbedderParams& params, const ForwardTrace& trace, const Tensor& upstream,
                         EmbedderGrads& grads);

/// One F32T file per parameter plus manifest.json (config and per-file digests).
void save_checkpoint(const EmbedderParams& params, const std::filesystem::path& dir);
EmbedderParams load_checkpoint(const std::filesystem::path& dir);

}  // namespace taskprog
