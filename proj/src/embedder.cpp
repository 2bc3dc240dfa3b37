#include "taskprog/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/f32t.hpp"
#include "taskprog/layers.hpp"
#include "taskprog/rng.hpp"

namespace taskprog {
namespace {

using nlohmann::json;

void add_into(Tensor& dst, const Tensor& src) {
  float* d = dst.data();
  const float* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

json config_to_json(const EmbedderConfig& c) {
  return {{"input_size", c.input_size},       {"input_channels", c.input_channels},
          {"conv_channels", c.conv_channels}, {"first_kernel", c.first_kernel},
          {"other_kernels", c.other_kernels}, {"embed_dim", c.embed_dim},
          {"pool_after", c.pool_after}};
}

EmbedderConfig config_from_json(const json& j) {
  EmbedderConfig c;
  c.input_size = j.at("input_size").get<std::size_t>();
  c.input_channels = j.at("input_channels").get<std::size_t>();
  c.conv_channels = j.at("conv_channels").get<std::vector<std::size_t>>();
  c.first_kernel = j.at("first_kernel").get<std::size_t>();
  c.other_kernels = j.at("other_kernels").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.pool_after = j.at("pool_after").get<std::vector<std::size_t>>();
  c.validate();
  return c;
}

}  // namespace

void EmbedderConfig::validate() const {
  if (conv_channels.size() != 6) throw InvalidArgument("embedder needs exactly 6 conv layers");
  if (embed_dim == 0) throw InvalidArgument("embed_dim must be positive");
  if (input_channels == 0 || first_kernel == 0 || other_kernels == 0) {
    throw InvalidArgument("embedder channel and kernel sizes must be positive");
  }
  for (std::size_t layer : pool_after) {
    if (layer < 1 || layer > 6) throw InvalidArgument("pool_after entries must be conv layer numbers 1..6");
  }
  if (std::any_of(conv_channels.begin(), conv_channels.end(), [](std::size_t c) { return c == 0; })) {
    throw InvalidArgument("conv channel counts must be positive");
  }
  if (final_map_size() == 0) {
    throw InvalidArgument("input size " + std::to_string(input_size) + " vanishes under the pooling schedule");
  }
}

bool EmbedderConfig::pools_after(std::size_t layer) const {
  return std::find(pool_after.begin(), pool_after.end(), layer) != pool_after.end();
}

std::size_t EmbedderConfig::final_map_size() const {
  std::size_t s = input_size;
  for (std::size_t layer = 1; layer <= 6; ++layer) {
    if (pools_after(layer)) s /= 2;
  }
  return s;
}

EmbedderParams EmbedderParams::zeros(const EmbedderConfig& config) {
  config.validate();
  EmbedderParams p;
  p.config = config;
  std::size_t c_in = config.input_channels;
  for (std::size_t i = 0; i < config.conv_channels.size(); ++i) {
    const std::size_t k = i == 0 ? config.first_kernel : config.other_kernels;
    const std::size_t c_out = config.conv_channels[i];
    p.convs.push_back({Tensor({c_out, c_in, k, k}), Tensor({c_out})});
    c_in = c_out;
  }
  p.dense_weight = Tensor({config.embed_dim, 2 * c_in});
  p.dense_bias = Tensor({config.embed_dim});
  return p;
}

std::vector<std::pair<std::string, Tensor*>> EmbedderParams::named() {
  std::vector<std::pair<std::string, Tensor*>> out;
  for (std::size_t i = 0; i < convs.size(); ++i) {
    const std::string prefix = "conv" + std::to_string(i + 1);
    out.emplace_back(prefix + ".weight", &convs[i].weight);
    out.emplace_back(prefix + ".bias", &convs[i].bias);
  }
  out.emplace_back("dense.weight", &dense_weight);
  out.emplace_back("dense.bias", &dense_bias);
  return out;
}

std::vector<std::pair<std::string, const Tensor*>> EmbedderParams::named() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (auto& [name, t] : const_cast<EmbedderParams*>(this)->named()) out.emplace_back(name, t);
  return out;
}

std::size_t EmbedderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named()) n += t->size();
  return n;
}

bool EmbedderParams::all_finite() const {
  const auto list = named();
  return std::all_of(list.begin(), list.end(), [](const auto& e) { return e.second->all_finite(); });
}

std::uint64_t EmbedderParams::digest() const {
  std::string joined;
  for (const auto& [name, t] : named()) joined += name + ":" + hex_digest(tensor_digest(*t)) + ";";
  return crc64(joined);
}

EmbedderParams init_params(const EmbedderConfig& config, std::uint64_t seed) {
  EmbedderParams p = EmbedderParams::zeros(config);
  Rng rng(seed);
  auto he_uniform = [&rng](Tensor& w, std::size_t fan_in) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    for (float& v : w.values()) v = static_cast<float>(rng.symmetric(bound));
  };
  for (auto& conv : p.convs) {
    he_uniform(conv.weight, conv.weight.dim(1) * conv.weight.dim(2) * conv.weight.dim(3));
  }
  he_uniform(p.dense_weight, p.dense_weight.dim(1));
  return p;
}

double squared_distance(const Embedding& a, const Embedding& b) {
  if (a.size() != b.size()) throw InvalidArgument("embedding widths differ");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.values[i]) - b.values[i];
    sum += d * d;
  }
  return sum;
}

double distance(const Embedding& a, const Embedding& b) { return std::sqrt(squared_distance(a, b)); }

Tensor to_channels_first(const Tensor& image) {
  require_rank(image, 3, "image");
  const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
  Tensor out({c, h, w});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t ch = 0; ch < c; ++ch) out.at(ch, y, x) = image[(y * w + x) * c + ch];
    }
  }
  return out;
}

ForwardTrace embed_traced(const EmbedderParams& params, const Tensor& image) {
  const auto& cfg = params.config;
  require_shape(image, {cfg.input_size, cfg.input_size, cfg.input_channels}, "embedder image");
  ForwardTrace trace;
  const std::size_t n = params.convs.size();
  trace.conv_inputs.resize(n);
  trace.conv_outputs.resize(n);
  trace.pool_inputs.resize(n);
  Tensor x = to_channels_first(image);
  for (std::size_t i = 0; i < n; ++i) {
    trace.conv_inputs[i] = std::move(x);
    trace.conv_outputs[i] = conv2d_forward(trace.conv_inputs[i], params.convs[i].weight, params.convs[i].bias);
    x = relu_forward(trace.conv_outputs[i]);
    if (cfg.pools_after(i + 1)) {
      trace.pool_inputs[i] = std::move(x);
      x = maxpool2x2_forward(trace.pool_inputs[i]);
    }
  }
  trace.softmax_input = std::move(x);
  trace.features = spatial_softmax_forward(trace.softmax_input);
  trace.projected = dense_forward(trace.features, params.dense_weight, params.dense_bias);
  const Tensor normalized = l2_normalize_forward(trace.projected);
  trace.output.values.assign(normalized.values().begin(), normalized.values().end());
  return trace;
}

Embedding embed(const EmbedderParams& params, const Tensor& image) { return embed_traced(params, image).output; }

void accumulate_backward(const EmbedderParams& params, const ForwardTrace& trace, const Tensor& upstream,
                         EmbedderGrads& grads) {
  require_shape(upstream, {params.config.embed_dim}, "embedding upstream");
  Tensor g = l2_normalize_backward(trace.projected, upstream).input_grad;
  LayerGrad dense = dense_backward(trace.features, params.dense_weight, g);
  add_into(grads.dense_weight, dense.param_grads.at("weight"));
  add_into(grads.dense_bias, dense.param_grads.at("bias"));
  g = spatial_softmax_backward(trace.softmax_input, dense.input_grad).input_grad;
  for (std::size_t i = params.convs.size(); i-- > 0;) {
    if (params.config.pools_after(i + 1)) g = maxpool2x2_backward(trace.pool_inputs[i], g).input_grad;
    g = relu_backward(trace.conv_outputs[i], g).input_grad;
    LayerGrad conv = conv2d_backward(trace.conv_inputs[i], params.convs[i].weight, g, i > 0);
    add_into(grads.convs[i].weight, conv.param_grads.at("weight"));
    add_into(grads.convs[i].bias, conv.param_grads.at("bias"));
    g = std::move(conv.input_grad);
  }
}

EmbedderGrads embed_backward(const EmbedderParams& params, const Tensor& image, const Tensor& upstream) {
  EmbedderGrads grads = EmbedderParams::zeros(params.config);
  accumulate_backward(params, embed_traced(params, image), upstream, grads);
  return grads;
}

void save_checkpoint(const EmbedderParams& params, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json tensors = json::array();
  for (const auto& [name, t] : params.named()) {
    const std::string file = name + ".f32t";
    const std::uint64_t crc = f32t::write(dir / file, *t);
    tensors.push_back({{"name", name}, {"file", file}, {"shape", t->shape()}, {"crc64", hex_digest(crc)}});
  }
  const json manifest = {{"format", "taskprog-embedder"},
                         {"version", 1},
                         {"config", config_to_json(params.config)},
                         {"tensors", tensors},
                         {"params_digest", hex_digest(params.digest())}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

EmbedderParams load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw NotFound("checkpoint manifest not found: " + manifest_path.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(manifest_path.string() + ": " + e.what());
  }
  EmbedderParams params = EmbedderParams::zeros(config_from_json(manifest.at("config")));
  const auto& tensors = manifest.at("tensors");
  for (auto& [name, t] : params.named()) {
    const auto it = std::find_if(tensors.begin(), tensors.end(), [&](const json& e) { return e.at("name") == name; });
    if (it == tensors.end()) throw NotFound("checkpoint " + dir.string() + " lacks tensor " + name);
    Tensor loaded = f32t::read(dir / it->at("file").get<std::string>(),
                               parse_hex_digest(it->at("crc64").get<std::string>()));
    require_shape(loaded, t->shape(), name.c_str());
    *t = std::move(loaded);
  }
  return params;
}

}  // namespace taskprog
