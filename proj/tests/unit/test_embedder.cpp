#include <doctest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "taskprog/embedder.hpp"
#include "taskprog/errors.hpp"

using namespace taskprog;
namespace ref = taskprog::reference;

namespace {

double norm(const Embedding& e) {
  double s = 0;
  for (float v : e.values) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("embedder config shape arithmetic") {
  EmbedderConfig c;
  CHECK(c.final_map_size() == 4);
  c.input_size = 48;
  CHECK(c.final_map_size() == 3);
  c.input_size = 300;
  CHECK(c.final_map_size() == 18);
  EmbedderConfig bad;
  bad.conv_channels = {32, 32};
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  EmbedderConfig tiny;
  tiny.input_size = 8;
  CHECK_THROWS_AS(tiny.validate(), InvalidArgument);
}

TEST_CASE("forward shape chain at 64 and 48") {
  for (std::size_t size : {64u, 48u}) {
    EmbedderConfig c;
    c.input_size = size;
    const auto params = init_params(c, 3);
    Rng rng(4);
    const auto trace = embed_traced(params, ref::random_tensor({size, size, 3}, rng, 0, 1));
    const std::size_t m = size == 64 ? 4 : 3;
    CHECK(trace.softmax_input.shape() == Shape{128, m, m});
    CHECK(trace.features.shape() == Shape{256});
    CHECK(trace.output.size() == 32);
  }
}

TEST_CASE("init law") {
  const EmbedderConfig c;
  const auto a = init_params(c, 11), b = init_params(c, 11), other = init_params(c, 12);
  CHECK(a.digest() == b.digest());
  CHECK(a.digest() != other.digest());
  CHECK(a.parameter_count() == 303968);
  for (const auto& [name, t] : a.named()) {
    if (name.ends_with("bias")) {
      for (float v : t->values()) CHECK(v == 0.0f);
      continue;
    }
    std::size_t fan_in = 1;
    for (std::size_t d = 1; d < t->rank(); ++d) fan_in *= t->dim(d);
    const float bound = static_cast<float>(std::sqrt(6.0 / static_cast<double>(fan_in)));
    float largest = 0;
    for (float v : t->values()) largest = std::max(largest, std::abs(v));
    CHECK(largest <= bound);
    CHECK(largest > 0.9f * bound);
  }
}

TEST_CASE("embedding is unit norm and deterministic") {
  const auto params = init_params(EmbedderConfig{}, 5);
  Rng rng(6);
  for (int i = 0; i < 5; ++i) {
    const Tensor image = ref::random_tensor({64, 64, 3}, rng, 0, 1);
    const Embedding e = embed(params, image);
    CHECK(std::abs(norm(e) - 1.0) <= 1e-5);
    CHECK(embed(params, image) == e);
  }
  CHECK_THROWS_AS(embed(params, Tensor({48, 48, 3})), InvalidArgument);
}

TEST_CASE("forward matches the float64 reference") {
  const auto params = init_params(EmbedderConfig{}, 8);
  Rng rng(9);
  const Tensor image = ref::random_tensor({64, 64, 3}, rng, 0, 1);
  const Embedding e = embed(params, image);
  const auto expected = ref::embed(params, image);
  for (std::size_t i = 0; i < e.size(); ++i) CHECK(e[i] == doctest::Approx(expected.v[i]).epsilon(1e-4).scale(1));
}

TEST_CASE("backward: zero upstream and end-to-end finite differences") {
  const auto params = init_params(oracle::toy_config(), 1);
  Rng rng(2);
  const Tensor image = ref::random_tensor({8, 8, 3}, rng, 0, 1);
  const auto zero = embed_backward(params, image, Tensor({32}));
  for (const auto& [name, t] : zero.named()) {
    for (float v : t->values()) CHECK(v == 0.0f);
  }
  for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(oracle::embedder_gradient_error(seed) <= 2e-3);
}

TEST_CASE("dead ReLU path gets exactly zero gradient") {
  auto params = init_params(oracle::toy_config(), 4);
  // A large negative bias kills conv6 channel 0 everywhere.
  params.convs[5].bias[0] = -1e3f;
  Rng rng(5);
  const Tensor image = ref::random_tensor({8, 8, 3}, rng, 0, 1);
  const auto grads = embed_backward(params, image, ref::random_tensor({32}, rng));
  const Tensor& w = grads.convs[5].weight;
  const std::size_t per_channel = w.size() / w.dim(0);
  for (std::size_t i = 0; i < per_channel; ++i) CHECK(w[i] == 0.0f);
  CHECK(grads.convs[5].bias[0] == 0.0f);
}

TEST_CASE("checkpoint round trip") {
  oracle::TempDir dir("ckpt");
  const auto params = init_params(EmbedderConfig{}, 21);
  save_checkpoint(params, dir.path() / "c");
  const auto loaded = load_checkpoint(dir.path() / "c");
  CHECK(loaded.digest() == params.digest());
  CHECK(loaded.config == params.config);
  CHECK_THROWS_AS(load_checkpoint(dir.path() / "missing"), NotFound);
}
