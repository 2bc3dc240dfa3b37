#include <doctest.h>

#include <cmath>

#include "support/reference.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/layers.hpp"

using namespace taskprog;
namespace ref = taskprog::reference;

namespace {

constexpr double kStep = 1e-3;
constexpr double kTolerance = 1e-3;

std::vector<double> to_vec(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

// Finite-difference gradient of <upstream, f(x)> over every entry of `x`.
std::vector<double> fd_gradient(ref::Array& x, const Tensor& upstream, const std::function<ref::Array()>& f) {
  std::vector<double> g(x.v.size());
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    g[i] = ref::central_difference(x.v, i, kStep, [&] { return ref::dot(f(), upstream); });
  }
  return g;
}

}  // namespace

TEST_CASE("conv2d forward examples") {
  SUBCASE("scalar") {
    const Tensor out = conv2d_forward(Tensor({1, 1, 1}, {2.0f}), Tensor({1, 1, 1, 1}, {3.0f}), Tensor({1}, {0.5f}));
    CHECK(out[0] == 6.5f);
  }
  SUBCASE("3x3 ones with zero padding") {
    const Tensor out = conv2d_forward(Tensor({1, 3, 3}, 1.0f), Tensor({1, 1, 3, 3}, 1.0f), Tensor({1}));
    CHECK(out.at(0, 1, 1) == 9.0f);
    CHECK(out.at(0, 0, 0) == 4.0f);
    CHECK(out.at(0, 0, 2) == 4.0f);
    CHECK(out.at(0, 2, 0) == 4.0f);
    CHECK(out.at(0, 2, 2) == 4.0f);
    CHECK(out.at(0, 0, 1) == 6.0f);
  }
  SUBCASE("zero weights give zero output") {
    Rng rng(3);
    const Tensor out = conv2d_forward(ref::random_tensor({2, 5, 5}, rng), Tensor({4, 2, 3, 3}), Tensor({4}));
    for (float v : out.values()) CHECK(v == 0.0f);
  }
  SUBCASE("even kernel pads 5 before and 4 after") {
    // A single tap at kernel (0,0) reads input offset (-5,-5); at (9,9) it reads (+4,+4).
    Tensor w({1, 1, 10, 10});
    w[0] = 1.0f;
    Tensor in({1, 12, 12});
    for (std::size_t i = 0; i < in.size(); ++i) in[i] = static_cast<float>(i + 1);
    const Tensor out = conv2d_forward(in, w, Tensor({1}));
    CHECK(out.at(0, 5, 5) == in.at(0, 0, 0));
    CHECK(out.at(0, 4, 4) == 0.0f);
    Tensor w2({1, 1, 10, 10});
    w2[99] = 1.0f;
    const Tensor out2 = conv2d_forward(in, w2, Tensor({1}));
    CHECK(out2.at(0, 7, 7) == in.at(0, 11, 11));
    CHECK(out2.at(0, 8, 8) == 0.0f);
  }
  SUBCASE("shape mismatch is rejected") {
    CHECK_THROWS_AS(conv2d_forward(Tensor({2, 4, 4}), Tensor({1, 3, 3, 3}), Tensor({1})), InvalidArgument);
    CHECK_THROWS_AS(conv2d_forward(Tensor({3, 4, 4}), Tensor({1, 3, 3, 3}), Tensor({2})), InvalidArgument);
  }
  SUBCASE("matches reference with 10x10 kernel") {
    Rng rng(11);
    const Tensor in = ref::random_tensor({3, 13, 13}, rng), w = ref::random_tensor({2, 3, 10, 10}, rng),
                 b = ref::random_tensor({2}, rng);
    const auto expected = ref::conv2d(ref::Array::from(in), ref::Array::from(w), ref::Array::from(b));
    CHECK(ref::relative_error(to_vec(conv2d_forward(in, w, b)), expected.v) < 1e-5);
  }
}

TEST_CASE("conv2d is linear in its input with zero bias") {
  Rng rng(5);
  const Tensor x = ref::random_tensor({2, 6, 6}, rng), w = ref::random_tensor({3, 2, 3, 3}, rng);
  Tensor scaled = x;
  for (float& v : scaled.values()) v *= 2.5f;
  const Tensor fx = conv2d_forward(x, w, Tensor({3}));
  const Tensor fs = conv2d_forward(scaled, w, Tensor({3}));
  for (std::size_t i = 0; i < fx.size(); ++i) CHECK(fs[i] == doctest::Approx(2.5 * fx[i]).epsilon(1e-5));
}

TEST_CASE("conv2d backward") {
  SUBCASE("scalar chain rule") {
    const LayerGrad g = conv2d_backward(Tensor({1, 1, 1}, {2.0f}), Tensor({1, 1, 1, 1}, {3.0f}), Tensor({1, 1, 1}, {1.0f}));
    CHECK(g.param_grads.at("weight")[0] == 2.0f);
    CHECK(g.param_grads.at("bias")[0] == 1.0f);
    CHECK(g.input_grad[0] == 3.0f);
  }
  SUBCASE("zero upstream gives zero grads") {
    Rng rng(2);
    const LayerGrad g = conv2d_backward(ref::random_tensor({2, 4, 4}, rng), ref::random_tensor({3, 2, 3, 3}, rng), Tensor({3, 4, 4}));
    for (float v : g.input_grad.values()) CHECK(v == 0.0f);
    for (const auto& [name, t] : g.param_grads)
      for (float v : t.values()) CHECK(v == 0.0f);
  }
  SUBCASE("random 1x5x5 matches finite differences") {
    Rng rng(21);
    const Tensor in = ref::random_tensor({1, 5, 5}, rng), w = ref::random_tensor({2, 1, 3, 3}, rng),
                 b = ref::random_tensor({2}, rng), up = ref::random_tensor({2, 5, 5}, rng);
    const LayerGrad g = conv2d_backward(in, w, up);
    ref::Array x = ref::Array::from(in), wa = ref::Array::from(w), ba = ref::Array::from(b);
    auto f = [&] { return ref::conv2d(x, wa, ba); };
    CHECK(ref::relative_error(to_vec(g.input_grad), fd_gradient(x, up, f)) < kTolerance);
    CHECK(ref::relative_error(to_vec(g.param_grads.at("weight")), fd_gradient(wa, up, f)) < kTolerance);
    CHECK(ref::relative_error(to_vec(g.param_grads.at("bias")), fd_gradient(ba, up, f)) < kTolerance);
  }
  SUBCASE("input grad can be skipped") {
    const LayerGrad g = conv2d_backward(Tensor({1, 3, 3}), Tensor({1, 1, 3, 3}), Tensor({1, 3, 3}), false);
    CHECK(g.input_grad.empty());
  }
}

TEST_CASE("relu, maxpool and dense") {
  SUBCASE("relu") {
    const Tensor out = relu_forward(Tensor({3}, {-1.0f, 0.0f, 2.0f}));
    CHECK(out == Tensor({3}, {0.0f, 0.0f, 2.0f}));
    const LayerGrad g = relu_backward(Tensor({3}, {-1.0f, 0.0f, 2.0f}), Tensor({3}, {5.0f, 5.0f, 5.0f}));
    CHECK(g.input_grad == Tensor({3}, {0.0f, 0.0f, 5.0f}));
  }
  SUBCASE("maxpool picks the maximum and routes gradient to it") {
    const Tensor in({1, 2, 2}, {1, 2, 3, 4});
    CHECK(maxpool2x2_forward(in) == Tensor({1, 1, 1}, {4.0f}));
    const LayerGrad g = maxpool2x2_backward(in, Tensor({1, 1, 1}, {1.0f}));
    CHECK(g.input_grad == Tensor({1, 2, 2}, {0, 0, 0, 1}));
  }
  SUBCASE("maxpool ties route to the first element in row-major order") {
    const LayerGrad g = maxpool2x2_backward(Tensor({1, 2, 2}, {1, 7, 7, 7}), Tensor({1, 1, 1}, {1.0f}));
    CHECK(g.input_grad == Tensor({1, 2, 2}, {0, 1, 0, 0}));
  }
  SUBCASE("dense identity") {
    Tensor eye({3, 3});
    for (std::size_t i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0f;
    const Tensor x({3}, {0.5f, -2.0f, 7.0f});
    CHECK(dense_forward(x, eye, Tensor({3})) == x);
    CHECK_THROWS_AS(dense_forward(Tensor({2}), eye, Tensor({3})), InvalidArgument);
  }
}

TEST_CASE("spatial softmax forward") {
  SUBCASE("uniform map is centered") {
    const Tensor out = spatial_softmax_forward(Tensor({2, 5, 7}, 0.3f));
    for (float v : out.values()) CHECK(v == doctest::Approx(0.0).epsilon(0).scale(1).epsilon(1e-6));
  }
  SUBCASE("saturated top-left activation lands at (-1,-1)") {
    Tensor in({1, 8, 8});
    in.at(0, 0, 0) = 50.0f;
    const Tensor out = spatial_softmax_forward(in);
    CHECK(std::abs(out[0] + 1.0f) < 1e-4f);
    CHECK(std::abs(out[1] + 1.0f) < 1e-4f);
  }
  SUBCASE("degenerate 1x1 map gives zero") {
    const Tensor out = spatial_softmax_forward(Tensor({1, 1, 1}, {123.0f}));
    CHECK(out[0] == 0.0f);
    CHECK(out[1] == 0.0f);
  }
  SUBCASE("coordinates stay inside [-1,1] for extreme inputs") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      const Tensor out = spatial_softmax_forward(ref::random_tensor({3, 4, 6}, rng, -80, 80));
      for (float v : out.values()) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
      }
    }
  }
}

TEST_CASE("spatial softmax backward") {
  SUBCASE("uniform input with symmetric upstream sums to zero per channel and is antisymmetric") {
    const LayerGrad g = spatial_softmax_backward(Tensor({1, 4, 4}), Tensor({2}, {1.0f, 1.0f}));
    double sum = 0;
    for (float v : g.input_grad.values()) sum += v;
    CHECK(std::abs(sum) < 1e-6);
    for (std::size_t y = 0; y < 4; ++y)
      for (std::size_t x = 0; x < 4; ++x) CHECK(g.input_grad.at(0, y, x) == doctest::Approx(-g.input_grad.at(0, 3 - y, 3 - x)));
  }
  SUBCASE("random 2x4x4 matches finite differences") {
    Rng rng(4);
    const Tensor in = ref::random_tensor({2, 4, 4}, rng, -2, 2), up = ref::random_tensor({4}, rng);
    ref::Array x = ref::Array::from(in);
    const auto fd = fd_gradient(x, up, [&] { return ref::spatial_softmax(x); });
    CHECK(ref::relative_error(to_vec(spatial_softmax_backward(in, up).input_grad), fd) < kTolerance);
  }
  SUBCASE("zero upstream") {
    Rng rng(1);
    const LayerGrad g = spatial_softmax_backward(ref::random_tensor({2, 3, 3}, rng), Tensor({4}));
    for (float v : g.input_grad.values()) CHECK(v == 0.0f);
  }
}

TEST_CASE("l2 normalize") {
  SUBCASE("3-4-5") {
    const Tensor out = l2_normalize_forward(Tensor({2}, {3.0f, 4.0f}));
    CHECK(out[0] == doctest::Approx(0.6));
    CHECK(out[1] == doctest::Approx(0.8));
  }
  SUBCASE("unit vector unchanged") {
    const Tensor v({3}, {0.0f, 1.0f, 0.0f});
    CHECK(l2_normalize_forward(v) == v);
  }
  SUBCASE("tangent projection") {
    const LayerGrad g = l2_normalize_backward(Tensor({2}, {1.0f, 0.0f}), Tensor({2}, {0.0f, 1.0f}));
    CHECK(g.input_grad == Tensor({2}, {0.0f, 1.0f}));
  }
  SUBCASE("zero vector hits the guard") {
    const auto before = l2_normalize_guard_hits();
    const Tensor zero({4});
    CHECK(l2_normalize_forward(zero) == zero);
    CHECK(l2_normalize_guard_hits() == before + 1);
  }
  SUBCASE("output norm is one for random inputs") {
    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
      const Tensor out = l2_normalize_forward(ref::random_tensor({32}, rng, -5, 5));
      double n = 0;
      for (float v : out.values()) n += static_cast<double>(v) * v;
      CHECK(std::abs(std::sqrt(n) - 1.0) < 1e-6);
    }
  }
}
