#include <doctest.h>

#include "support/oracles.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/policy.hpp"

using namespace taskprog;

namespace {

Embedding random_unit(Rng& rng, std::size_t d = 32) {
  Embedding e;
  e.values.resize(d);
  double n = 0;
  for (float& v : e.values) {
    v = static_cast<float>(rng.uniform(-1, 1));
    n += static_cast<double>(v) * v;
  }
  for (float& v : e.values) v = static_cast<float>(v / std::sqrt(n));
  return e;
}

}  // namespace

TEST_CASE("action table") {
  std::vector<Embedding> e(16, Embedding{{1, 0}});
  const Policy p15 = make_policy({}, e, 15);
  int advance = 0, hold = 0, retreat = 0;
  for (const auto& entry : p15.entries) {
    advance += entry.action == Action::advance;
    hold += entry.action == Action::hold;
    retreat += entry.action == Action::retreat;
  }
  CHECK(advance == 15);
  CHECK(hold == 1);
  CHECK(retreat == 0);
  const Policy p0 = make_policy({}, e, 0);
  CHECK(p0.entries[0].action == Action::hold);
  for (std::size_t i = 1; i < 16; ++i) CHECK(p0.entries[i].action == Action::retreat);
  const Policy single = make_policy({}, {Embedding{{1}}}, 0);
  CHECK(single.size() == 1);
  CHECK(single.entries[0].action == Action::hold);
  CHECK_THROWS_AS(make_policy({}, e, 16), InvalidArgument);
  CHECK_THROWS_AS(make_policy({}, {}, 0), InvalidArgument);
  for (std::size_t g = 0; g < 16; ++g) make_policy({}, e, g).validate();
}

TEST_CASE("nearest neighbor identity and tie rule") {
  Rng rng(2);
  std::vector<Embedding> e;
  for (int i = 0; i < 16; ++i) e.push_back(random_unit(rng));
  const Policy p = make_policy({}, e, 8);
  for (std::size_t k = 0; k < 16; ++k) {
    const Neighbor nn = nearest_neighbor(p, e[k]);
    CHECK(nn.index == k);
    CHECK(nn.distance == 0.0);
  }
  const Policy ties = make_policy({}, {Embedding{{0, 1}}, Embedding{{1, 0}}, Embedding{{-1, 0}}, Embedding{{1, 0}}}, 0);
  CHECK(nearest_neighbor(ties, Embedding{{0, -1}}).index == 1);
  CHECK(nearest_neighbor(ties, Embedding{{1, 0}}).index == 1);
}

TEST_CASE("nearest neighbor matches an exhaustive scan") {
  Rng rng(3);
  for (int q = 0; q < 1000; ++q) {
    std::vector<Embedding> e;
    for (int i = 0; i < 16; ++i) e.push_back(random_unit(rng));
    if (q % 4 == 0) e[rng.index(16)] = e[rng.index(16)];  // duplicates exercise ties
    const Policy p = make_policy({}, e, rng.index(16));
    const Embedding w = q % 8 == 0 ? e[rng.index(16)] : random_unit(rng);
    std::size_t best = 0;
    double best_d = squared_distance(w, e[0]);
    for (std::size_t i = 1; i < 16; ++i) {
      const double d = squared_distance(w, e[i]);
      if (d < best_d) best = i, best_d = d;
    }
    CHECK(nearest_neighbor(p, w).index == best);
  }
}

TEST_CASE("query action through the network") {
  const auto params = init_params(EmbedderConfig{}, 4);
  Rng rng(5);
  std::vector<Tensor> images;
  for (int i = 0; i < 16; ++i) images.push_back(reference::random_tensor({64, 64, 3}, rng, 0, 1));
  const Policy p = build_policy(params, images, 9);
  CHECK(query_action(params, p, images[9]).action == Action::hold);
  CHECK(query_action(params, p, images[8]).action == Action::advance);
  CHECK(query_action(params, p, images[10]).action == Action::retreat);
  CHECK(query_action(params, p, images[3]).index == 3);
  CHECK_THROWS_AS(build_policy(params, images, 16), InvalidArgument);
}

TEST_CASE("policy serialization round trip") {
  oracle::TempDir dir("policy");
  const auto params = init_params(EmbedderConfig{}, 6);
  Rng rng(7);
  std::vector<Tensor> images;
  for (int i = 0; i < 16; ++i) images.push_back(reference::random_tensor({64, 64, 3}, rng, 0, 1));
  const Policy p = build_policy(params, images, 15);
  save_policy(p, dir.path() / "p");
  const Policy q = load_policy(dir.path() / "p");
  CHECK(q.goal_index == 15);
  REQUIRE(q.size() == 16);
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(q.entries[i].embedding == p.entries[i].embedding);
    CHECK(q.entries[i].image == p.entries[i].image);
    CHECK(q.entries[i].action == p.entries[i].action);
  }
  CHECK_THROWS_AS(load_policy(dir.path() / "none"), NotFound);
}
