#include <doctest.h>

#include <fstream>

#include "support/oracles.hpp"
#include "taskprog/agent.hpp"
#include "taskprog/errors.hpp"

using namespace taskprog;

namespace {

// Network whose output ignores the image: zero weights, dense bias along `axis`.
EmbedderParams constant_network(std::size_t axis) {
  EmbedderParams p = EmbedderParams::zeros(EmbedderConfig{});
  p.dense_bias[axis] = 1;
  return p;
}

Embedding unit(std::size_t axis) {
  Embedding e;
  e.values.assign(32, 0.0f);
  e.values[axis] = 1;
  return e;
}

// 16-entry policy where entry `match` is the only one equal to unit(0).
Policy steering_policy(std::size_t match, std::size_t goal) {
  std::vector<Embedding> e;
  for (std::size_t i = 0; i < 16; ++i) e.push_back(i == match ? unit(0) : unit(1 + i));
  return make_policy({}, e, goal);
}

FloorScene floor_with(int objects) {
  return phase_scene(std::get<FloorScene>(randomize_run(Task::floor, 3).initial), kFloorObjectCount - objects);
}

}  // namespace

TEST_CASE("episode config") {
  EpisodeConfig c;
  c.validate();
  CHECK(c.goal_state() == 0);
  c.max_steps = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.goal_index = 16;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = {};
  c.task = Task::cup;
  c.initial_state = 0;
  c.goal_particles = 275;
  CHECK(c.goal_state() == 275);
  CHECK(pouring_goal_index(275) == 3);
  CHECK(pouring_goal_index(0) == 15);
  CHECK(pouring_goal_index(345) == 0);
  CHECK(pouring_goal_index(138) == 9);
}

TEST_CASE("max_steps 1 with a distant goal") {
  const auto params = constant_network(0);
  EpisodeConfig c;
  c.max_steps = 1;
  const auto t = run_cleaning_episode(params, steering_policy(0, 15), floor_with(15), c);
  CHECK(t.status == EpisodeStatus::max_steps);
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].action == Action::advance);
  CHECK(t.final_state == 14);
}

TEST_CASE("hold never mutates and ends the episode") {
  const auto params = constant_network(0);
  EpisodeConfig c;
  const auto t = run_cleaning_episode(params, steering_policy(15, 15), floor_with(6), c);
  CHECK(t.status == EpisodeStatus::converged_hold);
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].state_before == t.steps[0].state_after);
  CHECK(t.final_state == 6);
}

TEST_CASE("bookkeeping and action errors") {
  const auto params = constant_network(0);
  EpisodeConfig c;
  // Always advance: removes every object, then fails on the empty region.
  const auto t = run_cleaning_episode(params, steering_policy(0, 15), floor_with(5), c);
  CHECK(t.status == EpisodeStatus::action_error);
  CHECK(t.steps.size() == 6);
  CHECK(t.final_state == 0);
  int tally = 0;
  for (const auto& s : t.steps) {
    tally += s.state_after - s.state_before;
    CHECK(s.nn_index <= 15);
  }
  CHECK(t.final_state == t.initial_state + tally);
  // Always retreat: fills the region back up, then fails on the empty storage.
  const auto back = run_cleaning_episode(params, steering_policy(15, 0), floor_with(12), c);
  CHECK(back.status == EpisodeStatus::action_error);
  CHECK(back.final_state == 15);
}

TEST_CASE("constant state yields a constant distance series") {
  const auto params = constant_network(0);
  EpisodeConfig c;
  c.task = Task::cup;
  c.initial_state = 0;
  c.max_steps = 5;
  // Retreat at an empty cup pours in; use a pouring policy that always advances at 0 particles.
  const Policy p = steering_policy(0, 15);
  const auto run = randomize_run(Task::cup, 1);
  auto start = std::get<CupScene>(run.initial);
  start.particle_count = 0;
  const auto t = run_pouring_episode(params, p, start, run.views[kRobotView], c);
  CHECK(t.status == EpisodeStatus::max_steps);
  CHECK(t.final_state == 0);  // pour_out clamps at empty
  const auto d = distance_to_go(t, unit(5));
  REQUIRE(d.size() == 5);
  for (double v : d) CHECK(v == d[0]);
}

TEST_CASE("episodes are deterministic and export one JSON line per step") {
  oracle::TempDir dir("trace");
  const auto params = init_params(EmbedderConfig{}, 2);
  EpisodeConfig c;
  c.initial_state = 9;
  c.goal_index = 12;
  c.max_steps = 6;
  c.world_seed = 44;
  c.observation_seed = 45;
  const auto a = run_cleaning_episode(params, c);
  const auto b = run_cleaning_episode(params, c);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].image_digest == b.steps[i].image_digest);
    CHECK(a.steps[i].embedding == b.steps[i].embedding);
  }
  write_trace_jsonl(a, dir.path() / "t.jsonl");
  std::ifstream in(dir.path() / "t.jsonl");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == a.steps.size());

  EpisodeConfig cup;
  cup.task = Task::cup;
  cup.initial_state = 0;
  cup.goal_particles = 275;
  cup.max_steps = 3;
  cup.world_seed = 4;
  cup.observation_seed = 5;
  const auto pa = run_pouring_episode(params, cup), pb = run_pouring_episode(params, cup);
  CHECK(pa.steps.size() == pb.steps.size());
  CHECK(pa.final_state == pb.final_state);
  CHECK(pa.goal_state == 275);
}

TEST_CASE("pouring policy goal entry shows the requested particles") {
  const auto params = init_params(EmbedderConfig{}, 3);
  const auto run = randomize_run(Task::cup, 8);
  const Policy p = pouring_policy(params, run, 275, 64);
  CHECK(p.goal_index == 3);
  auto goal = std::get<CupScene>(run.initial);
  goal.particle_count = 275;
  CHECK(p.entries[3].image == render(goal, run.views[kRobotView], 3, 64));
}

TEST_CASE("spearman") {
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1));
  CHECK(spearman({1, 2, 3, 4}, {1, 3, 2, 4}) == doctest::Approx(0.8));
  CHECK(spearman({1, 2, 3}, {5, 5, 5}) == 0.0);
  CHECK(spearman({1, 2, 3, 4}, {1, 2, 2, 3}) == doctest::Approx(0.9486833));
}
