#include "taskprog/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"

namespace taskprog {

namespace {

constexpr float kPouringJitterTranslation = 0.01f;
constexpr float kPouringJitterRotation = 1.0f * std::numbers::pi_v<float> / 180.0f;

int initial_state_limit(Task task) { return task == Task::floor ? kFloorObjectCount : kFullCup; }

EpisodeTrace start_trace(const Policy& policy, const EpisodeConfig& config, int initial_state) {
  EpisodeTrace trace;
  trace.task = config.task;
  trace.goal_index = static_cast<int>(policy.goal_index);
  trace.goal_state = config.goal_state();
  trace.initial_state = initial_state;
  trace.final_state = initial_state;
  trace.goal_embedding = policy.goal_embedding();
  return trace;
}

EpisodeStep observe(const EmbedderParams& params, const Policy& policy, const Tensor& image, int step, int state) {
  const QueryResult q = query_action(params, policy, image);
  EpisodeStep s;
  s.step = step;
  s.image_digest = tensor_digest(image);
  s.nn_index = q.index;
  s.nn_distance = q.distance;
  s.goal_distance = distance(q.embedding, policy.goal_embedding());
  s.action = q.action;
  s.state_before = state;
  s.state_after = state;
  s.embedding = q.embedding;
  return s;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = mean_rank;
    i = j + 1;
  }
  return r;
}

}  // namespace

void EpisodeConfig::validate() const {
  if (max_steps < 1) throw InvalidArgument("max_steps must be at least 1");
  if (goal_index < 0 || goal_index > kLastPhase) {
    throw InvalidArgument("goal index " + std::to_string(goal_index) + " outside 0.." + std::to_string(kLastPhase));
  }
  if (initial_state < 0 || initial_state > initial_state_limit(task)) {
    throw InvalidArgument("initial state " + std::to_string(initial_state) + " outside 0.." +
                          std::to_string(initial_state_limit(task)));
  }
  if (goal_particles > kFullCup) throw InvalidArgument("goal particles above " + std::to_string(kFullCup));
  if (goal_particles >= 0 && task != Task::cup) throw InvalidArgument("goal particles apply to the cup task only");
  if (image_size < kMinImageSize) throw InvalidArgument("image size too small");
}

int EpisodeConfig::goal_state() const {
  if (task == Task::floor) return kFloorObjectCount - goal_index;
  return goal_particles >= 0 ? goal_particles : particles_at_phase(goal_index);
}

std::string_view status_name(EpisodeStatus status) {
  switch (status) {
    case EpisodeStatus::converged_hold: return "converged_hold";
    case EpisodeStatus::max_steps: return "max_steps";
    case EpisodeStatus::action_error: return "action_error";
  }
  return "max_steps";
}

Policy demonstration_policy(const EmbedderParams& params, const RunSetup& run, int goal_index, int image_size) {
  std::vector<Tensor> images;
  images.reserve(kPhaseCount);
  const ViewParams& view = run.views[kRobotView];
  for (int p = 0; p < kPhaseCount; ++p) images.push_back(render(phase_scene(run.initial, p), view, p, image_size));
  if (goal_index < 0) throw InvalidArgument("negative goal index");
  return build_policy(params, std::move(images), static_cast<std::size_t>(goal_index));
}

int pouring_goal_index(int goal_particles) {
  if (goal_particles < 0 || goal_particles > kFullCup) {
    throw InvalidArgument("goal particles " + std::to_string(goal_particles) + " outside 0.." + std::to_string(kFullCup));
  }
  return static_cast<int>(std::lround(static_cast<double>(kFullCup - goal_particles) / kParticlesPerPhase));
}

Policy pouring_policy(const EmbedderParams& params, const RunSetup& run, int goal_particles, int image_size) {
  const int g = pouring_goal_index(goal_particles);
  Policy policy = demonstration_policy(params, run, g, image_size);
  CupScene goal = std::get<CupScene>(run.initial);
  goal.particle_count = goal_particles;
  auto& entry = policy.entries[static_cast<std::size_t>(g)];
  entry.image = render(goal, run.views[kRobotView], g, image_size);
  entry.embedding = embed(params, entry.image);
  return policy;
}

EpisodeTrace run_cleaning_episode(const EmbedderParams& params, const Policy& policy, const FloorScene& start,
                                  const EpisodeConfig& config) {
  config.validate();
  policy.validate();
  FloorScene scene = start;
  EpisodeTrace trace = start_trace(policy, config, static_cast<int>(scene.objects.size()));
  for (int step = 0; step < config.max_steps; ++step) {
    Rng view_rng(mix_seed(config.observation_seed, 2 * static_cast<std::uint64_t>(step)));
    const ViewParams view = random_view(Task::floor, kRobotView, view_rng);
    const Tensor image = render(scene, view, step, config.image_size);
    EpisodeStep s = observe(params, policy, image, step, static_cast<int>(scene.objects.size()));
    if (s.action == Action::hold) {
      trace.steps.push_back(std::move(s));
      trace.status = EpisodeStatus::converged_hold;
      break;
    }
    Rng action_rng(mix_seed(config.observation_seed, 2 * static_cast<std::uint64_t>(step) + 1));
    try {
      scene = apply_floor_action(scene, s.action == Action::advance ? FloorAction::remove_one : FloorAction::add_one,
                                 action_rng);
    } catch (const ActionError& e) {
      trace.steps.push_back(std::move(s));
      trace.status = EpisodeStatus::action_error;
      trace.error_message = e.what();
      break;
    }
    s.state_after = static_cast<int>(scene.objects.size());
    trace.steps.push_back(std::move(s));
  }
  trace.final_state = static_cast<int>(scene.objects.size());
  return trace;
}

EpisodeTrace run_cleaning_episode(const EmbedderParams& params, const EpisodeConfig& config) {
  config.validate();
  if (config.task != Task::floor) throw InvalidArgument("cleaning episode needs the floor task");
  const RunSetup run = randomize_run(Task::floor, config.world_seed);
  const Policy policy = demonstration_policy(params, run, config.goal_index, config.image_size);
  const FloorScene start = phase_scene(std::get<FloorScene>(run.initial), kFloorObjectCount - config.initial_state);
  return run_cleaning_episode(params, policy, start, config);
}

EpisodeTrace run_pouring_episode(const EmbedderParams& params, const Policy& policy, const CupScene& start,
                                 const ViewParams& view, const EpisodeConfig& config) {
  config.validate();
  policy.validate();
  CupScene scene = start;
  EpisodeTrace trace = start_trace(policy, config, scene.particle_count);
  for (int step = 0; step < config.max_steps; ++step) {
    const Tensor image = render(scene, view, step, config.image_size);
    EpisodeStep s = observe(params, policy, image, step, scene.particle_count);
    if (s.action == Action::hold) {
      trace.steps.push_back(std::move(s));
      trace.status = EpisodeStatus::converged_hold;
      break;
    }
    scene = apply_cup_action(scene, s.action == Action::advance ? CupAction::pour_out : CupAction::pour_in);
    s.state_after = scene.particle_count;
    trace.steps.push_back(std::move(s));
  }
  trace.final_state = scene.particle_count;
  return trace;
}

EpisodeTrace run_pouring_episode(const EmbedderParams& params, const EpisodeConfig& config) {
  config.validate();
  if (config.task != Task::cup) throw InvalidArgument("pouring episode needs the cup task");
  const RunSetup run = randomize_run(Task::cup, config.world_seed);
  const Policy policy = config.goal_particles >= 0
                            ? pouring_policy(params, run, config.goal_particles, config.image_size)
                            : demonstration_policy(params, run, config.goal_index, config.image_size);
  Rng rng(config.observation_seed);
  CupScene start = std::get<CupScene>(run.initial);
  start.particle_count = config.initial_state;
  start.cup_geometry.yaw = static_cast<float>(rng.uniform(0.0, std::numbers::pi));
  ViewParams view = run.views[kRobotView];
  view.jitter_translation = kPouringJitterTranslation;
  view.jitter_rotation = kPouringJitterRotation;
  view.jitter_seed = rng.next_u64();
  return run_pouring_episode(params, policy, start, view, config);
}

EpisodeTrace run_episode(const EmbedderParams& params, const EpisodeConfig& config) {
  return config.task == Task::floor ? run_cleaning_episode(params, config) : run_pouring_episode(params, config);
}

std::vector<double> distance_to_go(const EpisodeTrace& trace, const Embedding& goal_embedding) {
  std::vector<double> out;
  out.reserve(trace.steps.size());
  for (const auto& s : trace.steps) out.push_back(distance(s.embedding, goal_embedding));
  return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman needs equal-length series");
  if (x.size() < 2) return 0;
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1) / 2;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

void write_trace_jsonl(const EpisodeTrace& trace, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& s : trace.steps) {
    const nlohmann::json row = {{"step", s.step},
                                {"image_crc64", hex_digest(s.image_digest)},
                                {"nn_index", s.nn_index},
                                {"nn_distance", s.nn_distance},
                                {"goal_distance", s.goal_distance},
                                {"action", std::string(action_name(s.action))},
                                {"state_before", s.state_before},
                                {"state_after", s.state_after}};
    out << row.dump() << '\n';
  }
}

}  // namespace taskprog
