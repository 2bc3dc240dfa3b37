#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "taskprog/policy.hpp"
#include "taskprog/scene.hpp"

namespace taskprog {

inline constexpr int kDefaultMaxSteps = 40;

/// One closed-loop trial. The task instance (scene appearance and the
/// demonstration) derives from world_seed; viewpoints, placements and the
/// per-trial cup yaw derive from observation_seed.
struct EpisodeConfig {
  Task task = Task::floor;
  int initial_state = kFloorObjectCount;  // objects in the region, or particles in the cup
  int goal_index = kLastPhase;
  int goal_particles = -1;  // cup only: when >= 0, overrides goal_index (see pouring_goal_index)
  int max_steps = kDefaultMaxSteps;
  std::uint64_t world_seed = 0;
  std::uint64_t observation_seed = 0;
  int image_size = 64;

  void validate() const;
  /// Objects or particles the goal frame shows.
  int goal_state() const;
};

enum class EpisodeStatus { converged_hold, max_steps, action_error };

std::string_view status_name(EpisodeStatus status);

struct EpisodeStep {
  int step = 0;
  std::uint64_t image_digest = 0;
  std::size_t nn_index = 0;
  double nn_distance = 0;
  double goal_distance = 0;
  Action action = Action::hold;
  int state_before = 0;
  int state_after = 0;
  Embedding embedding;
};

struct EpisodeTrace {
  Task task = Task::floor;
  int goal_index = 0;
  int goal_state = 0;
  int initial_state = 0;
  int final_state = 0;
  EpisodeStatus status = EpisodeStatus::max_steps;
  std::string error_message;  // set on action_error
  Embedding goal_embedding;
  std::vector<EpisodeStep> steps;

  /// Signed terminal error, final_state - goal_state.
  int error() const { return final_state - goal_state; }
};

/// Robot-view frames of the run's demonstration, annotated toward goal_index.
Policy demonstration_policy(const EmbedderParams& params, const RunSetup& run, int goal_index, int image_size);

/// Demonstration entry closest to a cup holding goal_particles: round((345 - P) / 23).
int pouring_goal_index(int goal_particles);
/// Demonstration policy whose goal entry is replaced by a robot-view image of a
/// cup holding exactly goal_particles.
Policy pouring_policy(const EmbedderParams& params, const RunSetup& run, int goal_particles, int image_size);

/// Cleaning loop from `start`: each step renders the robot view from a fresh
/// viewpoint, queries the policy and applies remove_one (advance) or add_one
/// (retreat) until hold or max_steps.
EpisodeTrace run_cleaning_episode(const EmbedderParams& params, const Policy& policy, const FloorScene& start,
                                  const EpisodeConfig& config);
/// Builds the task instance from config.world_seed and runs it.
EpisodeTrace run_cleaning_episode(const EmbedderParams& params, const EpisodeConfig& config);

/// Pouring loop from `start` seen through `view`: advance pours out, retreat
/// pours in, each moving 15 particles.
EpisodeTrace run_pouring_episode(const EmbedderParams& params, const Policy& policy, const CupScene& start,
                                 const ViewParams& view, const EpisodeConfig& config);
EpisodeTrace run_pouring_episode(const EmbedderParams& params, const EpisodeConfig& config);

EpisodeTrace run_episode(const EmbedderParams& params, const EpisodeConfig& config);

/// Per-step distance between the observation embedding and goal_embedding.
std::vector<double> distance_to_go(const EpisodeTrace& trace, const Embedding& goal_embedding);

/// Spearman rank correlation (average ranks for ties); 0 when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// One JSON object per step.
void write_trace_jsonl(const EpisodeTrace& trace, const std::filesystem::path& path);

}  // namespace taskprog
