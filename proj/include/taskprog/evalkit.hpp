#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "taskprog/agent.hpp"
#include "taskprog/dataset.hpp"
#include "taskprog/trainer.hpp"

namespace taskprog {

/// Mean and sample standard deviation; error bars are mean +- 2 std.
struct Summary {
  std::size_t n = 0;
  double mean = 0;
  double std = 0;
  double min = 0;
  double max = 0;
};

Summary summarize(std::span<const double> values);
double median(std::vector<double> values);

namespace svg {

struct Series {
  std::string name;
  std::vector<double> x, y;
  std::vector<double> band;  // optional half-width drawn as a shaded envelope
};

struct Chart {
  std::string title, x_label, y_label;
};

std::string line_chart(const Chart& chart, const std::vector<Series>& series);
/// One marker per x with a vertical bar of +-half_width.
std::string error_bar_chart(const Chart& chart, const std::vector<double>& x, const std::vector<double>& mean,
                            const std::vector<double>& half_width);

}  // namespace svg

struct GenDataOptions {
  Task task = Task::floor;
  int runs = 100;
  int size = 64;
  std::uint64_t seed = 0;
  std::filesystem::path out = "corpus";

  void validate() const;
  nlohmann::json to_json() const;
  static GenDataOptions from_json(const nlohmann::json& j);
};

struct GenDataSummary {
  int runs = 0;
  std::size_t sequences = 0;
  std::uintmax_t bytes = 0;
  std::uint64_t digest = 0;
  std::filesystem::path root;
};

GenDataSummary run_gen_data(const GenDataOptions& options, unsigned workers);

struct TrainOptions {
  std::filesystem::path corpus;
  std::filesystem::path out = "train";
  TrainConfig config;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainOptions from_json(const nlohmann::json& j);
};

struct TrainSummary {
  TrainReport report;
  std::uint64_t best_digest = 0;
  std::uint64_t last_digest = 0;
  Task task = Task::floor;
};

/// Trains and writes checkpoints/, train_report.csv, loss_curve.svg and spec.json under options.out.
TrainSummary run_train(const TrainOptions& options, const EpochCallback& on_epoch = {});

struct TaskOptions {
  Task task = Task::floor;
  std::filesystem::path checkpoint;  // checkpoint directory or a training output directory
  std::filesystem::path out = "tasks";
  /// Floor: goal object counts (goal index 15 - n). Cup: goal particle counts.
  std::vector<int> goals;
  int episodes = 50;
  /// Starting objects or particles; nullopt starts each episode at a uniformly drawn phase.
  std::optional<int> initial;
  int max_steps = kDefaultMaxSteps;
  std::uint64_t seed = 0;
  int image_size = 0;  // 0: taken from the checkpoint

  void validate() const;
  nlohmann::json to_json() const;
  static TaskOptions from_json(const nlohmann::json& j);
  /// Floor 0..14 objects; cup 0, 20, 40, 60, 80% fullness.
  static std::vector<int> default_goals(Task task);
};

struct EpisodeRecord {
  int goal = 0;
  int episode = 0;
  int initial_state = 0;
  int final_state = 0;
  int error = 0;
  int steps = 0;
  EpisodeStatus status = EpisodeStatus::max_steps;
  double spearman = 0;  // step index vs distance-to-go
  std::uint64_t trace_digest = 0;
};

struct GoalAggregate {
  int goal = 0;
  Summary abs_error;
  Summary signed_error;
  double median_spearman = 0;
  std::vector<Summary> distance_by_step;
};

struct TaskSummary {
  std::vector<EpisodeRecord> episodes;
  std::vector<GoalAggregate> goals;
};

/// Seeds of one episode: derived from (seed, goal, episode) only.
EpisodeConfig episode_config(const TaskOptions& options, int goal, int episode, int image_size);

/// Runs every (goal, episode) pair on `workers` threads; writes traces/goal_<g>/episode_<e>.jsonl,
/// episodes.csv, aggregate.csv, distance_to_go.csv, error_bars.svg, distance_to_go.svg and spec.json.
TaskSummary run_tasks(const TaskOptions& options, unsigned workers);

/// Resolves a checkpoint directory: accepts the checkpoint itself or a training output
/// directory (uses checkpoints/best).
std::filesystem::path resolve_checkpoint(const std::filesystem::path& path);

struct ReportSummary {
  std::filesystem::path file;
  std::uint64_t digest = 0;
  int loss_curves = 0;
  int error_bar_figures = 0;
};

/// Scans `dir` for training and task outputs and writes report.html (tables and
/// inline SVG). Deterministic: regenerating yields identical bytes.
ReportSummary run_report(const std::filesystem::path& dir);

/// Re-runs the command recorded in a spec.json.
void replay(const std::filesystem::path& spec_file, unsigned workers);

}  // namespace taskprog
