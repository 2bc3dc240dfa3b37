#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "taskprog/embedder.hpp"

namespace taskprog {

/// Move one frame right along the demonstration, one frame left, or stay.
enum class Action { advance, retreat, hold };

std::string_view action_name(Action action);
Action parse_action(std::string_view name);

/// advance before the goal frame, hold at it, retreat after it.
Action action_for(std::size_t index, std::size_t goal_index);

struct PolicyEntry {
  Tensor image;
  Embedding embedding;
  Action action = Action::hold;
};

/// A demonstration sequence annotated with per-frame actions toward a goal frame.
struct Policy {
  std::vector<PolicyEntry> entries;
  std::size_t goal_index = 0;

  std::size_t size() const { return entries.size(); }
  const Embedding& goal_embedding() const { return entries.at(goal_index).embedding; }
  /// Throws InvalidArgument if the action table or goal index is inconsistent.
  void validate() const;
};

/// Embeds every image and assigns actions relative to goal_index.
Policy build_policy(const EmbedderParams& params, std::vector<Tensor> images, std::size_t goal_index);
/// Policy from precomputed embeddings; images may be empty tensors.
Policy make_policy(std::vector<Tensor> images, std::vector<Embedding> embeddings, std::size_t goal_index);

struct Neighbor {
  std::size_t index = 0;
  double distance = 0;
};

/// Exhaustive Euclidean nearest neighbor; ties resolve to the lowest index.
Neighbor nearest_neighbor(const Policy& policy, const Embedding& query);

struct QueryResult {
  Action action = Action::hold;
  std::size_t index = 0;
  double distance = 0;
  Embedding embedding;  // of the queried image
};

QueryResult query_action(const EmbedderParams& params, const Policy& policy, const Tensor& image);
QueryResult query_action(const Policy& policy, const Embedding& embedding);

/// manifest.json (goal index, action table, embedding digests), embeddings.f32t [N, d]
/// and frames/frame_<i>.f32t.
void save_policy(const Policy& policy, const std::filesystem::path& dir);
Policy load_policy(const std::filesystem::path& dir);

}  // namespace taskprog
