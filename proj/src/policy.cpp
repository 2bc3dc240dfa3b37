#include "taskprog/policy.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/f32t.hpp"

namespace taskprog {

std::string_view action_name(Action action) {
  switch (action) {
    case Action::advance: return "advance";
    case Action::retreat: return "retreat";
    case Action::hold: return "hold";
  }
  return "hold";
}

Action parse_action(std::string_view name) {
  if (name == "advance") return Action::advance;
  if (name == "retreat") return Action::retreat;
  if (name == "hold") return Action::hold;
  throw InvalidArgument("unknown action '" + std::string(name) + "'");
}

Action action_for(std::size_t index, std::size_t goal_index) {
  if (index < goal_index) return Action::advance;
  if (index > goal_index) return Action::retreat;
  return Action::hold;
}

void Policy::validate() const {
  if (entries.empty()) throw InvalidArgument("policy has no entries");
  if (goal_index >= entries.size()) {
    throw InvalidArgument("goal index " + std::to_string(goal_index) + " outside a " + std::to_string(entries.size()) +
                          "-entry policy");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].action != action_for(i, goal_index)) {
      throw InvalidArgument("policy entry " + std::to_string(i) + " carries the wrong action");
    }
  }
}

Policy make_policy(std::vector<Tensor> images, std::vector<Embedding> embeddings, std::size_t goal_index) {
  if (embeddings.empty()) throw InvalidArgument("policy needs at least one frame");
  if (!images.empty() && images.size() != embeddings.size()) {
    throw InvalidArgument("policy images and embeddings differ in count");
  }
  if (goal_index >= embeddings.size()) {
    throw InvalidArgument("goal index " + std::to_string(goal_index) + " outside a " +
                          std::to_string(embeddings.size()) + "-frame sequence");
  }
  Policy policy;
  policy.goal_index = goal_index;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    PolicyEntry e;
    if (!images.empty()) e.image = std::move(images[i]);
    e.embedding = std::move(embeddings[i]);
    e.action = action_for(i, goal_index);
    policy.entries.push_back(std::move(e));
  }
  return policy;
}

Policy build_policy(const EmbedderParams& params, std::vector<Tensor> images, std::size_t goal_index) {
  if (images.empty()) throw InvalidArgument("policy needs at least one frame");
  if (goal_index >= images.size()) {
    throw InvalidArgument("goal index " + std::to_string(goal_index) + " outside a " + std::to_string(images.size()) +
                          "-frame sequence");
  }
  std::vector<Embedding> embeddings;
  embeddings.reserve(images.size());
  for (const auto& image : images) embeddings.push_back(embed(params, image));
  return make_policy(std::move(images), std::move(embeddings), goal_index);
}

Neighbor nearest_neighbor(const Policy& policy, const Embedding& query) {
  if (policy.entries.empty()) throw InvalidArgument("nearest neighbor on an empty policy");
  Neighbor best{0, squared_distance(query, policy.entries[0].embedding)};
  for (std::size_t i = 1; i < policy.entries.size(); ++i) {
    const double d = squared_distance(query, policy.entries[i].embedding);
    if (d < best.distance) best = {i, d};
  }
  best.distance = std::sqrt(best.distance);
  return best;
}

QueryResult query_action(const Policy& policy, const Embedding& embedding) {
  const Neighbor nn = nearest_neighbor(policy, embedding);
  return {policy.entries[nn.index].action, nn.index, nn.distance, embedding};
}

QueryResult query_action(const EmbedderParams& params, const Policy& policy, const Tensor& image) {
  return query_action(policy, embed(params, image));
}

void save_policy(const Policy& policy, const std::filesystem::path& dir) {
  policy.validate();
  using nlohmann::json;
  std::filesystem::create_directories(dir / "frames");
  const std::size_t n = policy.entries.size(), d = policy.entries[0].embedding.size();
  Tensor matrix({n, d});
  json actions = json::array(), digests = json::array(), frames = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = policy.entries[i];
    if (e.embedding.size() != d) throw InvalidArgument("policy embeddings differ in width");
    std::copy(e.embedding.values.begin(), e.embedding.values.end(), matrix.data() + i * d);
    actions.push_back(std::string(action_name(e.action)));
    digests.push_back(hex_digest(tensor_digest(Tensor({d}, e.embedding.values))));
    if (e.image.empty()) {
      frames.push_back(nullptr);
    } else {
      const std::string file = "frames/frame_" + std::to_string(i) + ".f32t";
      frames.push_back({{"file", file}, {"crc64", hex_digest(f32t::write(dir / file, e.image))}});
    }
  }
  const std::uint64_t matrix_crc = f32t::write(dir / "embeddings.f32t", matrix);
  const json manifest = {{"format", "taskprog-policy"},
                         {"version", 1},
                         {"goal_index", policy.goal_index},
                         {"actions", actions},
                         {"embedding_digests", digests},
                         {"embeddings", {{"file", "embeddings.f32t"}, {"crc64", hex_digest(matrix_crc)}}},
                         {"frames", frames}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

Policy load_policy(const std::filesystem::path& dir) {
  using nlohmann::json;
  std::ifstream in(dir / "manifest.json");
  if (!in) throw NotFound("policy manifest not found in " + dir.string());
  const json m = json::parse(in);
  const Tensor matrix = f32t::read(dir / m.at("embeddings").at("file").get<std::string>(),
                                   parse_hex_digest(m.at("embeddings").at("crc64").get<std::string>()));
  require_rank(matrix, 2, "policy embeddings");
  const std::size_t n = matrix.dim(0), d = matrix.dim(1);
  std::vector<Embedding> embeddings(n);
  std::vector<Tensor> images;
  for (std::size_t i = 0; i < n; ++i) {
    embeddings[i].values.assign(matrix.data() + i * d, matrix.data() + (i + 1) * d);
    if (hex_digest(tensor_digest(Tensor({d}, embeddings[i].values))) != m.at("embedding_digests").at(i)) {
      throw DigestMismatch("policy embedding " + std::to_string(i) + " digest mismatch in " + dir.string());
    }
  }
  const auto& frames = m.at("frames");
  if (!frames.empty() && !frames.at(0).is_null()) {
    for (const auto& f : frames) {
      images.push_back(f32t::read(dir / f.at("file").get<std::string>(), parse_hex_digest(f.at("crc64").get<std::string>())));
    }
  }
  Policy policy = make_policy(std::move(images), std::move(embeddings), m.at("goal_index").get<std::size_t>());
  const auto actions = m.at("actions").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < n; ++i) {
    if (parse_action(actions.at(i)) != policy.entries[i].action) {
      throw InvalidArgument("policy action table in " + dir.string() + " disagrees with its goal index");
    }
  }
  return policy;
}

}  // namespace taskprog
