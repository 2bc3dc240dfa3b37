#include "taskprog/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"

namespace taskprog {
namespace {

constexpr std::uint64_t kSamplerStream = 1;
constexpr std::uint64_t kValidationStream = 2;
constexpr std::uint64_t kInitStream = 3;

Tensor scaled_difference(const Embedding& x, const Embedding& y, float scale) {
  Tensor out({x.size()});
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * (x.values[i] - y.values[i]);
  return out;
}

std::string format_ref(const FrameRef& r) {
  return "(run " + std::to_string(r.run) + ", view " + std::to_string(r.view) + ", phase " + std::to_string(r.phase) + ")";
}

void scale_into(Tensor& t, float s) {
  for (float& v : t.values()) v *= s;
}

}  // namespace

TripletLossResult triplet_loss(const Embedding& anchor, const Embedding& positive, const Embedding& negative,
                               double margin) {
  if (anchor.size() != positive.size() || anchor.size() != negative.size()) {
    throw InvalidArgument("triplet embeddings differ in width");
  }
  const std::size_t d = anchor.size();
  TripletLossResult r;
  const double raw = squared_distance(anchor, positive) - squared_distance(anchor, negative) + margin;
  r.active = raw > 0.0;
  r.loss = r.active ? raw : 0.0;
  if (!r.active) {
    r.grad_anchor = Tensor({d});
    r.grad_positive = Tensor({d});
    r.grad_negative = Tensor({d});
    return r;
  }
  r.grad_anchor = scaled_difference(negative, positive, 2.0f);   // 2(n - p)
  r.grad_positive = scaled_difference(positive, anchor, 2.0f);   // -2(a - p)
  r.grad_negative = scaled_difference(anchor, negative, 2.0f);   // 2(a - n)
  return r;
}

Adam::Adam(const EmbedderParams& like, AdamConfig config)
    : config_(config), first_(EmbedderParams::zeros(like.config)), second_(EmbedderParams::zeros(like.config)) {
  if (!(config.learning_rate > 0)) throw InvalidArgument("learning rate must be positive");
}

void Adam::step(EmbedderParams& params, const EmbedderGrads& grads) {
  ++step_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  const auto b1 = static_cast<float>(config_.beta1), b2 = static_cast<float>(config_.beta2);
  const auto lr = static_cast<float>(config_.learning_rate / c1);
  const auto inv_c2 = static_cast<float>(1.0 / c2);
  const auto eps = static_cast<float>(config_.epsilon);
  auto p = params.named();
  const auto g = grads.named();
  auto m = first_.named();
  auto v = second_.named();
  for (std::size_t k = 0; k < p.size(); ++k) {
    float* w = p[k].second->data();
    const float* gk = g[k].second->data();
    float* mk = m[k].second->data();
    float* vk = v[k].second->data();
    for (std::size_t i = 0; i < p[k].second->size(); ++i) {
      mk[i] = b1 * mk[i] + (1 - b1) * gk[i];
      vk[i] = b2 * vk[i] + (1 - b2) * gk[i] * gk[i];
      w[i] -= lr * mk[i] / (std::sqrt(vk[i] * inv_c2) + eps);
    }
  }
}

void TrainConfig::validate() const {
  if (!(margin > 0)) throw InvalidArgument("margin must be positive");
  if (!(adam.learning_rate > 0)) throw InvalidArgument("learning rate must be positive");
  if (!(final_learning_rate > 0)) throw InvalidArgument("final learning rate must be positive");
  if (batch_size < 1 || steps_per_epoch < 1 || epochs < 1) {
    throw InvalidArgument("batch size, steps per epoch and epochs must be positive");
  }
  if (validation_triplets < 1) throw InvalidArgument("validation needs at least one triplet");
  strategy.validate();
}

double TrainConfig::learning_rate_at(int epoch) const {
  if (epochs <= 1) return adam.learning_rate;
  const double t = static_cast<double>(epoch - 1) / static_cast<double>(epochs - 1);
  return adam.learning_rate * std::pow(final_learning_rate / adam.learning_rate, t);
}

void TrainReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "# strategy=" << strategy.describe() << '\n';
  out << "# margin=" << margin << '\n';
  out << "# seed=" << seed << '\n';
  out << "# best_epoch=" << best_epoch << '\n';
  out << "epoch,train_loss,val_loss,val_acc,seconds\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g,%.3f\n", r.epoch, r.train_loss, r.val_loss, r.val_accuracy,
                  r.seconds);
    out << line;
  }
}

TrainReport TrainReport::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("train report not found: " + path.string());
  TrainReport report;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), value = line.substr(eq + 1);
      if (key == "margin") report.margin = std::stod(value);
      if (key == "seed") report.seed = std::stoull(value);
      if (key == "best_epoch") report.best_epoch = std::stoi(value);
      if (key == "strategy" && value.rfind("adjacent", 0) == 0) {
        report.strategy.kind = NegativeKind::adjacent_negative;
        const auto r = value.find("radius=");
        if (r != std::string::npos) report.strategy.adjacency_radius = std::stoi(value.substr(r + 7));
      }
      continue;
    }
    if (line.rfind("epoch", 0) == 0) continue;
    std::istringstream fields(line);
    EpochRow row;
    char comma;
    fields >> row.epoch >> comma >> row.train_loss >> comma >> row.val_loss >> comma >> row.val_accuracy >> comma >>
        row.seconds;
    if (!fields) throw IoError("malformed row in " + path.string() + ": " + line);
    report.rows.push_back(row);
  }
  return report;
}

std::vector<Triplet> validation_triplets(const Corpus& corpus, int n_triplets, std::uint64_t seed) {
  if (n_triplets < 1) throw InvalidArgument("validation needs at least one triplet");
  Rng rng(seed);
  std::vector<Triplet> out;
  out.reserve(static_cast<std::size_t>(n_triplets));
  for (int i = 0; i < n_triplets; ++i) out.push_back(sample_triplet(std::span<const int>(corpus.val_run_ids), {}, rng));
  return out;
}

ValidationResult score_triplets(const std::function<Embedding(const FrameRef&)>& embed_frame,
                                std::span<const Triplet> triplets, double margin) {
  if (triplets.empty()) throw InvalidArgument("validation needs at least one triplet");
  std::map<FrameRef, Embedding> cache;
  auto get = [&](const FrameRef& ref) -> const Embedding& {
    auto it = cache.find(ref);
    if (it == cache.end()) it = cache.emplace(ref, embed_frame(ref)).first;
    return it->second;
  };
  ValidationResult r;
  std::size_t correct = 0;
  double total = 0;
  for (const auto& t : triplets) {
    const Embedding& a = get(t.anchor);
    const Embedding& p = get(t.positive);
    const Embedding& n = get(t.negative);
    const double dp = squared_distance(a, p), dn = squared_distance(a, n);
    total += std::max(0.0, dp - dn + margin);
    if (dp < dn) ++correct;
  }
  r.triplets = triplets.size();
  r.mean_loss = total / static_cast<double>(triplets.size());
  r.accuracy = static_cast<double>(correct) / static_cast<double>(triplets.size());
  return r;
}

ValidationResult validate(const EmbedderParams& params, FrameStore& store, std::span<const Triplet> triplets,
                          double margin) {
  return score_triplets([&](const FrameRef& ref) { return embed(params, store.frame(ref)); }, triplets, margin);
}

ValidationResult validate(const EmbedderParams& params, FrameStore& store, int n_triplets, Rng& rng, double margin) {
  if (n_triplets < 1) throw InvalidArgument("validation needs at least one triplet");
  std::vector<Triplet> triplets;
  for (int i = 0; i < n_triplets; ++i) {
    triplets.push_back(sample_triplet(std::span<const int>(store.corpus().val_run_ids), {}, rng));
  }
  return validate(params, store, triplets, margin);
}

TrainResult train(FrameStore& store, const TrainConfig& config, const std::filesystem::path& out_dir,
                  const EpochCallback& on_epoch) {
  config.validate();
  const Corpus& corpus = store.corpus();
  if (corpus.train_run_ids.empty() || corpus.val_run_ids.empty()) {
    throw InvalidArgument("training needs non-empty train and validation splits");
  }
  EmbedderConfig net = config.embedder;
  net.input_size = static_cast<std::size_t>(corpus.image_size);

  TrainResult result;
  EmbedderParams params = init_params(net, mix_seed(config.seed, kInitStream));
  Adam adam(params, config.adam);
  Rng sampler(mix_seed(config.seed, kSamplerStream));
  const auto val_set = validation_triplets(corpus, config.validation_triplets, mix_seed(config.seed, kValidationStream));
  result.report.strategy = config.strategy;
  result.report.margin = config.margin;
  result.report.seed = config.seed;

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir / "checkpoints");
  const auto started = std::chrono::steady_clock::now();
  double best_loss = INFINITY;
  const float inv_batch = 1.0f / static_cast<float>(config.batch_size);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    adam.set_learning_rate(config.learning_rate_at(epoch));
    double epoch_loss = 0;
    for (int step = 0; step < config.steps_per_epoch; ++step) {
      const Batch batch = make_batch(store, config.strategy, config.batch_size, sampler);
      EmbedderGrads grads = EmbedderParams::zeros(net);
      double batch_loss = 0;
      for (std::size_t i = 0; i < batch.triplets.size(); ++i) {
        const ForwardTrace a = embed_traced(params, batch.images[3 * i]);
        const ForwardTrace p = embed_traced(params, batch.images[3 * i + 1]);
        const ForwardTrace n = embed_traced(params, batch.images[3 * i + 2]);
        TripletLossResult loss = triplet_loss(a.output, p.output, n.output, config.margin);
        if (!std::isfinite(loss.loss)) {
          const auto& t = batch.triplets[i];
          throw TrainingDiverged("non-finite triplet loss at epoch " + std::to_string(epoch) + " step " +
                                 std::to_string(step) + " for anchor " + format_ref(t.anchor) + ", positive " +
                                 format_ref(t.positive) + ", negative " + format_ref(t.negative) +
                                 "; params digest " + hex_digest(params.digest()));
        }
        batch_loss += loss.loss;
        if (!loss.active) continue;
        scale_into(loss.grad_anchor, inv_batch);
        scale_into(loss.grad_positive, inv_batch);
        scale_into(loss.grad_negative, inv_batch);
        accumulate_backward(params, a, loss.grad_anchor, grads);
        accumulate_backward(params, p, loss.grad_positive, grads);
        accumulate_backward(params, n, loss.grad_negative, grads);
      }
      adam.step(params, grads);
      if (!params.all_finite()) {
        throw TrainingDiverged("non-finite parameters after epoch " + std::to_string(epoch) + " step " +
                               std::to_string(step) + "; params digest " + hex_digest(params.digest()));
      }
      epoch_loss += batch_loss / config.batch_size;
    }
    const ValidationResult val = validate(params, store, val_set, config.margin);
    EpochRow row;
    row.epoch = epoch;
    row.train_loss = epoch_loss / config.steps_per_epoch;
    row.val_loss = val.mean_loss;
    row.val_accuracy = val.accuracy;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    row.params_digest = params.digest();
    result.report.rows.push_back(row);
    if (val.mean_loss < best_loss) {
      best_loss = val.mean_loss;
      result.report.best_epoch = epoch;
      result.best = params;
      if (!out_dir.empty()) save_checkpoint(params, out_dir / "checkpoints" / "best");
    }
    if (!out_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03d", epoch);
      save_checkpoint(params, out_dir / "checkpoints" / name);
      result.report.write_csv(out_dir / "train_report.csv");
    }
    if (on_epoch) on_epoch(row);
  }
  result.last = std::move(params);
  return result;
}

}  // namespace taskprog
