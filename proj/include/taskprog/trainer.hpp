#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "taskprog/embedder.hpp"
#include "taskprog/sampler.hpp"

namespace taskprog {

inline constexpr double kDefaultMargin = 0.2;

struct TripletLossResult {
  double loss = 0;
  bool active = false;  // hinge engaged
  Tensor grad_anchor, grad_positive, grad_negative;
};

/// max(0, |a-p|^2 - |a-n|^2 + margin) and its gradients with respect to each embedding.
/// All gradients are exactly zero when the hinge is inactive.
TripletLossResult triplet_loss(const Embedding& anchor, const Embedding& positive, const Embedding& negative,
                               double margin);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const EmbedderParams& like, AdamConfig config);
  void step(EmbedderParams& params, const EmbedderGrads& grads);
  long long steps() const { return step_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

 private:
  AdamConfig config_;
  EmbedderParams first_;
  EmbedderParams second_;
  long long step_ = 0;
};

struct TrainConfig {
  double margin = kDefaultMargin;
  int batch_size = 16;
  int steps_per_epoch = 20;
  int epochs = 30;
  AdamConfig adam;
  /// Learning rate decays geometrically per epoch from adam.learning_rate to this value.
  double final_learning_rate = 1e-4;
  SamplingStrategy strategy;
  std::uint64_t seed = 0;
  int validation_triplets = 1000;
  EmbedderConfig embedder;  // input_size is taken from the corpus

  void validate() const;
  double learning_rate_at(int epoch) const;
};

struct EpochRow {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_accuracy = 0;
  double seconds = 0;
  std::uint64_t params_digest = 0;
};

struct TrainReport {
  SamplingStrategy strategy;
  double margin = kDefaultMargin;
  std::uint64_t seed = 0;
  std::vector<EpochRow> rows;
  int best_epoch = 0;  // lowest validation loss

  /// CSV: '#' header lines (strategy, margin, seed), then epoch,train_loss,val_loss,val_acc,seconds.
  void write_csv(const std::filesystem::path& path) const;
  static TrainReport read_csv(const std::filesystem::path& path);
};

struct TrainResult {
  EmbedderParams best;
  EmbedderParams last;
  TrainReport report;
};

using EpochCallback = std::function<void(const EpochRow&)>;

/// Minimizes the mean triplet loss over sampled batches with Adam. When
/// `out_dir` is non-empty, writes checkpoints/epoch_<e>/, checkpoints/best/ and
/// train_report.csv there. Deterministic given config.seed.
TrainResult train(FrameStore& store, const TrainConfig& config, const std::filesystem::path& out_dir = {},
                  const EpochCallback& on_epoch = {});

struct ValidationResult {
  double mean_loss = 0;
  double accuracy = 0;  // fraction with |a-p| < |a-n| (strict)
  std::size_t triplets = 0;
};

/// Fixed uniform-negative triplets over the validation split.
std::vector<Triplet> validation_triplets(const Corpus& corpus, int n_triplets, std::uint64_t seed);

ValidationResult validate(const EmbedderParams& params, FrameStore& store, std::span<const Triplet> triplets,
                          double margin);
/// Samples n_triplets uniform-negative validation triplets with `rng`.
ValidationResult validate(const EmbedderParams& params, FrameStore& store, int n_triplets, Rng& rng, double margin);

/// Scores triplets against any embedding source.
ValidationResult score_triplets(const std::function<Embedding(const FrameRef&)>& embed_frame,
                                std::span<const Triplet> triplets, double margin);

}  // namespace taskprog
