#include "taskprog/sampler.hpp"

#include "taskprog/errors.hpp"

namespace taskprog {

void SamplingStrategy::validate() const {
  if (kind == NegativeKind::adjacent_negative && (adjacency_radius < 1 || adjacency_radius > kLastPhase)) {
    throw InvalidArgument("adjacency radius must lie in [1, 15], got " + std::to_string(adjacency_radius));
  }
}

std::string SamplingStrategy::describe() const {
  if (kind == NegativeKind::uniform_negative) return "uniform_negative";
  return "adjacent_negative(radius=" + std::to_string(adjacency_radius) + ")";
}

NegativeKind parse_negative_kind(const std::string& name) {
  if (name == "uniform" || name == "uniform_negative") return NegativeKind::uniform_negative;
  if (name == "adjacent" || name == "adjacent_negative") return NegativeKind::adjacent_negative;
  throw InvalidArgument("unknown sampling strategy '" + name + "' (expected uniform or adjacent)");
}

std::string negative_kind_name(NegativeKind kind) {
  return kind == NegativeKind::uniform_negative ? "uniform" : "adjacent";
}

std::vector<int> negative_phases(int anchor_phase, const SamplingStrategy& strategy) {
  std::vector<int> out;
  if (strategy.kind == NegativeKind::uniform_negative) {
    for (int p = 0; p < kPhaseCount; ++p) {
      if (p != anchor_phase) out.push_back(p);
    }
    return out;
  }
  for (int r = strategy.adjacency_radius; r >= 1; --r) {
    if (anchor_phase - r >= 0) out.push_back(anchor_phase - r);
  }
  for (int r = 1; r <= strategy.adjacency_radius; ++r) {
    if (anchor_phase + r <= kLastPhase) out.push_back(anchor_phase + r);
  }
  return out;
}

Triplet sample_triplet(std::span<const int> run_ids, const SamplingStrategy& strategy, Rng& rng) {
  if (run_ids.empty()) throw InvalidArgument("cannot sample triplets from an empty corpus split");
  strategy.validate();
  Triplet t;
  const int run = run_ids[rng.index(run_ids.size())];
  const int phase = static_cast<int>(rng.index(kPhaseCount));
  const int anchor_view = static_cast<int>(rng.index(kViewCount));
  int positive_view = static_cast<int>(rng.index(kViewCount - 1));
  if (positive_view >= anchor_view) ++positive_view;
  const auto candidates = negative_phases(phase, strategy);
  const int negative_phase = candidates[rng.index(candidates.size())];
  const int negative_view = static_cast<int>(rng.index(kViewCount));
  t.anchor = {run, anchor_view, phase};
  t.positive = {run, positive_view, phase};
  t.negative = {run, negative_view, negative_phase};
  return t;
}

Triplet sample_triplet(const Corpus& corpus, const SamplingStrategy& strategy, Rng& rng) {
  return sample_triplet(std::span<const int>(corpus.train_run_ids), strategy, rng);
}

void check_triplet(const Triplet& t) {
  if (t.anchor.run != t.positive.run || t.anchor.run != t.negative.run) {
    throw InvalidArgument("triplet mixes runs");
  }
  if (t.anchor.phase != t.positive.phase) throw InvalidArgument("positive phase differs from anchor phase");
  if (t.anchor.view == t.positive.view) throw InvalidArgument("positive shares the anchor's view");
  if (t.negative.phase == t.anchor.phase) throw InvalidArgument("negative shares the anchor's phase");
}

Batch make_batch(FrameStore& store, const SamplingStrategy& strategy, int batch_size, Rng& rng) {
  if (batch_size < 1) throw InvalidArgument("batch size must be at least 1");
  Batch batch;
  batch.triplets.reserve(static_cast<std::size_t>(batch_size));
  batch.images.reserve(3 * static_cast<std::size_t>(batch_size));
  for (int i = 0; i < batch_size; ++i) {
    const Triplet t = sample_triplet(store.corpus(), strategy, rng);
    batch.triplets.push_back(t);
    batch.images.push_back(store.frame(t.anchor));
    batch.images.push_back(store.frame(t.positive));
    batch.images.push_back(store.frame(t.negative));
  }
  return batch;
}

}  // namespace taskprog
