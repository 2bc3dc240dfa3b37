#pragma once

#include <span>
#include <string>
#include <vector>

#include "taskprog/dataset.hpp"
#include "taskprog/rng.hpp"

namespace taskprog {

/// Anchor and positive share run and phase under different views; the negative
/// comes from the same run at a different phase, any view.
struct Triplet {
  FrameRef anchor;
  FrameRef positive;
  FrameRef negative;
  friend bool operator==(const Triplet&, const Triplet&) = default;
};

enum class NegativeKind { uniform_negative, adjacent_negative };

struct SamplingStrategy {
  NegativeKind kind = NegativeKind::uniform_negative;
  int adjacency_radius = 1;  // used by adjacent_negative, in [1, 15]

  void validate() const;
  std::string describe() const;
  friend bool operator==(const SamplingStrategy&, const SamplingStrategy&) = default;
};

/// "uniform" or "adjacent".
NegativeKind parse_negative_kind(const std::string& name);
std::string negative_kind_name(NegativeKind kind);

/// Candidate negative phases for an anchor phase under `strategy`.
std::vector<int> negative_phases(int anchor_phase, const SamplingStrategy& strategy);

Triplet sample_triplet(std::span<const int> run_ids, const SamplingStrategy& strategy, Rng& rng);
/// Draws from the corpus training split.
Triplet sample_triplet(const Corpus& corpus, const SamplingStrategy& strategy, Rng& rng);

/// Throws InvalidArgument describing the first broken triplet invariant.
void check_triplet(const Triplet& t);

struct Batch {
  std::vector<Triplet> triplets;
  std::vector<Tensor> images;  // anchor, positive, negative per triplet
};

/// batch_size independent training-split triplets with their images.
Batch make_batch(FrameStore& store, const SamplingStrategy& strategy, int batch_size, Rng& rng);

}  // namespace taskprog
