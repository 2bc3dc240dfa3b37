#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <vector>

#include "taskprog/scene.hpp"
#include "taskprog/tensor.hpp"

namespace taskprog {

/// One camera's phase-indexed recording of a run.
struct SequenceRecord {
  int run_id = 0;
  int view_id = 0;
  std::vector<Tensor> frames;     // kPhaseCount images, [S,S,3]
  std::vector<int> ground_truth;  // objects in region / particles, strictly decreasing
  std::uint64_t seed = 0;
};

struct RunManifest {
  int run_id = 0;
  std::uint64_t seed = 0;
  bool validation = false;
  std::vector<int> ground_truth;
  std::array<std::array<std::uint64_t, kPhaseCount>, kViewCount> frame_crc{};
};

/// A generated corpus on disk: <root>/manifest.json and <root>/run_<id>/view_<v>/frame_<p>.f32t,
/// where root is <out_dir>/<task>.
struct Corpus {
  std::filesystem::path root;
  Task task = Task::floor;
  int image_size = 64;
  std::uint64_t seed = 0;
  std::vector<RunManifest> runs;
  std::vector<int> train_run_ids;
  std::vector<int> val_run_ids;
  std::uint64_t digest = 0;  // CRC-64 of the manifest body

  const RunManifest& run(int run_id) const;
  std::size_t sequence_count() const { return runs.size() * kViewCount; }
};

inline constexpr double kValidationFraction = 0.1;

/// Validation runs: ceil(10%) of the runs, taken from the highest run ids.
int validation_run_count(int n_runs);
bool valid_image_size(int size);

/// Seed of run `run_id` within a corpus seeded with `corpus_seed`.
std::uint64_t run_seed(std::uint64_t corpus_seed, int run_id);

/// Renders the four phase sequences of one run in memory.
std::array<SequenceRecord, kViewCount> record_run(Task task, int run_id, std::uint64_t seed, int image_size);

/// Generates n_runs randomized runs (n_runs >= 2) and writes them under out_dir/<task>.
/// Runs are rendered on up to `workers` threads; the output does not depend on the worker count.
Corpus generate_corpus(Task task, int n_runs, int image_size, std::uint64_t seed,
                       const std::filesystem::path& out_dir, unsigned workers = 1);

/// Opens a corpus from its root (the directory holding manifest.json) or from
/// its parent when `task` subdirectory holds it.
Corpus open_corpus(const std::filesystem::path& path);

/// Reads one sequence, verifying every frame digest.
SequenceRecord load_sequence(const Corpus& corpus, int run_id, int view_id);

std::filesystem::path frame_path(const Corpus& corpus, int run_id, int view_id, int phase);

struct FrameRef {
  int run = 0;
  int view = 0;
  int phase = 0;
  friend auto operator<=>(const FrameRef&, const FrameRef&) = default;
};

/// Read-through cache of corpus frames. Thread-safe.
class FrameStore {
 public:
  explicit FrameStore(const Corpus& corpus) : corpus_(&corpus) {}

  const Corpus& corpus() const { return *corpus_; }
  const Tensor& frame(const FrameRef& ref);
  /// Loads every frame of the given runs up front.
  void preload(const std::vector<int>& run_ids);

 private:
  const Corpus* corpus_;
  std::mutex mutex_;
  std::map<FrameRef, Tensor> frames_;
};

}  // namespace taskprog
