#include "taskprog/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <nlohmann/json.hpp>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/f32t.hpp"
#include "taskprog/parallel.hpp"

namespace taskprog {
namespace {

using nlohmann::json;

json view_to_json(const ViewParams& v) {
  return {{"view_id", v.view_id},
          {"rotation", v.base.rotation},
          {"scale", v.base.scale},
          {"shear", v.base.shear},
          {"tx", v.base.tx},
          {"ty", v.base.ty},
          {"jitter_translation", v.jitter_translation},
          {"jitter_rotation", v.jitter_rotation},
          {"brightness", v.photometric.brightness},
          {"contrast", v.photometric.contrast}};
}

json manifest_body(const Corpus& c) {
  json runs = json::array();
  for (const auto& r : c.runs) {
    json views = json::array();
    for (int v = 0; v < kViewCount; ++v) {
      json frames = json::array();
      for (std::uint64_t crc : r.frame_crc[static_cast<std::size_t>(v)]) frames.push_back(hex_digest(crc));
      views.push_back({{"view_id", v}, {"frame_crc64", frames}});
    }
    runs.push_back({{"run_id", r.run_id},
                    {"seed", hex_digest(r.seed)},
                    {"split", r.validation ? "validation" : "train"},
                    {"ground_truth", r.ground_truth},
                    {"views", views}});
  }
  return {{"format", "taskprog-corpus"},
          {"version", 1},
          {"task", std::string(task_name(c.task))},
          {"image_size", c.image_size},
          {"seed", c.seed},
          {"n_runs", c.runs.size()},
          {"phases", kPhaseCount},
          {"views", kViewCount},
          {"split", {{"train", c.train_run_ids}, {"validation", c.val_run_ids}}},
          {"runs", runs}};
}

std::filesystem::path run_dir(const std::filesystem::path& root, int run_id) {
  return root / ("run_" + std::to_string(run_id));
}

}  // namespace

unsigned default_workers() {
  if (const char* env = std::getenv("TASKPROG_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

const RunManifest& Corpus::run(int run_id) const {
  const auto it = std::find_if(runs.begin(), runs.end(), [run_id](const RunManifest& r) { return r.run_id == run_id; });
  if (it == runs.end()) throw NotFound("run " + std::to_string(run_id) + " not in corpus " + root.string());
  return *it;
}

int validation_run_count(int n_runs) {
  return static_cast<int>(std::ceil(kValidationFraction * n_runs - 1e-9));
}

bool valid_image_size(int size) { return size == 48 || size == 64 || size == 96 || size == 300; }

std::uint64_t run_seed(std::uint64_t corpus_seed, int run_id) {
  return mix_seed(corpus_seed, static_cast<std::uint64_t>(run_id));
}

std::array<SequenceRecord, kViewCount> record_run(Task task, int run_id, std::uint64_t seed, int image_size) {
  const RunSetup setup = randomize_run(task, seed);
  std::array<SequenceRecord, kViewCount> out;
  std::vector<Scene> phases;
  std::vector<int> truth;
  for (int p = 0; p < kPhaseCount; ++p) {
    phases.push_back(phase_scene(setup.initial, p));
    truth.push_back(ground_truth_count(phases.back()));
  }
  for (int v = 0; v < kViewCount; ++v) {
    auto& rec = out[static_cast<std::size_t>(v)];
    rec.run_id = run_id;
    rec.view_id = v;
    rec.seed = seed;
    rec.ground_truth = truth;
    for (int p = 0; p < kPhaseCount; ++p) {
      rec.frames.push_back(render(phases[static_cast<std::size_t>(p)], setup.views[static_cast<std::size_t>(v)], p, image_size));
    }
  }
  return out;
}

std::filesystem::path frame_path(const Corpus& corpus, int run_id, int view_id, int phase) {
  return run_dir(corpus.root, run_id) / ("view_" + std::to_string(view_id)) / ("frame_" + std::to_string(phase) + ".f32t");
}

Corpus generate_corpus(Task task, int n_runs, int image_size, std::uint64_t seed, const std::filesystem::path& out_dir,
                       unsigned workers) {
  if (n_runs < 2) throw InvalidArgument("a corpus needs at least 2 runs, got " + std::to_string(n_runs));
  if (!valid_image_size(image_size)) {
    throw InvalidArgument("image size " + std::to_string(image_size) + " not one of 48, 64, 96, 300");
  }
  Corpus corpus;
  corpus.root = out_dir / std::string(task_name(task));
  corpus.task = task;
  corpus.image_size = image_size;
  corpus.seed = seed;
  corpus.runs.resize(static_cast<std::size_t>(n_runs));
  const int n_val = validation_run_count(n_runs);
  for (int r = 0; r < n_runs; ++r) (r < n_runs - n_val ? corpus.train_run_ids : corpus.val_run_ids).push_back(r);

  std::error_code ec;
  std::filesystem::create_directories(corpus.root, ec);
  if (ec) throw IoError("cannot create " + corpus.root.string() + ": " + ec.message());

  parallel_for(static_cast<std::size_t>(n_runs), workers, [&](std::size_t i) {
    const int run_id = static_cast<int>(i);
    RunManifest& m = corpus.runs[i];
    m.run_id = run_id;
    m.seed = run_seed(seed, run_id);
    m.validation = run_id >= n_runs - n_val;
    const auto records = record_run(task, run_id, m.seed, image_size);
    m.ground_truth = records[0].ground_truth;
    const RunSetup setup = randomize_run(task, m.seed);
    for (int v = 0; v < kViewCount; ++v) {
      const auto dir = run_dir(corpus.root, run_id) / ("view_" + std::to_string(v));
      std::filesystem::create_directories(dir);
      for (int p = 0; p < kPhaseCount; ++p) {
        m.frame_crc[static_cast<std::size_t>(v)][static_cast<std::size_t>(p)] =
            f32t::write(frame_path(corpus, run_id, v, p), records[static_cast<std::size_t>(v)].frames[static_cast<std::size_t>(p)]);
      }
    }
    json views = json::array();
    for (const auto& v : setup.views) views.push_back(view_to_json(v));
    const json meta = {{"run_id", run_id},
                       {"seed", hex_digest(m.seed)},
                       {"task", std::string(task_name(task))},
                       {"split", m.validation ? "validation" : "train"},
                       {"ground_truth", m.ground_truth},
                       {"views", views}};
    std::ofstream out(run_dir(corpus.root, run_id) / "run.json");
    if (!out) throw IoError("cannot write run metadata for run " + std::to_string(run_id));
    out << meta.dump(2) << '\n';
  });

  json body = manifest_body(corpus);
  corpus.digest = crc64(body.dump());
  body["digest"] = hex_digest(corpus.digest);
  std::ofstream out(corpus.root / "manifest.json");
  if (!out) throw IoError("cannot write " + (corpus.root / "manifest.json").string());
  out << body.dump(2) << '\n';
  return corpus;
}

Corpus open_corpus(const std::filesystem::path& path) {
  std::filesystem::path root = path;
  if (!std::filesystem::exists(root / "manifest.json")) {
    for (const char* task : {"floor", "cup"}) {
      if (std::filesystem::exists(path / task / "manifest.json")) {
        root = path / task;
        break;
      }
    }
  }
  std::ifstream in(root / "manifest.json");
  if (!in) throw NotFound("corpus manifest not found under " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError((root / "manifest.json").string() + ": " + e.what());
  }
  Corpus c;
  c.root = root;
  try {
    c.task = parse_task(j.at("task").get<std::string>());
    c.image_size = j.at("image_size").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.train_run_ids = j.at("split").at("train").get<std::vector<int>>();
    c.val_run_ids = j.at("split").at("validation").get<std::vector<int>>();
    for (const auto& r : j.at("runs")) {
      RunManifest m;
      m.run_id = r.at("run_id").get<int>();
      m.seed = parse_hex_digest(r.at("seed").get<std::string>());
      m.validation = r.at("split").get<std::string>() == "validation";
      m.ground_truth = r.at("ground_truth").get<std::vector<int>>();
      for (const auto& v : r.at("views")) {
        const auto view = v.at("view_id").get<std::size_t>();
        const auto frames = v.at("frame_crc64").get<std::vector<std::string>>();
        if (view >= kViewCount || frames.size() != kPhaseCount) throw IoError("malformed view entry");
        for (std::size_t p = 0; p < frames.size(); ++p) m.frame_crc[view][p] = parse_hex_digest(frames[p]);
      }
      c.runs.push_back(std::move(m));
    }
    const std::uint64_t stated = parse_hex_digest(j.at("digest").get<std::string>());
    c.digest = crc64(manifest_body(c).dump());
    if (c.digest != stated) {
      throw DigestMismatch("corpus manifest digest mismatch in " + (root / "manifest.json").string());
    }
  } catch (const json::exception& e) {
    throw IoError((root / "manifest.json").string() + ": " + e.what());
  }
  return c;
}

SequenceRecord load_sequence(const Corpus& corpus, int run_id, int view_id) {
  const RunManifest& m = corpus.run(run_id);
  if (view_id < 0 || view_id >= kViewCount) throw NotFound("view " + std::to_string(view_id) + " does not exist");
  SequenceRecord rec;
  rec.run_id = run_id;
  rec.view_id = view_id;
  rec.seed = m.seed;
  rec.ground_truth = m.ground_truth;
  for (int p = 0; p < kPhaseCount; ++p) {
    rec.frames.push_back(f32t::read(frame_path(corpus, run_id, view_id, p),
                                    m.frame_crc[static_cast<std::size_t>(view_id)][static_cast<std::size_t>(p)]));
  }
  return rec;
}

const Tensor& FrameStore::frame(const FrameRef& ref) {
  std::lock_guard lock(mutex_);
  if (auto it = frames_.find(ref); it != frames_.end()) return it->second;
  SequenceRecord rec = load_sequence(*corpus_, ref.run, ref.view);
  for (int p = 0; p < kPhaseCount; ++p) {
    frames_.emplace(FrameRef{ref.run, ref.view, p}, std::move(rec.frames[static_cast<std::size_t>(p)]));
  }
  return frames_.at(ref);
}

void FrameStore::preload(const std::vector<int>& run_ids) {
  for (int run : run_ids) {
    for (int v = 0; v < kViewCount; ++v) frame(FrameRef{run, v, 0});
  }
}

}  // namespace taskprog
