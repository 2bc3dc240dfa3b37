#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/evalkit.hpp"
#include "taskprog/parallel.hpp"
#include "taskprog/policy.hpp"
#include "taskprog/trainer.hpp"

namespace py = pybind11;
using namespace taskprog;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

FloatArray to_numpy(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  FloatArray out(shape);
  std::copy(t.values().begin(), t.values().end(), out.mutable_data());
  return out;
}

Tensor from_numpy(const FloatArray& a) {
  Shape shape(a.shape(), a.shape() + a.ndim());
  return Tensor(shape, std::vector<float>(a.data(), a.data() + a.size()));
}

Embedding to_embedding(const FloatArray& a) {
  if (a.ndim() != 1) throw InvalidArgument("embedding must be one-dimensional");
  return Embedding{std::vector<float>(a.data(), a.data() + a.size())};
}

FloatArray embedding_array(const Embedding& e) {
  FloatArray out(static_cast<py::ssize_t>(e.values.size()));
  std::copy(e.values.begin(), e.values.end(), out.mutable_data());
  return out;
}

py::dict epoch_dict(const EpochRow& r) {
  py::dict d;
  d["epoch"] = r.epoch;
  d["train_loss"] = r.train_loss;
  d["val_loss"] = r.val_loss;
  d["val_accuracy"] = r.val_accuracy;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Task progress embeddings: scenes, embedder, training and episodes";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NotFound>(m, "NotFound", PyExc_FileNotFoundError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<DigestMismatch>(m, "DigestMismatch", PyExc_ValueError);
  py::register_exception<ActionError>(m, "ActionError", PyExc_RuntimeError);
  py::register_exception<TrainingDiverged>(m, "TrainingDiverged", PyExc_ArithmeticError);

  m.attr("PHASE_COUNT") = kPhaseCount;
  m.attr("VIEW_COUNT") = kViewCount;
  m.attr("FULL_CUP") = kFullCup;

  m.def("crc64", [](py::bytes data) { return crc64(std::string_view(data)); }, py::arg("data"));
  m.def("hex_digest", &hex_digest, py::arg("value"));
  m.def("particles_at_phase", &particles_at_phase, py::arg("phase"));

  m.def(
      "render_phase",
      [](const std::string& task, std::uint64_t seed, int view, int phase, int size) {
        const RunSetup run = randomize_run(parse_task(task), seed);
        if (view < 0 || view >= kViewCount) throw InvalidArgument("view must be in 0..3");
        return to_numpy(render(phase_scene(run.initial, phase), run.views[static_cast<std::size_t>(view)], phase, size));
      },
      py::arg("task"), py::arg("seed"), py::arg("view"), py::arg("phase"), py::arg("size") = 64,
      "Frame of a randomized demonstration as an [S, S, 3] float32 array in [0, 1].");

  py::class_<EmbedderParams>(m, "Embedder")
      .def_static(
          "init",
          [](std::uint64_t seed, std::size_t input_size) {
            EmbedderConfig c;
            c.input_size = input_size;
            return init_params(c, seed);
          },
          py::arg("seed"), py::arg("input_size") = 64)
      .def_static("load", &load_checkpoint, py::arg("path"))
      .def("save", [](const EmbedderParams& p, const std::filesystem::path& dir) { save_checkpoint(p, dir); },
           py::arg("path"))
      .def_property_readonly("input_size", [](const EmbedderParams& p) { return p.config.input_size; })
      .def_property_readonly("embed_dim", [](const EmbedderParams& p) { return p.config.embed_dim; })
      .def_property_readonly("digest", &EmbedderParams::digest)
      .def(
          "embed",
          [](const EmbedderParams& p, const FloatArray& image) {
            const Tensor t = from_numpy(image);
            Embedding e;
            {
              py::gil_scoped_release release;
              e = embed(p, t);
            }
            return embedding_array(e);
          },
          py::arg("image"), "Unit-norm embedding of an [S, S, 3] image.");

  m.def(
      "triplet_loss",
      [](const FloatArray& a, const FloatArray& p, const FloatArray& n, double margin) {
        const auto r = triplet_loss(to_embedding(a), to_embedding(p), to_embedding(n), margin);
        return py::make_tuple(r.loss, to_numpy(r.grad_anchor), to_numpy(r.grad_positive), to_numpy(r.grad_negative));
      },
      py::arg("anchor"), py::arg("positive"), py::arg("negative"), py::arg("margin") = kDefaultMargin);

  m.def(
      "sample_triplets",
      [](const std::vector<int>& run_ids, const std::string& strategy, int radius, int count, std::uint64_t seed) {
        const SamplingStrategy s{parse_negative_kind(strategy), radius};
        s.validate();
        Rng rng(seed);
        py::list out;
        for (int i = 0; i < count; ++i) {
          const Triplet t = sample_triplet(run_ids, s, rng);
          auto ref = [](const FrameRef& f) { return py::make_tuple(f.run, f.view, f.phase); };
          out.append(py::make_tuple(ref(t.anchor), ref(t.positive), ref(t.negative)));
        }
        return out;
      },
      py::arg("run_ids"), py::arg("strategy") = "uniform", py::arg("radius") = 1, py::arg("count") = 1,
      py::arg("seed") = 0, "Triplets as ((run, view, phase) anchor, positive, negative).");

  m.def(
      "nearest_neighbor",
      [](const FloatArray& embeddings, const FloatArray& query) {
        if (embeddings.ndim() != 2) throw InvalidArgument("embeddings must be [N, d]");
        std::vector<Embedding> rows;
        const auto n = embeddings.shape(0), d = embeddings.shape(1);
        for (py::ssize_t i = 0; i < n; ++i) {
          rows.push_back(Embedding{std::vector<float>(embeddings.data() + i * d, embeddings.data() + (i + 1) * d)});
        }
        const Neighbor nn = nearest_neighbor(make_policy({}, rows, 0), to_embedding(query));
        return py::make_tuple(nn.index, nn.distance);
      },
      py::arg("embeddings"), py::arg("query"), "Index and distance of the closest row; lowest index wins ties.");

  m.def(
      "gen_data",
      [](const std::string& task, int runs, int size, std::uint64_t seed, const std::filesystem::path& out) {
        GenDataOptions o;
        o.task = parse_task(task);
        o.runs = runs;
        o.size = size;
        o.seed = seed;
        o.out = out;
        py::gil_scoped_release release;
        const GenDataSummary s = run_gen_data(o, default_workers());
        py::gil_scoped_acquire acquire;
        py::dict d;
        d["runs"] = s.runs;
        d["sequences"] = s.sequences;
        d["bytes"] = s.bytes;
        d["digest"] = hex_digest(s.digest);
        d["root"] = s.root;
        return d;
      },
      py::arg("task") = "floor", py::arg("runs") = 100, py::arg("size") = 64, py::arg("seed") = 0,
      py::arg("out") = "corpus");

  m.def(
      "train",
      [](const std::filesystem::path& corpus, const std::filesystem::path& out, int epochs, int steps, int batch,
         double lr, double final_lr, double margin, const std::string& strategy, int radius, std::uint64_t seed,
         int validation_triplets) {
        TrainOptions o;
        o.corpus = corpus;
        o.out = out;
        o.config.epochs = epochs;
        o.config.steps_per_epoch = steps;
        o.config.batch_size = batch;
        o.config.adam.learning_rate = lr;
        o.config.final_learning_rate = final_lr;
        o.config.margin = margin;
        o.config.strategy = {parse_negative_kind(strategy), radius};
        o.config.seed = seed;
        o.config.validation_triplets = validation_triplets;
        py::gil_scoped_release release;
        const TrainSummary s = run_train(o);
        py::gil_scoped_acquire acquire;
        py::list rows;
        for (const auto& r : s.report.rows) rows.append(epoch_dict(r));
        py::dict d;
        d["epochs"] = rows;
        d["best_epoch"] = s.report.best_epoch;
        d["best_digest"] = hex_digest(s.best_digest);
        d["last_digest"] = hex_digest(s.last_digest);
        return d;
      },
      py::arg("corpus"), py::arg("out") = "train", py::arg("epochs") = 30, py::arg("steps") = 20, py::arg("batch") = 16,
      py::arg("lr") = 1e-3, py::arg("final_lr") = 1e-4, py::arg("margin") = kDefaultMargin, py::arg("strategy") = "uniform", py::arg("radius") = 1,
      py::arg("seed") = 0, py::arg("validation_triplets") = 1000);

  m.def(
      "run_task",
      [](const std::string& task, const std::filesystem::path& checkpoint, std::vector<int> goals, int episodes,
         std::optional<int> initial, int max_steps, std::uint64_t seed, const std::filesystem::path& out) {
        TaskOptions o;
        o.task = parse_task(task);
        o.checkpoint = checkpoint;
        o.goals = goals.empty() ? TaskOptions::default_goals(o.task) : goals;
        o.episodes = episodes;
        o.initial = initial;
        o.max_steps = max_steps;
        o.seed = seed;
        o.out = out;
        py::gil_scoped_release release;
        const TaskSummary s = run_tasks(o, default_workers());
        py::gil_scoped_acquire acquire;
        py::list rows;
        for (const auto& g : s.goals) {
          py::dict d;
          d["goal"] = g.goal;
          d["episodes"] = g.abs_error.n;
          d["mean_abs_error"] = g.abs_error.mean;
          d["mean_error"] = g.signed_error.mean;
          d["std_error"] = g.signed_error.std;
          d["median_spearman"] = g.median_spearman;
          rows.append(d);
        }
        return rows;
      },
      py::arg("task"), py::arg("checkpoint"), py::arg("goals") = std::vector<int>{}, py::arg("episodes") = 50,
      py::arg("initial") = py::none(), py::arg("max_steps") = 40, py::arg("seed") = 0, py::arg("out") = "tasks",
      "Per-goal aggregates; initial=None starts each episode at a random phase.");

  m.def(
      "report",
      [](const std::filesystem::path& dir) {
        const ReportSummary s = run_report(dir);
        py::dict d;
        d["file"] = s.file;
        d["digest"] = hex_digest(s.digest);
        d["loss_curves"] = s.loss_curves;
        d["error_bar_figures"] = s.error_bar_figures;
        return d;
      },
      py::arg("dir"));
}
