#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/evalkit.hpp"
#include "taskprog/parallel.hpp"

using namespace taskprog;
using nlohmann::json;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open config " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
}

// Flags given on the command line override values from --config.
void merge(json& base, const json& flags) {
  for (const auto& [k, v] : flags.items()) base[k] = v;
}

Task task_option(const std::string& name) {
  try {
    return parse_task(name);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task progress embeddings: data generation, training, episodes and reports"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with option values")->check(CLI::ExistingFile);

  auto* gen = app.add_subcommand("gen-data", "Render a randomized demonstration corpus");
  std::string g_task = "floor", g_out = "corpus";
  int g_runs = 100, g_size = 64;
  std::uint64_t g_seed = 0;
  gen->add_option("--task", g_task, "floor or cup");
  gen->add_option("--runs", g_runs, "Number of randomized runs");
  gen->add_option("--size", g_size, "Image side length (48, 64, 96 or 300)");
  gen->add_option("--seed", g_seed, "Corpus seed");
  gen->add_option("--out", g_out, "Output directory");

  auto* tr = app.add_subcommand("train", "Train the embedding network with the triplet loss");
  TrainOptions t_opts;
  std::string t_corpus, t_out = "train", t_strategy = "uniform";
  tr->add_option("--corpus", t_corpus, "Corpus directory")->required();
  tr->add_option("--out", t_out, "Output directory");
  tr->add_option("--epochs", t_opts.config.epochs, "Epochs");
  tr->add_option("--margin", t_opts.config.margin, "Triplet margin");
  tr->add_option("--strategy", t_strategy, "uniform or adjacent negatives");
  tr->add_option("--radius", t_opts.config.strategy.adjacency_radius, "Adjacent negative radius");
  tr->add_option("--lr", t_opts.config.adam.learning_rate, "Initial Adam learning rate");
  tr->add_option("--final-lr", t_opts.config.final_learning_rate, "Learning rate reached at the last epoch");
  tr->add_option("--batch", t_opts.config.batch_size, "Triplets per step");
  tr->add_option("--steps", t_opts.config.steps_per_epoch, "Steps per epoch");
  tr->add_option("--seed", t_opts.config.seed, "Training seed");

  auto* rt = app.add_subcommand("run-task", "Run policy episodes against goal settings");
  std::string r_task = "floor", r_checkpoint, r_out = "tasks", r_initial;
  std::vector<int> r_counts, r_indices, r_particles;
  int r_episodes = 50, r_max_steps = 40, r_size = 0;
  std::uint64_t r_seed = 0;
  rt->add_option("--task", r_task, "floor or cup");
  rt->add_option("--checkpoint", r_checkpoint, "Checkpoint or training directory")->required();
  rt->add_option("--out", r_out, "Output directory");
  rt->add_option("--goal-count", r_counts, "Goal object count (floor, repeatable)");
  rt->add_option("--goal-index", r_indices, "Goal demonstration phase (floor, repeatable)");
  rt->add_option("--goal-particles", r_particles, "Goal particle count (cup, repeatable)");
  rt->add_option("--episodes", r_episodes, "Episodes per goal");
  rt->add_option("--initial", r_initial, "Initial state count, or 'random' (default: random for floor, 0 for cup)");
  rt->add_option("--max-steps", r_max_steps, "Step limit per episode");
  rt->add_option("--size", r_size, "Observation size (defaults to the checkpoint's)");
  rt->add_option("--seed", r_seed, "Episode seed");

  auto* rep = app.add_subcommand("report", "Summarize experiments into report.html");
  std::string p_in;
  rep->add_option("--in", p_in, "Experiment directory")->required();

  auto* rp = app.add_subcommand("replay", "Re-run a command from its spec.json");
  std::string rp_spec;
  rp->add_option("spec", rp_spec, "spec.json path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const unsigned workers = default_workers();
  try {
    json cfg = load_config(config_path);
    if (gen->parsed()) {
      json flags;
      for (const auto* o : gen->get_options()) {
        if (o->count() == 0) continue;
        const std::string n = o->get_name().substr(2);
        if (n == "task" || n == "out") flags[n] = o->as<std::string>();
        else if (n == "seed") flags[n] = o->as<std::uint64_t>();
        else if (n == "runs" || n == "size") flags[n] = o->as<int>();
      }
      merge(cfg, flags);
      cfg.emplace("task", g_task);
      task_option(cfg.at("task").get<std::string>());
      const GenDataOptions opts = GenDataOptions::from_json(cfg);
      const GenDataSummary s = run_gen_data(opts, workers);
      std::printf("%d runs, %zu sequences, %llu bytes, digest %s\n", s.runs, s.sequences,
                  static_cast<unsigned long long>(s.bytes), hex_digest(s.digest).c_str());
      std::printf("corpus written to %s\n", s.root.string().c_str());
    } else if (tr->parsed()) {
      t_opts.corpus = t_corpus;
      t_opts.out = t_out;
      try {
        t_opts.config.strategy.kind = parse_negative_kind(t_strategy);
      } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
      }
      const json given = t_opts.to_json();
      json merged = TrainOptions{}.to_json();
      merge(merged, cfg);
      for (const auto* o : tr->get_options()) {
        if (o->count() == 0 || o->get_name().rfind("--", 0) != 0) continue;
        std::string key = o->get_name().substr(2);
        std::replace(key.begin(), key.end(), '-', '_');
        if (given.contains(key)) merged[key] = given[key];
      }
      const TrainOptions opts = TrainOptions::from_json(merged);
      std::printf("margin %g, strategy %s, lr %g to %g, batch %d, steps %d, epochs %d, seed %llu\n", opts.config.margin,
                  opts.config.strategy.describe().c_str(), opts.config.adam.learning_rate, opts.config.final_learning_rate, opts.config.batch_size,
                  opts.config.steps_per_epoch, opts.config.epochs,
                  static_cast<unsigned long long>(opts.config.seed));
      const TrainSummary s = run_train(opts, [](const EpochRow& r) {
        std::printf("epoch %3d  train %.4f  val %.4f  acc %.3f\n", r.epoch, r.train_loss, r.val_loss,
                    r.val_accuracy);
        std::fflush(stdout);
      });
      std::printf("best epoch %d, best %s, last %s\n", s.report.best_epoch, hex_digest(s.best_digest).c_str(),
                  hex_digest(s.last_digest).c_str());
    } else if (rt->parsed()) {
      TaskOptions opts;
      if (!cfg.empty()) opts = TaskOptions::from_json(cfg);
      if (rt->count("--task") || cfg.empty() || !cfg.contains("task")) opts.task = task_option(r_task);
      opts.checkpoint = r_checkpoint;
      if (rt->count("--out") || !cfg.contains("out")) opts.out = r_out;
      if (rt->count("--episodes") || !cfg.contains("episodes")) opts.episodes = r_episodes;
      if (rt->count("--max-steps") || !cfg.contains("max_steps")) opts.max_steps = r_max_steps;
      if (rt->count("--size") || !cfg.contains("image_size")) opts.image_size = r_size;
      if (rt->count("--seed") || !cfg.contains("seed")) opts.seed = r_seed;
      if (rt->count("--initial") || !cfg.contains("initial")) {
        if (r_initial.empty()) r_initial = opts.task == Task::cup ? "0" : "random";
        if (r_initial == "random") {
          opts.initial.reset();
        } else {
          try {
            opts.initial = std::stoi(r_initial);
          } catch (const std::exception&) {
            throw UsageError("--initial must be an integer or 'random', got " + r_initial);
          }
        }
      }
      std::vector<int> goals;
      if (opts.task == Task::floor) {
        if (!r_particles.empty()) throw UsageError("--goal-particles applies to the cup task");
        goals = r_counts;
        for (int g : r_indices) goals.push_back(kFloorObjectCount - g);
      } else {
        if (!r_counts.empty() || !r_indices.empty()) throw UsageError("--goal-count applies to the floor task");
        goals = r_particles;
      }
      if (!goals.empty()) opts.goals = goals;
      else if (!cfg.contains("goals") || rt->count("--task")) opts.goals = TaskOptions::default_goals(opts.task);
      const TaskSummary s = run_tasks(opts, workers);
      std::printf("%-8s %9s %14s %12s %8s %16s\n", "goal", "episodes", "mean |error|", "mean error", "2 std",
                  "median spearman");
      for (const auto& g : s.goals) {
        std::printf("%-8d %9zu %14.3f %+12.3f %8.3f %16.3f\n", g.goal, g.abs_error.n, g.abs_error.mean,
                    g.signed_error.mean, 2 * g.signed_error.std, g.median_spearman);
      }
      std::printf("results written to %s\n", opts.out.string().c_str());
    } else if (rep->parsed()) {
      const ReportSummary s = run_report(p_in);
      std::printf("%s: %d loss curves, %d error-bar figures, digest %s\n", s.file.string().c_str(), s.loss_curves,
                  s.error_bar_figures, hex_digest(s.digest).c_str());
    } else if (rp->parsed()) {
      replay(rp_spec, workers);
      std::printf("replayed %s\n", rp_spec.c_str());
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
