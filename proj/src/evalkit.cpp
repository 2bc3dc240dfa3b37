#include "taskprog/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "taskprog/digest.hpp"
#include "taskprog/errors.hpp"
#include "taskprog/f32t.hpp"
#include "taskprog/parallel.hpp"

namespace taskprog {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void usage_check(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

// Option validation failures surface as usage errors.
template <typename Fn>
void as_usage(Fn&& fn) {
  try {
    fn();
  } catch (const UsageError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

std::string strategy_label(const SamplingStrategy& s) { return s.describe(); }

std::string goal_label(Task task, int goal) {
  return task == Task::floor ? std::to_string(goal) + " objects" : std::to_string(goal) + " particles";
}

}  // namespace

Summary summarize(std::span<const double> values) {
  Summary s;
  s.n = values.size();
  if (values.empty()) return s;
  double total = 0;
  s.min = values[0];
  s.max = values[0];
  for (double v : values) {
    total += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = total / static_cast<double>(s.n);
  if (s.n > 1) {
    double sq = 0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(s.n - 1));
  }
  return s;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

// gen-data

void GenDataOptions::validate() const {
  usage_check(runs >= 2, "--runs must be at least 2, got " + std::to_string(runs));
  usage_check(valid_image_size(size), "--size must be one of 48, 64, 96, 300, got " + std::to_string(size));
  usage_check(!out.empty(), "--out is required");
}

json GenDataOptions::to_json() const {
  return {{"command", "gen-data"}, {"task", std::string(task_name(task))}, {"runs", runs},
          {"size", size},          {"seed", seed},                          {"out", out.string()}};
}

GenDataOptions GenDataOptions::from_json(const json& j) {
  GenDataOptions o;
  o.task = parse_task(j.value("task", std::string(task_name(o.task))));
  o.runs = j.value("runs", o.runs);
  o.size = j.value("size", o.size);
  o.seed = j.value("seed", o.seed);
  o.out = j.value("out", o.out.string());
  return o;
}

GenDataSummary run_gen_data(const GenDataOptions& options, unsigned workers) {
  options.validate();
  const Corpus c = generate_corpus(options.task, options.runs, options.size, options.seed, options.out, workers);
  GenDataSummary s;
  s.runs = static_cast<int>(c.runs.size());
  s.sequences = c.sequence_count();
  s.digest = c.digest;
  s.root = c.root;
  for (const auto& entry : fs::recursive_directory_iterator(c.root)) {
    if (entry.is_regular_file() && entry.path().filename() != "spec.json") s.bytes += entry.file_size();
  }
  write_text(c.root / "spec.json", options.to_json().dump(2) + "\n");
  return s;
}

// train

void TrainOptions::validate() const {
  usage_check(!corpus.empty(), "--corpus is required");
  usage_check(!out.empty(), "--out is required");
  as_usage([&] { config.validate(); });
}

json TrainOptions::to_json() const {
  return {{"command", "train"},
          {"corpus", corpus.string()},
          {"out", out.string()},
          {"margin", config.margin},
          {"batch", config.batch_size},
          {"steps", config.steps_per_epoch},
          {"epochs", config.epochs},
          {"lr", config.adam.learning_rate},
          {"final_lr", config.final_learning_rate},
          {"beta1", config.adam.beta1},
          {"beta2", config.adam.beta2},
          {"epsilon", config.adam.epsilon},
          {"strategy", negative_kind_name(config.strategy.kind)},
          {"radius", config.strategy.adjacency_radius},
          {"seed", config.seed},
          {"validation_triplets", config.validation_triplets}};
}

TrainOptions TrainOptions::from_json(const json& j) {
  TrainOptions o;
  o.corpus = j.value("corpus", std::string());
  o.out = j.value("out", o.out.string());
  auto& c = o.config;
  c.margin = j.value("margin", c.margin);
  c.batch_size = j.value("batch", c.batch_size);
  c.steps_per_epoch = j.value("steps", c.steps_per_epoch);
  c.epochs = j.value("epochs", c.epochs);
  c.adam.learning_rate = j.value("lr", c.adam.learning_rate);
  c.final_learning_rate = j.value("final_lr", c.final_learning_rate);
  c.adam.beta1 = j.value("beta1", c.adam.beta1);
  c.adam.beta2 = j.value("beta2", c.adam.beta2);
  c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
  c.strategy.kind = parse_negative_kind(j.value("strategy", negative_kind_name(c.strategy.kind)));
  c.strategy.adjacency_radius = j.value("radius", c.strategy.adjacency_radius);
  c.seed = j.value("seed", c.seed);
  c.validation_triplets = j.value("validation_triplets", c.validation_triplets);
  return o;
}

TrainSummary run_train(const TrainOptions& options, const EpochCallback& on_epoch) {
  options.validate();
  const Corpus corpus = open_corpus(options.corpus);
  FrameStore store(corpus);
  store.preload(corpus.train_run_ids);
  store.preload(corpus.val_run_ids);
  fs::create_directories(options.out);
  json spec = options.to_json();
  spec["task"] = std::string(task_name(corpus.task));
  spec["corpus_digest"] = hex_digest(corpus.digest);
  write_text(options.out / "spec.json", spec.dump(2) + "\n");

  const TrainResult result = train(store, options.config, options.out, on_epoch);
  std::vector<double> epochs, train_loss, val_loss;
  for (const auto& r : result.report.rows) {
    epochs.push_back(r.epoch);
    train_loss.push_back(r.train_loss);
    val_loss.push_back(r.val_loss);
  }
  write_text(options.out / "loss_curve.svg",
             svg::line_chart({"Triplet loss (" + std::string(task_name(corpus.task)) + ", " +
                                  strategy_label(options.config.strategy) + ")",
                              "epoch", "loss"},
                             {{"train", epochs, train_loss, {}}, {"validation", epochs, val_loss, {}}}));
  TrainSummary s;
  s.report = result.report;
  s.best_digest = result.best.digest();
  s.last_digest = result.last.digest();
  s.task = corpus.task;
  return s;
}

// run-task

std::vector<int> TaskOptions::default_goals(Task task) {
  if (task == Task::cup) return {0, 69, 138, 207, 275};
  std::vector<int> g;
  for (int n = 0; n < kFloorObjectCount; ++n) g.push_back(n);
  return g;
}

void TaskOptions::validate() const {
  usage_check(!checkpoint.empty(), "--checkpoint is required");
  usage_check(!out.empty(), "--out is required");
  usage_check(episodes >= 1, "--episodes must be at least 1, got " + std::to_string(episodes));
  usage_check(max_steps >= 1, "--max-steps must be at least 1");
  usage_check(!goals.empty(), "at least one goal is required");
  const int limit = task == Task::floor ? kFloorObjectCount : kFullCup;
  for (int g : goals) {
    usage_check(g >= 0 && g <= limit, "goal " + std::to_string(g) + " outside 0.." + std::to_string(limit));
  }
  if (initial) {
    usage_check(*initial >= 0 && *initial <= limit,
                "initial state " + std::to_string(*initial) + " outside 0.." + std::to_string(limit));
  }
}

json TaskOptions::to_json() const {
  return {{"command", "run-task"},
          {"task", std::string(task_name(task))},
          {"checkpoint", checkpoint.string()},
          {"out", out.string()},
          {"goals", goals},
          {"episodes", episodes},
          {"initial", initial ? json(*initial) : json("random")},
          {"max_steps", max_steps},
          {"seed", seed},
          {"image_size", image_size}};
}

TaskOptions TaskOptions::from_json(const json& j) {
  TaskOptions o;
  o.task = parse_task(j.value("task", std::string(task_name(o.task))));
  o.checkpoint = j.value("checkpoint", std::string());
  o.out = j.value("out", o.out.string());
  o.goals = j.contains("goals") ? j.at("goals").get<std::vector<int>>() : default_goals(o.task);
  o.episodes = j.value("episodes", o.episodes);
  if (j.contains("initial") && j.at("initial").is_number_integer()) o.initial = j.at("initial").get<int>();
  o.max_steps = j.value("max_steps", o.max_steps);
  o.seed = j.value("seed", o.seed);
  o.image_size = j.value("image_size", o.image_size);
  return o;
}

fs::path resolve_checkpoint(const fs::path& path) {
  if (fs::exists(path / "manifest.json")) return path;
  if (fs::exists(path / "checkpoints" / "best" / "manifest.json")) return path / "checkpoints" / "best";
  throw NotFound("no checkpoint found at " + path.string());
}

EpisodeConfig episode_config(const TaskOptions& options, int goal, int episode, int image_size) {
  const std::uint64_t key = mix_seed(mix_seed(options.seed, static_cast<std::uint64_t>(goal)),
                                     static_cast<std::uint64_t>(episode));
  EpisodeConfig c;
  c.task = options.task;
  c.max_steps = options.max_steps;
  c.world_seed = mix_seed(key, 0);
  c.observation_seed = mix_seed(key, 1);
  c.image_size = image_size;
  if (options.task == Task::floor) {
    c.goal_index = kFloorObjectCount - goal;
  } else {
    c.goal_particles = goal;
    c.goal_index = pouring_goal_index(goal);
  }
  if (options.initial) {
    c.initial_state = *options.initial;
  } else {
    Rng rng(mix_seed(key, 2));
    const int phase = static_cast<int>(rng.index(kPhaseCount));
    c.initial_state = options.task == Task::floor ? kFloorObjectCount - phase : particles_at_phase(phase);
  }
  return c;
}

TaskSummary run_tasks(const TaskOptions& options, unsigned workers) {
  options.validate();
  const EmbedderParams params = load_checkpoint(resolve_checkpoint(options.checkpoint));
  const int size = options.image_size > 0 ? options.image_size : static_cast<int>(params.config.input_size);
  usage_check(static_cast<std::size_t>(size) == params.config.input_size,
              "image size " + std::to_string(size) + " does not match the checkpoint's " +
                  std::to_string(params.config.input_size));
  fs::create_directories(options.out);
  write_text(options.out / "spec.json", options.to_json().dump(2) + "\n");

  const std::size_t per_goal = static_cast<std::size_t>(options.episodes);
  const std::size_t jobs = options.goals.size() * per_goal;
  std::vector<EpisodeRecord> records(jobs);
  std::vector<std::vector<double>> distances(jobs);
  parallel_for(jobs, workers, [&](std::size_t j) {
    const int goal = options.goals[j / per_goal];
    const int e = static_cast<int>(j % per_goal);
    const EpisodeConfig config = episode_config(options, goal, e, size);
    const EpisodeTrace trace = run_episode(params, config);
    char name[64];
    std::snprintf(name, sizeof name, "traces/goal_%03d/episode_%03d.jsonl", goal, e);
    write_trace_jsonl(trace, options.out / name);
    EpisodeRecord& r = records[j];
    r.goal = goal;
    r.episode = e;
    r.initial_state = trace.initial_state;
    r.final_state = trace.final_state;
    r.error = trace.error();
    r.steps = static_cast<int>(trace.steps.size());
    r.status = trace.status;
    r.trace_digest = crc64(read_text(options.out / name));
    distances[j] = distance_to_go(trace, trace.goal_embedding);
    std::vector<double> idx(distances[j].size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<double>(i);
    r.spearman = spearman(idx, distances[j]);
  });

  TaskSummary summary;
  summary.episodes = records;
  std::ostringstream episodes_csv, aggregate_csv, distance_csv;
  episodes_csv << "goal,episode,initial_state,final_state,error,steps,status,spearman,trace_crc64\n";
  for (const auto& r : records) {
    episodes_csv << r.goal << ',' << r.episode << ',' << r.initial_state << ',' << r.final_state << ',' << r.error
                 << ',' << r.steps << ',' << status_name(r.status) << ',' << fmt("%.6f", r.spearman) << ','
                 << hex_digest(r.trace_digest) << '\n';
  }
  aggregate_csv << "goal,episodes,mean_abs_error,std_abs_error,mean_error,std_error,error_lo,error_hi,median_spearman\n";
  distance_csv << "goal,step,episodes,mean,std\n";
  json summary_json = json::array();
  for (std::size_t g = 0; g < options.goals.size(); ++g) {
    GoalAggregate agg;
    agg.goal = options.goals[g];
    std::vector<double> abs_err, err, rho;
    std::size_t longest = 0;
    for (std::size_t e = 0; e < per_goal; ++e) {
      const auto& r = records[g * per_goal + e];
      abs_err.push_back(std::abs(r.error));
      err.push_back(r.error);
      rho.push_back(r.spearman);
      longest = std::max(longest, distances[g * per_goal + e].size());
    }
    agg.abs_error = summarize(abs_err);
    agg.signed_error = summarize(err);
    agg.median_spearman = median(rho);
    for (std::size_t s = 0; s < longest; ++s) {
      std::vector<double> at;
      for (std::size_t e = 0; e < per_goal; ++e) {
        const auto& d = distances[g * per_goal + e];
        if (s < d.size()) at.push_back(d[s]);
      }
      agg.distance_by_step.push_back(summarize(at));
      const Summary& ds = agg.distance_by_step.back();
      distance_csv << agg.goal << ',' << s << ',' << ds.n << ',' << fmt("%.6f", ds.mean) << ',' << fmt("%.6f", ds.std)
                   << '\n';
    }
    const Summary& se = agg.signed_error;
    aggregate_csv << agg.goal << ',' << per_goal << ',' << fmt("%.4f", agg.abs_error.mean) << ','
                  << fmt("%.4f", agg.abs_error.std) << ',' << fmt("%.4f", se.mean) << ',' << fmt("%.4f", se.std) << ','
                  << fmt("%.4f", se.mean - 2 * se.std) << ',' << fmt("%.4f", se.mean + 2 * se.std) << ','
                  << fmt("%.4f", agg.median_spearman) << '\n';
    summary_json.push_back({{"goal", agg.goal},
                            {"episodes", per_goal},
                            {"mean_abs_error", agg.abs_error.mean},
                            {"std_abs_error", agg.abs_error.std},
                            {"mean_error", se.mean},
                            {"std_error", se.std},
                            {"median_spearman", agg.median_spearman}});
    summary.goals.push_back(std::move(agg));
  }
  write_text(options.out / "episodes.csv", episodes_csv.str());
  write_text(options.out / "aggregate.csv", aggregate_csv.str());
  write_text(options.out / "distance_to_go.csv", distance_csv.str());
  write_text(options.out / "summary.json",
             json{{"task", std::string(task_name(options.task))}, {"goals", summary_json}}.dump(2) + "\n");

  std::vector<double> gx, gm, gh;
  for (const auto& a : summary.goals) {
    gx.push_back(a.goal);
    gm.push_back(a.signed_error.mean);
    gh.push_back(2 * a.signed_error.std);
  }
  const bool floor = options.task == Task::floor;
  write_text(options.out / "error_bars.svg",
             svg::error_bar_chart({floor ? "Cleaning: final minus goal object count" : "Pouring: final minus goal particles",
                                   floor ? "goal objects" : "goal particles", "error (mean, 2 std)"},
                                  gx, gm, gh));
  std::vector<svg::Series> series;
  const std::size_t shown = std::min<std::size_t>(5, summary.goals.size());
  for (std::size_t k = 0; k < shown; ++k) {
    const auto& a = summary.goals[k * (summary.goals.size() - 1) / std::max<std::size_t>(1, shown - 1)];
    svg::Series s{goal_label(options.task, a.goal), {}, {}, {}};
    for (std::size_t i = 0; i < a.distance_by_step.size(); ++i) {
      s.x.push_back(static_cast<double>(i));
      s.y.push_back(a.distance_by_step[i].mean);
      s.band.push_back(2 * a.distance_by_step[i].std);
    }
    series.push_back(std::move(s));
  }
  write_text(options.out / "distance_to_go.svg",
             svg::line_chart({"Distance to goal embedding", "step", "distance (mean, 2 std)"}, series));
  return summary;
}

// report

namespace {

struct TrainEntry {
  fs::path dir;
  json spec;
  TrainReport report;
};

struct TaskEntry {
  fs::path dir;
  json spec;
  json summary;
};

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace

ReportSummary run_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw NotFound("no experiments found in " + dir.string() + " (not a directory)");
  std::vector<fs::path> specs;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "spec.json") specs.push_back(entry.path());
  }
  std::sort(specs.begin(), specs.end());
  std::map<std::string, std::vector<TrainEntry>> trains;
  std::map<std::string, std::vector<TaskEntry>> tasks;
  for (const auto& path : specs) {
    const json spec = read_json(path);
    const std::string command = spec.value("command", "");
    const fs::path d = path.parent_path();
    if (command == "train" && fs::exists(d / "train_report.csv")) {
      trains[spec.value("task", "floor")].push_back({d, spec, TrainReport::read_csv(d / "train_report.csv")});
    } else if (command == "run-task" && fs::exists(d / "summary.json")) {
      tasks[spec.value("task", "floor")].push_back({d, spec, read_json(d / "summary.json")});
    }
  }
  if (trains.empty() && tasks.empty()) throw NotFound("no experiments found in " + dir.string());

  ReportSummary result;
  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>taskprog report</title>\n"
       << "<style>body{font-family:sans-serif;max-width:980px;margin:auto}table{border-collapse:collapse;margin:8px 0}"
       << "td,th{border:1px solid #bbb;padding:3px 8px;text-align:right}th{background:#eee}</style></head><body>\n"
       << "<h1>Task progress experiments</h1>\n";
  std::vector<std::string> task_names;
  for (const auto& [t, v] : trains) task_names.push_back(t);
  for (const auto& [t, v] : tasks) {
    if (!trains.count(t)) task_names.push_back(t);
  }
  std::sort(task_names.begin(), task_names.end());
  for (const auto& task : task_names) {
    html << "<h2>" << html_escape(task) << "</h2>\n";
    if (trains.count(task)) {
      const auto& runs = trains[task];
      html << "<h3>Training</h3>\n<table><tr><th>run</th><th>strategy</th><th>seed</th><th>epochs</th>"
           << "<th>val loss (first)</th><th>val loss (last)</th><th>ratio</th><th>val acc (last)</th><th>best epoch</th></tr>\n";
      std::vector<svg::Series> series;
      for (const auto& r : runs) {
        if (r.report.rows.empty()) continue;
        const auto& first = r.report.rows.front();
        const auto& last = r.report.rows.back();
        const std::string name = fs::relative(r.dir, dir).generic_string();
        html << "<tr><td>" << html_escape(name) << "</td><td>" << html_escape(r.report.strategy.describe())
             << "</td><td>" << r.report.seed << "</td><td>" << r.report.rows.size() << "</td><td>"
             << fmt("%.4f", first.val_loss) << "</td><td>" << fmt("%.4f", last.val_loss) << "</td><td>"
             << fmt("%.3f", last.val_loss / first.val_loss) << "</td><td>" << fmt("%.3f", last.val_accuracy)
             << "</td><td>" << r.report.best_epoch << "</td></tr>\n";
        svg::Series s{name, {}, {}, {}};
        for (const auto& row : r.report.rows) {
          s.x.push_back(row.epoch);
          s.y.push_back(row.val_loss);
        }
        series.push_back(std::move(s));
      }
      html << "</table>\n";
      // Strategy comparison on matching seeds.
      for (const auto& a : runs) {
        for (const auto& b : runs) {
          if (a.report.strategy.kind != NegativeKind::uniform_negative ||
              b.report.strategy.kind != NegativeKind::adjacent_negative || a.report.seed != b.report.seed ||
              a.report.rows.empty() || b.report.rows.empty()) {
            continue;
          }
          const double gap = 100 * (b.report.rows.back().val_accuracy - a.report.rows.back().val_accuracy);
          html << "<p>Adjacent negatives (" << html_escape(b.report.strategy.describe()) << ") versus uniform, seed "
               << a.report.seed << ": final validation accuracy " << fmt("%.3f", b.report.rows.back().val_accuracy)
               << " vs " << fmt("%.3f", a.report.rows.back().val_accuracy) << " (" << fmt("%+.1f", gap)
               << " points).</p>\n";
        }
      }
      html << "<figure>\n"
           << svg::line_chart({"Validation loss (" + task + ")", "epoch", "triplet loss"}, series) << "</figure>\n";
      ++result.loss_curves;
    }
    if (tasks.count(task)) {
      const auto& runs = tasks[task];
      const bool floor = task == "floor";
      for (const auto& r : runs) {
        html << "<h3>Episodes: " << html_escape(fs::relative(r.dir, dir).generic_string()) << "</h3>\n"
             << "<table><tr><th>goal</th><th>episodes</th><th>mean |error|</th><th>mean error</th><th>2 std</th>"
             << "<th>median spearman</th></tr>\n";
        for (const auto& g : r.summary.at("goals")) {
          html << "<tr><td>" << g.at("goal").get<int>() << "</td><td>" << g.at("episodes").get<int>() << "</td><td>"
               << fmt("%.3f", g.at("mean_abs_error").get<double>()) << "</td><td>"
               << fmt("%+.3f", g.at("mean_error").get<double>()) << "</td><td>"
               << fmt("%.3f", 2 * g.at("std_error").get<double>()) << "</td><td>"
               << fmt("%.3f", g.at("median_spearman").get<double>()) << "</td></tr>\n";
        }
        html << "</table>\n";
      }
      const auto& shown = runs.front();
      std::vector<double> x, m, h;
      for (const auto& g : shown.summary.at("goals")) {
        x.push_back(g.at("goal").get<int>());
        m.push_back(g.at("mean_error").get<double>());
        h.push_back(2 * g.at("std_error").get<double>());
      }
      html << "<figure>\n"
           << svg::error_bar_chart({floor ? "Cleaning error by goal" : "Pouring error by goal",
                                    floor ? "goal objects" : "goal particles", "final minus goal (mean, 2 std)"},
                                   x, m, h)
           << "<figcaption>" << html_escape(fs::relative(shown.dir, dir).generic_string()) << "</figcaption></figure>\n";
      ++result.error_bar_figures;
    }
  }
  html << "</body></html>\n";
  result.file = dir / "report.html";
  const std::string text = html.str();
  write_text(result.file, text);
  result.digest = crc64(text);
  return result;
}

void replay(const fs::path& spec_file, unsigned workers) {
  const json spec = read_json(spec_file);
  const std::string command = spec.value("command", "");
  if (command == "gen-data") {
    run_gen_data(GenDataOptions::from_json(spec), workers);
  } else if (command == "train") {
    run_train(TrainOptions::from_json(spec));
  } else if (command == "run-task") {
    run_tasks(TaskOptions::from_json(spec), workers);
  } else {
    throw UsageError("spec " + spec_file.string() + " names no known command");
  }
}

}  // namespace taskprog
