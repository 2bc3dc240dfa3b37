#include "taskprog/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "taskprog/errors.hpp"

namespace taskprog {
namespace {

constexpr float kDegree = std::numbers::pi_v<float> / 180.0f;

Rgb hsv(double h, double s, double v) {
  h = std::fmod(h, 1.0) * 6.0;
  const int sector = static_cast<int>(h);
  const double f = h - sector;
  const auto p = static_cast<float>(v * (1 - s));
  const auto q = static_cast<float>(v * (1 - s * f));
  const auto t = static_cast<float>(v * (1 - s * (1 - f)));
  const auto vv = static_cast<float>(v);
  switch (sector % 6) {
    case 0: return {vv, t, p};
    case 1: return {q, vv, p};
    case 2: return {p, vv, t};
    case 3: return {p, q, vv};
    case 4: return {t, p, vv};
    default: return {vv, p, q};
  }
}

float color_distance(const Rgb& a, const Rgb& b) {
  return std::sqrt((a.r - b.r) * (a.r - b.r) + (a.g - b.g) * (a.g - b.g) + (a.b - b.b) * (a.b - b.b));
}

Backdrop random_backdrop(Rng& rng, double v_lo, double v_hi, double max_noise) {
  Backdrop b;
  b.color = hsv(rng.uniform(), rng.uniform(0.0, 0.45), rng.uniform(v_lo, v_hi));
  b.noise_amplitude = static_cast<float>(rng.uniform(0.0, max_noise));
  b.noise_scale = static_cast<float>(rng.uniform(6.0, 20.0));
  b.texture_seed = rng.next_u64();
  return b;
}

FloorObject random_object(Rng& rng, const Rect& region, const Rgb& floor) {
  FloorObject o;
  o.shape = static_cast<ShapeKind>(rng.index(3));
  o.size = static_cast<float>(rng.uniform(0.04, 0.12));
  do {
    o.color = hsv(rng.uniform(), rng.uniform(0.55, 1.0), rng.uniform(0.6, 1.0));
  } while (color_distance(o.color, floor) < 0.35f);
  o.u = static_cast<float>(rng.uniform(region.u0, region.u1));
  o.v = static_cast<float>(rng.uniform(region.v0, region.v1));
  o.angle = static_cast<float>(rng.uniform(0.0, 2.0 * std::numbers::pi));
  o.tiebreak = rng.next_u64();
  return o;
}

float center_distance(const FloorObject& o, const Rect& region) {
  const float cu = 0.5f * (region.u0 + region.u1), cv = 0.5f * (region.v0 + region.v1);
  return std::hypot(o.u - cu, o.v - cv);
}

// Index of the next object to clear: farthest from the region center, ties by key.
std::size_t next_removal(const FloorScene& scene) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scene.objects.size(); ++i) {
    const float di = center_distance(scene.objects[i], scene.region_bounds);
    const float db = center_distance(scene.objects[best], scene.region_bounds);
    if (di > db || (di == db && scene.objects[i].tiebreak < scene.objects[best].tiebreak)) best = i;
  }
  return best;
}

void require_phase(int phase) {
  if (phase < 0 || phase > kLastPhase) {
    throw InvalidArgument("phase " + std::to_string(phase) + " outside [0, " + std::to_string(kLastPhase) + "]");
  }
}

}  // namespace

std::string_view task_name(Task task) { return task == Task::floor ? "floor" : "cup"; }

Task parse_task(std::string_view name) {
  if (name == "floor") return Task::floor;
  if (name == "cup") return Task::cup;
  throw InvalidArgument("unknown task '" + std::string(name) + "' (expected floor or cup)");
}

ViewParams random_view(Task task, int view_id, Rng& rng) {
  if (view_id < 0 || view_id >= kViewCount) throw InvalidArgument("view id " + std::to_string(view_id) + " out of range");
  ViewParams v;
  v.view_id = view_id;
  if (task == Task::floor) {
    v.base.rotation = static_cast<float>(rng.symmetric(25.0 * kDegree));
    v.base.scale = static_cast<float>(rng.uniform(0.8, 0.95));
    v.base.shear = static_cast<float>(rng.symmetric(0.1));
    v.base.tx = static_cast<float>(rng.symmetric(0.03));
    v.base.ty = static_cast<float>(rng.symmetric(0.03));
  } else {
    v.base.rotation = static_cast<float>(rng.symmetric(8.0 * kDegree));
    v.base.scale = static_cast<float>(rng.uniform(0.85, 1.05));
    v.base.shear = static_cast<float>(rng.symmetric(0.08));
    v.base.tx = static_cast<float>(rng.symmetric(0.04));
    v.base.ty = static_cast<float>(rng.symmetric(0.04));
  }
  if (view_id != kRobotView) {
    v.jitter_translation = 0.02f;
    v.jitter_rotation = 3.0f * kDegree;
  }
  v.jitter_seed = rng.next_u64();
  v.photometric.brightness = static_cast<float>(rng.uniform(0.85, 1.15));
  v.photometric.contrast = static_cast<float>(rng.uniform(0.8, 1.2));
  v.pixel_noise = 0.02f;
  return v;
}

RunSetup randomize_run(Task task, std::uint64_t seed) {
  Rng rng(seed);
  RunSetup run;
  run.task = task;
  run.seed = seed;
  if (task == Task::floor) {
    FloorScene scene;
    scene.background = random_backdrop(rng, 0.2, 0.6, 0.15);
    scene.region_bounds = {static_cast<float>(0.18 + rng.symmetric(0.02)), static_cast<float>(0.32 + rng.symmetric(0.02)),
                           static_cast<float>(0.82 + rng.symmetric(0.02)), static_cast<float>(0.86 + rng.symmetric(0.02))};
    scene.storage_bounds = {0.3f, 0.06f, 0.7f, 0.22f};
    do {
      scene.storage_color = hsv(rng.uniform(), rng.uniform(0.0, 0.5), rng.uniform(0.05, 0.9));
    } while (color_distance(scene.storage_color, scene.background.color) < 0.25f);
    scene.objects.reserve(kFloorObjectCount);
    for (int i = 0; i < kFloorObjectCount; ++i) {
      scene.objects.push_back(random_object(rng, scene.region_bounds, scene.background.color));
    }
    run.initial = std::move(scene);
  } else {
    CupScene scene;
    scene.particle_count = kFullCup;
    scene.cup_geometry.rim_scale = static_cast<float>(rng.uniform(1.0, 1.45));
    scene.cup_geometry.height_scale = static_cast<float>(rng.uniform(1.0, 1.45));
    scene.cup_geometry.yaw = static_cast<float>(rng.uniform(0.0, std::numbers::pi));
    scene.background = random_backdrop(rng, 0.1, 0.55, 0.1);
    const Rgb particle = hsv(rng.uniform(), rng.uniform(0.5, 1.0), rng.uniform(0.55, 1.0));
    scene.particle_color = {particle.r, particle.g, particle.b, static_cast<float>(rng.uniform(0.75, 1.0))};
    const Rgb cup = hsv(rng.uniform(), rng.uniform(0.0, 0.3), rng.uniform(0.6, 1.0));
    scene.cup_color = {cup.r, cup.g, cup.b, static_cast<float>(rng.uniform(0.2, 0.5))};
    run.initial = scene;
  }
  for (int v = 0; v < kViewCount; ++v) run.views[static_cast<std::size_t>(v)] = random_view(task, v, rng);
  return run;
}

int particles_at_phase(int phase) {
  require_phase(phase);
  return static_cast<int>(std::lround(static_cast<double>(kFullCup) * (kLastPhase - phase) / kLastPhase));
}

FloorScene phase_scene(const FloorScene& initial, int phase) {
  require_phase(phase);
  if (initial.objects.size() < static_cast<std::size_t>(phase)) {
    throw InvalidArgument("phase " + std::to_string(phase) + " needs at least that many objects in the region");
  }
  FloorScene scene = initial;
  for (int i = 0; i < phase; ++i) {
    const std::size_t idx = next_removal(scene);
    scene.stored.push_back(scene.objects[idx]);
    scene.objects.erase(scene.objects.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return scene;
}

CupScene phase_scene(const CupScene& initial, int phase) {
  CupScene scene = initial;
  scene.particle_count = particles_at_phase(phase);
  return scene;
}

Scene phase_scene(const Scene& initial, int phase) {
  return std::visit([phase](const auto& s) -> Scene { return phase_scene(s, phase); }, initial);
}

int ground_truth_count(const Scene& scene) {
  if (const auto* floor = std::get_if<FloorScene>(&scene)) return static_cast<int>(floor->objects.size());
  return std::get<CupScene>(scene).particle_count;
}

FloorScene apply_floor_action(const FloorScene& scene, FloorAction action, Rng& rng) {
  FloorScene next = scene;
  if (action == FloorAction::remove_one) {
    if (next.objects.empty()) throw ActionError("remove_one: no object left in the region");
    const std::size_t idx = next_removal(next);
    next.stored.push_back(next.objects[idx]);
    next.objects.erase(next.objects.begin() + static_cast<std::ptrdiff_t>(idx));
    return next;
  }
  if (next.stored.empty()) throw ActionError("add_one: storage area is empty");
  FloorObject obj = next.stored.back();
  next.stored.pop_back();
  const Rect& r = next.region_bounds;
  // Prefer a spot that does not overlap existing objects; accept overlap after 64 tries.
  for (int attempt = 0; attempt < 64; ++attempt) {
    obj.u = static_cast<float>(rng.uniform(r.u0, r.u1));
    obj.v = static_cast<float>(rng.uniform(r.v0, r.v1));
    const bool free = std::none_of(next.objects.begin(), next.objects.end(), [&](const FloorObject& o) {
      return std::hypot(o.u - obj.u, o.v - obj.v) < 0.5f * (o.size + obj.size);
    });
    if (free) break;
  }
  obj.angle = static_cast<float>(rng.uniform(0.0, 2.0 * std::numbers::pi));
  next.objects.push_back(obj);
  return next;
}

CupScene apply_cup_action(const CupScene& scene, CupAction action) {
  CupScene next = scene;
  const int delta = action == CupAction::pour_in ? kPourQuantum : -kPourQuantum;
  next.particle_count = std::clamp(next.particle_count + delta, 0, kFullCup);
  return next;
}

}  // namespace taskprog
