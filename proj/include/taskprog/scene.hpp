#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "taskprog/rng.hpp"
#include "taskprog/tensor.hpp"

namespace taskprog {

enum class Task { floor, cup };

std::string_view task_name(Task task);
/// Accepts "floor" or "cup".
Task parse_task(std::string_view name);

inline constexpr int kPhaseCount = 16;
inline constexpr int kLastPhase = kPhaseCount - 1;
inline constexpr int kViewCount = 4;
inline constexpr int kRobotView = 3;
inline constexpr int kFloorObjectCount = 15;
inline constexpr int kFullCup = 345;
inline constexpr int kParticlesPerPhase = 23;
inline constexpr int kPourQuantum = 15;

struct Rgb {
  float r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rgba {
  float r = 0, g = 0, b = 0, a = 1;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// Axis-aligned rectangle in normalized world coordinates (u right, v down).
struct Rect {
  float u0 = 0, v0 = 0, u1 = 1, v1 = 1;
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Backdrop {
  Rgb color;
  float noise_amplitude = 0;
  float noise_scale = 8;
  std::uint64_t texture_seed = 0;
  friend bool operator==(const Backdrop&, const Backdrop&) = default;
};

enum class ShapeKind { circle, square, triangle };

struct FloorObject {
  ShapeKind shape = ShapeKind::circle;
  float size = 0.08f;  // fraction of image width, [0.04, 0.12]
  Rgb color;
  float u = 0.5f, v = 0.5f;
  float angle = 0;
  std::uint64_t tiebreak = 0;  // seeded key ordering equidistant removals
  friend bool operator==(const FloorObject&, const FloorObject&) = default;
};

/// Objects inside the cleaning region plus the ones already moved to storage.
/// objects.size() + storage_count() is conserved by every action.
struct FloorScene {
  std::vector<FloorObject> objects;
  std::vector<FloorObject> stored;  // arrival order; drawn in storage slots
  Backdrop background;
  Rect region_bounds;
  Rect storage_bounds;
  Rgb storage_color;

  std::size_t storage_count() const { return stored.size(); }
  std::size_t total_objects() const { return objects.size() + stored.size(); }
  friend bool operator==(const FloorScene&, const FloorScene&) = default;
};

struct CupGeometry {
  float rim_scale = 1;     // principal rim axis stretch, [1, 1.45]
  float height_scale = 1;  // [1, 1.45]
  float yaw = 0;           // rotation of the rim's principal axis, radians
  friend bool operator==(const CupGeometry&, const CupGeometry&) = default;
};

struct CupScene {
  int particle_count = kFullCup;
  CupGeometry cup_geometry;
  Rgba particle_color;
  Rgba cup_color;
  Backdrop background;
  friend bool operator==(const CupScene&, const CupScene&) = default;
};

using Scene = std::variant<FloorScene, CupScene>;

/// World-to-image similarity with shear: q = 0.5 + t + s * R(rotation) * Shear(shear) * (p - 0.5).
struct ViewTransform {
  float rotation = 0;
  float scale = 1;
  float shear = 0;
  float tx = 0, ty = 0;
  friend bool operator==(const ViewTransform&, const ViewTransform&) = default;
};

struct Photometric {
  float brightness = 1;
  float contrast = 1;
  friend bool operator==(const Photometric&, const Photometric&) = default;
};

/// One camera. Per-frame jitter is a pure function of (jitter_seed, frame_index)
/// bounded by the two magnitudes; the robot view has zero jitter in recorded runs.
struct ViewParams {
  int view_id = 0;
  ViewTransform base;
  float jitter_translation = 0;  // max |offset|, fraction of image width
  float jitter_rotation = 0;     // max |angle|, radians
  std::uint64_t jitter_seed = 0;
  Photometric photometric;
  float pixel_noise = 0;
  friend bool operator==(const ViewParams&, const ViewParams&) = default;
};

inline constexpr float kMaxJitterTranslation = 0.05f;
inline constexpr float kMaxJitterRotation = 5.0f * 3.14159265358979f / 180.0f;

struct RunSetup {
  Task task = Task::floor;
  std::uint64_t seed = 0;
  Scene initial;
  std::array<ViewParams, kViewCount> views;
};

/// Deterministic randomized task instance and its four cameras.
RunSetup randomize_run(Task task, std::uint64_t seed);

/// Draws a camera from the same law randomize_run uses. The robot view gets no per-frame jitter.
ViewParams random_view(Task task, int view_id, Rng& rng);

/// Scene at `phase` of the demonstration that starts from `initial`.
/// Floor: the `phase` objects farthest from the region center move to storage.
/// Cup: particle_count becomes particles_at_phase(phase).
Scene phase_scene(const Scene& initial, int phase);
FloorScene phase_scene(const FloorScene& initial, int phase);
CupScene phase_scene(const CupScene& initial, int phase);

/// 345 * (15 - phase) / 15, i.e. 23 fewer per phase step.
int particles_at_phase(int phase);

/// Objects in the region (floor) or particles in the cup.
int ground_truth_count(const Scene& scene);

enum class FloorAction { remove_one, add_one };
enum class CupAction { pour_in, pour_out };

/// remove_one moves the object farthest from the region center to storage;
/// add_one places the most recently stored object at a random free spot.
/// Raises ActionError when the source is empty.
FloorScene apply_floor_action(const FloorScene& scene, FloorAction action, Rng& rng);

/// +-15 particles, clamped to [0, 345].
CupScene apply_cup_action(const CupScene& scene, CupAction action);

inline constexpr int kMinImageSize = 8;

/// Rasterizes the scene as seen by `view` at `frame_index` into an [S,S,3] image in [0,1].
Tensor render(const Scene& scene, const ViewParams& view, int frame_index, int size);

}  // namespace taskprog
