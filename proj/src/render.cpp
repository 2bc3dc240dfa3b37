#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "taskprog/errors.hpp"
#include "taskprog/scene.hpp"

namespace taskprog {
namespace {

struct Inverse {
  // p = 0.5 + m * (q - 0.5 - t)
  float m00, m01, m10, m11, tx, ty;
};

Inverse frame_inverse(const ViewParams& view, int frame_index) {
  if (view.jitter_translation > kMaxJitterTranslation + 1e-6f || view.jitter_rotation > kMaxJitterRotation + 1e-6f) {
    throw InvalidArgument("view jitter exceeds 5% translation / 5 degree rotation");
  }
  Rng jitter(mix_seed(view.jitter_seed, static_cast<std::uint64_t>(frame_index)));
  const auto d_rot = static_cast<float>(jitter.symmetric(view.jitter_rotation));
  const auto d_tx = static_cast<float>(jitter.symmetric(view.jitter_translation));
  const auto d_ty = static_cast<float>(jitter.symmetric(view.jitter_translation));

  const float c = std::cos(view.base.rotation + d_rot), s = std::sin(view.base.rotation + d_rot);
  const float k = view.base.shear, sc = view.base.scale;
  // forward M = sc * R * [[1, k], [0, 1]]
  const float a = sc * c, b = sc * (c * k - s), cc = sc * s, d = sc * (s * k + c);
  const float det = a * d - b * cc;
  return {d / det, -b / det, -cc / det, a / det, view.base.tx + d_tx, view.base.ty + d_ty};
}

Rgb lerp(const Rgb& x, const Rgb& y, float t) {
  return {x.r + (y.r - x.r) * t, x.g + (y.g - x.g) * t, x.b + (y.b - x.b) * t};
}

Rgb scaled(const Rgb& x, float f) { return {x.r * f, x.g * f, x.b * f}; }

float lattice(std::uint64_t seed, long long ix, long long iy) {
  const std::uint64_t key = static_cast<std::uint64_t>(ix) * 0x9E3779B1ULL ^ static_cast<std::uint64_t>(iy) * 0x85EBCA77ULL;
  return static_cast<float>(mix_seed(seed, key) >> 40) * 0x1.0p-24f;
}

// Smooth value noise in [0, 1).
float value_noise(const Backdrop& b, float u, float v) {
  const float x = u * b.noise_scale, y = v * b.noise_scale;
  const float fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<long long>(fx), iy = static_cast<long long>(fy);
  float tx = x - fx, ty = y - fy;
  tx = tx * tx * (3 - 2 * tx);
  ty = ty * ty * (3 - 2 * ty);
  const float n00 = lattice(b.texture_seed, ix, iy), n10 = lattice(b.texture_seed, ix + 1, iy);
  const float n01 = lattice(b.texture_seed, ix, iy + 1), n11 = lattice(b.texture_seed, ix + 1, iy + 1);
  return (n00 * (1 - tx) + n10 * tx) * (1 - ty) + (n01 * (1 - tx) + n11 * tx) * ty;
}

Rgb backdrop_color(const Backdrop& b, float u, float v) {
  return scaled(b.color, 1.0f + 2.0f * b.noise_amplitude * (value_noise(b, u, v) - 0.5f));
}

// Object footprint with trig precomputed once per render.
struct Footprint {
  ShapeKind shape;
  float u, v, half, reach;
  float c, s;
  std::array<float, 6> tri;  // triangle vertices (u,v) x3
  Rgb color;

  Footprint(const FloorObject& o, float u_at, float v_at, float size)
      : shape(o.shape), u(u_at), v(v_at), half(0.5f * size), reach(0.62f * size),
        c(std::cos(o.angle)), s(std::sin(o.angle)), tri{}, color(o.color) {
    for (int i = 0; i < 3; ++i) {
      const float a = o.angle + static_cast<float>(i) * 2.0f * std::numbers::pi_v<float> / 3.0f;
      tri[2 * i] = u + reach * std::cos(a);
      tri[2 * i + 1] = v + reach * std::sin(a);
    }
  }

  bool contains(float pu, float pv) const {
    const float dx = pu - u, dy = pv - v;
    if (std::abs(dx) > reach || std::abs(dy) > reach) return false;
    switch (shape) {
      case ShapeKind::circle:
        return dx * dx + dy * dy <= half * half;
      case ShapeKind::square: {
        const float lx = c * dx + s * dy, ly = -s * dx + c * dy;
        const float h = 0.9f * half;
        return std::abs(lx) <= h && std::abs(ly) <= h;
      }
      case ShapeKind::triangle: {
        bool pos = false, neg = false;
        for (int i = 0; i < 3; ++i) {
          const int j = (i + 1) % 3;
          const float e = (tri[2 * j] - tri[2 * i]) * (pv - tri[2 * i + 1]) - (tri[2 * j + 1] - tri[2 * i + 1]) * (pu - tri[2 * i]);
          pos |= e > 0;
          neg |= e < 0;
        }
        return !(pos && neg);
      }
    }
    return false;
  }
};

class FloorShader {
 public:
  explicit FloorShader(const FloorScene& scene) : scene_(scene) {
    for (const auto& o : scene.objects) objects_.emplace_back(o, o.u, o.v, o.size);
    const Rect& r = scene.storage_bounds;
    const float slot_w = (r.u1 - r.u0) / 5.0f, slot_h = (r.v1 - r.v0) / 3.0f;
    const float cap = 0.85f * std::min(slot_w, slot_h);
    for (std::size_t i = 0; i < scene.stored.size(); ++i) {
      const auto slot = i % 15;
      const float su = r.u0 + (static_cast<float>(slot % 5) + 0.5f) * slot_w;
      const float sv = r.v0 + (static_cast<float>(slot / 5) + 0.5f) * slot_h;
      stored_.emplace_back(scene.stored[i], su, sv, std::min(scene.stored[i].size, cap));
    }
  }

  Rgb operator()(float u, float v) const {
    const Rect& r = scene_.storage_bounds;
    if (u >= r.u0 && u <= r.u1 && v >= r.v0 && v <= r.v1) {
      for (auto it = stored_.rbegin(); it != stored_.rend(); ++it) {
        if (it->contains(u, v)) return it->color;
      }
      return scene_.storage_color;
    }
    for (auto it = objects_.rbegin(); it != objects_.rend(); ++it) {
      if (it->contains(u, v)) return it->color;
    }
    return backdrop_color(scene_.background, u, v);
  }

 private:
  const FloorScene& scene_;
  std::vector<Footprint> objects_;
  std::vector<Footprint> stored_;
};

class CupShader {
 public:
  explicit CupShader(const CupScene& scene) : scene_(scene) {
    const auto& g = scene.cup_geometry;
    const float cy = std::cos(g.yaw), sy = std::sin(g.yaw);
    const float width = std::sqrt(g.rim_scale * g.rim_scale * cy * cy + sy * sy);
    const float depth = std::sqrt(g.rim_scale * g.rim_scale * sy * sy + cy * cy);
    const float height = 0.34f * g.height_scale;
    top_ = 0.5f - 0.5f * height;
    bottom_ = 0.5f + 0.5f * height;
    rim_a_ = 0.15f * width;
    rim_b_ = 0.35f * 0.15f * depth;
    base_a_ = 0.72f * rim_a_;
    base_b_ = 0.72f * rim_b_;
    fill_ = static_cast<float>(std::clamp(scene.particle_count, 0, kFullCup)) / kFullCup;
    surface_ = bottom_ - fill_ * (bottom_ - top_);
  }

  Rgb operator()(float u, float v) const {
    Rgb c = backdrop_color(scene_.background, u, v);
    const float dx = u - 0.5f;
    const bool in_body = inside_body(dx, v);
    if (fill_ > 0 && in_liquid(dx, v)) {
      // particles as a dotted granular texture
      constexpr float cell = 0.022f;
      const float row = std::floor(v / cell);
      const float fu = u / cell + 0.5f * std::fmod(row, 2.0f) - std::floor(u / cell + 0.5f * std::fmod(row, 2.0f)) - 0.5f;
      const float fv = v / cell - row - 0.5f;
      const float grain = fu * fu + fv * fv < 0.16f ? 1.0f : 0.72f;
      const float surface_glint = std::abs(ellipse(dx, v - surface_, half_width(surface_), rim_b_ * half_width(surface_) / rim_a_) - 1.0f) < 0.25f ? 1.15f : 1.0f;
      const Rgb particle{scene_.particle_color.r, scene_.particle_color.g, scene_.particle_color.b};
      c = lerp(c, scaled(particle, grain * surface_glint), scene_.particle_color.a);
    }
    if (in_body) {
      c = lerp(c, Rgb{scene_.cup_color.r, scene_.cup_color.g, scene_.cup_color.b}, scene_.cup_color.a);
    }
    const bool rim_edge = std::abs(ellipse(dx, v - top_, rim_a_, rim_b_) - 1.0f) < 0.12f;
    const bool side_edge = v >= top_ && v <= bottom_ && std::abs(std::abs(dx) - half_width(v)) < 0.006f;
    if (rim_edge || side_edge) {
      c = lerp(c, scaled(Rgb{scene_.cup_color.r, scene_.cup_color.g, scene_.cup_color.b}, 0.55f), 0.8f);
    }
    return c;
  }

 private:
  static float ellipse(float x, float y, float a, float b) { return (x * x) / (a * a) + (y * y) / (b * b); }

  float half_width(float v) const {
    const float t = (v - top_) / (bottom_ - top_);
    return rim_a_ + (base_a_ - rim_a_) * t;
  }

  bool inside_body(float dx, float v) const {
    if (v >= top_ && v <= bottom_ && std::abs(dx) <= half_width(v)) return true;
    if (ellipse(dx, v - bottom_, base_a_, base_b_) <= 1.0f) return true;
    return ellipse(dx, v - top_, rim_a_, rim_b_) <= 1.0f;
  }

  bool in_liquid(float dx, float v) const {
    if (v >= surface_ && v <= bottom_ && std::abs(dx) <= half_width(v)) return true;
    if (ellipse(dx, v - bottom_, base_a_, base_b_) <= 1.0f) return true;
    const float hw = half_width(surface_);
    return ellipse(dx, v - surface_, hw, rim_b_ * hw / rim_a_) <= 1.0f;
  }

  const CupScene& scene_;
  float top_, bottom_, rim_a_, rim_b_, base_a_, base_b_, fill_, surface_;
};

template <typename Shader>
Tensor rasterize(const Shader& shade, const ViewParams& view, int frame_index, int size) {
  const Inverse inv = frame_inverse(view, frame_index);
  const auto n = static_cast<std::size_t>(size);
  Tensor image({n, n, 3});
  Rng noise(mix_seed(view.jitter_seed ^ 0xA5A5A5A5A5A5A5A5ULL, static_cast<std::uint64_t>(frame_index)));
  constexpr std::array<float, 2> kSub = {0.25f, 0.75f};
  const float inv_size = 1.0f / static_cast<float>(size);
  float* out = image.data();
  for (std::size_t py = 0; py < n; ++py) {
    for (std::size_t px = 0; px < n; ++px, out += 3) {
      Rgb acc;
      for (float sy : kSub) {
        for (float sx : kSub) {
          const float qx = (static_cast<float>(px) + sx) * inv_size - 0.5f - inv.tx;
          const float qy = (static_cast<float>(py) + sy) * inv_size - 0.5f - inv.ty;
          const float u = 0.5f + inv.m00 * qx + inv.m01 * qy;
          const float v = 0.5f + inv.m10 * qx + inv.m11 * qy;
          const Rgb c = shade(u, v);
          acc.r += c.r;
          acc.g += c.g;
          acc.b += c.b;
        }
      }
      const std::array<float, 3> rgb = {acc.r * 0.25f, acc.g * 0.25f, acc.b * 0.25f};
      for (int ch = 0; ch < 3; ++ch) {
        float x = (rgb[static_cast<std::size_t>(ch)] * view.photometric.brightness - 0.5f) * view.photometric.contrast + 0.5f;
        x += static_cast<float>(noise.symmetric(view.pixel_noise));
        out[ch] = std::clamp(x, 0.0f, 1.0f);
      }
    }
  }
  return image;
}

}  // namespace

Tensor render(const Scene& scene, const ViewParams& view, int frame_index, int size) {
  if (size < kMinImageSize || size > 1024) {
    throw InvalidArgument("render size " + std::to_string(size) + " outside [" + std::to_string(kMinImageSize) + ", 1024]");
  }
  if (const auto* floor = std::get_if<FloorScene>(&scene)) {
    return rasterize(FloorShader(*floor), view, frame_index, size);
  }
  return rasterize(CupShader(std::get<CupScene>(scene)), view, frame_index, size);
}

}  // namespace taskprog
