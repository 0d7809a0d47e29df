#pragma once

// Procedural test scenes with exact ground truth: a two-layer sliding scene
// with dense tracks, and a piecewise-planar 3D scene with an analytic
// ray-cast renderer.

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "triplet_forge/core/tensor.hpp"
#include "triplet_forge/reproject/camera.hpp"
#include "triplet_forge/reproject/pointcloud.hpp"

namespace tforge::synthetic {

inline float quantize8(double v) {
  return static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f;
}

/// Textured background translating by `bg_velocity` px/frame with an opaque
/// square foreground moving by `fg_velocity`. Velocities are integers, so
/// every track is an exact pixel shift.
struct LayeredScene {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t frames = 16;
  double fps = 24.0;
  int bg_vx = 1, bg_vy = 0;
  int fg_vx = -1, fg_vy = 1;
  int fg_x0 = 26, fg_y0 = 18;
  int fg_size = 14;

  bool in_foreground(long long x, long long y, std::size_t t) const {
    const long long fx = fg_x0 + fg_vx * static_cast<long long>(t);
    const long long fy = fg_y0 + fg_vy * static_cast<long long>(t);
    return x >= fx && x < fx + fg_size && y >= fy && y < fy + fg_size;
  }

  /// Background texture coordinate visible at (x,y,t) when not occluded.
  std::array<long long, 2> background_point(long long x, long long y, std::size_t t) const {
    return {x - bg_vx * static_cast<long long>(t), y - bg_vy * static_cast<long long>(t)};
  }

  static std::array<float, 3> background_color(long long u, long long v) {
    const double x = static_cast<double>(u), y = static_cast<double>(v);
    return {quantize8(0.5 + 0.3 * std::sin(0.31 * x + 0.2) * std::cos(0.17 * y)),
            quantize8(0.45 + 0.3 * std::sin(0.13 * x - 0.23 * y + 1.0)),
            quantize8(0.5 + 0.25 * std::cos(0.27 * y + 0.11 * x))};
  }

  static std::array<float, 3> foreground_color(long long u, long long v) {
    const bool check = ((u / 3) + (v / 3)) % 2 == 0;
    return {check ? 0.95f : 0.2f, quantize8(0.1 + 0.05 * static_cast<double>(u % 5)),
            check ? 0.15f : 0.85f};
  }

  std::array<float, 3> color(long long x, long long y, std::size_t t) const {
    if (in_foreground(x, y, t)) {
      return foreground_color(x - fg_x0 - fg_vx * static_cast<long long>(t),
                              y - fg_y0 - fg_vy * static_cast<long long>(t));
    }
    const auto [u, v] = background_point(x, y, t);
    return background_color(u, v);
  }

  VideoClip video() const {
    Tensor f({frames, height, width, 3});
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
          const auto c = color(static_cast<long long>(x), static_cast<long long>(y), t);
          std::copy(c.begin(), c.end(), &f.at(t, y, x, std::size_t{0}));
        }
      }
    }
    return VideoClip(std::move(f), fps);
  }

  /// Tracks [T,H,W,2] from frame `ref`; background points are tracked
  /// through occlusion, as a dense tracker would report them.
  Tensor tracks_from(std::size_t ref) const {
    Tensor tr({frames, height, width, 2});
    for (std::size_t t = 0; t < frames; ++t) {
      const auto dt = static_cast<long long>(t) - static_cast<long long>(ref);
      for (std::size_t y = 0; y < height; ++y) {
        for (std::size_t x = 0; x < width; ++x) {
          const bool fg = in_foreground(static_cast<long long>(x), static_cast<long long>(y), ref);
          tr.at(t, y, x, 0) = static_cast<float>((fg ? fg_vx : bg_vx) * dt);
          tr.at(t, y, x, 1) = static_cast<float>((fg ? fg_vy : bg_vy) * dt);
        }
      }
    }
    return tr;
  }

  /// Stacked per-reference tracks [T,T,H,W,2].
  Tensor all_tracks() const {
    std::vector<Tensor> per_ref;
    for (std::size_t r = 0; r < frames; ++r) per_ref.push_back(tracks_from(r));
    return stack(per_ref);
  }
};

/// Identity tracks (zero displacement) for a T x H x W video.
inline Tensor identity_tracks(std::size_t frames, std::size_t height, std::size_t width) {
  return Tensor({frames, height, width, 2});
}

/// Back plane at z = back_z plus a rectangular card at z = card_z moving
/// by card_velocity m/frame along x. Both textures are smooth.
struct PlanarScene {
  std::size_t width = 64;
  std::size_t height = 64;
  std::size_t frames = 16;
  double fps = 24.0;
  double back_z = 4.0;
  double card_z = 2.5;
  double card_half = 0.35;
  double card_velocity = 0.01;

  CameraIntrinsics intrinsics() const {
    const double f = 0.9 * static_cast<double>(width);
    return {f, f, 0.5 * static_cast<double>(width - 1), 0.5 * static_cast<double>(height - 1),
            width, height};
  }

  static std::array<double, 3> back_color(double x, double y) {
    return {0.5 + 0.2 * std::sin(0.9 * x + 0.4) * std::cos(0.7 * y),
            0.45 + 0.2 * std::sin(0.6 * x - 0.8 * y + 1.0),
            0.5 + 0.2 * std::cos(0.8 * y + 0.5 * x)};
  }

  static std::array<double, 3> card_color(double x, double y) {
    return {0.8 + 0.1 * std::sin(2.0 * x), 0.25 + 0.1 * std::cos(2.0 * y),
            0.3 + 0.1 * std::sin(1.5 * (x + y))};
  }

  struct Hit {
    double depth = 0.0;  // along the camera z axis
    std::array<double, 3> color{};
    bool valid = false;
  };

  /// Ray-casts pixel (u,v) of a camera with intrinsics k at frame t.
  Hit cast(const CameraIntrinsics& k, const CameraPose& pose, double u, double v,
           std::size_t t) const {
    const Eigen::Vector3d d = pose.rotation * Eigen::Vector3d((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
    const Eigen::Vector3d& o = pose.translation;
    Hit hit;
    if (std::abs(d.z()) < 1e-12) return hit;
    const double card_x = card_velocity * static_cast<double>(t);
    const double lc = (card_z - o.z()) / d.z();
    if (lc > 0.0) {
      const Eigen::Vector3d p = o + lc * d;
      if (std::abs(p.x() - card_x) <= card_half && std::abs(p.y()) <= card_half) {
        return {lc, card_color(p.x() - card_x, p.y()), true};
      }
    }
    const double lb = (back_z - o.z()) / d.z();
    if (lb > 0.0) {
      const Eigen::Vector3d p = o + lb * d;
      return {lb, back_color(p.x(), p.y()), true};
    }
    return hit;
  }

  struct View {
    Tensor frame;  // [H,W,3], 8-bit quantized
    DepthMap depth;
  };

  View render(const CameraPose& pose, std::size_t t) const {
    const auto k = intrinsics();
    View view{Tensor({height, width, 3}), {Tensor({height, width, 1})}};
    for (std::size_t v = 0; v < height; ++v) {
      for (std::size_t u = 0; u < width; ++u) {
        const auto hit = cast(k, pose, static_cast<double>(u), static_cast<double>(v), t);
        if (!hit.valid) continue;
        for (std::size_t c = 0; c < 3; ++c) view.frame.at(v, u, c) = quantize8(hit.color[c]);
        view.depth.depth.at(v, u, std::size_t{0}) = static_cast<float>(hit.depth);
      }
    }
    return view;
  }

  /// Static source camera at the origin looking down +z.
  std::vector<CameraPose> source_poses() const { return std::vector<CameraPose>(frames); }

  struct Sequence {
    VideoClip video;
    std::vector<DepthMap> depths;
  };

  Sequence sequence(const std::vector<CameraPose>& poses) const {
    Tensor f({poses.size(), height, width, 3});
    std::vector<DepthMap> depths;
    for (std::size_t t = 0; t < poses.size(); ++t) {
      auto view = render(poses[t], t);
      f.set_slice(t, view.frame);
      depths.push_back(std::move(view.depth));
    }
    return {VideoClip(std::move(f), fps), std::move(depths)};
  }
};

}  // namespace tforge::synthetic
