#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/rng.hpp"
#include "triplet_forge/core/tensor.hpp"
#include "triplet_forge/core/tensor_io.hpp"
#include "triplet_forge/trajectory/spline.hpp"

namespace tforge {

struct Extent {
  std::size_t width = 0;
  std::size_t height = 0;
  bool operator==(const Extent&) const = default;
};

/// Frame size W x H and crop size w x h.
struct CropBounds {
  Extent frame;
  Extent crop;

  std::size_t max_x() const { return frame.width - crop.width; }
  std::size_t max_y() const { return frame.height - crop.height; }
};

struct CropOffset {
  int x = 0;
  int y = 0;
  bool operator==(const CropOffset&) const = default;
};

/// Per-frame integer top-left positions of a fixed-size crop window.
struct CropTrajectory {
  std::vector<CropOffset> offsets;
  Extent crop;
  Extent source;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return offsets.size(); }
  bool operator==(const CropTrajectory&) const = default;
};

struct TrajectoryParams {
  double scale = 0.3;             // motion magnitude in [0,1]
  double control_rate = 1.5;      // control points per second

  bool operator==(const TrajectoryParams&) const = default;
};

inline void check_bounds(const CropBounds& b) {
  if (b.crop.width == 0 || b.crop.height == 0) throw SizeError("crop window is empty");
  if (b.crop.width > b.frame.width || b.crop.height > b.frame.height) {
    throw SizeError("crop " + std::to_string(b.crop.width) + "x" + std::to_string(b.crop.height) +
                    " larger than frame " + std::to_string(b.frame.width) + "x" +
                    std::to_string(b.frame.height));
  }
}

inline std::size_t control_point_count(double duration_s, double rate) {
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(duration_s * rate)));
}

/// Random walk of control points with evenly spaced normalized times.
/// Each step has Euclidean length at most scale * min(W-w, H-h); steps are
/// clamped into the admissible box, which can only shorten them.
inline std::vector<ControlPoint> sample_control_points(SeededRng& rng, double duration_s,
                                                       const CropBounds& bounds,
                                                       const TrajectoryParams& params) {
  check_bounds(bounds);
  if (!(params.scale >= 0.0 && params.scale <= 1.0)) throw ConfigError("scale must be in [0,1]");
  if (!(params.control_rate > 0.0)) throw ConfigError("control rate must be positive");

  const std::size_t n = control_point_count(duration_s, params.control_rate);
  const auto max_x = static_cast<double>(bounds.max_x());
  const auto max_y = static_cast<double>(bounds.max_y());
  const double step = params.scale * std::min(max_x, max_y);

  std::vector<ControlPoint> points(n);
  double x = rng.uniform(0.0, max_x);
  double y = rng.uniform(0.0, max_y);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      const double radius = step * std::sqrt(rng.uniform());
      const double angle = 2.0 * std::numbers::pi * rng.uniform();
      x = std::clamp(x + radius * std::cos(angle), 0.0, max_x);
      y = std::clamp(y + radius * std::sin(angle), 0.0, max_y);
    }
    points[i] = {static_cast<double>(i) / static_cast<double>(n - 1), x, y};
  }
  return points;
}

struct VideoGeometry {
  Extent frame;
  std::size_t frames = 0;
  double fps = 24.0;
};

/// Samples the spline at frame times t_f = f/(T-1), rounds to the nearest
/// pixel and clamps into the frame.
inline CropTrajectory generate_crop_trajectory(const VideoGeometry& video, Extent crop,
                                               const TrajectoryParams& params, SeededRng& rng) {
  if (video.frames == 0) throw SizeError("video has no frames");
  if (!(video.fps > 0.0)) throw ConfigError("fps must be positive");
  const CropBounds bounds{video.frame, crop};
  const double duration = static_cast<double>(video.frames) / video.fps;
  const auto points = sample_control_points(rng, duration, bounds, params);
  const auto spline = fit_natural_cubic_spline(points);

  CropTrajectory traj;
  traj.crop = crop;
  traj.source = video.frame;
  traj.seed = rng.seed();
  traj.offsets.resize(video.frames);
  for (std::size_t f = 0; f < video.frames; ++f) {
    const double t =
        video.frames == 1 ? 0.0 : static_cast<double>(f) / static_cast<double>(video.frames - 1);
    const auto [x, y] = spline.eval(t);
    traj.offsets[f] = {static_cast<int>(std::clamp<long long>(std::llround(x), 0,
                                                              static_cast<long long>(bounds.max_x()))),
                       static_cast<int>(std::clamp<long long>(std::llround(y), 0,
                                                              static_cast<long long>(bounds.max_y())))};
  }
  return traj;
}

inline void check_offset(const CropTrajectory& traj, CropOffset o) {
  if (o.x < 0 || o.y < 0 || static_cast<std::size_t>(o.x) + traj.crop.width > traj.source.width ||
      static_cast<std::size_t>(o.y) + traj.crop.height > traj.source.height) {
    throw BoundsError("crop offset (" + std::to_string(o.x) + "," + std::to_string(o.y) +
                      ") leaves the frame");
  }
}

/// Pure pixel copy of the crop window at each frame.
inline VideoClip extract_crop_clip(const VideoClip& video, const CropTrajectory& traj) {
  if (traj.size() != video.num_frames()) {
    throw BoundsError("trajectory length " + std::to_string(traj.size()) + " != clip length " +
                      std::to_string(video.num_frames()));
  }
  if (traj.source != Extent{video.width(), video.height()}) {
    throw BoundsError("trajectory source size does not match the video");
  }
  const std::size_t w = traj.crop.width, h = traj.crop.height;
  Tensor out({video.num_frames(), h, w, 3});
  const Tensor& in = video.frames();
  for (std::size_t t = 0; t < video.num_frames(); ++t) {
    const CropOffset o = traj.offsets[t];
    check_offset(traj, o);
    for (std::size_t y = 0; y < h; ++y) {
      const float* src = &in[in.offset(t, y + static_cast<std::size_t>(o.y),
                                       static_cast<std::size_t>(o.x), std::size_t{0})];
      std::copy(src, src + 3 * w, &out[out.offset(t, y, std::size_t{0}, std::size_t{0})]);
    }
  }
  return VideoClip(std::move(out), video.fps());
}

/// [T,2] float offsets plus a `<path>.meta` sidecar with sizes and seed.
inline void write_crop_trajectory(const CropTrajectory& traj, const std::filesystem::path& path) {
  Tensor t({traj.size(), 2});
  for (std::size_t i = 0; i < traj.size(); ++i) {
    t.at(i, 0) = static_cast<float>(traj.offsets[i].x);
    t.at(i, 1) = static_cast<float>(traj.offsets[i].y);
  }
  write_tensor(t, path);
  auto meta = path;
  meta += ".meta";
  std::ofstream os(meta, std::ios::trunc);
  if (!os) throw IoError("cannot write " + meta.string());
  os << "crop_size " << traj.crop.width << ' ' << traj.crop.height << '\n'
     << "source_size " << traj.source.width << ' ' << traj.source.height << '\n'
     << "seed " << traj.seed << '\n';
}

inline CropTrajectory read_crop_trajectory(const std::filesystem::path& path) {
  const Tensor t = read_tensor(path);
  if (t.rank() != 2 || t.dim(1) != 2) throw FormatError("trajectory tensor must be [T,2]");
  CropTrajectory traj;
  auto meta = path;
  meta += ".meta";
  std::ifstream is(meta);
  if (!is) throw InputError("missing trajectory sidecar " + meta.string());
  std::string key;
  while (is >> key) {
    if (key == "crop_size") is >> traj.crop.width >> traj.crop.height;
    else if (key == "source_size") is >> traj.source.width >> traj.source.height;
    else if (key == "seed") is >> traj.seed;
    else throw FormatError("unknown trajectory metadata key '" + key + "'");
    if (!is) throw FormatError("malformed trajectory metadata in " + meta.string());
  }
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    traj.offsets.push_back({static_cast<int>(t.at(i, 0)), static_cast<int>(t.at(i, 1))});
  }
  return traj;
}

}  // namespace tforge
