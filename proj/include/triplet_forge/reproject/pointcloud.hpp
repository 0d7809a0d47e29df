#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/image_io.hpp"
#include "triplet_forge/core/parallel.hpp"
#include "triplet_forge/core/tensor.hpp"
#include "triplet_forge/core/tensor_io.hpp"
#include "triplet_forge/reproject/camera.hpp"
#include "triplet_forge/warp/softmax_splat.hpp"

namespace tforge {

/// Metric depth along the camera z axis, [H,W,1]; 0 marks invalid pixels.
struct DepthMap {
  Tensor depth;

  std::size_t height() const { return depth.dim(0); }
  std::size_t width() const { return depth.dim(1); }
  bool valid(std::size_t i) const { return depth[i] > 0.0f; }
};

struct PointCloud {
  Tensor positions;  // [N,3] world
  Tensor colors;     // [N,3] in [0,1]
  std::size_t source_frame = 0;

  std::size_t size() const { return positions.empty() ? 0 : positions.dim(0); }
};

/// Pixel (u,v) with depth d maps to ((u-cx)/fx*d, (v-cy)/fy*d, d) in the
/// camera frame and then through the camera-to-world pose.
inline PointCloud unproject_depth(const Tensor& frame, const DepthMap& depth,
                                  const CameraIntrinsics& k, const CameraPose& pose,
                                  std::size_t source_frame = 0) {
  if (frame.rank() != 3 || frame.dim(2) != 3) throw SizeError("frame must be [H,W,3]");
  if (depth.depth.shape() != Shape{frame.dim(0), frame.dim(1), 1}) {
    throw SizeError("depth map " + shape_string(depth.depth.shape()) + " does not match frame " +
                    shape_string(frame.shape()));
  }
  const std::size_t h = frame.dim(0), w = frame.dim(1);
  std::vector<float> pos, col;
  pos.reserve(3 * h * w);
  col.reserve(3 * h * w);
  for (std::size_t v = 0; v < h; ++v) {
    for (std::size_t u = 0; u < w; ++u) {
      const std::size_t i = v * w + u;
      if (!depth.valid(i)) continue;
      const Eigen::Vector3d p =
          pose.apply(backproject(k, static_cast<double>(u), static_cast<double>(v), depth.depth[i]));
      pos.insert(pos.end(), {static_cast<float>(p.x()), static_cast<float>(p.y()),
                             static_cast<float>(p.z())});
      col.insert(col.end(), {frame[3 * i], frame[3 * i + 1], frame[3 * i + 2]});
    }
  }
  if (pos.empty()) throw EmptyInputError("depth map has no valid pixels");
  const std::size_t n = pos.size() / 3;
  return {Tensor({n, 3}, std::move(pos)), Tensor({n, 3}, std::move(col)), source_frame};
}

struct RenderParams {
  SplatParams splat{ImportanceMode::map, 1e-6f, 0.3f};
  double z_near = 1e-3;
  double z_scale = 0.1;
  double subpixel_steps = 256.0;  // projected positions snap to 1/subpixel_steps px

  bool operator==(const RenderParams&) const = default;
};

struct RenderedView {
  Tensor frame;  // [H,W,3]
  BinaryMask mask;
  Tensor weight;  // [H,W,1]
};

/// Softmax-splats every point in front of the camera with importance
/// Z = -z / z_scale, so nearer points dominate contested pixels.
/// Projected positions are snapped to a 1/subpixel_steps grid; otherwise
/// float32 round-off leaves ~1e-5 px taps that a nearer surface, weighted
/// by e^{dz/z_scale}, turns into visible bleeding.
inline RenderedView render_pointcloud(const PointCloud& cloud, const CameraIntrinsics& k,
                                      const CameraPose& pose, const RenderParams& params) {
  validate(k);
  if (!(params.z_scale > 0.0)) throw ConfigError("z_scale must be positive");
  if (!(params.subpixel_steps >= 1.0)) throw ConfigError("subpixel_steps must be >= 1");
  const CameraPose world_to_cam = pose.inverse();
  std::vector<SplatSample> samples;
  samples.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d pw(cloud.positions.at(i, 0), cloud.positions.at(i, 1),
                             cloud.positions.at(i, 2));
    const Eigen::Vector3d pc = world_to_cam.apply(pw);
    double u = 0, v = 0;
    if (!project(k, pc, params.z_near, u, v)) continue;
    u = std::round(u * params.subpixel_steps) / params.subpixel_steps;
    v = std::round(v * params.subpixel_steps) / params.subpixel_steps;
    samples.push_back({u, v, -pc.z() / params.z_scale, i});
  }
  SplatParams splat = params.splat;
  splat.importance_mode = ImportanceMode::map;
  const Tensor colors = cloud.size() ? cloud.colors : Tensor({0, 3});
  auto r = splat_samples(samples, colors, k.height, k.width, splat);
  BinaryMask mask = validity_mask(r.weight, splat.validity_threshold);
  return {std::move(r.warped), std::move(mask), std::move(r.weight)};
}

/// Per-point flag: projects inside the image and lies beyond z_near.
inline std::vector<bool> frustum_visible(const PointCloud& cloud, const CameraIntrinsics& k,
                                         const CameraPose& pose, double z_near = 1e-3) {
  const CameraPose world_to_cam = pose.inverse();
  std::vector<bool> out(cloud.size(), false);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d pc = world_to_cam.apply(
        {cloud.positions.at(i, 0), cloud.positions.at(i, 1), cloud.positions.at(i, 2)});
    double u = 0, v = 0;
    if (!project(k, pc, z_near, u, v)) continue;
    out[i] = u >= 0.0 && v >= 0.0 && u <= static_cast<double>(k.width - 1) &&
             v <= static_cast<double>(k.height - 1);
  }
  return out;
}

struct InferenceAnchor {
  VideoClip clip;
  BinaryMask mask;
};

/// Per frame t: unproject source[t] with (K, src_poses[t]), re-render with
/// (K, tgt_poses[t]). Frames without valid depth render as empty (zero mask).
inline InferenceAnchor synthesize_inference_anchor(const VideoClip& source,
                                                   const std::vector<DepthMap>& depths,
                                                   const std::vector<CameraPose>& src_poses,
                                                   const CameraIntrinsics& k,
                                                   const std::vector<CameraPose>& tgt_poses,
                                                   const RenderParams& params, unsigned threads = 1) {
  const std::size_t T = source.num_frames();
  if (depths.size() != T || src_poses.size() != T || tgt_poses.size() != T) {
    throw SizeError("source, depths and poses must have equal length (T=" + std::to_string(T) + ")");
  }
  if (k.width != source.width() || k.height != source.height()) {
    throw SizeError("intrinsics image size does not match the source video");
  }
  Tensor frames({T, k.height, k.width, 3});
  Tensor masks({T, k.height, k.width, 1});
  parallel_for(T, threads, [&](std::size_t t) {
    PointCloud cloud;
    try {
      cloud = unproject_depth(source.frame(t), depths[t], k, src_poses[t], t);
    } catch (const EmptyInputError&) {
      return;  // leaves a zero frame and zero mask
    }
    auto view = render_pointcloud(cloud, k, tgt_poses[t], params);
    frames.set_slice(t, view.frame);
    masks.set_slice(t, view.mask.values().slice(0));
  });
  return {VideoClip(std::move(frames), source.fps()), BinaryMask(std::move(masks))};
}

/// Depth from a stacked [T,H,W,1] file, a single [H,W,1] file, or a directory
/// of `depth_%06d.vtnsr` files.
inline std::vector<DepthMap> read_depths(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<DepthMap> out;
  const auto check = [](const Tensor& d) {
    if (d.rank() != 3 || d.dim(2) != 1) throw FormatError("depth map must be [H,W,1]");
    for (float v : d.data()) {
      if (!std::isfinite(v) || v < 0.0f) throw FormatError("depth must be finite and >= 0");
    }
  };
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      const auto name = e.path().filename().string();
      if (name.starts_with("depth_") && name.ends_with(".vtnsr")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      out.push_back({read_tensor(f)});
      check(out.back().depth);
    }
    if (out.empty()) throw EmptyInputError("no depth_*.vtnsr files in " + path.string());
    return out;
  }
  const Tensor t = read_tensor(path);
  if (t.rank() == 4) {
    for (std::size_t i = 0; i < t.dim(0); ++i) out.push_back({t.slice(i)});
  } else {
    out.push_back({t});
  }
  for (const auto& d : out) check(d.depth);
  return out;
}

}  // namespace tforge
