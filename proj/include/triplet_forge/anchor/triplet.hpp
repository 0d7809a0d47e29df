#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "triplet_forge/anchor/augment.hpp"
#include "triplet_forge/core/image_io.hpp"
#include "triplet_forge/core/parallel.hpp"
#include "triplet_forge/core/rng.hpp"
#include "triplet_forge/core/tensor.hpp"
#include "triplet_forge/core/tensor_io.hpp"
#include "triplet_forge/trajectory/crop_trajectory.hpp"
#include "triplet_forge/warp/flow.hpp"
#include "triplet_forge/warp/softmax_splat.hpp"

namespace tforge {

struct AnchorVideo {
  VideoClip clip;
  BinaryMask mask;
  Tensor weight;  // [T,h,w,1] splat weight before thresholding
  std::size_t reference_index = 0;
};

inline std::size_t choose_reference_index(std::size_t frames, const AnchorAugConfig& aug,
                                          SeededRng& rng) {
  if (aug.random_reference) return static_cast<std::size_t>(rng.uniform_index(frames));
  if (aug.reference_index >= frames) {
    throw SizeError("reference index " + std::to_string(aug.reference_index) + " out of range");
  }
  return aug.reference_index;
}

/// Forward-warps the (noised) reference source frame along the offset-aware
/// flow of every frame:  V_a[t] = SoftSplat(V_s[ref], F_comb(t)).
///
/// `tracks` must have been queried from the chosen reference frame. The
/// reference index is drawn from rng.split(1) and the noise from rng.split(2).
inline AnchorVideo synthesize_anchor_video(const VideoClip& source, const TrackSet& tracks,
                                           const CropTrajectory& src_traj,
                                           const CropTrajectory& tgt_traj,
                                           const AnchorAugConfig& aug, const SplatParams& splat,
                                           const SeededRng& rng, unsigned threads = 1) {
  validate(aug);
  validate(splat);
  const std::size_t T = source.num_frames();
  if (src_traj.size() != T || tgt_traj.size() != T || tracks.frames() != T) {
    throw SizeError("source clip, trajectories and tracks disagree on frame count");
  }
  if (src_traj.crop != tgt_traj.crop ||
      src_traj.crop != Extent{source.width(), source.height()}) {
    throw SizeError("crop sizes of source and target trajectories differ");
  }
  if (tracks.width() != src_traj.source.width || tracks.height() != src_traj.source.height) {
    throw SizeError("tracks do not cover the uncropped video");
  }

  auto ref_rng = rng.split(1);
  auto noise_rng = rng.split(2);
  const std::size_t ref = choose_reference_index(T, aug, ref_rng);

  const Tensor reference = aug.noise_max > 0.0f
                               ? inject_structured_noise(source.frame(ref), noise_rng, aug.noise_max)
                               : source.frame(ref);
  const FlowField flow =
      compose_offset_flow(tracks.for_reference(ref), src_traj.offsets[ref], tgt_traj, src_traj.crop);

  const std::size_t h = source.height(), w = source.width();
  Tensor frames({T, h, w, 3});
  Tensor weight({T, h, w, 1});
  parallel_for(T, threads, [&](std::size_t t) {
    auto r = softmax_splat(reference, flow.at_frame(t), splat);
    frames.set_slice(t, r.warped);
    weight.set_slice(t, r.weight);
  });

  BinaryMask mask = validity_mask(weight, splat.validity_threshold);
  VideoClip clip = apply_background(VideoClip(std::move(frames), source.fps()), mask, aug.background);
  return {std::move(clip), std::move(mask), std::move(weight), ref};
}

struct TripletConfig {
  double crop_fraction = 0.6;  // square side as a fraction of min(W,H)
  Extent crop{};                // overrides crop_fraction when non-zero
  TrajectoryParams trajectory{};
  AnchorAugConfig augment{};
  SplatParams splat{};

  bool operator==(const TripletConfig&) const = default;
};

inline Extent triplet_crop(const TripletConfig& cfg, Extent frame) {
  if (cfg.crop.width && cfg.crop.height) return cfg.crop;
  if (!(cfg.crop_fraction > 0.0 && cfg.crop_fraction <= 1.0)) {
    throw ConfigError("crop_fraction must be in (0,1]");
  }
  const auto side = static_cast<std::size_t>(
      std::lround(cfg.crop_fraction * static_cast<double>(std::min(frame.width, frame.height))));
  return {std::max<std::size_t>(side, 1), std::max<std::size_t>(side, 1)};
}

struct TrainingTriplet {
  VideoClip source;
  VideoClip anchor;
  VideoClip target;
  BinaryMask anchor_mask;
  CropTrajectory source_trajectory;
  CropTrajectory target_trajectory;
  std::uint64_t seed = 0;
  std::size_t reference_index = 0;
};

/// Source and target crops follow independent trajectories drawn from
/// split streams 1 and 2 of SeededRng(seed); the anchor uses stream 3.
inline TrainingTriplet build_triplet(const VideoClip& video, const TrackSet& tracks,
                                     const TripletConfig& cfg, std::uint64_t seed,
                                     unsigned threads = 1) {
  if (tracks.frames() != video.num_frames() || tracks.width() != video.width() ||
      tracks.height() != video.height()) {
    throw SizeError("tracks must cover the full uncropped video");
  }
  const SeededRng root(seed);
  const Extent frame{video.width(), video.height()};
  const Extent crop = triplet_crop(cfg, frame);
  const VideoGeometry geom{frame, video.num_frames(), video.fps()};

  auto src_rng = root.split(1);
  auto tgt_rng = root.split(2);
  auto src_traj = generate_crop_trajectory(geom, crop, cfg.trajectory, src_rng);
  auto tgt_traj = generate_crop_trajectory(geom, crop, cfg.trajectory, tgt_rng);

  VideoClip source = extract_crop_clip(video, src_traj);
  VideoClip target = extract_crop_clip(video, tgt_traj);
  auto anchor = synthesize_anchor_video(source, tracks, src_traj, tgt_traj, cfg.augment, cfg.splat,
                                        root.split(3), threads);
  return {std::move(source),   std::move(anchor.clip),    std::move(target),
          std::move(anchor.mask), std::move(src_traj),   std::move(tgt_traj),
          seed,                anchor.reference_index};
}

/// Writes source/, anchor/, target/ image sequences, anchor_mask.vtnsr and meta.txt.
inline void write_triplet(const TrainingTriplet& tr, const std::filesystem::path& dir,
                          std::string_view config_echo) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_image_sequence(tr.source, dir / "source");
  write_image_sequence(tr.anchor, dir / "anchor");
  write_image_sequence(tr.target, dir / "target");
  write_tensor(tr.anchor_mask.values(), dir / "anchor_mask.vtnsr");

  std::ofstream os(dir / "meta.txt", std::ios::trunc);
  if (!os) throw IoError("cannot write meta.txt in " + dir.string());
  os << "seed " << tr.seed << '\n'
     << "reference_index " << tr.reference_index << '\n'
     << "frames " << tr.source.num_frames() << '\n'
     << "crop_size " << tr.source_trajectory.crop.width << ' ' << tr.source_trajectory.crop.height
     << '\n'
     << "source_size " << tr.source_trajectory.source.width << ' '
     << tr.source_trajectory.source.height << '\n';
  const auto dump = [&](const char* name, const CropTrajectory& traj) {
    os << name;
    for (const auto& o : traj.offsets) os << ' ' << o.x << ',' << o.y;
    os << '\n';
  };
  dump("source_offsets", tr.source_trajectory);
  dump("target_offsets", tr.target_trajectory);
  os << "mask_mean " << mask_mean(tr.anchor_mask) << '\n';
  os << "config " << config_echo << '\n';
}

}  // namespace tforge
