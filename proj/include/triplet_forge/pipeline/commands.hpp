#pragma once

// Subcommand bodies. Each takes a validated PipelineConfig, writes its
// artifacts into a staged directory that is renamed into place on success,
// echoes the config next to them and prints a one-line summary.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "triplet_forge/anchor/triplet.hpp"
#include "triplet_forge/conditioning/toy_train.hpp"
#include "triplet_forge/core/image_io.hpp"
#include "triplet_forge/core/tensor_io.hpp"
#include "triplet_forge/metrics/dataset.hpp"
#include "triplet_forge/metrics/matching.hpp"
#include "triplet_forge/metrics/pose_metrics.hpp"
#include "triplet_forge/pipeline/config.hpp"
#include "triplet_forge/reproject/camera_trajectory.hpp"
#include "triplet_forge/reproject/pointcloud.hpp"
#include "triplet_forge/synthetic/scene.hpp"

namespace tforge {

/// Frozen process exit codes.
enum class ExitCode : int { ok = 0, internal = 1, input = 2, format = 3, size_or_config = 4, numeric = 5 };

inline ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Input:
    case ErrorKind::EmptyInput: return ExitCode::input;
    case ErrorKind::Format:
    case ErrorKind::Domain: return ExitCode::format;
    case ErrorKind::Size:
    case ErrorKind::Bounds:
    case ErrorKind::InvalidKnots:
    case ErrorKind::Config: return ExitCode::size_or_config;
    case ErrorKind::InvalidFlow:
    case ErrorKind::Numeric: return ExitCode::numeric;
  }
  return ExitCode::internal;
}

/// `error code=N kind=K msg="..."` with quotes, backslashes and newlines escaped.
inline std::string format_error_line(int code, std::string_view kind, std::string_view msg) {
  std::string escaped;
  for (char c : msg) {
    if (c == '"' || c == '\\') escaped += '\\';
    escaped += c == '\n' ? ' ' : c;
  }
  std::ostringstream os;
  os << "error code=" << code << " kind=" << kind << " msg=\"" << escaped << '"';
  return os.str();
}

/// Runs `fn`, mapping any escaping exception onto an exit code and a single
/// error line on `err`.
template <class Fn>
int run_guarded(std::ostream& err, Fn&& fn) {
  const auto fail = [&err](ExitCode code, std::string_view kind, std::string_view msg) {
    err << format_error_line(static_cast<int>(code), kind, msg) << '\n';
    return static_cast<int>(code);
  };
  try {
    fn();
    return 0;
  } catch (const Error& e) {
    return fail(exit_code_for(e.kind()), to_string(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ExitCode::input, to_string(ErrorKind::Io), e.what());
  } catch (const std::exception& e) {
    return fail(ExitCode::internal, "InternalError", e.what());
  }
}

namespace detail {

/// `<final>.partial` while being written; renamed over `final` on commit.
class StagedDir {
 public:
  explicit StagedDir(std::filesystem::path final_path) : final_(std::move(final_path)) {
    if (final_.empty()) throw ConfigError("--out is required");
    staging_ = final_;
    staging_ += ".partial";
    std::filesystem::remove_all(staging_);
    std::filesystem::create_directories(staging_);
  }
  StagedDir(const StagedDir&) = delete;
  StagedDir& operator=(const StagedDir&) = delete;
  ~StagedDir() {
    std::error_code ec;
    if (!committed_) std::filesystem::remove_all(staging_, ec);
  }

  const std::filesystem::path& path() const { return staging_; }

  void commit() {
    std::filesystem::remove_all(final_);
    std::filesystem::rename(staging_, final_);
    committed_ = true;
  }

 private:
  std::filesystem::path final_, staging_;
  bool committed_ = false;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::vector<char>(text.begin(), text.end()));
}

inline void echo_config(const PipelineConfig& cfg, const std::filesystem::path& dir) {
  save_config(cfg, dir / "config.json");
}

inline std::string fixed(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace detail

/// Builds one training triplet. Rank-4 tracks are taken as queried from
/// anchor.reference_index.
inline void cmd_make_triplet(const PipelineConfig& cfg, const std::filesystem::path& video_dir,
                             const std::filesystem::path& tracks_file, const std::filesystem::path& out,
                             std::ostream& summary) {
  validate(cfg);
  const VideoClip video = load_image_sequence(video_dir);
  const TrackSet tracks = read_tracks(tracks_file, cfg.triplet.augment.reference_index);
  const auto triplet = build_triplet(video, tracks, cfg.triplet, cfg.seed, cfg.threads);

  detail::StagedDir dir(out);
  write_triplet(triplet, dir.path(), config_to_json(cfg).dump());
  detail::echo_config(cfg, dir.path());
  dir.commit();
  summary << "make-triplet frames=" << triplet.source.num_frames() << " crop=" << triplet.source.width() << 'x'
          << triplet.source.height() << " reference=" << triplet.reference_index
          << " mask_mean=" << detail::fixed(mask_mean(triplet.anchor_mask)) << '\n';
}

/// Inference anchor along a parametric camera path. The path starts at the
/// first source pose, so target poses are expressed in the source world frame.
inline void cmd_make_anchor(const PipelineConfig& cfg, const std::filesystem::path& video_dir,
                            const std::filesystem::path& depth_path, const std::filesystem::path& poses_file,
                            const std::filesystem::path& intrinsics_file, const std::string& trajectory,
                            const std::filesystem::path& out, std::ostream& summary) {
  validate(cfg);
  const VideoClip video = load_image_sequence(video_dir);
  const auto depths = read_depths(depth_path);
  const auto src_poses = read_poses(poses_file);
  const auto k = read_intrinsics(intrinsics_file);
  if (src_poses.empty()) throw EmptyInputError("pose file " + poses_file.string() + " has no poses");
  auto spec = parse_camera_trajectory_spec(trajectory);
  const auto tgt_poses = make_camera_trajectory(spec, video.num_frames(), src_poses.front());
  const auto anchor = synthesize_inference_anchor(video, depths, src_poses, k, tgt_poses, cfg.render, cfg.threads);

  detail::StagedDir dir(out);
  write_image_sequence(anchor.clip, dir.path() / "anchor");
  write_tensor(anchor.mask.values(), dir.path() / "anchor_mask.vtnsr");
  write_poses(tgt_poses, dir.path() / "target_poses.txt");
  detail::echo_config(cfg, dir.path());
  dir.commit();
  summary << "make-anchor frames=" << video.num_frames() << " trajectory=" << trajectory
          << " mask_mean=" << detail::fixed(mask_mean(anchor.mask)) << '\n';
}

struct EvalInputs {
  std::filesystem::path gen_poses;
  std::filesystem::path gt_poses;
  std::optional<std::filesystem::path> matches;
  std::vector<std::filesystem::path> masks;
};

/// Report lines in fixed order: rot_err_deg, trans_err_normalized,
/// trans_err_unnormalized, degenerate_scale, trans_err (configured mode),
/// mat_pix (only with a matches file), mask_mean per mask.
inline std::string eval_report(const PipelineConfig& cfg, const EvalInputs& in) {
  validate(cfg);
  const auto gen = read_poses(in.gen_poses);
  const auto gt = read_poses(in.gt_poses);
  const auto norm = trans_err(gen, gt, TransErrMode::normalized);
  const auto unnorm = trans_err(gen, gt, TransErrMode::unnormalized);
  std::ostringstream os;
  os << std::setprecision(10);
  os << "rot_err_deg " << rot_err(gen, gt) << '\n';
  os << "trans_err_normalized " << norm.value << '\n';
  os << "trans_err_unnormalized " << unnorm.value << '\n';
  os << "degenerate_scale " << (norm.degenerate_scale ? 1 : 0) << '\n';
  os << "trans_err " << to_string(cfg.trans_err_mode) << ' '
     << (cfg.trans_err_mode == TransErrMode::normalized ? norm.value : unnorm.value) << '\n';
  if (in.matches) {
    const auto r = matching_pixels(read_matches(*in.matches), cfg.ransac);
    os << "mat_pix " << r.count << '\n';
    os << "mat_pix_filtered " << r.filtered << '\n';
    os << "mat_pix_insufficient " << (r.insufficient_matches ? 1 : 0) << '\n';
  }
  for (const auto& p : in.masks) {
    os << "mask_mean " << p.stem().string() << ' ' << mask_mean(BinaryMask(read_tensor(p))) << '\n';
  }
  return os.str();
}

inline void cmd_eval(const PipelineConfig& cfg, const EvalInputs& in, const std::filesystem::path& out,
                     std::ostream& summary) {
  const std::string report = eval_report(cfg, in);
  if (!out.empty()) {
    detail::StagedDir dir(out);
    detail::write_text(dir.path() / "report.txt", report);
    detail::echo_config(cfg, dir.path());
    dir.commit();
  }
  summary << report;
}

/// Pools are manifest files; their origin column is overwritten by the pool role.
inline void cmd_mix_manifest(const PipelineConfig& cfg, const std::filesystem::path& real_pool,
                             const std::filesystem::path& synthetic_pool, const std::filesystem::path& out,
                             std::ostream& summary) {
  validate(cfg);
  SeededRng rng(cfg.seed);
  const auto m = mix_manifest(read_manifest(real_pool), read_manifest(synthetic_pool), cfg.manifest.ratio_synthetic,
                              cfg.manifest.size, rng);
  std::ostringstream text;
  write_manifest(m.entries, text);
  detail::StagedDir dir(out);
  detail::write_text(dir.path() / "manifest.txt", text.str());
  detail::echo_config(cfg, dir.path());
  dir.commit();
  summary << "mix-manifest total=" << m.entries.size() << " synthetic=" << m.count(Origin::synthetic)
          << " real=" << m.count(Origin::real) << '\n';
}

inline void cmd_select_eval(const PipelineConfig& cfg, const std::filesystem::path& stats_file,
                            const std::filesystem::path& out, std::ostream& summary) {
  validate(cfg);
  const auto ids = select_eval_set(read_stats(stats_file), cfg.manifest.k_per_group);
  std::string text;
  for (const auto& id : ids) text += id + '\n';
  detail::StagedDir dir(out);
  detail::write_text(dir.path() / "eval_ids.txt", text);
  detail::echo_config(cfg, dir.path());
  dir.commit();
  summary << "select-eval selected=" << ids.size() << '\n';
}

/// Writes loss.txt (header plus one line per step), the final parameters
/// under params/ and the config echo.
inline void cmd_toy_train(const PipelineConfig& cfg, const std::filesystem::path& triplet_dir, std::size_t steps,
                          const std::filesystem::path& out, std::ostream& summary) {
  validate(cfg);
  const auto clips = load_triplet_clips(triplet_dir);
  ToyModelParams<double> params;
  const auto log = toy_train(clips, cfg.train, steps, SeededRng(cfg.seed), &params);

  std::ostringstream text;
  write_loss_header(text);
  for (std::size_t i = 0; i < log.size(); ++i) write_loss_line(text, i, log[i]);
  detail::StagedDir dir(out);
  detail::write_text(dir.path() / "loss.txt", text.str());
  if (steps > 0) save_params(params, dir.path() / "params");
  detail::echo_config(cfg, dir.path());
  dir.commit();
  summary << "toy-train steps=" << steps;
  if (!log.empty()) {
    summary << " first_total=" << detail::fixed(log.front().total, 9) << " last_total="
            << detail::fixed(log.back().total, 9);
  }
  summary << '\n';
}

namespace detail {

inline std::vector<CameraPose> perturb_poses(const std::vector<CameraPose>& poses, SeededRng& rng, double rot_deg,
                                             double trans_sigma) {
  std::vector<CameraPose> out;
  for (const auto& p : poses) {
    const Eigen::Vector3d axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const double angle = rot_deg * std::numbers::pi / 180.0 * rng.uniform();
    const Eigen::Quaterniond dq(Eigen::AngleAxisd(angle, axis));
    const Eigen::Vector3d dt(trans_sigma * rng.normal(), trans_sigma * rng.normal(), trans_sigma * rng.normal());
    out.push_back({(dq * p.rotation).normalized(), p.translation + dt});
  }
  return out;
}

/// Planted homography with `inliers` exact matches (0.3 px jitter),
/// `outliers` random pairs and 20 low-confidence distractors.
inline std::vector<Correspondence> planted_matches(SeededRng& rng, std::size_t inliers, std::size_t outliers) {
  Eigen::Matrix3d h;
  h << 1.05, 0.04, 6.0, -0.03, 0.97, -4.0, 1e-4, -5e-5, 1.0;
  std::vector<Correspondence> m;
  const auto add_inlier = [&](double conf) {
    const double x = rng.uniform(0.0, 256.0), y = rng.uniform(0.0, 256.0);
    const Eigen::Vector3d q = h * Eigen::Vector3d(x, y, 1.0);
    m.push_back({x, y, q.x() / q.z() + rng.uniform(-0.3, 0.3), q.y() / q.z() + rng.uniform(-0.3, 0.3), conf});
  };
  for (std::size_t i = 0; i < inliers; ++i) add_inlier(rng.uniform(0.6, 1.0));
  for (std::size_t i = 0; i < outliers; ++i) {
    m.push_back({rng.uniform(0.0, 256.0), rng.uniform(0.0, 256.0), rng.uniform(0.0, 256.0), rng.uniform(0.0, 256.0),
                 rng.uniform(0.6, 1.0)});
  }
  for (int i = 0; i < 20; ++i) add_inlier(rng.uniform(0.0, 0.4));
  rng.shuffle(m);
  return m;
}

inline std::string pool_text(const char* prefix, std::size_t n, Origin origin) {
  std::ostringstream os;
  for (std::size_t i = 0; i < n; ++i) {
    os << prefix << '_' << std::setw(4) << std::setfill('0') << i << ' ' << to_string(origin) << ' ' << prefix
       << '/' << std::setw(4) << std::setfill('0') << i << '\n';
  }
  return os.str();
}

}  // namespace detail

/// Golden orbit used by the bundled scene: 30 degrees about a pivot 3 m ahead.
inline constexpr const char* kGoldenOrbit = "orbit:angle=30,pivot=3";

/// Bundled test fixture:
///   video/, tracks.vtnsr [T,T,H,W,2], identity_tracks.vtnsr [T,H,W,2]
///   scene3d/{frames/, depth.vtnsr, poses.txt, intrinsics.txt,
///            golden_orbit30/, golden_orbit30_valid.vtnsr}
///   eval/{gt_poses.txt, gen_poses.txt, matches.txt, stats.txt,
///         real_pool.txt, synthetic_pool.txt}
inline void cmd_gen_synthetic_scene(const PipelineConfig& cfg, const std::filesystem::path& out,
                                    std::ostream& summary) {
  validate(cfg);
  namespace fs = std::filesystem;
  detail::StagedDir dir(out);
  const fs::path root = dir.path();

  const synthetic::LayeredScene layered;
  write_image_sequence(layered.video(), root / "video");
  write_tensor(layered.all_tracks(), root / "tracks.vtnsr");
  write_tensor(synthetic::identity_tracks(layered.frames, layered.height, layered.width),
               root / "identity_tracks.vtnsr");

  const synthetic::PlanarScene planar;
  const auto src_poses = planar.source_poses();
  const auto seq = planar.sequence(src_poses);
  fs::create_directories(root / "scene3d");
  write_image_sequence(seq.video, root / "scene3d" / "frames");
  std::vector<Tensor> depth_frames;
  for (const auto& d : seq.depths) depth_frames.push_back(d.depth);
  write_tensor(stack(depth_frames), root / "scene3d" / "depth.vtnsr");
  write_poses(src_poses, root / "scene3d" / "poses.txt");
  write_intrinsics(planar.intrinsics(), root / "scene3d" / "intrinsics.txt");

  const auto orbit = make_camera_trajectory(parse_camera_trajectory_spec(kGoldenOrbit), planar.frames, src_poses[0]);
  Tensor golden({planar.frames, planar.height, planar.width, 3});
  Tensor golden_valid({planar.frames, planar.height, planar.width, 1});
  for (std::size_t t = 0; t < planar.frames; ++t) {
    const auto view = planar.render(orbit[t], t);
    golden.set_slice(t, view.frame);
    for (std::size_t i = 0; i < planar.width * planar.height; ++i) {
      golden_valid[t * planar.width * planar.height + i] = view.depth.valid(i) ? 1.0f : 0.0f;
    }
  }
  write_image_sequence(VideoClip(std::move(golden), planar.fps), root / "scene3d" / "golden_orbit30");
  write_tensor(golden_valid, root / "scene3d" / "golden_orbit30_valid.vtnsr");

  SeededRng rng(cfg.seed);
  auto pose_rng = rng.split(1);
  auto match_rng = rng.split(2);
  auto stat_rng = rng.split(3);
  fs::create_directories(root / "eval");
  CameraTrajectorySpec gt_spec;
  gt_spec.kind = CameraMotion::arc;
  gt_spec.angle_deg = 20.0;
  gt_spec.distance = 0.5;
  const auto gt = make_camera_trajectory(gt_spec, 16, CameraPose::identity());
  write_poses(gt, root / "eval" / "gt_poses.txt");
  write_poses(detail::perturb_poses(gt, pose_rng, 0.5, 0.01), root / "eval" / "gen_poses.txt");
  write_matches(detail::planted_matches(match_rng, 160, 40), root / "eval" / "matches.txt");

  std::vector<ClipStat> stats;
  for (int g = 0; g < 10; ++g) {
    for (int c = 0; c < 100; ++c) {
      std::ostringstream id, group;
      id << "clip_" << g << '_' << std::setw(3) << std::setfill('0') << c;
      group << "group_" << g;
      stats.push_back({id.str(), group.str(), stat_rng.uniform(0.2, 0.9)});
    }
  }
  std::ostringstream stats_text;
  write_stats(stats, stats_text);
  detail::write_text(root / "eval" / "stats.txt", stats_text.str());
  detail::write_text(root / "eval" / "real_pool.txt", detail::pool_text("real", 200, Origin::real));
  detail::write_text(root / "eval" / "synthetic_pool.txt", detail::pool_text("synthetic", 50, Origin::synthetic));

  detail::echo_config(cfg, root);
  dir.commit();
  summary << "gen-synthetic-scene frames=" << layered.frames << " size=" << layered.width << 'x' << layered.height
          << '\n';
}

}  // namespace tforge
