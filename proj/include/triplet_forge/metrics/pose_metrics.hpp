#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/reproject/camera.hpp"

namespace tforge {

using PoseTrajectory = std::vector<CameraPose>;

/// pose[0]^-1 ∘ pose[i] for every i.
inline PoseTrajectory align_to_first(const PoseTrajectory& traj) {
  if (traj.empty()) throw EmptyInputError("empty pose trajectory");
  const CameraPose inv0 = traj.front().inverse();
  PoseTrajectory out;
  out.reserve(traj.size());
  for (const auto& p : traj) out.push_back(inv0.compose(p));
  return out;
}

/// rel[i] = pose[i]^-1 ∘ pose[i+1].
inline std::vector<CameraPose> relative_poses(const PoseTrajectory& traj) {
  if (traj.size() < 2) throw SizeError("relative poses need at least two poses");
  std::vector<CameraPose> rel;
  rel.reserve(traj.size() - 1);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) rel.push_back(traj[i].inverse().compose(traj[i + 1]));
  return rel;
}

/// Geodesic rotation angle in radians; q and -q give the same angle.
inline double rotation_angle(const Eigen::Quaterniond& q) {
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

namespace detail {

inline void check_pair(const PoseTrajectory& gen, const PoseTrajectory& gt) {
  if (gen.size() != gt.size()) {
    throw SizeError("trajectory lengths differ (" + std::to_string(gen.size()) + " vs " +
                    std::to_string(gt.size()) + ")");
  }
  if (gen.size() < 2) throw SizeError("pose metrics need at least two poses");
}

}  // namespace detail

/// Sum over steps of the angle of rel_gen[i] * rel_gt[i]^-1, in degrees.
inline double rot_err(const PoseTrajectory& gen, const PoseTrajectory& gt) {
  detail::check_pair(gen, gt);
  const auto rg = relative_poses(align_to_first(gen));
  const auto rt = relative_poses(align_to_first(gt));
  double sum = 0.0;
  for (std::size_t i = 0; i < rg.size(); ++i) {
    sum += rotation_angle(rg[i].rotation * rt[i].rotation.conjugate());
  }
  return sum * 180.0 / std::numbers::pi;
}

enum class TransErrMode { normalized, unnormalized };

struct TransErrResult {
  double value = 0.0;
  // Normalized mode only: ground truth has zero path length while the
  // generated one moves, so no common scale exists.
  bool degenerate_scale = false;
};

/// Sum of squared differences of relative translations. In normalized mode
/// each trajectory's relative translations are divided by its own total path
/// length (sum of their norms); zero-length paths are left unscaled.
inline TransErrResult trans_err(const PoseTrajectory& gen, const PoseTrajectory& gt,
                                TransErrMode mode = TransErrMode::normalized) {
  detail::check_pair(gen, gt);
  const auto rg = relative_poses(align_to_first(gen));
  const auto rt = relative_poses(align_to_first(gt));
  double len_g = 0.0, len_t = 0.0;
  for (std::size_t i = 0; i < rg.size(); ++i) {
    len_g += rg[i].translation.norm();
    len_t += rt[i].translation.norm();
  }
  TransErrResult r;
  const bool norm = mode == TransErrMode::normalized;
  r.degenerate_scale = norm && len_t == 0.0 && len_g > 0.0;
  const double sg = norm && len_g > 0.0 ? 1.0 / len_g : 1.0;
  const double st = norm && len_t > 0.0 ? 1.0 / len_t : 1.0;
  for (std::size_t i = 0; i < rg.size(); ++i) {
    r.value += (sg * rg[i].translation - st * rt[i].translation).squaredNorm();
  }
  return r;
}

inline std::string to_string(TransErrMode m) { return m == TransErrMode::normalized ? "normalized" : "unnormalized"; }

inline TransErrMode parse_trans_err_mode(const std::string& s) {
  if (s == "normalized") return TransErrMode::normalized;
  if (s == "unnormalized") return TransErrMode::unnormalized;
  throw ConfigError("unknown trans_err mode '" + s + "'");
}

}  // namespace tforge
