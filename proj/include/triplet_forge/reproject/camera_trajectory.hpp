#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/rng.hpp"
#include "triplet_forge/reproject/camera.hpp"

namespace tforge {

enum class CameraMotion { orbit, pan, zoom, shake, arc };

inline CameraMotion parse_camera_motion(std::string_view s) {
  if (s == "orbit") return CameraMotion::orbit;
  if (s == "pan") return CameraMotion::pan;
  if (s == "zoom") return CameraMotion::zoom;
  if (s == "shake") return CameraMotion::shake;
  if (s == "arc") return CameraMotion::arc;
  throw ConfigError("unknown camera trajectory kind '" + std::string(s) + "'");
}

/// Parametric camera paths relative to a base pose.
///
/// orbit: yaw by angle_deg about a pivot `pivot_distance` ahead on the view
///        axis, keeping the pivot centered.
/// pan:   world-frame translation by `delta`.
/// zoom:  translation by `distance` along the view axis.
/// shake: seeded band-limited jitter (`amplitude` m, `rotation_deg`).
/// arc:   orbit followed by zoom along the rotated view axis.
/// Every parameter is interpolated linearly with s = i/(n-1).
struct CameraTrajectorySpec {
  CameraMotion kind = CameraMotion::orbit;
  double angle_deg = 0.0;
  double pivot_distance = 3.0;
  Eigen::Vector3d delta = Eigen::Vector3d::Zero();
  double distance = 0.0;
  double amplitude = 0.02;
  double rotation_deg = 0.5;
  std::uint64_t seed = 0;
};

/// Parses `kind[:key=value,...]`, e.g. `orbit:angle=30,pivot=3` or
/// `pan:dx=0.2`. Keys: angle, pivot, dx, dy, dz, distance, amplitude,
/// rotation, seed.
inline CameraTrajectorySpec parse_camera_trajectory_spec(std::string_view text) {
  CameraTrajectorySpec spec;
  const auto colon = text.find(':');
  spec.kind = parse_camera_motion(text.substr(0, colon));
  if (colon == std::string_view::npos) return spec;
  std::istringstream items{std::string(text.substr(colon + 1))};
  std::string item;
  while (std::getline(items, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("trajectory parameter '" + item + "' lacks '='");
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(key);
    } catch (const std::logic_error&) {
      throw ConfigError("trajectory parameter '" + item + "' is not a number");
    }
    if (key == "angle") spec.angle_deg = value;
    else if (key == "pivot") spec.pivot_distance = value;
    else if (key == "dx") spec.delta.x() = value;
    else if (key == "dy") spec.delta.y() = value;
    else if (key == "dz") spec.delta.z() = value;
    else if (key == "distance") spec.distance = value;
    else if (key == "amplitude") spec.amplitude = value;
    else if (key == "rotation") spec.rotation_deg = value;
    else if (key == "seed") spec.seed = static_cast<std::uint64_t>(value);
    else throw ConfigError("unknown trajectory parameter '" + key + "'");
  }
  return spec;
}

namespace detail {

inline CameraPose orbit_pose(const CameraPose& base, double angle_rad, double pivot_distance) {
  const Eigen::Matrix3d r = base.rotation_matrix();
  const Eigen::Vector3d pivot = base.translation + pivot_distance * r.col(2);
  const Eigen::AngleAxisd yaw(angle_rad, r.col(1));
  Eigen::Quaterniond q = Eigen::Quaterniond(yaw) * base.rotation;
  q.normalize();
  return {q, pivot + yaw * (base.translation - pivot)};
}

}  // namespace detail

inline std::vector<CameraPose> make_camera_trajectory(const CameraTrajectorySpec& spec,
                                                      std::size_t n_frames,
                                                      const CameraPose& base) {
  if (n_frames < 1) throw ConfigError("camera trajectory needs at least one frame");
  const double deg = std::numbers::pi / 180.0;

  // Shake: three sinusoids per axis with 1/k weights and seeded phases.
  std::array<std::array<double, 3>, 6> phase{};
  if (spec.kind == CameraMotion::shake) {
    SeededRng rng(spec.seed, 0x5348414B45ull);
    for (auto& axis : phase) {
      for (auto& p : axis) p = 2.0 * std::numbers::pi * rng.uniform();
    }
  }

  std::vector<CameraPose> poses(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double s = n_frames == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_frames - 1);
    CameraPose p = base;
    switch (spec.kind) {
      case CameraMotion::orbit:
        p = detail::orbit_pose(base, s * spec.angle_deg * deg, spec.pivot_distance);
        break;
      case CameraMotion::pan:
        p.translation = base.translation + s * spec.delta;
        break;
      case CameraMotion::zoom:
        p.translation = base.translation + s * spec.distance * base.rotation_matrix().col(2);
        break;
      case CameraMotion::arc:
        p = detail::orbit_pose(base, s * spec.angle_deg * deg, spec.pivot_distance);
        p.translation += s * spec.distance * p.rotation_matrix().col(2);
        break;
      case CameraMotion::shake: {
        const auto wave = [&](std::size_t axis) {
          double v = 0.0;
          for (int k = 1; k <= 3; ++k) {
            v += std::sin(2.0 * std::numbers::pi * k * s + phase[axis][k - 1]) / k;
          }
          return v / (1.0 + 0.5 + 1.0 / 3.0);
        };
        p.translation = base.translation + spec.amplitude * Eigen::Vector3d(wave(0), wave(1), wave(2));
        const Eigen::Vector3d rv = spec.rotation_deg * deg * Eigen::Vector3d(wave(3), wave(4), wave(5));
        Eigen::Quaterniond dq = rv.norm() > 0 ? Eigen::Quaterniond(Eigen::AngleAxisd(rv.norm(), rv.normalized()))
                                              : Eigen::Quaterniond::Identity();
        p.rotation = (dq * base.rotation).normalized();
        break;
      }
    }
    poses[i] = p;
  }
  return poses;
}

}  // namespace tforge
