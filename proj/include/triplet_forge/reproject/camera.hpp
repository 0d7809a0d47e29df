#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"

namespace tforge {

/// Pinhole intrinsics in pixels.
struct CameraIntrinsics {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  std::size_t width = 1, height = 1;

  bool operator==(const CameraIntrinsics&) const = default;
};

inline void validate(const CameraIntrinsics& k) {
  if (!(k.fx > 0.0 && k.fy > 0.0)) throw ConfigError("focal lengths must be positive");
  if (!(k.cx >= 0.0 && k.cx < static_cast<double>(k.width) && k.cy >= 0.0 &&
        k.cy < static_cast<double>(k.height))) {
    throw ConfigError("principal point outside the image");
  }
}

/// Rigid camera-to-world transform: x_world = R * x_cam + t.
struct CameraPose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static CameraPose identity() { return {}; }

  /// Checked constructor; |q| must be 1 within 1e-6.
  static CameraPose from(const Eigen::Quaterniond& q, const Eigen::Vector3d& t) {
    if (std::abs(q.norm() - 1.0) > 1e-6) {
      throw ConfigError("pose quaternion is not unit length (|q| = " + std::to_string(q.norm()) + ")");
    }
    return {q, t};
  }

  Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  CameraPose inverse() const {
    const Eigen::Quaterniond qi = rotation.conjugate();
    return {qi, -(qi * translation)};
  }

  /// (this ∘ other): apply `other` first.
  CameraPose compose(const CameraPose& other) const {
    Eigen::Quaterniond q = rotation * other.rotation;
    q.normalize();
    return {q, rotation * other.translation + translation};
  }
};

/// Projects a camera-frame point; returns false when z <= z_near.
inline bool project(const CameraIntrinsics& k, const Eigen::Vector3d& p_cam, double z_near,
                    double& u, double& v) {
  if (!(p_cam.z() > z_near)) return false;
  u = k.fx * p_cam.x() / p_cam.z() + k.cx;
  v = k.fy * p_cam.y() / p_cam.z() + k.cy;
  return true;
}

inline Eigen::Vector3d backproject(const CameraIntrinsics& k, double u, double v, double depth) {
  return {(u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth};
}

// --- text formats -------------------------------------------------------

/// `fx fy cx cy width height`
inline CameraIntrinsics read_intrinsics(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open intrinsics file " + path.string());
  CameraIntrinsics k;
  if (!(is >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height)) {
    throw FormatError(path.string() + ":1: expected 'fx fy cx cy width height'");
  }
  validate(k);
  return k;
}

inline void write_intrinsics(const CameraIntrinsics& k, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << std::setprecision(17) << k.fx << ' ' << k.fy << ' ' << k.cx << ' ' << k.cy << ' '
     << k.width << ' ' << k.height << '\n';
}

/// Lines `frame_idx qw qx qy qz tx ty tz`; blank lines and `#` comments skipped.
/// Poses are returned in file order; frame indices must be 0..T-1 in sequence.
inline std::vector<CameraPose> read_poses(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open pose file " + path.string());
  std::vector<CameraPose> poses;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    long long idx = 0;
    double qw, qx, qy, qz, tx, ty, tz;
    std::string rest;
    if (!(ls >> idx >> qw >> qx >> qy >> qz >> tx >> ty >> tz) || (ls >> rest)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": expected 'frame_idx qw qx qy qz tx ty tz'");
    }
    if (idx != static_cast<long long>(poses.size())) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": frame index " +
                        std::to_string(idx) + " out of sequence");
    }
    try {
      poses.push_back(CameraPose::from({qw, qx, qy, qz}, {tx, ty, tz}));
    } catch (const ConfigError& e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return poses;
}

inline void write_poses(const std::vector<CameraPose>& poses, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << std::setprecision(17);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const auto& q = poses[i].rotation;
    const auto& t = poses[i].translation;
    os << i << ' ' << q.w() << ' ' << q.x() << ' ' << q.y() << ' ' << q.z() << ' ' << t.x() << ' '
       << t.y() << ' ' << t.z() << '\n';
  }
}

}  // namespace tforge
