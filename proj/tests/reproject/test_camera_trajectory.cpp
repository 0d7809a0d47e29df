#include <gtest/gtest.h>

#include <numbers>

#include "test_support.hpp"
#include "triplet_forge/reproject/camera_trajectory.hpp"
#include "triplet_forge/reproject/pointcloud.hpp"
#include "triplet_forge/synthetic/scene.hpp"

namespace tforge {
namespace {

CameraPose tilted_base() {
  Eigen::Quaterniond q(Eigen::AngleAxisd(0.4, Eigen::Vector3d(0.2, 1.0, -0.3).normalized()));
  return {q, Eigen::Vector3d(0.5, -0.2, 1.0)};
}

TEST(CameraTrajectory, ZeroOrbitIsConstant) {
  const auto base = tilted_base();
  for (const auto& p : make_camera_trajectory(parse_camera_trajectory_spec("orbit:angle=0"), 7, base)) {
    EXPECT_LE((p.rotation_matrix() - base.rotation_matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((p.translation - base.translation).norm(), 1e-12);
  }
}

TEST(CameraTrajectory, NinetyDegreeOrbitFollowsCircle) {
  const auto base = tilted_base();
  const double r = 2.5;
  const auto poses = make_camera_trajectory(
      parse_camera_trajectory_spec("orbit:angle=90,pivot=2.5"), 9, base);
  const Eigen::Matrix3d R = base.rotation_matrix();
  const Eigen::Vector3d pivot = base.translation + r * R.col(2);
  // Closed form: the camera starts at pivot - r*z and ends at pivot - r*x'
  // where rotating by +90 deg about y maps z to x.
  const Eigen::Vector3d expected_end = pivot - r * R.col(0);
  EXPECT_LE((poses.back().translation - expected_end).norm(), 1e-5);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const double s = static_cast<double>(i) / 8.0;
    const double a = s * std::numbers::pi / 2;
    const Eigen::Vector3d on_circle = pivot - r * (std::cos(a) * R.col(2) + std::sin(a) * R.col(0));
    EXPECT_LE((poses[i].translation - on_circle).norm(), 1e-5);
    // The pivot stays on the optical axis.
    const Eigen::Vector3d pc = poses[i].inverse().apply(pivot);
    EXPECT_NEAR(pc.x(), 0.0, 1e-9);
    EXPECT_NEAR(pc.y(), 0.0, 1e-9);
    EXPECT_NEAR(pc.z(), r, 1e-9);
  }
}

TEST(CameraTrajectory, PanIsLinear) {
  const auto base = tilted_base();
  const auto poses = make_camera_trajectory(parse_camera_trajectory_spec("pan:dx=0.3"), 6, base);
  for (std::size_t t = 0; t < 6; ++t) {
    const Eigen::Vector3d expected = base.translation + Eigen::Vector3d(0.3 * t / 5.0, 0, 0);
    EXPECT_LE((poses[t].translation - expected).norm(), 1e-12);
    EXPECT_TRUE(poses[t].rotation.coeffs() == base.rotation.coeffs());
  }
}

TEST(CameraTrajectory, ZoomMovesAlongViewAxis) {
  const auto base = tilted_base();
  const auto poses = make_camera_trajectory(parse_camera_trajectory_spec("zoom:distance=1"), 3, base);
  EXPECT_LE((poses[2].translation - base.translation - base.rotation_matrix().col(2)).norm(), 1e-12);
}

TEST(CameraTrajectory, ShakeIsSeededAndBounded) {
  const auto base = CameraPose::identity();
  const auto a = make_camera_trajectory(parse_camera_trajectory_spec("shake:amplitude=0.05,seed=3"), 20, base);
  const auto b = make_camera_trajectory(parse_camera_trajectory_spec("shake:amplitude=0.05,seed=3"), 20, base);
  const auto c = make_camera_trajectory(parse_camera_trajectory_spec("shake:amplitude=0.05,seed=4"), 20, base);
  bool differs = false;
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_TRUE(a[i].translation == b[i].translation);
    EXPECT_LE(a[i].translation.cwiseAbs().maxCoeff(), 0.05 + 1e-12);
    differs |= a[i].translation != c[i].translation;
  }
  EXPECT_TRUE(differs);
}

TEST(CameraTrajectory, ParseErrors) {
  EXPECT_THROW(parse_camera_trajectory_spec("spiral"), ConfigError);
  EXPECT_THROW(parse_camera_trajectory_spec("orbit:angle"), ConfigError);
  EXPECT_THROW(parse_camera_trajectory_spec("orbit:angle=abc"), ConfigError);
  EXPECT_THROW(parse_camera_trajectory_spec("orbit:speed=1"), ConfigError);
  EXPECT_THROW(make_camera_trajectory({}, 0, CameraPose::identity()), ConfigError);
}

// Anchor rendered along an orbit versus the analytic ray-cast of the scene
// from the same cameras.
TEST(InferenceAnchor, OrbitMatchesAnalyticRender) {
  const synthetic::PlanarScene scene{.frames = 5, .card_velocity = 0.0};
  const auto src_poses = scene.source_poses();
  const auto seq = scene.sequence(src_poses);
  for (const char* spec : {"orbit:angle=10,pivot=3", "orbit:angle=-15,pivot=4", "pan:dx=0.2,dy=0.1"}) {
    const auto tgt = make_camera_trajectory(parse_camera_trajectory_spec(spec), 5, src_poses[0]);
    const auto a = synthesize_inference_anchor(seq.video, seq.depths, src_poses, scene.intrinsics(), tgt, {});
    std::size_t n = 0, close = 0;
    for (std::size_t t = 0; t < 5; ++t) {
      const auto truth = scene.render(tgt[t], t);
      for (std::size_t i = 0; i < scene.width * scene.height; ++i) {
        if (a.mask.values()[t * scene.width * scene.height + i] == 0.0f || !truth.depth.valid(i)) continue;
        ++n;
        bool ok = true;
        for (std::size_t c = 0; c < 3; ++c) {
          ok &= std::abs(a.clip.frames()[(t * scene.width * scene.height + i) * 3 + c] -
                         truth.frame[3 * i + c]) <= 3.0f / 255.0f;
        }
        close += ok;
      }
    }
    ASSERT_GT(n, 0u);
    EXPECT_GE(static_cast<double>(close), 0.95 * static_cast<double>(n)) << spec << " close " << close << "/" << n;
  }
}

}  // namespace
}  // namespace tforge
