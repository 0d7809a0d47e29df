#include <gtest/gtest.h>

#include "triplet_forge/synthetic/scene.hpp"
#include "triplet_forge/warp/flow.hpp"

namespace tforge {
namespace {

CropTrajectory constant_traj(std::size_t T, CropOffset o, Extent crop, Extent src) {
  return {std::vector<CropOffset>(T, o), crop, src};
}

TEST(ComposeOffsetFlow, IdentityTracksWithEqualOffsetsCancel) {
  const FlowField tracks{synthetic::identity_tracks(5, 20, 24), 0};
  const auto f = compose_offset_flow(tracks, {3, 2}, constant_traj(5, {3, 2}, {10, 8}, {24, 20}), {10, 8});
  EXPECT_EQ(f.flow.shape(), (Shape{5, 8, 10, 2}));
  for (float v : f.flow.data()) EXPECT_EQ(v, 0.0f);
}

TEST(ComposeOffsetFlow, PureOffsetTerm) {
  const FlowField tracks{synthetic::identity_tracks(3, 20, 24), 0};
  const auto f = compose_offset_flow(tracks, {3, 2}, constant_traj(3, {6, 2}, {10, 8}, {24, 20}), {10, 8});
  for (std::size_t i = 0; i < f.flow.size(); i += 2) {
    EXPECT_EQ(f.flow[i], -3.0f);
    EXPECT_EQ(f.flow[i + 1], 0.0f);
  }
}

TEST(ComposeOffsetFlow, TranslatingSceneGivesLinearFlow) {
  // Closed-form tracks of a scene translating +1 px/frame in x.
  const std::size_t T = 6, H = 12, W = 16;
  Tensor tr({T, H, W, 2});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t x = 0; x < W; ++x) tr.at(t, y, x, 0) = static_cast<float>(t);
  const auto f = compose_offset_flow({tr, 0}, {2, 1}, constant_traj(T, {2, 1}, {8, 8}, {W, H}), {8, 8});
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < 8; ++y)
      for (std::size_t x = 0; x < 8; ++x) {
        EXPECT_EQ(f.flow.at(t, y, x, 0), static_cast<float>(t));
        EXPECT_EQ(f.flow.at(t, y, x, 1), 0.0f);
      }
}

TEST(ComposeOffsetFlow, SamplesTracksAtSourceWindow) {
  const synthetic::LayeredScene scene;
  const FlowField tracks{scene.tracks_from(0), 0};
  const CropOffset os{5, 7};
  const auto tgt = constant_traj(scene.frames, {9, 4}, {20, 20}, {scene.width, scene.height});
  const auto f = compose_offset_flow(tracks, os, tgt, {20, 20});
  for (std::size_t t = 0; t < scene.frames; t += 5)
    for (std::size_t y = 0; y < 20; y += 3)
      for (std::size_t x = 0; x < 20; x += 3) {
        EXPECT_EQ(f.flow.at(t, y, x, 0), tracks.flow.at(t, y + 7, x + 5, 0) + 5.0f - 9.0f);
        EXPECT_EQ(f.flow.at(t, y, x, 1), tracks.flow.at(t, y + 7, x + 5, 1) + 7.0f - 4.0f);
      }
}

TEST(ComposeOffsetFlow, TooSmallTrackFieldIsSizeError) {
  const FlowField tracks{synthetic::identity_tracks(2, 10, 10), 0};
  EXPECT_THROW(compose_offset_flow(tracks, {4, 0}, constant_traj(2, {0, 0}, {8, 8}, {10, 10}), {8, 8}),
               SizeError);
}

TEST(TrackSet, ServesOnlyDeclaredReferences) {
  const TrackSet single(synthetic::identity_tracks(4, 6, 6), 2);
  EXPECT_TRUE(single.has_reference(2));
  EXPECT_THROW(single.for_reference(1), SizeError);

  const synthetic::LayeredScene scene{.width = 16, .height = 12, .frames = 4, .fg_x0 = 4, .fg_y0 = 2, .fg_size = 4};
  const TrackSet stacked(scene.all_tracks());
  EXPECT_TRUE(stacked.per_reference());
  EXPECT_EQ(stacked.for_reference(3).flow, scene.tracks_from(3));
}

}  // namespace
}  // namespace tforge
