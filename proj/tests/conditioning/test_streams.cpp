#include <gtest/gtest.h>

#include "test_support.hpp"
#include "triplet_forge/conditioning/streams.hpp"

namespace tforge {
namespace {

LatentClip random_latent(std::size_t C, std::size_t T, std::size_t H, std::size_t W, SeededRng& rng) {
  return {testing::random_tensor({C, T, H, W}, rng, -2, 2), 1, 1};
}

TEST(Streams, AnchorLayout) {
  SeededRng rng(1);
  const auto za = random_latent(4, 3, 2, 5, rng), zn = random_latent(4, 3, 2, 5, rng);
  Tensor m({3, 2, 5, 1});
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = static_cast<float>(i % 2);
  const auto s = assemble_anchor_stream(za, zn, BinaryMask(m), 2);
  EXPECT_EQ(s.channels(), 10u);
  EXPECT_EQ(s.kind, StreamKind::anchor);
  const auto parts = disassemble(s);
  EXPECT_EQ(parts.first, zn.z);
  EXPECT_EQ(parts.reference, za.z);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(parts.mask[c * 30 + i], m[i]);
  }
  const auto ones = assemble_anchor_stream(za, zn, BinaryMask::ones(3, 2, 5), 2);
  const Tensor ones_mask = disassemble(ones).mask;
  for (float v : ones_mask.data()) EXPECT_EQ(v, 1.0f);
  EXPECT_THROW(assemble_anchor_stream(za, random_latent(4, 3, 2, 4, rng), BinaryMask::ones(3, 2, 5), 2), SizeError);
}

TEST(Streams, AnchorMaskDownsampledFromPixels) {
  SeededRng rng(2);
  LatentClip za{testing::random_tensor({3, 2, 2, 2}, rng), 4, 4};
  LatentClip zn{testing::random_tensor({3, 2, 2, 2}, rng), 4, 4};
  Tensor m({5, 8, 8, 1});
  m.at(4, 2, 6, 0) = 1.0f;  // latent (1, 0, 1)
  const auto s = assemble_anchor_stream(za, zn, BinaryMask(m), 1);
  const auto mask = disassemble(s).mask;
  float total = 0;
  for (float v : mask.data()) total += v;
  EXPECT_EQ(total, 1.0f);
  EXPECT_EQ(mask.at(0, 1, 0, 1), 1.0f);
}

TEST(Streams, SourceDuplicatesLatent) {
  SeededRng rng(3);
  const auto zs = random_latent(5, 2, 3, 3, rng);
  const auto s = assemble_source_stream(zs, 4);
  EXPECT_EQ(s.channels(), 14u);
  EXPECT_EQ(s.kind, StreamKind::source);
  const auto parts = disassemble(s);
  EXPECT_EQ(parts.first, zs.z);
  EXPECT_EQ(parts.reference, zs.z);
  for (float v : parts.mask.data()) EXPECT_EQ(v, 1.0f);
}

TEST(Patchify, RoundTripAndErrors) {
  SeededRng rng(4);
  const Tensor x = testing::random_tensor({3, 4, 6, 2}, rng);
  const PatchSize p{2, 3, 1};
  const Patches ps = patchify(x, p);
  EXPECT_EQ(ps.vectors.shape(), (Shape{2 * 2 * 2, 3 * 6}));
  EXPECT_EQ(unpatchify(ps.vectors, 3, 4, 6, 2, p), x);
  EXPECT_EQ(ps.positions[3], (TokenPosition{0, 1, 1}));
  EXPECT_THROW(patchify(x, {3, 1, 1}), SizeError);
}

PatchEmbedding random_embedding(std::size_t K, std::size_t D, SeededRng& rng) {
  return {testing::random_tensor({K, D}, rng, -1, 1), testing::random_tensor({D}, rng, -1, 1)};
}

TEST(ConcatStreams, CountsAndPositions) {
  SeededRng rng(5);
  const auto za = random_latent(2, 2, 2, 2, rng), zn = random_latent(2, 2, 2, 2, rng);
  const auto a = assemble_anchor_stream(za, zn, BinaryMask::ones(2, 2, 2), 1);
  const auto s = assemble_source_stream(random_latent(2, 2, 2, 2, rng), 1);
  const auto g = concat_streams(a, s, random_embedding(5, 8, rng), {1, 1, 1}, 50);
  ASSERT_EQ(g.size(), 16u);
  EXPECT_EQ(g.tokens.shape(), (Shape{16, 8}));
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(g.segment[i], Segment::target);
    EXPECT_EQ(g.segment[i + 8], Segment::source);
    EXPECT_EQ(g.positions[i + 8].t, g.positions[i].t + 50);
    EXPECT_EQ(g.positions[i + 8].h, g.positions[i].h);
    EXPECT_LE(g.positions[i].t, 1);
  }
  EXPECT_EQ(g.positions[8].t, 50);
}

TEST(ConcatStreams, SharedEmbeddingGivesEqualTokensForEqualPatches) {
  SeededRng rng(6);
  const auto zs = random_latent(3, 2, 2, 2, rng);
  const auto s = assemble_source_stream(zs, 1);
  const ConditionStream a{s.tensor, StreamKind::anchor, 3, 1};
  const auto g = concat_streams(a, s, random_embedding(7, 4, rng), {1, 1, 1}, 50);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t d = 0; d < 4; ++d) EXPECT_EQ(g.tokens.at(i, d), g.tokens.at(i + 8, d));
}

TEST(ConcatStreams, SegmentSeparationAtTwentyLatentFrames) {
  SeededRng rng(7);
  const auto z = random_latent(1, 20, 1, 1, rng);
  const auto a = assemble_anchor_stream(z, z, BinaryMask::ones(20, 1, 1), 1);
  const auto s = assemble_source_stream(z, 1);
  const auto g = concat_streams(a, s, random_embedding(3, 2, rng), {1, 1, 1}, 50);
  // Closed form: offset - (T_L - 1).
  EXPECT_EQ(min_cross_segment_distance(g), 31);
  EXPECT_GE(min_cross_segment_distance(g), 30);
}

}  // namespace
}  // namespace tforge
