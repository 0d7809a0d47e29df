#include <gtest/gtest.h>

#include "test_support.hpp"
#include "triplet_forge/pipeline/config.hpp"

namespace tforge {
namespace {

TEST(PipelineConfig, DefaultsRoundTrip) {
  const PipelineConfig c;
  EXPECT_EQ(parse_config(dump_config(c)), c);
  EXPECT_EQ(parse_config("{}"), c);
}

TEST(PipelineConfig, EditedValuesRoundTripThroughFile) {
  PipelineConfig c;
  c.seed = 987654321012345ull;
  c.threads = 3;
  c.triplet.crop = {40, 32};
  c.triplet.trajectory.scale = 0.45;
  c.triplet.augment.background = Background::fluorescent;
  c.triplet.augment.random_reference = true;
  c.triplet.splat.validity_threshold = 0.25f;
  c.render.splat.validity_threshold = 0.25f;
  c.render.subpixel_steps = 64.0;
  c.train.model.rope.rope_offset = 80;
  c.train.model.rope.dim_t = 8;
  c.train.model.rope.dim_h = 4;
  c.train.model.rope.dim_w = 4;
  c.train.patch = {1, 2, 2};
  c.train.alpha = 0.0;
  c.ransac.inlier_px = 1.5;
  c.trans_err_mode = TransErrMode::unnormalized;
  c.manifest.ratio_synthetic = 0.3;
  testing::TempDir dir;
  save_config(c, dir.path() / "cfg.json");
  EXPECT_EQ(load_config(dir.path() / "cfg.json"), c);
}

TEST(PipelineConfig, SplatSectionFeedsRenderer) {
  const auto c = parse_config(R"({"splat": {"validity_threshold": 0.5}})");
  EXPECT_FLOAT_EQ(c.triplet.splat.validity_threshold, 0.5f);
  EXPECT_FLOAT_EQ(c.render.splat.validity_threshold, 0.5f);
  EXPECT_EQ(c.render.splat.importance_mode, ImportanceMode::map);
}

TEST(PipelineConfig, UnknownKeysAreRejected) {
  EXPECT_THROW(parse_config(R"({"sed": 1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": {"alhpa": 0.1}})"), ConfigError);
  try {
    parse_config(R"({"anchor": {"noise": 0.1}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("anchor.noise"), std::string::npos);
  }
}

TEST(PipelineConfig, TypeAndRangeErrors) {
  EXPECT_THROW(parse_config(R"({"seed": -1})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"threads": 0})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"trajectory": {"scale": "big"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"trajectory": {"scale": 1.5}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"trajectory": {"crop_width": 10}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"anchor": {"background": "blue"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": {"patch": [1, 2]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"model": {"heads": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"metrics": {"trans_err_mode": "scaled"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"manifest": {"ratio_synthetic": 2}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"vae": 4})"), ConfigError);
}

TEST(PipelineConfig, MalformedJsonIsFormatError) {
  EXPECT_THROW(parse_config("{\"seed\": "), FormatError);
  testing::TempDir dir;
  EXPECT_THROW(load_config(dir.path() / "missing.json"), InputError);
}

}  // namespace
}  // namespace tforge
