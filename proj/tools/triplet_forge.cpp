#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "triplet_forge/pipeline/commands.hpp"

namespace {

using tforge::PipelineConfig;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
};

void add_common(CLI::App* sub, CommonFlags& f, bool out_required) {
  sub->add_option("--config", f.config, "JSON config file (defaults apply to missing keys)");
  sub->add_option("--seed", f.seed, "Overrides the config seed");
  sub->add_option("--threads", f.threads, "Per-frame worker threads")->check(CLI::PositiveNumber);
  auto* out = sub->add_option("--out", f.out, "Output directory");
  if (out_required) out->required();
}

PipelineConfig resolve_config(const CommonFlags& f) {
  PipelineConfig cfg = f.config.empty() ? PipelineConfig{} : tforge::load_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (f.threads) cfg.threads = *f.threads;
  tforge::validate(cfg);
  return cfg;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("triplet-forge");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TRIPLET_FORGE_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; keep the default instead.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Pseudo multi-view triplet and anchor pipeline"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* triplet = app.add_subcommand("make-triplet", "Build a (source, anchor, target) training triplet");
  std::string video_dir, tracks_file;
  triplet->add_option("--video", video_dir, "Directory of frame_NNNNNN.png")->required();
  triplet->add_option("--tracks", tracks_file, "Dense tracks .vtnsr, [T,H,W,2] or [T,T,H,W,2]")->required();
  add_common(triplet, flags, true);

  auto* anchor = app.add_subcommand("make-anchor", "Render an inference anchor along a camera path");
  std::string depth_path, poses_file, intrinsics_file, trajectory = "orbit:angle=0";
  anchor->add_option("--video", video_dir, "Directory of frame_NNNNNN.png")->required();
  anchor->add_option("--depth", depth_path, "Depth .vtnsr or directory of depth_NNNNNN.vtnsr")->required();
  anchor->add_option("--poses", poses_file, "Source camera-to-world poses")->required();
  anchor->add_option("--intrinsics", intrinsics_file, "Pinhole intrinsics")->required();
  anchor->add_option("--trajectory", trajectory, "kind[:key=value,...], e.g. orbit:angle=30,pivot=3");
  add_common(anchor, flags, true);

  auto* eval = app.add_subcommand("eval", "Geometric metrics report");
  tforge::EvalInputs eval_in;
  std::string matches_file;
  std::vector<std::string> mask_files;
  eval->add_option("--gen", eval_in.gen_poses, "Generated-video camera poses")->required();
  eval->add_option("--gt", eval_in.gt_poses, "Ground-truth camera poses")->required();
  eval->add_option("--matches", matches_file, "Correspondences for Mat. Pix");
  eval->add_option("--mask", mask_files, "Mask .vtnsr files for mask means");
  add_common(eval, flags, false);

  auto* mix = app.add_subcommand("mix-manifest", "Mix real and synthetic pools into a training manifest");
  std::string real_pool, synthetic_pool;
  std::optional<double> ratio;
  std::optional<std::size_t> size, k_per_group;
  mix->add_option("--real", real_pool, "Real pool manifest")->required();
  mix->add_option("--synthetic", synthetic_pool, "Synthetic pool manifest")->required();
  mix->add_option("--ratio", ratio, "Synthetic fraction (overrides manifest.ratio_synthetic)");
  mix->add_option("--size", size, "Manifest size (overrides manifest.size)");
  add_common(mix, flags, true);

  auto* select = app.add_subcommand("select-eval", "Median-nearest evaluation subset");
  std::string stats_file;
  select->add_option("--stats", stats_file, "Lines 'clip_id group mean'")->required();
  select->add_option("--k", k_per_group, "Clips per group (overrides manifest.k_per_group)");
  add_common(select, flags, true);

  auto* train = app.add_subcommand("toy-train", "Seeded gradient steps of the toy block on one triplet");
  std::string triplet_dir;
  std::size_t steps = 50;
  train->add_option("--triplet", triplet_dir, "Directory written by make-triplet")->required();
  train->add_option("--steps", steps, "Number of optimizer steps");
  add_common(train, flags, true);

  auto* scene = app.add_subcommand("gen-synthetic-scene", "Write the bundled synthetic test fixture");
  add_common(scene, flags, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << tforge::format_error_line(static_cast<int>(tforge::ExitCode::size_or_config), "UsageError",
                                           e.what())
              << '\n';
    return static_cast<int>(tforge::ExitCode::size_or_config);
  }

  const auto start = std::chrono::steady_clock::now();
  const int code = tforge::run_guarded(std::cerr, [&] {
    PipelineConfig cfg = resolve_config(flags);
    if (ratio) cfg.manifest.ratio_synthetic = *ratio;
    if (size) cfg.manifest.size = *size;
    if (k_per_group) cfg.manifest.k_per_group = *k_per_group;
    tforge::validate(cfg);
    spdlog::info("seed={} threads={}", cfg.seed, cfg.threads);

    if (*triplet) {
      tforge::cmd_make_triplet(cfg, video_dir, tracks_file, flags.out, std::cout);
    } else if (*anchor) {
      tforge::cmd_make_anchor(cfg, video_dir, depth_path, poses_file, intrinsics_file, trajectory, flags.out,
                              std::cout);
    } else if (*eval) {
      if (!matches_file.empty()) eval_in.matches = matches_file;
      eval_in.masks.assign(mask_files.begin(), mask_files.end());
      tforge::cmd_eval(cfg, eval_in, flags.out, std::cout);
    } else if (*mix) {
      tforge::cmd_mix_manifest(cfg, real_pool, synthetic_pool, flags.out, std::cout);
    } else if (*select) {
      tforge::cmd_select_eval(cfg, stats_file, flags.out, std::cout);
    } else if (*train) {
      tforge::cmd_toy_train(cfg, triplet_dir, steps, flags.out, std::cout);
    } else if (*scene) {
      tforge::cmd_gen_synthetic_scene(cfg, flags.out, std::cout);
    }
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  spdlog::info("{} finished with code {} in {:.3f} s", app.get_subcommands().front()->get_name(), code, seconds);
  return code;
}
