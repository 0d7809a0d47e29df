#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "triplet_forge/anchor/triplet.hpp"
#include "triplet_forge/conditioning/toy_train.hpp"
#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/metrics/matching.hpp"
#include "triplet_forge/metrics/pose_metrics.hpp"
#include "triplet_forge/reproject/pointcloud.hpp"

namespace tforge {

struct ManifestConfig {
  double ratio_synthetic = 0.15;
  std::size_t size = 100;
  std::size_t k_per_group = 10;

  bool operator==(const ManifestConfig&) const = default;
};

/// Every tunable of every subcommand. The JSON form is nested by section:
/// seed, threads, trajectory, splat, anchor, render, vae, model, metrics,
/// manifest. Missing keys keep their defaults; unknown keys are errors.
struct PipelineConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  TripletConfig triplet{};
  RenderParams render{};
  ToyTrainConfig train{};
  RansacConfig ransac{};
  TransErrMode trans_err_mode = TransErrMode::normalized;
  ManifestConfig manifest{};

  bool operator==(const PipelineConfig&) const = default;
};

inline void validate(const PipelineConfig& c) {
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  const auto& t = c.triplet;
  if (!(t.crop_fraction > 0.0 && t.crop_fraction <= 1.0)) throw ConfigError("trajectory.crop_fraction must be in (0,1]");
  if ((t.crop.width == 0) != (t.crop.height == 0)) {
    throw ConfigError("trajectory.crop_width and crop_height must both be set or both be 0");
  }
  if (!(t.trajectory.scale >= 0.0 && t.trajectory.scale <= 1.0)) throw ConfigError("trajectory.scale must be in [0,1]");
  if (!(t.trajectory.control_rate > 0.0)) throw ConfigError("trajectory.control_rate must be positive");
  validate(t.splat);
  validate(t.augment);
  if (!(c.render.z_near > 0.0)) throw ConfigError("render.z_near must be positive");
  if (!(c.render.z_scale > 0.0)) throw ConfigError("render.z_scale must be positive");
  if (!(c.render.subpixel_steps >= 1.0)) throw ConfigError("render.subpixel_steps must be >= 1");
  validate(c.train);
  validate(c.ransac);
  if (!(c.manifest.ratio_synthetic >= 0.0 && c.manifest.ratio_synthetic <= 1.0)) {
    throw ConfigError("manifest.ratio_synthetic must be in [0,1]");
  }
}

namespace detail {

using json = nlohmann::json;

class JsonSection {
 public:
  JsonSection(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& v = j_.at(key);
    const std::string where = name_.empty() ? std::string(key) : name_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + " must be a boolean");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) throw ConfigError(where + " must be a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + " must be a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + " must be a string");
    }
    out = v.get<T>();
  }

  JsonSection child(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return JsonSection(j_.contains(key) ? j_.at(key) : empty, name_.empty() ? key : name_ + "." + key);
  }

  template <class T, std::size_t N>
  void get_array(const char* key, std::array<T, N>& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != N) {
      throw ConfigError(name_ + "." + key + " must be an array of " + std::to_string(N) + " integers");
    }
    for (std::size_t i = 0; i < N; ++i) {
      if (!v[i].is_number_unsigned()) throw ConfigError(name_ + "." + key + " entries must be non-negative integers");
      out[i] = v[i].get<T>();
    }
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown config key '" + (name_.empty() ? "" : name_ + ".") + item.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  const auto& t = c.triplet;
  const auto& m = c.train.model;
  return {
      {"seed", c.seed},
      {"threads", c.threads},
      {"trajectory",
       {{"crop_fraction", t.crop_fraction},
        {"crop_width", t.crop.width},
        {"crop_height", t.crop.height},
        {"scale", t.trajectory.scale},
        {"control_rate", t.trajectory.control_rate}}},
      {"splat", {{"weight_epsilon", t.splat.weight_epsilon}, {"validity_threshold", t.splat.validity_threshold}}},
      {"anchor",
       {{"background", std::string(to_string(t.augment.background))},
        {"noise_max", t.augment.noise_max},
        {"random_reference", t.augment.random_reference},
        {"reference_index", t.augment.reference_index}}},
      {"render",
       {{"z_near", c.render.z_near}, {"z_scale", c.render.z_scale}, {"subpixel_steps", c.render.subpixel_steps}}},
      {"vae",
       {{"latent_channels", c.train.vae.latent_channels},
        {"mask_channels", c.train.mask_channels},
        {"spatial_factor", c.train.vae.spatial_factor},
        {"temporal_factor", c.train.vae.temporal_factor},
        {"seed", c.train.vae.seed}}},
      {"model",
       {{"model_dim", m.model_dim},
        {"heads", m.heads},
        {"mlp_dim", m.mlp_dim},
        {"rope_offset", m.rope.rope_offset},
        {"rope_base", m.rope.base_frequency},
        {"rope_dims", {m.rope.dim_t, m.rope.dim_h, m.rope.dim_w}},
        {"patch", {c.train.patch.t, c.train.patch.h, c.train.patch.w}},
        {"alpha", c.train.alpha},
        {"noise_level", c.train.noise_level},
        {"learning_rate", c.train.adam.learning_rate}}},
      {"metrics",
       {{"confidence_threshold", c.ransac.confidence_threshold},
        {"ransac_iterations", c.ransac.iterations},
        {"inlier_px", c.ransac.inlier_px},
        {"ransac_seed", c.ransac.seed},
        {"trans_err_mode", to_string(c.trans_err_mode)}}},
      {"manifest",
       {{"ratio_synthetic", c.manifest.ratio_synthetic},
        {"size", c.manifest.size},
        {"k_per_group", c.manifest.k_per_group}}},
  };
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  detail::JsonSection root(j, "");
  root.get("seed", c.seed);
  root.get("threads", c.threads);

  auto tr = root.child("trajectory");
  tr.get("crop_fraction", c.triplet.crop_fraction);
  tr.get("crop_width", c.triplet.crop.width);
  tr.get("crop_height", c.triplet.crop.height);
  tr.get("scale", c.triplet.trajectory.scale);
  tr.get("control_rate", c.triplet.trajectory.control_rate);
  tr.finish();

  auto sp = root.child("splat");
  sp.get("weight_epsilon", c.triplet.splat.weight_epsilon);
  sp.get("validity_threshold", c.triplet.splat.validity_threshold);
  sp.finish();
  c.render.splat.weight_epsilon = c.triplet.splat.weight_epsilon;
  c.render.splat.validity_threshold = c.triplet.splat.validity_threshold;

  auto an = root.child("anchor");
  std::string bg(to_string(c.triplet.augment.background));
  an.get("background", bg);
  try {
    c.triplet.augment.background = parse_background(bg);
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("anchor.background: ") + e.what());
  }
  an.get("noise_max", c.triplet.augment.noise_max);
  an.get("random_reference", c.triplet.augment.random_reference);
  an.get("reference_index", c.triplet.augment.reference_index);
  an.finish();

  auto re = root.child("render");
  re.get("z_near", c.render.z_near);
  re.get("z_scale", c.render.z_scale);
  re.get("subpixel_steps", c.render.subpixel_steps);
  re.finish();

  auto va = root.child("vae");
  va.get("latent_channels", c.train.vae.latent_channels);
  va.get("mask_channels", c.train.mask_channels);
  va.get("spatial_factor", c.train.vae.spatial_factor);
  va.get("temporal_factor", c.train.vae.temporal_factor);
  va.get("seed", c.train.vae.seed);
  va.finish();

  auto mo = root.child("model");
  auto& m = c.train.model;
  mo.get("model_dim", m.model_dim);
  mo.get("heads", m.heads);
  mo.get("mlp_dim", m.mlp_dim);
  mo.get("rope_offset", m.rope.rope_offset);
  mo.get("rope_base", m.rope.base_frequency);
  std::array<std::size_t, 3> dims{m.rope.dim_t, m.rope.dim_h, m.rope.dim_w};
  mo.get_array("rope_dims", dims);
  m.rope.dim_t = dims[0];
  m.rope.dim_h = dims[1];
  m.rope.dim_w = dims[2];
  std::array<std::size_t, 3> patch{c.train.patch.t, c.train.patch.h, c.train.patch.w};
  mo.get_array("patch", patch);
  c.train.patch = {patch[0], patch[1], patch[2]};
  mo.get("alpha", c.train.alpha);
  mo.get("noise_level", c.train.noise_level);
  mo.get("learning_rate", c.train.adam.learning_rate);
  mo.finish();

  auto me = root.child("metrics");
  me.get("confidence_threshold", c.ransac.confidence_threshold);
  me.get("ransac_iterations", c.ransac.iterations);
  me.get("inlier_px", c.ransac.inlier_px);
  me.get("ransac_seed", c.ransac.seed);
  std::string mode = to_string(c.trans_err_mode);
  me.get("trans_err_mode", mode);
  c.trans_err_mode = parse_trans_err_mode(mode);
  me.finish();

  auto ma = root.child("manifest");
  ma.get("ratio_synthetic", c.manifest.ratio_synthetic);
  ma.get("size", c.manifest.size);
  ma.get("k_per_group", c.manifest.k_per_group);
  ma.finish();

  root.finish();
  validate(c);
  return c;
}

inline std::string dump_config(const PipelineConfig& c) { return config_to_json(c).dump(2); }

inline PipelineConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

inline void save_config(const PipelineConfig& c, const std::filesystem::path& path) {
  const std::string text = dump_config(c) + "\n";
  detail::write_file_atomic(path, std::vector<char>(text.begin(), text.end()));
}

}  // namespace tforge
