#pragma once

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <vector>

#include "triplet_forge/conditioning/mock_vae.hpp"
#include "triplet_forge/conditioning/streams.hpp"
#include "triplet_forge/conditioning/toy_block.hpp"
#include "triplet_forge/core/image_io.hpp"
#include "triplet_forge/core/rng.hpp"
#include "triplet_forge/core/tensor_io.hpp"

namespace tforge {

struct ToyTrainConfig {
  ToyConfig model{};
  MockVaeConfig vae{};
  std::size_t mask_channels = 4;
  PatchSize patch{};
  double alpha = 0.1;
  double noise_level = 0.5;  // z_n = (1 - s) z_t + s * eps
  AdamConfig adam{};

  bool operator==(const ToyTrainConfig&) const = default;
};

inline void validate(const ToyTrainConfig& c) {
  validate(c.model);
  validate(c.vae);
  if (c.mask_channels < 1) throw ConfigError("mask_channels must be >= 1");
  if (!(c.alpha >= 0.0)) throw ConfigError("alpha must be non-negative");
  if (!(c.noise_level >= 0.0 && c.noise_level <= 1.0)) throw ConfigError("noise_level must be in [0,1]");
  if (!(c.adam.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
}

/// Clips of one triplet, as read from disk.
struct TripletClips {
  VideoClip source, anchor, target;
  BinaryMask mask;
};

inline TripletClips load_triplet_clips(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError("triplet directory " + dir.string() + " not found");
  TripletClips c{load_image_sequence(dir / "source"), load_image_sequence(dir / "anchor"),
                 load_image_sequence(dir / "target"), BinaryMask(read_tensor(dir / "anchor_mask.vtnsr"))};
  const Shape s = c.source.frames().shape();
  if (c.anchor.frames().shape() != s || c.target.frames().shape() != s ||
      c.mask.values().shape() != Shape{s[0], s[1], s[2], 1}) {
    throw SizeError("triplet clips and mask must share one shape");
  }
  return c;
}

/// Centre crop to multiples of the spatial factor and keep the first
/// tf*k+1 frames.
inline TripletClips fit_to_vae(const TripletClips& c, const MockVaeConfig& vae) {
  const std::size_t T = c.source.num_frames(), H = c.source.height(), W = c.source.width();
  const std::size_t s = vae.spatial_factor, tf = vae.temporal_factor;
  const std::size_t T2 = (T - 1) / tf * tf + 1, H2 = H / s * s, W2 = W / s * s;
  if (H2 == 0 || W2 == 0) throw SizeError("triplet frames smaller than the VAE spatial factor");
  const std::size_t y0 = (H - H2) / 2, x0 = (W - W2) / 2;
  const auto crop = [&](const Tensor& t) {
    const std::size_t C = t.dim(3);
    Tensor out({T2, H2, W2, C});
    for (std::size_t f = 0; f < T2; ++f)
      for (std::size_t y = 0; y < H2; ++y)
        for (std::size_t x = 0; x < W2; ++x)
          for (std::size_t k = 0; k < C; ++k) out.at(f, y, x, k) = t.at(f, y + y0, x + x0, k);
    return out;
  };
  return {VideoClip(crop(c.source.frames()), c.source.fps()), VideoClip(crop(c.anchor.frames()), c.anchor.fps()),
          VideoClip(crop(c.target.frames()), c.target.fps()), BinaryMask(crop(c.mask.values()))};
}

namespace detail {

template <class S>
Mat<S> to_mat(const Tensor& t) {
  Mat<S> m(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(t[static_cast<std::size_t>(i)]);
  return m;
}

}  // namespace detail

/// Anchor stream [z_n | z_a | M] and source stream [z_s | z_s | 1], both
/// patchified; target rows regress the clean target latent, source rows the
/// clean source latent.
inline ToyBatch<double> make_toy_batch(const TripletClips& clips, const ToyTrainConfig& cfg, SeededRng& rng) {
  validate(cfg);
  const TripletClips fit = fit_to_vae(clips, cfg.vae);
  const MockVae vae(cfg.vae);
  const LatentClip zs = vae.encode(fit.source), za = vae.encode(fit.anchor), zt = vae.encode(fit.target);
  LatentClip zn = zt;
  for (std::size_t i = 0; i < zn.z.size(); ++i) {
    zn.z[i] = static_cast<float>((1.0 - cfg.noise_level) * zt.z[i] + cfg.noise_level * rng.normal());
  }
  const auto anchor = assemble_anchor_stream(za, zn, fit.mask, cfg.mask_channels);
  const auto source = assemble_source_stream(zs, cfg.mask_channels);
  const Patches pa = patchify(anchor.tensor, cfg.patch), ps = patchify(source.tensor, cfg.patch);
  const Patches pt = patchify(zt.z, cfg.patch), pz = patchify(zs.z, cfg.patch);

  const auto n = static_cast<Eigen::Index>(pa.positions.size());
  ToyBatch<double> b;
  b.inputs.resize(2 * n, static_cast<Eigen::Index>(pa.vectors.dim(1)));
  b.inputs << detail::to_mat<double>(pa.vectors), detail::to_mat<double>(ps.vectors);
  b.targets.resize(2 * n, static_cast<Eigen::Index>(pt.vectors.dim(1)));
  b.targets << detail::to_mat<double>(pt.vectors), detail::to_mat<double>(pz.vectors);
  b.positions = pa.positions;
  for (auto p : ps.positions) {
    p.t += cfg.model.rope.rope_offset;
    b.positions.push_back(p);
  }
  b.segment.assign(static_cast<std::size_t>(n), Segment::target);
  b.segment.resize(static_cast<std::size_t>(2 * n), Segment::source);
  return b;
}

inline void write_loss_header(std::ostream& os) { os << "step mse reference total alpha\n"; }

inline void write_loss_line(std::ostream& os, std::size_t step, const LossBreakdown& l) {
  os << step << ' ' << std::setprecision(9) << l.mse << ' ' << l.reference << ' ' << l.total << ' ' << l.alpha
     << '\n';
}

/// Runs `steps` Adam updates; entry i holds the loss evaluated before update i.
/// The batch noise comes from rng.split(1), initial weights from rng.split(2).
inline std::vector<LossBreakdown> toy_train(const TripletClips& clips, const ToyTrainConfig& cfg, std::size_t steps,
                                            const SeededRng& rng, ToyModelParams<double>* final_params = nullptr) {
  auto noise_rng = rng.split(1);
  auto init_rng = rng.split(2);
  const ToyBatch<double> batch = make_toy_batch(clips, cfg, noise_rng);
  auto params = init_model_params<double>(cfg.model, static_cast<std::size_t>(batch.inputs.cols()),
                                          static_cast<std::size_t>(batch.targets.cols()), init_rng);
  Adam<double> opt(cfg.adam, params);
  std::vector<LossBreakdown> log;
  ToyModelParams<double> grad;
  for (std::size_t i = 0; i < steps; ++i) {
    const LossBreakdown l = model_loss_and_grad(batch, cfg.model, params, cfg.alpha, grad);
    if (!std::isfinite(l.total)) throw NumericError("toy training loss became non-finite at step " + std::to_string(i));
    log.push_back(l);
    opt.step(params, grad);
  }
  if (final_params) *final_params = std::move(params);
  return log;
}

}  // namespace tforge
