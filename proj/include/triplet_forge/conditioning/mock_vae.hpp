#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <string>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/rng.hpp"
#include "triplet_forge/core/tensor.hpp"

namespace tforge {

struct MockVaeConfig {
  std::size_t latent_channels = 16;
  std::size_t spatial_factor = 8;
  std::size_t temporal_factor = 4;
  // Requires latent_channels == 3; projection becomes the identity.
  bool identity_projection = false;
  std::uint64_t seed = 0;

  bool operator==(const MockVaeConfig&) const = default;
};

inline void validate(const MockVaeConfig& c) {
  if (c.spatial_factor < 1 || c.temporal_factor < 1) throw ConfigError("VAE factors must be >= 1");
  if (c.latent_channels < 3) throw ConfigError("latent_channels must be >= 3");
  if (c.identity_projection && c.latent_channels != 3) {
    throw ConfigError("identity projection needs latent_channels == 3");
  }
}

/// Latent video z [C_L, T_L, H_L, W_L].
struct LatentClip {
  Tensor z;
  std::size_t spatial_factor = 1;
  std::size_t temporal_factor = 1;

  std::size_t channels() const { return z.dim(0); }
  std::size_t frames() const { return z.dim(1); }
  std::size_t height() const { return z.dim(2); }
  std::size_t width() const { return z.dim(3); }

  bool operator==(const LatentClip&) const = default;
};

/// Causal frame arithmetic: T pixel frames -> (T-1)/tf + 1 latent frames.
inline std::size_t latent_frame_count(std::size_t pixel_frames, std::size_t temporal_factor) {
  if (pixel_frames < 1 || (pixel_frames - 1) % temporal_factor != 0) {
    throw SizeError("frame count " + std::to_string(pixel_frames) + " is not " +
                    std::to_string(temporal_factor) + "k+1");
  }
  return (pixel_frames - 1) / temporal_factor + 1;
}

/// Pixel frames pooled into latent frame k: {0} for k = 0, else
/// (k-1)*tf+1 .. k*tf.
inline std::pair<std::size_t, std::size_t> causal_window(std::size_t k, std::size_t tf) {
  if (k == 0) return {0, 1};
  return {(k - 1) * tf + 1, k * tf + 1};
}

/// Fixed linear stand-in for a causal video autoencoder: block average
/// pooling followed by a 3 -> C_L projection with orthonormal columns, so
/// decoding is the transpose.
class MockVae {
 public:
  explicit MockVae(MockVaeConfig cfg = {}) : cfg_(cfg) {
    validate(cfg_);
    if (cfg_.identity_projection) {
      proj_ = Eigen::MatrixXd::Identity(3, 3);
      return;
    }
    SeededRng rng(cfg_.seed, 0x564145ull);
    Eigen::MatrixXd g(static_cast<Eigen::Index>(cfg_.latent_channels), 3);
    for (Eigen::Index j = 0; j < 3; ++j) {
      for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    proj_ = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), 3);
  }

  const MockVaeConfig& config() const { return cfg_; }
  const Eigen::MatrixXd& projection() const { return proj_; }

  LatentClip encode(const VideoClip& clip) const {
    const std::size_t s = cfg_.spatial_factor, tf = cfg_.temporal_factor;
    const std::size_t T = clip.num_frames(), H = clip.height(), W = clip.width();
    if (H % s || W % s) {
      throw SizeError("frame size " + std::to_string(H) + "x" + std::to_string(W) +
                      " not divisible by spatial factor " + std::to_string(s));
    }
    const std::size_t TL = latent_frame_count(T, tf), HL = H / s, WL = W / s, C = cfg_.latent_channels;
    Tensor z({C, TL, HL, WL});
    const Tensor& f = clip.frames();
    for (std::size_t k = 0; k < TL; ++k) {
      const auto [t0, t1] = causal_window(k, tf);
      const double norm = 1.0 / static_cast<double>((t1 - t0) * s * s);
      for (std::size_t i = 0; i < HL; ++i) {
        for (std::size_t j = 0; j < WL; ++j) {
          Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
          for (std::size_t t = t0; t < t1; ++t) {
            for (std::size_t y = i * s; y < (i + 1) * s; ++y) {
              for (std::size_t x = j * s; x < (j + 1) * s; ++x) {
                for (std::size_t c = 0; c < 3; ++c) rgb[static_cast<Eigen::Index>(c)] += f.at(t, y, x, c);
              }
            }
          }
          const Eigen::VectorXd lat = proj_ * (rgb * norm);
          for (std::size_t c = 0; c < C; ++c) z.at(c, k, i, j) = static_cast<float>(lat[static_cast<Eigen::Index>(c)]);
        }
      }
    }
    return {std::move(z), s, tf};
  }

  /// Nearest-neighbour upsampling plus transposed projection, clamped to
  /// [0,1]. Every pixel frame of a causal window repeats its latent frame.
  VideoClip decode(const LatentClip& lat, double fps = 24.0) const {
    if (lat.z.rank() != 4 || lat.channels() != cfg_.latent_channels ||
        lat.spatial_factor != cfg_.spatial_factor || lat.temporal_factor != cfg_.temporal_factor) {
      throw ConfigError("latent clip does not match the VAE configuration");
    }
    const std::size_t s = cfg_.spatial_factor, tf = cfg_.temporal_factor;
    const std::size_t TL = lat.frames(), HL = lat.height(), WL = lat.width();
    const std::size_t T = (TL - 1) * tf + 1, H = HL * s, W = WL * s, C = cfg_.latent_channels;
    Tensor f({T, H, W, 3});
    const Eigen::MatrixXd back = proj_.transpose();
    for (std::size_t k = 0; k < TL; ++k) {
      const auto [t0, t1] = causal_window(k, tf);
      for (std::size_t i = 0; i < HL; ++i) {
        for (std::size_t j = 0; j < WL; ++j) {
          Eigen::VectorXd v(static_cast<Eigen::Index>(C));
          for (std::size_t c = 0; c < C; ++c) v[static_cast<Eigen::Index>(c)] = lat.z.at(c, k, i, j);
          const Eigen::Vector3d rgb = back * v;
          for (std::size_t t = t0; t < t1; ++t) {
            for (std::size_t y = i * s; y < (i + 1) * s; ++y) {
              for (std::size_t x = j * s; x < (j + 1) * s; ++x) {
                for (std::size_t c = 0; c < 3; ++c) {
                  f.at(t, y, x, c) = static_cast<float>(std::clamp(rgb[static_cast<Eigen::Index>(c)], 0.0, 1.0));
                }
              }
            }
          }
        }
      }
    }
    return VideoClip(std::move(f), fps);
  }

 private:
  MockVaeConfig cfg_;
  Eigen::MatrixXd proj_;  // [C_L, 3]
};

/// Nearest downsampling of a pixel mask [T,H,W,1] to latent resolution
/// [T_L,H_L,W_L]: latent frame k reads pixel frame k*tf (the last frame of
/// its causal window), latent cell (i,j) reads pixel (i*s + s/2, j*s + s/2).
inline Tensor downsample_mask(const BinaryMask& mask, std::size_t spatial_factor,
                              std::size_t temporal_factor) {
  const std::size_t s = spatial_factor;
  const std::size_t TL = latent_frame_count(mask.num_frames(), temporal_factor);
  if (mask.height() % s || mask.width() % s) throw SizeError("mask size not divisible by spatial factor");
  const std::size_t HL = mask.height() / s, WL = mask.width() / s;
  Tensor out({TL, HL, WL});
  for (std::size_t k = 0; k < TL; ++k) {
    for (std::size_t i = 0; i < HL; ++i) {
      for (std::size_t j = 0; j < WL; ++j) {
        out.at(k, i, j) = mask.values().at(k * temporal_factor, i * s + s / 2, j * s + s / 2, std::size_t{0});
      }
    }
  }
  return out;
}

}  // namespace tforge
