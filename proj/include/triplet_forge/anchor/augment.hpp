#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/rng.hpp"
#include "triplet_forge/core/tensor.hpp"

namespace tforge {

enum class Background { black, fluorescent };

inline constexpr std::array<float, 3> kBlack = {0.0f, 0.0f, 0.0f};
/// Fluorescent pink, 8-bit (255, 20, 147).
inline constexpr std::array<float, 3> kFluorescentPink = {1.0f, 0.078f, 0.576f};

inline std::string_view to_string(Background b) { return b == Background::black ? "black" : "fluorescent"; }

inline Background parse_background(std::string_view s) {
  if (s == "black") return Background::black;
  if (s == "fluorescent") return Background::fluorescent;
  throw ConfigError("unknown background '" + std::string(s) + "'");
}

struct AnchorAugConfig {
  Background background = Background::black;
  float noise_max = 0.5f;
  bool random_reference = false;
  std::size_t reference_index = 0;

  bool operator==(const AnchorAugConfig&) const = default;
};

inline void validate(const AnchorAugConfig& c) {
  if (!(c.noise_max >= 0.0f && c.noise_max <= 1.0f)) throw ConfigError("noise_max must be in [0,1]");
}

struct StructuredNoise {
  Tensor noise;                 // [h,w,3], before clamping
  std::array<float, 3> sigma{};  // per-channel standard deviation
};

/// Draws sigma_c ~ U[0, noise_max] for c = 0,1,2, then i.i.d. N(0, sigma_c^2)
/// per pixel in row-major order.
inline StructuredNoise sample_structured_noise(std::size_t h, std::size_t w, SeededRng& rng,
                                               float noise_max) {
  StructuredNoise out{Tensor({h, w, 3}), {}};
  for (auto& s : out.sigma) s = static_cast<float>(rng.uniform(0.0, noise_max));
  if (noise_max == 0.0f) return out;
  for (std::size_t i = 0; i < h * w; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      out.noise[3 * i + c] = static_cast<float>(out.sigma[c] * rng.normal());
    }
  }
  return out;
}

/// Adds structured Gaussian noise to a reference frame [h,w,3] and clamps to [0,1].
inline Tensor inject_structured_noise(const Tensor& frame, SeededRng& rng, float noise_max) {
  if (frame.rank() != 3 || frame.dim(2) != 3) throw SizeError("noise target must be [h,w,3]");
  if (!(noise_max >= 0.0f && noise_max <= 1.0f)) throw ConfigError("noise_max must be in [0,1]");
  const auto n = sample_structured_noise(frame.dim(0), frame.dim(1), rng, noise_max);
  Tensor out = frame;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::clamp(out[i] + n.noise[i], 0.0f, 1.0f);
  return out;
}

/// Replaces pixels with mask == 0 by the background color.
inline VideoClip apply_background(const VideoClip& warped, const BinaryMask& mask, Background bg) {
  if (mask.num_frames() != warped.num_frames() || mask.height() != warped.height() ||
      mask.width() != warped.width()) {
    throw SizeError("mask does not match clip");
  }
  const auto& color = bg == Background::black ? kBlack : kFluorescentPink;
  Tensor frames = warped.frames();
  const auto& m = mask.values();
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (m[p] != 0.0f) continue;
    std::copy(color.begin(), color.end(), &frames[3 * p]);
  }
  return VideoClip(std::move(frames), warped.fps());
}

}  // namespace tforge
