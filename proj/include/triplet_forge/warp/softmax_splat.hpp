#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/tensor.hpp"

namespace tforge {

enum class ImportanceMode { uniform, map };

struct SplatParams {
  ImportanceMode importance_mode = ImportanceMode::uniform;
  float weight_epsilon = 1e-6f;
  float validity_threshold = 0.3f;

  bool operator==(const SplatParams&) const = default;
};

inline void validate(const SplatParams& p) {
  if (!(p.weight_epsilon > 0.0f)) throw ConfigError("weight_epsilon must be positive");
  if (!(p.validity_threshold > 0.0f && p.validity_threshold <= 1.0f)) {
    throw ConfigError("validity_threshold must be in (0,1]");
  }
}

/// One forward-splatted contribution: continuous target position,
/// importance Z and the row of the color table it carries.
struct SplatSample {
  double x = 0.0;
  double y = 0.0;
  double importance = 0.0;
  std::size_t source = 0;
};

struct SplatResult {
  Tensor warped;  // [h,w,C]
  Tensor weight;  // [h,w,1]
};

namespace detail {

template <class Fn>
inline void for_each_tap(const SplatSample& s, std::size_t h, std::size_t w, Fn&& fn) {
  const double fx = std::floor(s.x), fy = std::floor(s.y);
  const double ax = s.x - fx, ay = s.y - fy;
  const auto x0 = static_cast<long long>(fx), y0 = static_cast<long long>(fy);
  const double bx[2] = {1.0 - ax, ax};
  const double by[2] = {1.0 - ay, ay};
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const double b = bx[dx] * by[dy];
      const long long tx = x0 + dx, ty = y0 + dy;
      if (b <= 0.0 || tx < 0 || ty < 0 || tx >= static_cast<long long>(w) ||
          ty >= static_cast<long long>(h)) {
        continue;
      }
      fn(static_cast<std::size_t>(ty) * w + static_cast<std::size_t>(tx), b);
    }
  }
}

}  // namespace detail

/// Softmax splatting of arbitrary samples onto an h x w grid.
///
/// Each sample scatters to its four bilinear neighbours; taps outside the
/// grid are dropped. Colors blend with softmax weights stabilized by the
/// largest Z among p's contributors:
///   warped(p) = sum_q b * exp(Z_q - Zmax_p) * color_q / sum_q b * exp(Z_q - Zmax_p)
/// The returned weight is the bilinear coverage sum_q b, which is what the
/// validity mask thresholds; it is independent of the importance scale and
/// equals the softmax normalizer under uniform importance.
/// warped(p) = 0 where coverage <= weight_epsilon. Samples accumulate in
/// index order (double precision).
inline SplatResult splat_samples(std::span<const SplatSample> samples, const Tensor& colors,
                                 std::size_t h, std::size_t w, const SplatParams& params) {
  validate(params);
  if (colors.rank() != 2) throw SizeError("splat color table must be [N,C]");
  const std::size_t channels = colors.dim(1);
  const std::size_t pixels = h * w;

  std::vector<double> zmax(pixels, -std::numeric_limits<double>::infinity());
  for (const auto& s : samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw InvalidFlowError("non-finite splat target");
    if (!std::isfinite(s.importance)) throw InvalidFlowError("non-finite splat importance");
    detail::for_each_tap(s, h, w, [&](std::size_t p, double) {
      if (s.importance > zmax[p]) zmax[p] = s.importance;
    });
  }

  std::vector<double> acc(pixels * channels, 0.0);
  std::vector<double> wsum(pixels, 0.0);
  std::vector<double> coverage(pixels, 0.0);
  for (const auto& s : samples) {
    const float* color = &colors[s.source * channels];
    detail::for_each_tap(s, h, w, [&](std::size_t p, double b) {
      const double wt = b * std::exp(s.importance - zmax[p]);
      wsum[p] += wt;
      coverage[p] += b;
      for (std::size_t c = 0; c < channels; ++c) acc[p * channels + c] += wt * color[c];
    });
  }

  SplatResult out{Tensor({h, w, channels}), Tensor({h, w, 1})};
  for (std::size_t p = 0; p < pixels; ++p) {
    out.weight[p] = static_cast<float>(coverage[p]);
    if (coverage[p] <= params.weight_epsilon) continue;
    for (std::size_t c = 0; c < channels; ++c) {
      out.warped[p * channels + c] = static_cast<float>(acc[p * channels + c] / wsum[p]);
    }
  }
  return out;
}

namespace detail {

inline SplatResult splat_grid(const Tensor& frame, const Tensor& flow, const Tensor* importance,
                              const SplatParams& params) {
  if (frame.rank() != 3) throw SizeError("splat frame must be [h,w,C]");
  const std::size_t h = frame.dim(0), w = frame.dim(1), c = frame.dim(2);
  if (flow.shape() != Shape{h, w, 2}) {
    throw SizeError("flow shape " + shape_string(flow.shape()) + " does not match frame " +
                    shape_string(frame.shape()));
  }
  if (importance && importance->shape() != Shape{h, w, 1}) {
    throw SizeError("importance map must be [h,w,1]");
  }
  std::vector<SplatSample> samples(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t q = y * w + x;
      const float dx = flow[2 * q], dy = flow[2 * q + 1];
      if (!std::isfinite(dx) || !std::isfinite(dy)) {
        throw InvalidFlowError("non-finite flow at (" + std::to_string(x) + "," +
                               std::to_string(y) + ")");
      }
      samples[q] = {static_cast<double>(x) + dx, static_cast<double>(y) + dy,
                    importance ? static_cast<double>((*importance)[q]) : 0.0, q};
    }
  }
  return splat_samples(samples, frame.reshaped({h * w, c}), h, w, params);
}

}  // namespace detail

/// Forward-warps `frame` [h,w,C] by `flow` [h,w,2] with uniform importance.
inline SplatResult softmax_splat(const Tensor& frame, const Tensor& flow, const SplatParams& params) {
  if (params.importance_mode != ImportanceMode::uniform) {
    throw ConfigError("importance map required in map mode");
  }
  return detail::splat_grid(frame, flow, nullptr, params);
}

/// Forward-warps with a per-pixel importance map Z [h,w,1].
inline SplatResult softmax_splat(const Tensor& frame, const Tensor& flow, const Tensor& importance,
                                 const SplatParams& params) {
  if (params.importance_mode != ImportanceMode::map) {
    throw ConfigError("importance map given but importance_mode is uniform");
  }
  return detail::splat_grid(frame, flow, &importance, params);
}

/// 1 where weight >= threshold, else 0. Accepts [T,h,w,1] or a single [h,w,1].
inline BinaryMask validity_mask(const Tensor& weight, float threshold) {
  if (!(threshold > 0.0f && threshold <= 1.0f)) throw ConfigError("threshold must be in (0,1]");
  Tensor w = weight.rank() == 3 ? weight.reshaped({1, weight.dim(0), weight.dim(1), weight.dim(2)})
                                : weight;
  for (float& v : w.data()) v = v >= threshold ? 1.0f : 0.0f;
  return BinaryMask(std::move(w));
}

}  // namespace tforge
