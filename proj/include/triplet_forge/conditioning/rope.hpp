#pragma once

#include <Eigen/Core>

#include <cmath>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/tensor.hpp"

namespace tforge {

/// Integer (t,h,w) coordinates of one token.
struct TokenPosition {
  long long t = 0, h = 0, w = 0;

  bool operator==(const TokenPosition&) const = default;
};

struct RopeConfig {
  std::size_t head_dim = 16;
  // Zeros mean the default (half, quarter, quarter) split.
  std::size_t dim_t = 0, dim_h = 0, dim_w = 0;
  long long rope_offset = 50;
  double base_frequency = 10000.0;

  bool operator==(const RopeConfig&) const = default;
};

struct AxisSplit {
  std::size_t t, h, w;
};

/// Explicit split, or (half, quarter, quarter) of head_dim each rounded down
/// to even with the remainder given to the temporal axis.
inline AxisSplit axis_split(const RopeConfig& cfg) {
  AxisSplit s{cfg.dim_t, cfg.dim_h, cfg.dim_w};
  if (s.t == 0 && s.h == 0 && s.w == 0) {
    s.h = (cfg.head_dim / 4) & ~std::size_t{1};
    s.w = s.h;
    s.t = cfg.head_dim - s.h - s.w;
  }
  if (s.t % 2 || s.h % 2 || s.w % 2) throw ConfigError("RoPE axis dims must be even");
  if (s.t + s.h + s.w != cfg.head_dim) throw ConfigError("RoPE axis dims must sum to head_dim");
  return s;
}

inline void validate(const RopeConfig& cfg) {
  if (cfg.head_dim == 0) throw ConfigError("head_dim must be positive");
  if (!(cfg.base_frequency > 1.0)) throw ConfigError("RoPE base frequency must exceed 1");
  if (cfg.rope_offset < 0) throw ConfigError("rope_offset must be non-negative");
  axis_split(cfg);
}

/// Rotation angles for one position, one per channel pair (head_dim / 2).
inline std::vector<double> rope_angles(const TokenPosition& pos, const RopeConfig& cfg) {
  const AxisSplit s = axis_split(cfg);
  std::vector<double> angles;
  angles.reserve(cfg.head_dim / 2);
  const auto axis = [&](long long p, std::size_t d) {
    for (std::size_t i = 0; i < d / 2; ++i) {
      const double freq = std::pow(cfg.base_frequency, -2.0 * static_cast<double>(i) / static_cast<double>(d));
      angles.push_back(static_cast<double>(p) * freq);
    }
  };
  axis(pos.t, s.t);
  axis(pos.h, s.h);
  axis(pos.w, s.w);
  return angles;
}

/// Rotates consecutive channel pairs of `x` (length head_dim) in place;
/// `sign` = -1 applies the inverse rotation.
template <class Vec>
void rope_apply(Vec&& x, const std::vector<double>& angles, double sign = 1.0) {
  for (std::size_t i = 0; i < angles.size(); ++i) {
    using S = std::decay_t<decltype(x(0))>;
    const S c = static_cast<S>(std::cos(sign * angles[i]));
    const S s = static_cast<S>(std::sin(sign * angles[i]));
    const auto a = static_cast<Eigen::Index>(2 * i);
    const S x0 = x(a), x1 = x(a + 1);
    x(a) = c * x0 - s * x1;
    x(a + 1) = s * x0 + c * x1;
  }
}

/// Applies RoPE to q or k laid out [N, heads, head_dim].
inline Tensor rope_rotate(const Tensor& x, const std::vector<TokenPosition>& positions,
                          const RopeConfig& cfg) {
  validate(cfg);
  if (x.rank() != 3 || x.dim(2) != cfg.head_dim) {
    throw SizeError("rope input must be [N, heads, head_dim], got " + shape_string(x.shape()));
  }
  if (positions.size() != x.dim(0)) throw SizeError("one position per token required");
  Tensor out = x;
  const std::size_t heads = x.dim(1), hd = cfg.head_dim;
  for (std::size_t n = 0; n < x.dim(0); ++n) {
    const auto angles = rope_angles(positions[n], cfg);
    for (std::size_t h = 0; h < heads; ++h) {
      Eigen::Map<Eigen::VectorXf> v(&out.at(n, h, std::size_t{0}), static_cast<Eigen::Index>(hd));
      rope_apply(v, angles);
    }
  }
  return out;
}

}  // namespace tforge
