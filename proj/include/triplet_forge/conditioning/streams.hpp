#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include "triplet_forge/conditioning/mock_vae.hpp"
#include "triplet_forge/conditioning/rope.hpp"
#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/tensor.hpp"

namespace tforge {

enum class StreamKind { anchor, source };

/// Channel layout [first | reference | mask]: [z_n | z_a | M_a] for the
/// anchor stream, [z_s | z_s | 1] for the source stream.
struct ConditionStream {
  Tensor tensor;  // [2*C_L + C_M, T_L, H_L, W_L]
  StreamKind kind = StreamKind::anchor;
  std::size_t latent_channels = 0;
  std::size_t mask_channels = 0;

  std::size_t channels() const { return tensor.dim(0); }
};

namespace detail {

inline void copy_channels(Tensor& dst, std::size_t first, const Tensor& src) {
  const std::size_t plane = shape_numel(Shape(src.shape().begin() + 1, src.shape().end()));
  std::copy(src.data().begin(), src.data().end(), dst.data().begin() + static_cast<std::ptrdiff_t>(first * plane));
}

inline Tensor channel_block(const Tensor& t, std::size_t first, std::size_t count) {
  Shape shape = t.shape();
  const std::size_t plane = t.size() / shape[0];
  shape[0] = count;
  std::vector<float> v(t.data().begin() + static_cast<std::ptrdiff_t>(first * plane),
                       t.data().begin() + static_cast<std::ptrdiff_t>((first + count) * plane));
  return Tensor(std::move(shape), std::move(v));
}

}  // namespace detail

/// `mask` is either pixel resolution (downsampled with the latent factors)
/// or already [T_L,H_L,W_L].
inline ConditionStream assemble_anchor_stream(const LatentClip& z_a, const LatentClip& z_n,
                                              const BinaryMask& mask, std::size_t mask_channels) {
  if (z_a.z.shape() != z_n.z.shape()) {
    throw SizeError("anchor latent " + shape_string(z_a.z.shape()) + " and noise latent " +
                    shape_string(z_n.z.shape()) + " differ");
  }
  if (mask_channels < 1) throw ConfigError("mask_channels must be >= 1");
  const Shape latent_grid{z_a.frames(), z_a.height(), z_a.width()};
  Tensor m;
  if (Shape{mask.num_frames(), mask.height(), mask.width()} == latent_grid) {
    m = mask.values().reshaped(latent_grid);
  } else {
    m = downsample_mask(mask, z_a.spatial_factor, z_a.temporal_factor);
    if (m.shape() != latent_grid) throw SizeError("mask does not downsample to the latent grid");
  }
  const std::size_t C = z_a.channels();
  Tensor out({2 * C + mask_channels, z_a.frames(), z_a.height(), z_a.width()});
  detail::copy_channels(out, 0, z_n.z);
  detail::copy_channels(out, C, z_a.z);
  for (std::size_t c = 0; c < mask_channels; ++c) detail::copy_channels(out, 2 * C + c, m.reshaped({1, latent_grid[0], latent_grid[1], latent_grid[2]}));
  return {std::move(out), StreamKind::anchor, C, mask_channels};
}

inline ConditionStream assemble_source_stream(const LatentClip& z_s, std::size_t mask_channels) {
  if (mask_channels < 1) throw ConfigError("mask_channels must be >= 1");
  const std::size_t C = z_s.channels();
  Tensor out({2 * C + mask_channels, z_s.frames(), z_s.height(), z_s.width()}, 1.0f);
  detail::copy_channels(out, 0, z_s.z);
  detail::copy_channels(out, C, z_s.z);
  return {std::move(out), StreamKind::source, C, mask_channels};
}

struct StreamParts {
  Tensor first;      // z_n or z_s  [C_L, ...]
  Tensor reference;  // z_a or z_s
  Tensor mask;       // [C_M, ...]
};

inline StreamParts disassemble(const ConditionStream& s) {
  const std::size_t C = s.latent_channels;
  if (s.channels() != 2 * C + s.mask_channels) throw SizeError("stream channel count mismatch");
  return {detail::channel_block(s.tensor, 0, C), detail::channel_block(s.tensor, C, C),
          detail::channel_block(s.tensor, 2 * C, s.mask_channels)};
}

struct PatchSize {
  std::size_t t = 1, h = 1, w = 1;

  std::size_t volume() const { return t * h * w; }
  bool operator==(const PatchSize&) const = default;
};

/// Patch vectors [n, C*pt*ph*pw] in (t,h,w) row-major patch order; each
/// vector is laid out (c, dt, dh, dw). Positions are patch-grid indices.
struct Patches {
  Tensor vectors;
  std::vector<TokenPosition> positions;
};

inline Patches patchify(const Tensor& x, const PatchSize& p) {
  if (x.rank() != 4) throw SizeError("patchify expects [C,T,H,W]");
  const std::size_t C = x.dim(0), T = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (p.t == 0 || p.h == 0 || p.w == 0 || T % p.t || H % p.h || W % p.w) {
    throw SizeError("grid " + shape_string({T, H, W}) + " not divisible by patch " +
                    shape_string({p.t, p.h, p.w}));
  }
  const std::size_t nt = T / p.t, nh = H / p.h, nw = W / p.w, K = C * p.volume();
  Patches out{Tensor({nt * nh * nw, K}), {}};
  out.positions.reserve(nt * nh * nw);
  std::size_t n = 0;
  for (std::size_t a = 0; a < nt; ++a) {
    for (std::size_t b = 0; b < nh; ++b) {
      for (std::size_t d = 0; d < nw; ++d, ++n) {
        out.positions.push_back({static_cast<long long>(a), static_cast<long long>(b), static_cast<long long>(d)});
        std::size_t k = 0;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t dt = 0; dt < p.t; ++dt)
            for (std::size_t dh = 0; dh < p.h; ++dh)
              for (std::size_t dw = 0; dw < p.w; ++dw, ++k) {
                out.vectors.at(n, k) = x.at(c, a * p.t + dt, b * p.h + dh, d * p.w + dw);
              }
      }
    }
  }
  return out;
}

/// Inverse of patchify for a [C,T,H,W] grid.
inline Tensor unpatchify(const Tensor& vectors, std::size_t C, std::size_t T, std::size_t H,
                         std::size_t W, const PatchSize& p) {
  const std::size_t nt = T / p.t, nh = H / p.h, nw = W / p.w;
  if (vectors.shape() != Shape{nt * nh * nw, C * p.volume()}) throw SizeError("unpatchify shape mismatch");
  Tensor x({C, T, H, W});
  std::size_t n = 0;
  for (std::size_t a = 0; a < nt; ++a)
    for (std::size_t b = 0; b < nh; ++b)
      for (std::size_t d = 0; d < nw; ++d, ++n) {
        std::size_t k = 0;
        for (std::size_t c = 0; c < C; ++c)
          for (std::size_t dt = 0; dt < p.t; ++dt)
            for (std::size_t dh = 0; dh < p.h; ++dh)
              for (std::size_t dw = 0; dw < p.w; ++dw, ++k) {
                x.at(c, a * p.t + dt, b * p.h + dh, d * p.w + dw) = vectors.at(n, k);
              }
      }
  return x;
}

enum class Segment { target, source };

struct TokenGrid {
  Tensor tokens;  // [N, D]
  std::vector<TokenPosition> positions;
  std::vector<Segment> segment;

  std::size_t size() const { return positions.size(); }
};

/// Linear patch embedding shared by both streams: token = v * weight + bias.
struct PatchEmbedding {
  Tensor weight;  // [K, D]
  Tensor bias;    // [D]
};

inline Tensor embed_patches(const Tensor& vectors, const PatchEmbedding& e) {
  const std::size_t n = vectors.dim(0), K = vectors.dim(1);
  if (e.weight.rank() != 2 || e.weight.dim(0) != K || e.bias.shape() != Shape{e.weight.dim(1)}) {
    throw SizeError("patch embedding expects [" + std::to_string(K) + ",D] weights");
  }
  const std::size_t D = e.weight.dim(1);
  using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMat> v(vectors.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
  Eigen::Map<const RowMat> w(e.weight.data().data(), static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(D));
  Eigen::Map<const Eigen::RowVectorXf> b(e.bias.data().data(), static_cast<Eigen::Index>(D));
  Tensor out({n, D});
  Eigen::Map<RowMat> o(out.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(D));
  o = (v * w).rowwise() + b;
  return out;
}

/// Target (anchor-stream) tokens first, then source tokens whose temporal
/// index is shifted by rope_offset.
inline TokenGrid concat_streams(const ConditionStream& anchor, const ConditionStream& source,
                                const PatchEmbedding& embed, const PatchSize& patch,
                                long long rope_offset) {
  if (anchor.tensor.shape() != source.tensor.shape()) {
    throw SizeError("anchor stream " + shape_string(anchor.tensor.shape()) + " and source stream " +
                    shape_string(source.tensor.shape()) + " differ");
  }
  const Patches pa = patchify(anchor.tensor, patch);
  const Patches ps = patchify(source.tensor, patch);
  const Tensor ta = embed_patches(pa.vectors, embed), ts = embed_patches(ps.vectors, embed);
  const std::array<Tensor, 2> parts{ta, ts};
  const std::size_t n = ta.dim(0), D = ta.dim(1);
  TokenGrid g{stack(parts).reshaped({2 * n, D}), pa.positions, std::vector<Segment>(n, Segment::target)};
  for (auto pos : ps.positions) {
    pos.t += rope_offset;
    g.positions.push_back(pos);
    g.segment.push_back(Segment::source);
  }
  return g;
}

/// Smallest |t_target - t_source| over all cross-segment token pairs.
inline long long min_cross_segment_distance(const TokenGrid& g) {
  long long best = std::numeric_limits<long long>::max();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.segment[i] != Segment::target) continue;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (g.segment[j] != Segment::source) continue;
      best = std::min(best, std::llabs(g.positions[i].t - g.positions[j].t));
    }
  }
  return best;
}

}  // namespace tforge
