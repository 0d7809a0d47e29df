#pragma once

#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "triplet_forge/conditioning/rope.hpp"
#include "triplet_forge/conditioning/streams.hpp"
#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/rng.hpp"
#include "triplet_forge/core/tensor.hpp"
#include "triplet_forge/core/tensor_io.hpp"

namespace tforge {

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ToyConfig {
  std::size_t model_dim = 64;
  std::size_t heads = 4;
  std::size_t mlp_dim = 128;
  RopeConfig rope{};  // head_dim is taken from model_dim / heads
  double ln_eps = 1e-5;

  std::size_t head_dim() const { return model_dim / heads; }
  RopeConfig rope_config() const {
    RopeConfig r = rope;
    r.head_dim = head_dim();
    return r;
  }
  bool operator==(const ToyConfig&) const = default;
};

inline void validate(const ToyConfig& c) {
  if (c.model_dim == 0 || c.heads == 0 || c.mlp_dim == 0) throw ConfigError("toy model dims must be positive");
  if (c.model_dim % c.heads) throw ConfigError("model_dim must be divisible by heads");
  if (!(c.ln_eps > 0.0)) throw ConfigError("ln_eps must be positive");
  validate(c.rope_config());
}

/// Pre-norm block: x1 = x + Attn(LN(x)) Wo; out = x1 + GELU(LN(x1) W1 + b1) W2 + b2.
/// Row-vector convention: tokens are rows, weights multiply on the right.
template <class S>
struct ToyBlockParams {
  Mat<S> wq, wk, wv, wo, w1, b1, w2, b2;

  template <class F>
  void for_each(F&& f) {
    f("wq", wq); f("wk", wk); f("wv", wv); f("wo", wo);
    f("w1", w1); f("b1", b1); f("w2", w2); f("b2", b2);
  }
  template <class F>
  void for_each(F&& f) const {
    f("wq", wq); f("wk", wk); f("wv", wv); f("wo", wo);
    f("w1", w1); f("b1", b1); f("w2", w2); f("b2", b2);
  }
};

namespace detail {

template <class S>
Mat<S> init_matrix(std::size_t rows, std::size_t cols, SeededRng& rng, double scale) {
  Mat<S> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(scale * rng.normal());
  return m;
}

template <class S>
Mat<S> zeros(std::size_t rows, std::size_t cols) {
  return Mat<S>::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

/// LayerNorm without affine parameters; returns per-row 1/sigma.
template <class S>
Mat<S> layer_norm(const Mat<S>& x, double eps, std::vector<S>& inv_sigma) {
  Mat<S> y(x.rows(), x.cols());
  inv_sigma.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const S mean = x.row(r).mean();
    const S var = (x.row(r).array() - mean).square().mean();
    const S inv = S(1) / std::sqrt(var + static_cast<S>(eps));
    inv_sigma[static_cast<std::size_t>(r)] = inv;
    y.row(r) = (x.row(r).array() - mean) * inv;
  }
  return y;
}

template <class S>
Mat<S> layer_norm_backward(const Mat<S>& y, const std::vector<S>& inv_sigma, const Mat<S>& dy) {
  Mat<S> dx(y.rows(), y.cols());
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    const S m1 = dy.row(r).mean();
    const S m2 = (dy.row(r).array() * y.row(r).array()).mean();
    dx.row(r) = inv_sigma[static_cast<std::size_t>(r)] * (dy.row(r).array() - m1 - y.row(r).array() * m2);
  }
  return dx;
}

// tanh approximation of GELU
template <class S>
S gelu(S u) {
  const S c = static_cast<S>(std::sqrt(2.0 / std::numbers::pi));
  return S(0.5) * u * (S(1) + std::tanh(c * (u + S(0.044715) * u * u * u)));
}

template <class S>
S gelu_grad(S u) {
  const S c = static_cast<S>(std::sqrt(2.0 / std::numbers::pi));
  const S inner = c * (u + S(0.044715) * u * u * u);
  const S th = std::tanh(inner);
  return S(0.5) * (S(1) + th) + S(0.5) * u * (S(1) - th * th) * c * (S(1) + S(3 * 0.044715) * u * u);
}

}  // namespace detail

template <class S>
ToyBlockParams<S> init_block_params(const ToyConfig& cfg, SeededRng& rng) {
  validate(cfg);
  const std::size_t D = cfg.model_dim, F = cfg.mlp_dim;
  const double sd = 1.0 / std::sqrt(static_cast<double>(D)), sf = 1.0 / std::sqrt(static_cast<double>(F));
  return {detail::init_matrix<S>(D, D, rng, sd), detail::init_matrix<S>(D, D, rng, sd),
          detail::init_matrix<S>(D, D, rng, sd), detail::init_matrix<S>(D, D, rng, sd),
          detail::init_matrix<S>(D, F, rng, sd), detail::zeros<S>(1, F),
          detail::init_matrix<S>(F, D, rng, sf), detail::zeros<S>(1, D)};
}

/// Intermediate values kept for the backward pass.
template <class S>
struct BlockCache {
  Mat<S> x, h1, q, k, v, o, x1, h2, u, g;
  std::vector<S> inv1, inv2;
  std::vector<Mat<S>> attn;  // per head [N,N], rows sum to 1
  std::vector<std::vector<double>> angles;
};

template <class S>
Mat<S> block_forward(const Mat<S>& x, const std::vector<TokenPosition>& positions, const ToyConfig& cfg,
                     const ToyBlockParams<S>& p, BlockCache<S>& c) {
  const auto D = static_cast<Eigen::Index>(cfg.model_dim);
  const auto dh = static_cast<Eigen::Index>(cfg.head_dim());
  const auto H = static_cast<Eigen::Index>(cfg.heads);
  if (x.cols() != D) throw SizeError("token width " + std::to_string(x.cols()) + " != model_dim");
  if (static_cast<std::size_t>(x.rows()) != positions.size()) throw SizeError("one position per token required");
  const RopeConfig rope = cfg.rope_config();
  const Eigen::Index N = x.rows();

  c.x = x;
  c.angles.clear();
  for (const auto& pos : positions) c.angles.push_back(rope_angles(pos, rope));

  c.h1 = detail::layer_norm(x, cfg.ln_eps, c.inv1);
  c.q = c.h1 * p.wq;
  c.k = c.h1 * p.wk;
  c.v = c.h1 * p.wv;
  Mat<S> qr = c.q, kr = c.k;
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index h = 0; h < H; ++h) {
      rope_apply(qr.row(n).segment(h * dh, dh), c.angles[static_cast<std::size_t>(n)]);
      rope_apply(kr.row(n).segment(h * dh, dh), c.angles[static_cast<std::size_t>(n)]);
    }
  }
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  c.attn.assign(static_cast<std::size_t>(H), Mat<S>());
  c.o.resize(N, D);
  for (Eigen::Index h = 0; h < H; ++h) {
    Mat<S> s = qr.middleCols(h * dh, dh) * kr.middleCols(h * dh, dh).transpose() * scale;
    for (Eigen::Index r = 0; r < N; ++r) {
      const S m = s.row(r).maxCoeff();
      s.row(r) = (s.row(r).array() - m).exp();
      s.row(r) /= s.row(r).sum();
    }
    c.o.middleCols(h * dh, dh) = s * c.v.middleCols(h * dh, dh);
    c.attn[static_cast<std::size_t>(h)] = std::move(s);
  }
  c.x1 = x + c.o * p.wo;
  c.h2 = detail::layer_norm(c.x1, cfg.ln_eps, c.inv2);
  c.u = (c.h2 * p.w1).rowwise() + p.b1.row(0);
  c.g = c.u.unaryExpr([](S t) { return detail::gelu(t); });
  return (c.x1 + c.g * p.w2).rowwise() + p.b2.row(0);
}

/// Accumulates parameter gradients into `grad` and returns d(loss)/dx.
template <class S>
Mat<S> block_backward(const Mat<S>& dout, const ToyConfig& cfg, const ToyBlockParams<S>& p,
                      const BlockCache<S>& c, ToyBlockParams<S>& grad) {
  const auto dh = static_cast<Eigen::Index>(cfg.head_dim());
  const auto H = static_cast<Eigen::Index>(cfg.heads);
  const Eigen::Index N = dout.rows();

  // MLP branch
  grad.w2 += c.g.transpose() * dout;
  grad.b2 += dout.colwise().sum();
  Mat<S> du = (dout * p.w2.transpose()).array() * c.u.unaryExpr([](S t) { return detail::gelu_grad(t); }).array();
  grad.w1 += c.h2.transpose() * du;
  grad.b1 += du.colwise().sum();
  Mat<S> dx1 = dout + detail::layer_norm_backward(c.h2, c.inv2, Mat<S>(du * p.w1.transpose()));

  // attention branch
  grad.wo += c.o.transpose() * dx1;
  const Mat<S> d_o = dx1 * p.wo.transpose();
  Mat<S> qr = c.q, kr = c.k;
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index h = 0; h < H; ++h) {
      rope_apply(qr.row(n).segment(h * dh, dh), c.angles[static_cast<std::size_t>(n)]);
      rope_apply(kr.row(n).segment(h * dh, dh), c.angles[static_cast<std::size_t>(n)]);
    }
  }
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  Mat<S> dqr(N, qr.cols()), dkr(N, kr.cols()), dv(N, c.v.cols());
  for (Eigen::Index h = 0; h < H; ++h) {
    const Mat<S>& a = c.attn[static_cast<std::size_t>(h)];
    const Mat<S> doh = d_o.middleCols(h * dh, dh);
    dv.middleCols(h * dh, dh) = a.transpose() * doh;
    const Mat<S> da = doh * c.v.middleCols(h * dh, dh).transpose();
    Mat<S> ds(N, N);
    for (Eigen::Index r = 0; r < N; ++r) {
      const S dot = (da.row(r).array() * a.row(r).array()).sum();
      ds.row(r) = a.row(r).array() * (da.row(r).array() - dot);
    }
    ds *= scale;
    dqr.middleCols(h * dh, dh) = ds * kr.middleCols(h * dh, dh);
    dkr.middleCols(h * dh, dh) = ds.transpose() * qr.middleCols(h * dh, dh);
  }
  // RoPE is orthogonal: its adjoint is the inverse rotation.
  for (Eigen::Index n = 0; n < N; ++n) {
    for (Eigen::Index h = 0; h < H; ++h) {
      rope_apply(dqr.row(n).segment(h * dh, dh), c.angles[static_cast<std::size_t>(n)], -1.0);
      rope_apply(dkr.row(n).segment(h * dh, dh), c.angles[static_cast<std::size_t>(n)], -1.0);
    }
  }
  grad.wq += c.h1.transpose() * dqr;
  grad.wk += c.h1.transpose() * dkr;
  grad.wv += c.h1.transpose() * dv;
  const Mat<S> dh1 = dqr * p.wq.transpose() + dkr * p.wk.transpose() + dv * p.wv.transpose();
  return dx1 + detail::layer_norm_backward(c.h1, c.inv1, dh1);
}

/// Float convenience over TokenGrid; positions and segments pass through.
inline TokenGrid toy_block_forward(const TokenGrid& tokens, const ToyBlockParams<float>& params,
                                   const ToyConfig& cfg) {
  validate(cfg);
  if (tokens.tokens.rank() != 2 || tokens.tokens.dim(0) != tokens.size()) {
    throw SizeError("token grid must be [N,D] with N positions");
  }
  const auto N = static_cast<Eigen::Index>(tokens.tokens.dim(0));
  const auto D = static_cast<Eigen::Index>(tokens.tokens.dim(1));
  const Mat<float> x = Eigen::Map<const Mat<float>>(tokens.tokens.data().data(), N, D);
  BlockCache<float> cache;
  const Mat<float> y = block_forward(x, tokens.positions, cfg, params, cache);
  TokenGrid out = tokens;
  std::copy(y.data(), y.data() + y.size(), out.tokens.data().begin());
  return out;
}

// --- loss -----------------------------------------------------------------

struct LossBreakdown {
  double mse = 0.0;
  double reference = 0.0;
  double total = 0.0;
  double alpha = 0.1;
};

/// total = mean((pred - target)^2) + alpha * mean(|out_source - z_s_clean|).
inline LossBreakdown total_loss(const Tensor& pred_target, const Tensor& noise_target,
                                const Tensor& out_source, const Tensor& z_s_clean, double alpha = 0.1) {
  if (pred_target.shape() != noise_target.shape() || out_source.shape() != z_s_clean.shape()) {
    throw SizeError("loss operands must have matching shapes");
  }
  if (pred_target.empty() || out_source.empty()) throw EmptyInputError("loss over empty tensors");
  LossBreakdown l;
  l.alpha = alpha;
  for (std::size_t i = 0; i < pred_target.size(); ++i) {
    const double d = static_cast<double>(pred_target[i]) - noise_target[i];
    l.mse += d * d;
  }
  l.mse /= static_cast<double>(pred_target.size());
  for (std::size_t i = 0; i < out_source.size(); ++i) {
    l.reference += std::abs(static_cast<double>(out_source[i]) - z_s_clean[i]);
  }
  l.reference /= static_cast<double>(out_source.size());
  l.total = l.mse + alpha * l.reference;
  return l;
}

// --- full toy model: patch embedding, block, linear head ------------------

template <class S>
struct ToyModelParams {
  Mat<S> wp, bp;  // patch embedding [K_in, D], [1, D]
  ToyBlockParams<S> block;
  Mat<S> wh, bh;  // head [D, K_out], [1, K_out]

  template <class F>
  void for_each(F&& f) {
    f("wp", wp);
    f("bp", bp);
    block.for_each(f);
    f("wh", wh);
    f("bh", bh);
  }
  template <class F>
  void for_each(F&& f) const {
    f("wp", wp);
    f("bp", bp);
    block.for_each(f);
    f("wh", wh);
    f("bh", bh);
  }

  ToyModelParams zeros_like() const {
    ToyModelParams z = *this;
    z.for_each([](const char*, Mat<S>& m) { m.setZero(); });
    return z;
  }

  PatchEmbedding patch_embedding() const {
    const auto to_tensor = [](const Mat<S>& m, Shape shape) {
      std::vector<float> v(static_cast<std::size_t>(m.size()));
      for (Eigen::Index i = 0; i < m.size(); ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(m.data()[i]);
      return Tensor(std::move(shape), std::move(v));
    };
    return {to_tensor(wp, {static_cast<std::size_t>(wp.rows()), static_cast<std::size_t>(wp.cols())}),
            to_tensor(bp, {static_cast<std::size_t>(bp.cols())})};
  }
};

template <class S>
ToyModelParams<S> init_model_params(const ToyConfig& cfg, std::size_t k_in, std::size_t k_out, SeededRng& rng) {
  validate(cfg);
  const std::size_t D = cfg.model_dim;
  ToyModelParams<S> p;
  p.wp = detail::init_matrix<S>(k_in, D, rng, 1.0 / std::sqrt(static_cast<double>(k_in)));
  p.bp = detail::zeros<S>(1, D);
  p.block = init_block_params<S>(cfg, rng);
  p.wh = detail::init_matrix<S>(D, k_out, rng, 1.0 / std::sqrt(static_cast<double>(D)));
  p.bh = detail::zeros<S>(1, k_out);
  return p;
}

/// One training example: patch vectors of both streams (target rows first),
/// positions, and per-row regression targets (clean target latent patches for
/// target rows, clean source latent patches for source rows).
template <class S>
struct ToyBatch {
  Mat<S> inputs;   // [N, K_in]
  Mat<S> targets;  // [N, K_out]
  std::vector<TokenPosition> positions;
  std::vector<Segment> segment;
};

template <class S>
struct ModelCache {
  BlockCache<S> block;
  Mat<S> x0, x2;
};

template <class S>
Mat<S> model_forward(const ToyBatch<S>& b, const ToyConfig& cfg, const ToyModelParams<S>& p, ModelCache<S>& c) {
  c.x0 = (b.inputs * p.wp).rowwise() + p.bp.row(0);
  c.x2 = block_forward(c.x0, b.positions, cfg, p.block, c.block);
  return (c.x2 * p.wh).rowwise() + p.bh.row(0);
}

/// Composite loss over model outputs; writes d(total)/d(out) when `dout` is set.
template <class S>
LossBreakdown model_loss(const Mat<S>& out, const ToyBatch<S>& b, double alpha, Mat<S>* dout = nullptr) {
  std::size_t nt = 0, ns = 0;
  for (auto s : b.segment) (s == Segment::target ? nt : ns) += 1;
  if (nt == 0 || ns == 0) throw EmptyInputError("both segments need tokens");
  const double et = static_cast<double>(nt * static_cast<std::size_t>(out.cols()));
  const double es = static_cast<double>(ns * static_cast<std::size_t>(out.cols()));
  LossBreakdown l;
  l.alpha = alpha;
  if (dout) dout->resize(out.rows(), out.cols());
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const bool tgt = b.segment[static_cast<std::size_t>(r)] == Segment::target;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      const double d = static_cast<double>(out(r, j) - b.targets(r, j));
      if (tgt) {
        l.mse += d * d;
        if (dout) (*dout)(r, j) = static_cast<S>(2.0 * d / et);
      } else {
        l.reference += std::abs(d);
        if (dout) (*dout)(r, j) = static_cast<S>(alpha * (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / es);
      }
    }
  }
  l.mse /= et;
  l.reference /= es;
  l.total = l.mse + alpha * l.reference;
  return l;
}

/// Loss and full parameter gradient.
template <class S>
LossBreakdown model_loss_and_grad(const ToyBatch<S>& b, const ToyConfig& cfg, const ToyModelParams<S>& p,
                                  double alpha, ToyModelParams<S>& grad) {
  ModelCache<S> c;
  const Mat<S> out = model_forward(b, cfg, p, c);
  Mat<S> dout;
  const LossBreakdown l = model_loss(out, b, alpha, &dout);
  grad = p.zeros_like();
  grad.wh += c.x2.transpose() * dout;
  grad.bh += dout.colwise().sum();
  const Mat<S> dx2 = dout * p.wh.transpose();
  const Mat<S> dx0 = block_backward(dx2, cfg, p.block, c.block, grad.block);
  grad.wp += b.inputs.transpose() * dx0;
  grad.bp += dx0.colwise().sum();
  return l;
}

struct AdamConfig {
  double learning_rate = 3e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  bool operator==(const AdamConfig&) const = default;
};

template <class S>
class Adam {
 public:
  Adam(AdamConfig cfg, const ToyModelParams<S>& like) : cfg_(cfg), m_(like.zeros_like()), v_(like.zeros_like()) {}

  void step(ToyModelParams<S>& params, const ToyModelParams<S>& grad) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    std::vector<Mat<S>*> ps, ms, vs;
    std::vector<const Mat<S>*> gs;
    params.for_each([&](const char*, Mat<S>& x) { ps.push_back(&x); });
    m_.for_each([&](const char*, Mat<S>& x) { ms.push_back(&x); });
    v_.for_each([&](const char*, Mat<S>& x) { vs.push_back(&x); });
    grad.for_each([&](const char*, const Mat<S>& x) { gs.push_back(&x); });
    for (std::size_t i = 0; i < ps.size(); ++i) {
      *ms[i] = static_cast<S>(cfg_.beta1) * *ms[i] + static_cast<S>(1.0 - cfg_.beta1) * *gs[i];
      *vs[i] = static_cast<S>(cfg_.beta2) * *vs[i] + static_cast<S>(1.0 - cfg_.beta2) * gs[i]->cwiseProduct(*gs[i]);
      const auto mhat = ms[i]->array() / static_cast<S>(c1);
      const auto vhat = vs[i]->array() / static_cast<S>(c2);
      ps[i]->array() -= static_cast<S>(cfg_.learning_rate) * mhat / (vhat.sqrt() + static_cast<S>(cfg_.epsilon));
    }
  }

 private:
  AdamConfig cfg_;
  ToyModelParams<S> m_, v_;
  std::size_t t_ = 0;
};

/// One VTNSR file per parameter matrix (`<name>.vtnsr`, shape [rows, cols]).
template <class S>
void save_params(const ToyModelParams<S>& p, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  p.for_each([&](const char* name, const Mat<S>& m) {
    std::vector<float> v(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i) v[static_cast<std::size_t>(i)] = static_cast<float>(m.data()[i]);
    write_tensor(Tensor({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())}, std::move(v)),
                 dir / (std::string(name) + ".vtnsr"));
  });
}

template <class S>
ToyModelParams<S> load_params(const std::filesystem::path& dir) {
  ToyModelParams<S> p;
  p.for_each([&](const char* name, Mat<S>& m) {
    const Tensor t = read_tensor(dir / (std::string(name) + ".vtnsr"));
    if (t.rank() != 2) throw FormatError(std::string("parameter ") + name + " must be rank 2");
    m.resize(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(t[static_cast<std::size_t>(i)]);
  });
  return p;
}

}  // namespace tforge
