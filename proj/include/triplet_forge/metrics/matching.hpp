#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/rng.hpp"

namespace tforge {

struct Correspondence {
  double x1 = 0, y1 = 0;  // source pixel
  double x2 = 0, y2 = 0;  // target pixel
  double confidence = 1.0;

  bool operator==(const Correspondence&) const = default;
};

struct RansacConfig {
  double confidence_threshold = 0.5;
  std::size_t iterations = 1000;
  double inlier_px = 3.0;
  std::uint64_t seed = 0;

  bool operator==(const RansacConfig&) const = default;
};

inline void validate(const RansacConfig& c) {
  if (!(c.confidence_threshold >= 0.0 && c.confidence_threshold <= 1.0)) {
    throw ConfigError("confidence threshold must be in [0,1]");
  }
  if (c.iterations < 1) throw ConfigError("RANSAC needs at least one iteration");
  if (!(c.inlier_px > 0.0)) throw ConfigError("inlier_px must be positive");
}

struct MatchResult {
  std::size_t count = 0;
  std::size_t filtered = 0;  // matches passing the confidence threshold
  bool insufficient_matches = false;
  Eigen::Matrix3d homography = Eigen::Matrix3d::Identity();
};

namespace detail {

/// Similarity taking the points to zero mean and mean distance sqrt(2).
inline Eigen::Matrix3d hartley_normalizer(const std::vector<Eigen::Vector2d>& pts) {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double dist = 0.0;
  for (const auto& p : pts) dist += (p - mean).norm();
  dist /= static_cast<double>(pts.size());
  const double s = dist > 0.0 ? std::sqrt(2.0) / dist : 1.0;
  Eigen::Matrix3d t;
  t << s, 0, -s * mean.x(), 0, s, -s * mean.y(), 0, 0, 1;
  return t;
}

}  // namespace detail

/// Normalized DLT homography mapping (x1,y1) to (x2,y2) from >= 4 matches.
/// Returns false for degenerate configurations.
inline bool fit_homography(const std::vector<Correspondence>& m, const std::vector<std::size_t>& idx,
                           Eigen::Matrix3d& h) {
  if (idx.size() < 4) return false;
  std::vector<Eigen::Vector2d> a, b;
  for (auto i : idx) {
    a.emplace_back(m[i].x1, m[i].y1);
    b.emplace_back(m[i].x2, m[i].y2);
  }
  const Eigen::Matrix3d ta = detail::hartley_normalizer(a), tb = detail::hartley_normalizer(b);
  Eigen::MatrixXd A(2 * static_cast<Eigen::Index>(idx.size()), 9);
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Eigen::Vector3d p = ta * a[k].homogeneous();
    const Eigen::Vector3d q = tb * b[k].homogeneous();
    const auto r = 2 * static_cast<Eigen::Index>(k);
    A.row(r) << 0, 0, 0, -p.x(), -p.y(), -1, q.y() * p.x(), q.y() * p.y(), q.y();
    A.row(r + 1) << p.x(), p.y(), 1, 0, 0, 0, -q.x() * p.x(), -q.x() * p.y(), -q.x();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  // A rank below 8 means collinear or repeated points.
  if (sv.size() >= 8 && sv[7] < 1e-10 * std::max(sv[0], 1e-300)) return false;
  const Eigen::VectorXd v = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
  h = tb.inverse() * hn * ta;
  if (!h.allFinite() || std::abs(h(2, 2)) < 1e-300) return false;
  h /= h(2, 2);
  return h.allFinite() && std::abs(h.determinant()) > 1e-12;
}

/// One-sided transfer error |H p1 - p2|; infinite when p1 maps to infinity.
inline double transfer_error(const Eigen::Matrix3d& h, const Correspondence& c) {
  const Eigen::Vector3d p = h * Eigen::Vector3d(c.x1, c.y1, 1.0);
  if (std::abs(p.z()) < 1e-12) return std::numeric_limits<double>::infinity();
  return std::hypot(p.x() / p.z() - c.x2, p.y() / p.z() - c.y2);
}

/// Confidence filter, then seeded RANSAC over 4-point homographies; the best
/// consensus set is refit with all its members before the final count.
inline MatchResult matching_pixels(const std::vector<Correspondence>& matches, const RansacConfig& cfg) {
  validate(cfg);
  std::vector<Correspondence> kept;
  for (const auto& m : matches) {
    if (m.confidence >= cfg.confidence_threshold) kept.push_back(m);
  }
  MatchResult r;
  r.filtered = kept.size();
  if (kept.size() < 4) {
    r.insufficient_matches = true;
    return r;
  }
  const auto inliers_of = [&](const Eigen::Matrix3d& h) {
    std::vector<std::size_t> in;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (transfer_error(h, kept[i]) <= cfg.inlier_px) in.push_back(i);
    }
    return in;
  };

  SeededRng rng(cfg.seed, 0x52414E534143ull);
  std::vector<std::size_t> order(kept.size());
  std::vector<std::size_t> best;
  Eigen::Matrix3d best_h = Eigen::Matrix3d::Identity();
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    // Partial Fisher-Yates draw of four distinct indices.
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = 0; k < 4; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(rng.uniform_index(order.size() - k));
      std::swap(order[k], order[j]);
    }
    Eigen::Matrix3d h;
    if (!fit_homography(kept, {order.begin(), order.begin() + 4}, h)) continue;
    auto in = inliers_of(h);
    if (in.size() > best.size()) {
      best = std::move(in);
      best_h = h;
      if (best.size() == kept.size()) break;
    }
  }
  if (best.size() < 4) {
    r.count = 0;
    return r;
  }
  Eigen::Matrix3d refit;
  if (fit_homography(kept, best, refit)) {
    auto in = inliers_of(refit);
    if (in.size() >= best.size()) {
      best = std::move(in);
      best_h = refit;
    }
  }
  r.count = best.size();
  r.homography = best_h;
  return r;
}

/// Lines `x1 y1 x2 y2 conf`; blank lines and `#` comments skipped.
inline std::vector<Correspondence> read_matches(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open match file " + path.string());
  std::vector<Correspondence> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Correspondence c;
    std::string rest;
    if (!(ls >> c.x1 >> c.y1 >> c.x2 >> c.y2 >> c.confidence) || (ls >> rest) ||
        !(c.confidence >= 0.0 && c.confidence <= 1.0)) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 'x1 y1 x2 y2 conf' with conf in [0,1]");
    }
    out.push_back(c);
  }
  return out;
}

inline void write_matches(const std::vector<Correspondence>& m, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw IoError("cannot write " + path.string());
  os << std::setprecision(17);
  for (const auto& c : m) os << c.x1 << ' ' << c.y1 << ' ' << c.x2 << ' ' << c.y2 << ' ' << c.confidence << '\n';
}

}  // namespace tforge
