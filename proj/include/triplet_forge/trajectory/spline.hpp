#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"

namespace tforge {

/// Crop-window control point: normalized time and top-left offset in pixels.
struct ControlPoint {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  bool operator==(const ControlPoint&) const = default;
};

/// a + b*u + c*u^2 + d*u^3 with u measured from the segment's left knot.
struct CubicPiece {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  double value(double u) const { return a + u * (b + u * (c + u * d)); }
  double slope(double u) const { return b + u * (2.0 * c + 3.0 * d * u); }
  double curvature(double u) const { return 2.0 * c + 6.0 * d * u; }
};

/// Natural cubic interpolant of one coordinate. Solves the tridiagonal
/// system for the knot second derivatives with M_0 = M_n = 0.
inline std::vector<CubicPiece> fit_natural_pieces(std::span<const double> knots,
                                                  std::span<const double> values) {
  const std::size_t n = knots.size();
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = knots[i + 1] - knots[i];

  // Interior unknowns M_1..M_{n-2}; Thomas algorithm.
  std::vector<double> m(n, 0.0);
  if (n > 2) {
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      diag[j] = 2.0 * (h[i - 1] + h[i]);
      upper[j] = h[i];
      rhs[j] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
    }
    for (std::size_t j = 1; j < k; ++j) {
      const double lower = h[j];  // sub-diagonal entry of row j is h[(j+1)-1]
      const double w = lower / diag[j - 1];
      diag[j] -= w * upper[j - 1];
      rhs[j] -= w * rhs[j - 1];
    }
    m[k] = rhs[k - 1] / diag[k - 1];
    for (std::size_t j = k - 1; j-- > 0;) m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
  }

  std::vector<CubicPiece> pieces(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    pieces[i].a = values[i];
    pieces[i].b = (values[i + 1] - values[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
    pieces[i].c = m[i] / 2.0;
    pieces[i].d = (m[i + 1] - m[i]) / (6.0 * h[i]);
  }
  return pieces;
}

/// Natural cubic spline through 2D control points, parameterized by time.
class CubicSpline {
 public:
  const std::vector<double>& knots() const noexcept { return knots_; }
  std::size_t segments() const noexcept { return x_.size(); }
  const CubicPiece& x_piece(std::size_t i) const { return x_.at(i); }
  const CubicPiece& y_piece(std::size_t i) const { return y_.at(i); }

  /// Index of the segment containing t; the last knot belongs to the last segment.
  std::size_t segment_of(double t) const {
    if (!(t >= knots_.front() && t <= knots_.back())) {
      throw DomainError("spline evaluated at t=" + std::to_string(t) + " outside [" +
                        std::to_string(knots_.front()) + ", " + std::to_string(knots_.back()) +
                        "]");
    }
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto i = static_cast<std::size_t>(std::distance(knots_.begin(), it));
    return std::min(i == 0 ? 0 : i - 1, segments() - 1);
  }

  std::array<double, 2> eval(double t) const {
    const std::size_t i = segment_of(t);
    const double u = t - knots_[i];
    return {x_[i].value(u), y_[i].value(u)};
  }

  friend CubicSpline fit_natural_cubic_spline(std::span<const ControlPoint> points);

 private:
  std::vector<double> knots_;
  std::vector<CubicPiece> x_;
  std::vector<CubicPiece> y_;
};

inline CubicSpline fit_natural_cubic_spline(std::span<const ControlPoint> points) {
  if (points.size() < 2) throw InvalidKnotsError("spline needs at least 2 control points");
  std::vector<double> t(points.size()), x(points.size()), y(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    t[i] = points[i].t;
    x[i] = points[i].x;
    y[i] = points[i].y;
    if (i > 0 && !(t[i] > t[i - 1])) {
      throw InvalidKnotsError("control point times must be strictly increasing");
    }
  }
  CubicSpline s;
  s.x_ = fit_natural_pieces(t, x);
  s.y_ = fit_natural_pieces(t, y);
  s.knots_ = std::move(t);
  return s;
}

inline std::array<double, 2> eval_spline(const CubicSpline& s, double t) { return s.eval(t); }

}  // namespace tforge
