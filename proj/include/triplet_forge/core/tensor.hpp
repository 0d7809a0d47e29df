#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "triplet_forge/core/errors.hpp"

namespace tforge {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

/// Dense row-major float32 array, last axis fastest.
///
/// Frames are [T,H,W,C], flows [T,H,W,2], latents [C,T,H,W]. Every public
/// operation in the library keeps the elements finite; `require_finite`
/// is the checkpoint used at module boundaries.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape, float fill = 0.0f)
      : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

  Tensor(Shape shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_numel(shape_) != data_.size()) {
      throw SizeError("tensor shape " + shape_string(shape_) + " does not match " +
                      std::to_string(data_.size()) + " elements");
    }
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  const std::vector<float>& values() const noexcept { return data_; }

  float& operator[](std::size_t i) { return data_[i]; }
  const float& operator[](std::size_t i) const { return data_[i]; }

  template <class... I>
  std::size_t offset(I... idx) const {
    static_assert(sizeof...(I) > 0);
    const std::size_t indices[] = {static_cast<std::size_t>(idx)...};
    std::size_t off = 0;
    for (std::size_t a = 0; a < sizeof...(I); ++a) off = off * shape_[a] + indices[a];
    return off;
  }

  template <class... I>
  float& at(I... idx) {
    return data_[offset(idx...)];
  }
  template <class... I>
  const float& at(I... idx) const {
    return data_[offset(idx...)];
  }

  /// Copy of the sub-tensor at `index` along axis 0.
  Tensor slice(std::size_t index) const {
    if (rank() == 0 || index >= shape_[0]) throw BoundsError("slice index out of range");
    Shape sub(shape_.begin() + 1, shape_.end());
    const std::size_t n = shape_numel(sub);
    std::vector<float> out(data_.begin() + static_cast<std::ptrdiff_t>(index * n),
                           data_.begin() + static_cast<std::ptrdiff_t>((index + 1) * n));
    return Tensor(std::move(sub), std::move(out));
  }

  /// Overwrite the sub-tensor at `index` along axis 0.
  void set_slice(std::size_t index, const Tensor& sub) {
    if (rank() == 0 || index >= shape_[0]) throw BoundsError("slice index out of range");
    if (Shape(shape_.begin() + 1, shape_.end()) != sub.shape()) {
      throw SizeError("slice shape " + shape_string(sub.shape()) + " does not fit " +
                      shape_string(shape_));
    }
    std::copy(sub.data_.begin(), sub.data_.end(),
              data_.begin() + static_cast<std::ptrdiff_t>(index * sub.size()));
  }

  Tensor reshaped(Shape shape) const& { return Tensor(std::move(shape), data_); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
  }

  void require_finite(const char* what) const {
    if (!all_finite()) throw NumericError(std::string(what) + ": non-finite value");
  }

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

/// Stack equally shaped tensors along a new leading axis.
inline Tensor stack(std::span<const Tensor> parts) {
  if (parts.empty()) throw EmptyInputError("stack of zero tensors");
  Shape shape = parts.front().shape();
  std::vector<float> data;
  data.reserve(parts.size() * parts.front().size());
  for (const auto& p : parts) {
    if (p.shape() != shape) throw SizeError("stack: mismatched shapes");
    data.insert(data.end(), p.data().begin(), p.data().end());
  }
  shape.insert(shape.begin(), parts.size());
  return Tensor(std::move(shape), std::move(data));
}

/// Video clip, frames [T,H,W,3] normalized to [0,1].
class VideoClip {
 public:
  VideoClip() = default;

  VideoClip(Tensor frames, double fps) : frames_(std::move(frames)), fps_(fps) {
    if (frames_.rank() != 4 || frames_.dim(3) != 3) {
      throw SizeError("video clip must be [T,H,W,3], got " + shape_string(frames_.shape()));
    }
    if (frames_.dim(0) < 1) throw EmptyInputError("video clip has no frames");
    if (!(fps_ > 0.0)) throw ConfigError("video clip fps must be positive");
    for (float v : frames_.data()) {
      if (!(v >= 0.0f && v <= 1.0f)) throw DomainError("video clip value outside [0,1]");
    }
  }

  const Tensor& frames() const noexcept { return frames_; }
  double fps() const noexcept { return fps_; }
  std::size_t num_frames() const { return frames_.dim(0); }
  std::size_t height() const { return frames_.dim(1); }
  std::size_t width() const { return frames_.dim(2); }

  Tensor frame(std::size_t t) const { return frames_.slice(t); }

  bool operator==(const VideoClip&) const = default;

 private:
  Tensor frames_;
  double fps_ = 1.0;
};

/// Strictly two-valued mask [T,H,W,1].
class BinaryMask {
 public:
  BinaryMask() = default;

  explicit BinaryMask(Tensor values) : values_(std::move(values)) {
    if (values_.rank() != 4 || values_.dim(3) != 1) {
      throw SizeError("binary mask must be [T,H,W,1], got " + shape_string(values_.shape()));
    }
    for (float v : values_.data()) {
      if (v != 0.0f && v != 1.0f) throw DomainError("binary mask value not in {0,1}");
    }
  }

  static BinaryMask ones(std::size_t t, std::size_t h, std::size_t w) {
    return BinaryMask(Tensor({t, h, w, 1}, 1.0f));
  }

  const Tensor& values() const noexcept { return values_; }
  std::size_t num_frames() const { return values_.dim(0); }
  std::size_t height() const { return values_.dim(1); }
  std::size_t width() const { return values_.dim(2); }

  bool operator==(const BinaryMask&) const = default;

 private:
  Tensor values_;
};

/// Fraction of ones.
inline double mask_mean(const BinaryMask& mask) {
  double sum = 0.0;
  for (float v : mask.values().data()) sum += v;
  return mask.values().empty() ? 0.0 : sum / static_cast<double>(mask.values().size());
}

}  // namespace tforge
