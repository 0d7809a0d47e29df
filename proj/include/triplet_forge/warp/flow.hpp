#pragma once

#include <filesystem>
#include <string>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/tensor.hpp"
#include "triplet_forge/core/tensor_io.hpp"
#include "triplet_forge/trajectory/crop_trajectory.hpp"

namespace tforge {

/// Displacements [T,H,W,2] (dx,dy) from the pixel grid of frame `reference`
/// to each frame t; a tracked point q lands at q + flow[t](q).
struct FlowField {
  Tensor flow;
  std::size_t reference = 0;

  std::size_t frames() const { return flow.dim(0); }
  std::size_t height() const { return flow.dim(1); }
  std::size_t width() const { return flow.dim(2); }
  Tensor at_frame(std::size_t t) const { return flow.slice(t); }
};

inline void check_flow_field(const FlowField& f) {
  if (f.flow.rank() != 4 || f.flow.dim(3) != 2) {
    throw SizeError("flow field must be [T,H,W,2], got " + shape_string(f.flow.shape()));
  }
  if (f.reference >= f.frames()) throw SizeError("flow reference frame out of range");
  if (!f.flow.all_finite()) throw InvalidFlowError("flow field contains non-finite values");
}

/// Offset-aware flow on the source crop grid of the reference frame:
///   F(t)(p) = Track_t(p + o_s) - o_t(t) - p = d_t(p + o_s) + o_s - o_t(t)
/// where d_t is the dense tracking displacement on the uncropped video.
inline FlowField compose_offset_flow(const FlowField& tracks, CropOffset src_offset_ref,
                                     const CropTrajectory& tgt_offsets, Extent crop) {
  check_flow_field(tracks);
  if (tgt_offsets.size() != tracks.frames()) {
    throw SizeError("target trajectory length " + std::to_string(tgt_offsets.size()) +
                    " != track frames " + std::to_string(tracks.frames()));
  }
  if (src_offset_ref.x < 0 || src_offset_ref.y < 0 ||
      static_cast<std::size_t>(src_offset_ref.x) + crop.width > tracks.width() ||
      static_cast<std::size_t>(src_offset_ref.y) + crop.height > tracks.height()) {
    throw SizeError("track field smaller than the source crop window");
  }
  const std::size_t T = tracks.frames(), h = crop.height, w = crop.width;
  const auto ox = static_cast<std::size_t>(src_offset_ref.x);
  const auto oy = static_cast<std::size_t>(src_offset_ref.y);

  FlowField out{Tensor({T, h, w, 2}), tracks.reference};
  for (std::size_t t = 0; t < T; ++t) {
    const float sx = static_cast<float>(src_offset_ref.x - tgt_offsets.offsets[t].x);
    const float sy = static_cast<float>(src_offset_ref.y - tgt_offsets.offsets[t].y);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        out.flow.at(t, y, x, 0) = tracks.flow.at(t, y + oy, x + ox, 0) + sx;
        out.flow.at(t, y, x, 1) = tracks.flow.at(t, y + oy, x + ox, 1) + sy;
      }
    }
  }
  return out;
}

/// Dense tracks as stored on disk: a single field [T,H,W,2] queried from one
/// reference frame, or a stack [R,T,H,W,2] holding one field per reference.
class TrackSet {
 public:
  TrackSet(Tensor tracks, std::size_t reference = 0) : tracks_(std::move(tracks)), reference_(reference) {
    if (tracks_.rank() == 4) {
      check_flow_field({tracks_, reference_});
    } else if (tracks_.rank() == 5) {
      if (tracks_.dim(4) != 2 || tracks_.dim(0) != tracks_.dim(1)) {
        throw SizeError("stacked tracks must be [T,T,H,W,2]");
      }
      if (!tracks_.all_finite()) throw InvalidFlowError("tracks contain non-finite values");
    } else {
      throw SizeError("tracks must be [T,H,W,2] or [T,T,H,W,2]");
    }
  }

  bool per_reference() const { return tracks_.rank() == 5; }
  std::size_t frames() const { return tracks_.dim(per_reference() ? 1 : 0); }
  std::size_t height() const { return tracks_.dim(per_reference() ? 2 : 1); }
  std::size_t width() const { return tracks_.dim(per_reference() ? 3 : 2); }

  bool has_reference(std::size_t ref) const { return per_reference() ? ref < frames() : ref == reference_; }

  FlowField for_reference(std::size_t ref) const {
    if (!has_reference(ref)) {
      throw SizeError("tracks were not queried from reference frame " + std::to_string(ref));
    }
    return per_reference() ? FlowField{tracks_.slice(ref), ref} : FlowField{tracks_, ref};
  }

 private:
  Tensor tracks_;
  std::size_t reference_;
};

inline TrackSet read_tracks(const std::filesystem::path& path, std::size_t reference = 0) {
  return TrackSet(read_tensor(path), reference);
}

}  // namespace tforge
