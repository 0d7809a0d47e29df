#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "triplet_forge/core/errors.hpp"
#include "triplet_forge/core/tensor.hpp"

namespace tforge {

/// 8-bit RGB raster read from or written to PNG.
struct Rgb8Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB
};

inline Rgb8Image read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw FormatError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  Rgb8Image out;
  out.width = image.width;
  out.height = image.height;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw FormatError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return out;
}

inline void write_png(const Rgb8Image& img, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

inline std::uint8_t quantize_unit(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

/// Frame [H,W,3] in [0,1] to 8-bit, rounding to nearest.
inline Rgb8Image to_rgb8(const Tensor& frame) {
  if (frame.rank() != 3 || frame.dim(2) != 3) throw SizeError("frame must be [H,W,3]");
  Rgb8Image img{frame.dim(1), frame.dim(0), std::vector<std::uint8_t>(frame.size())};
  std::transform(frame.data().begin(), frame.data().end(), img.pixels.begin(), quantize_unit);
  return img;
}

inline Tensor from_rgb8(const Rgb8Image& img) {
  Tensor frame({img.height, img.width, 3});
  std::transform(img.pixels.begin(), img.pixels.end(), frame.data().begin(),
                 [](std::uint8_t v) { return static_cast<float>(v) / 255.0f; });
  return frame;
}

inline std::string frame_filename(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%06zu.png", index);
  return buf;
}

/// Loads `frame_%06d.png` files sorted by name; gaps in the index are accepted.
inline VideoClip load_image_sequence(const std::filesystem::path& dir, double fps = 24.0) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("frame_") && name.ends_with(".png")) {
      files.push_back(entry.path());
    }
  }
  if (files.empty()) throw EmptyInputError("no frame_*.png files in " + dir.string());
  std::sort(files.begin(), files.end());

  std::vector<Tensor> frames;
  frames.reserve(files.size());
  for (const auto& f : files) {
    frames.push_back(from_rgb8(read_png(f)));
    if (frames.back().shape() != frames.front().shape()) {
      throw SizeError("frame " + f.filename().string() + " has different dimensions");
    }
  }
  return VideoClip(stack(frames), fps);
}

inline void write_image_sequence(const VideoClip& clip, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t t = 0; t < clip.num_frames(); ++t) {
    write_png(to_rgb8(clip.frame(t)), dir / frame_filename(t));
  }
}

}  // namespace tforge
