#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "advxfer/core/tensor.hpp"

namespace advxfer::dataset {

/// A fixed-size pixel grid in [0,1] with provenance back to its source image.
struct ImagePatch {
  Tensor pixels;
  std::string source_id;
  int patch_index = 0;
};

struct SourceImage {
  Tensor image;
  std::string id;
};

inline void check_patch_range(const ImagePatch& p) {
  for (std::size_t i = 0; i < p.pixels.size(); ++i) {
    const float v = p.pixels[i];
    if (!(v >= 0.0f && v <= 1.0f))
      throw std::runtime_error("patch " + p.source_id + "#" +
                               std::to_string(p.patch_index) +
                               " has pixel outside [0,1]");
  }
}

/// Tile an image into non-overlapping patch_size x patch_size patches,
/// row-major; any remainder on the right/bottom is discarded.
inline std::vector<ImagePatch> extract_patches(const Tensor& image,
                                               const std::string& source_id,
                                               int patch_size) {
  const Shape3 s = image.shape();
  if (patch_size <= 0) throw std::invalid_argument("patch_size must be positive");
  if (s.h < patch_size || s.w < patch_size)
    throw std::invalid_argument(
        "image " + source_id + " is " + std::to_string(s.h) + "x" +
        std::to_string(s.w) + ", smaller than patch size " +
        std::to_string(patch_size));

  const int ny = s.h / patch_size;
  const int nx = s.w / patch_size;
  std::vector<ImagePatch> patches;
  patches.reserve(static_cast<std::size_t>(ny) * nx);
  for (int py = 0; py < ny; ++py) {
    for (int px = 0; px < nx; ++px) {
      Tensor t({s.c, patch_size, patch_size});
      for (int c = 0; c < s.c; ++c)
        for (int y = 0; y < patch_size; ++y)
          for (int x = 0; x < patch_size; ++x)
            t.at(c, y, x) = image.at(c, py * patch_size + y, px * patch_size + x);
      patches.push_back({std::move(t), source_id,
                         static_cast<int>(patches.size())});
    }
  }
  return patches;
}

}  // namespace advxfer::dataset
