#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "advxfer/core/random.hpp"
#include "advxfer/dataset/labels.hpp"
#include "advxfer/dataset/patch.hpp"

namespace advxfer::dataset {

// Reflection index (edge-inclusive): -1 -> 0, n -> n-1. Valid for pad <= n.
inline int reflect_index(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - i - 1;
  return i;
}

inline float clamp01(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }

/// Snap pixels onto the 8-bit grid k/255. Applied to stored patches so the
/// corpus mirrors integer-pixel image files.
inline Tensor quantize_8bit(const Tensor& t) {
  Tensor out(t.shape());
  for (std::size_t i = 0; i < t.size(); ++i)
    out[i] = static_cast<float>(std::lround(clamp01(t[i]) * 255.0) / 255.0);
  return out;
}

/// Additive white Gaussian noise. `sigma` is in 0-255 pixel units; the noise
/// is drawn i.i.d. N(0, (sigma/255)^2) in [0,1] space and the result clipped.
inline ImagePatch apply_awgn(const ImagePatch& patch, double sigma,
                             std::uint64_t seed) {
  if (sigma < 0) throw std::invalid_argument("awgn: sigma must be >= 0");
  ImagePatch out{Tensor(patch.pixels.shape()), patch.source_id, patch.patch_index};
  if (sigma == 0) {
    out.pixels = patch.pixels;
    return out;
  }
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = sigma / 255.0;
  for (std::size_t i = 0; i < patch.pixels.size(); ++i)
    out.pixels[i] = clamp01(static_cast<float>(patch.pixels[i] + scale * gauss(rng)));
  return out;
}

// Truncated 1-D Gaussian of radius ceil(3*sigma), renormalized to sum 1.
// The square-support 2-D kernel is the outer product of this kernel with
// itself, so the separable passes below equal the full 2-D convolution.
inline std::vector<double> gaussian_kernel_1d(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Gaussian blurring with a truncated, renormalized kernel of radius
/// ceil(3*sigma) and reflection padding at the borders.
inline ImagePatch apply_gaussian_blur(const ImagePatch& patch, double sigma) {
  if (sigma <= 0) throw std::invalid_argument("blur: sigma must be > 0");
  const Shape3 s = patch.pixels.shape();
  const std::vector<double> k = gaussian_kernel_1d(sigma);
  const int radius = (static_cast<int>(k.size()) - 1) / 2;

  ImagePatch out{Tensor(s), patch.source_id, patch.patch_index};
  std::vector<double> tmp(static_cast<std::size_t>(s.h) * s.w);
  for (int c = 0; c < s.c; ++c) {
    // horizontal pass
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        double acc = 0.0;
        for (int d = -radius; d <= radius; ++d)
          acc += k[static_cast<std::size_t>(d + radius)] *
                 patch.pixels.at(c, y, reflect_index(x + d, s.w));
        tmp[static_cast<std::size_t>(y) * s.w + x] = acc;
      }
    }
    // vertical pass
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        double acc = 0.0;
        for (int d = -radius; d <= radius; ++d)
          acc += k[static_cast<std::size_t>(d + radius)] *
                 tmp[static_cast<std::size_t>(reflect_index(y + d, s.h)) * s.w + x];
        out.pixels.at(c, y, x) = clamp01(static_cast<float>(acc));
      }
    }
  }
  return out;
}

/// Median filtering over an odd window with reflection padding.
inline ImagePatch apply_median_filter(const ImagePatch& patch, int window) {
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument("median: window must be an odd integer >= 3");
  const Shape3 s = patch.pixels.shape();
  const int radius = window / 2;

  ImagePatch out{Tensor(s), patch.source_id, patch.patch_index};
  std::vector<float> buf(static_cast<std::size_t>(window) * window);
  for (int c = 0; c < s.c; ++c) {
    for (int y = 0; y < s.h; ++y) {
      for (int x = 0; x < s.w; ++x) {
        std::size_t n = 0;
        for (int dy = -radius; dy <= radius; ++dy)
          for (int dx = -radius; dx <= radius; ++dx)
            buf[n++] = patch.pixels.at(c, reflect_index(y + dy, s.h),
                                       reflect_index(x + dx, s.w));
        auto mid = buf.begin() + static_cast<std::ptrdiff_t>(n / 2);
        std::nth_element(buf.begin(), mid, buf.begin() + static_cast<std::ptrdiff_t>(n));
        out.pixels.at(c, y, x) = *mid;
      }
    }
  }
  return out;
}

/// Dispatch one table entry. `seed` only affects the stochastic kinds.
inline ImagePatch apply_manipulation(const ImagePatch& patch,
                                     const ManipulationSpec& spec,
                                     std::uint64_t seed) {
  switch (spec.kind) {
    case Manipulation::kUnaltered:
      return patch;
    case Manipulation::kAwgn:
      return apply_awgn(patch, spec.parameter, seed);
    case Manipulation::kGaussianBlur:
      return apply_gaussian_blur(patch, spec.parameter);
    case Manipulation::kMedianFilter:
      return apply_median_filter(patch, static_cast<int>(std::lround(spec.parameter)));
  }
  throw std::logic_error("apply_manipulation: bad kind");
}

}  // namespace advxfer::dataset
