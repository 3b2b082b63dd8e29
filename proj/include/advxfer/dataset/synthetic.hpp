#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "advxfer/core/random.hpp"
#include "advxfer/dataset/manipulations.hpp"
#include "advxfer/dataset/patch.hpp"

namespace advxfer::dataset {

struct SyntheticSpec {
  int num_sources = 50;
  int source_size = 128;
  int channels = 1;
};

// Textured stand-in for a camera-image corpus: a correlated Gaussian field
// plus a few gratings, quantized to 8-bit levels like a decoded image file.
inline Tensor synth_source_image(int size, int channels, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double corr = 0.6 + 1.8 * unif(rng);   // correlation length, px
  const double mean = 0.35 + 0.3 * unif(rng);
  const double contrast = 0.10 + 0.10 * unif(rng);
  const int n_gratings = static_cast<int>(unif(rng) * 3.0);

  Tensor img({channels, size, size});
  std::vector<double> field(static_cast<std::size_t>(size) * size);
  std::vector<double> tmp(field.size());
  const std::vector<double> k = gaussian_kernel_1d(corr);
  const int radius = (static_cast<int>(k.size()) - 1) / 2;

  for (int c = 0; c < channels; ++c) {
    for (auto& v : field) v = gauss(rng);
    // correlate the white field, then rescale to unit variance
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double acc = 0.0;
        for (int d = -radius; d <= radius; ++d)
          acc += k[static_cast<std::size_t>(d + radius)] *
                 field[static_cast<std::size_t>(y) * size + reflect_index(x + d, size)];
        tmp[static_cast<std::size_t>(y) * size + x] = acc;
      }
    double m1 = 0.0, m2 = 0.0;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double acc = 0.0;
        for (int d = -radius; d <= radius; ++d)
          acc += k[static_cast<std::size_t>(d + radius)] *
                 tmp[static_cast<std::size_t>(reflect_index(y + d, size)) * size + x];
        field[static_cast<std::size_t>(y) * size + x] = acc;
        m1 += acc;
        m2 += acc * acc;
      }
    m1 /= field.size();
    const double sd = std::sqrt(std::max(1e-12, m2 / field.size() - m1 * m1));

    struct Grating { double fx, fy, phase, amp; };
    std::vector<Grating> gratings;
    for (int g = 0; g < n_gratings; ++g)
      gratings.push_back({(unif(rng) - 0.5) * 0.8, (unif(rng) - 0.5) * 0.8,
                          unif(rng) * 6.283185307179586, 0.02 + 0.06 * unif(rng)});

    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        double v = mean + contrast * (field[static_cast<std::size_t>(y) * size + x] - m1) / sd;
        for (const auto& gr : gratings)
          v += gr.amp * std::sin(gr.fx * x + gr.fy * y + gr.phase);
        img.at(c, y, x) = clamp01(static_cast<float>(v));
      }
  }
  return quantize_8bit(img);
}

inline std::vector<SourceImage> synth_corpus(const SyntheticSpec& spec,
                                             std::uint64_t seed) {
  std::vector<SourceImage> corpus;
  corpus.reserve(static_cast<std::size_t>(spec.num_sources));
  for (int i = 0; i < spec.num_sources; ++i) {
    const std::uint64_t s = derive_seed(seed, 0x531C, static_cast<std::uint64_t>(i));
    corpus.push_back({synth_source_image(spec.source_size, spec.channels, s),
                      "synth-" + std::to_string(i)});
  }
  return corpus;
}

}  // namespace advxfer::dataset
