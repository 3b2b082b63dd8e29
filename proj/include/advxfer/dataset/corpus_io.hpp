#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "advxfer/core/npy.hpp"
#include "advxfer/dataset/patch.hpp"

namespace advxfer::dataset {

namespace fs = std::filesystem;

// Netpbm reader (P2/P5 graymap, P3/P6 pixmap), 8-bit maxval. Together with
// .npy this covers the lossless inputs the pipeline accepts as a corpus.
inline Tensor read_netpbm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image " + path.string());
  std::string magic;
  in >> magic;
  const bool gray = magic == "P2" || magic == "P5";
  const bool color = magic == "P3" || magic == "P6";
  if (!gray && !color)
    throw std::runtime_error("unsupported image format '" + magic + "' in " +
                             path.string());
  auto next_int = [&in, &path]() {
    // skip whitespace and '#' comments
    while (true) {
      const int ch = in.peek();
      if (ch == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
    long v = 0;
    in >> v;
    if (!in) throw std::runtime_error("malformed netpbm header in " + path.string());
    return v;
  };
  const int w = static_cast<int>(next_int());
  const int h = static_cast<int>(next_int());
  const long maxval = next_int();
  if (maxval != 255)
    throw std::runtime_error("only 8-bit netpbm supported: " + path.string());

  const int channels = color ? 3 : 1;
  Tensor img({channels, h, w});
  const std::size_t n = static_cast<std::size_t>(h) * w * channels;
  if (magic == "P5" || magic == "P6") {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (!in) throw std::runtime_error("truncated pixel data in " + path.string());
    std::size_t i = 0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c)
          img.at(c, y, x) = static_cast<float>(raw[i++]) / 255.0f;
  } else {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int c = 0; c < channels; ++c)
          img.at(c, y, x) = static_cast<float>(next_int()) / 255.0f;
  }
  return img;
}

inline Tensor to_grayscale(const Tensor& img) {
  if (img.shape().c == 1) return img;
  Tensor out({1, img.shape().h, img.shape().w});
  for (int y = 0; y < img.shape().h; ++y)
    for (int x = 0; x < img.shape().w; ++x) {
      float acc = 0.0f;
      for (int c = 0; c < img.shape().c; ++c) acc += img.at(c, y, x);
      out.at(0, y, x) = acc / static_cast<float>(img.shape().c);
    }
  return out;
}

/// Load every .pgm/.ppm/.npy under `dir` (sorted by name) as a source image.
inline std::vector<SourceImage> load_corpus_dir(const fs::path& dir, int channels) {
  if (!fs::is_directory(dir))
    throw std::runtime_error("corpus directory not readable: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm" || ext == ".npy") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::runtime_error("no .pgm/.ppm/.npy images found in " + dir.string());

  std::vector<SourceImage> corpus;
  corpus.reserve(files.size());
  for (const auto& f : files) {
    Tensor img = f.extension() == ".npy" ? read_npy(f) : read_netpbm(f);
    if (channels == 1 && img.shape().c != 1) img = to_grayscale(img);
    if (img.shape().c != channels)
      throw std::runtime_error("image " + f.string() + " has " +
                               std::to_string(img.shape().c) +
                               " channels, config wants " + std::to_string(channels));
    corpus.push_back({std::move(img), f.stem().string()});
  }
  return corpus;
}

}  // namespace advxfer::dataset
