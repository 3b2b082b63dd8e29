#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "advxfer/core/tensor.hpp"

namespace advxfer {

// Minimal NPY v1.0 reader/writer for little-endian float32 (C,H,W) arrays.
// Patches are kept as raw tensors so that round trips are bit exact.

inline void write_npy(const std::filesystem::path& path, const Tensor& t) {
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" +
                       std::to_string(t.shape().c) + ", " +
                       std::to_string(t.shape().h) + ", " +
                       std::to_string(t.shape().w) + "), }";
  const std::size_t unpadded = 10 + header.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  header.append(padded - unpadded, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_npy: cannot open " + path.string());
  const char magic[8] = {'\x93', 'N', 'U', 'M', 'P', 'Y', '\x01', '\x00'};
  out.write(magic, 8);
  const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
  out.write(reinterpret_cast<const char*>(&hlen), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(float)));
  if (!out) throw std::runtime_error("write_npy: write failed " + path.string());
}

inline Tensor read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_npy: cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "\x93NUMPY", 6) != 0)
    throw std::runtime_error("read_npy: not an NPY file: " + path.string());
  std::uint16_t hlen = 0;
  in.read(reinterpret_cast<char*>(&hlen), 2);
  std::string header(hlen, '\0');
  in.read(header.data(), hlen);
  if (!in) throw std::runtime_error("read_npy: truncated header: " + path.string());
  if (header.find("'<f4'") == std::string::npos ||
      header.find("'fortran_order': False") == std::string::npos)
    throw std::runtime_error("read_npy: unsupported dtype/order in " +
                             path.string());

  const auto open = header.find('(');
  const auto close = header.find(')', open);
  if (open == std::string::npos || close == std::string::npos)
    throw std::runtime_error("read_npy: malformed shape in " + path.string());
  std::string dims = header.substr(open + 1, close - open - 1);
  int vals[3] = {1, 1, 1};
  int n = 0;
  std::size_t pos = 0;
  while (pos < dims.size() && n < 3) {
    while (pos < dims.size() && !std::isdigit(static_cast<unsigned char>(dims[pos]))) ++pos;
    if (pos >= dims.size()) break;
    std::size_t end = pos;
    while (end < dims.size() && std::isdigit(static_cast<unsigned char>(dims[end]))) ++end;
    vals[n++] = std::stoi(dims.substr(pos, end - pos));
    pos = end;
  }
  Shape3 shape;
  if (n == 3) shape = {vals[0], vals[1], vals[2]};
  else if (n == 2) shape = {1, vals[0], vals[1]};
  else throw std::runtime_error("read_npy: expected 2- or 3-d array in " + path.string());

  Tensor t(shape);
  in.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(float)));
  if (!in) throw std::runtime_error("read_npy: truncated data: " + path.string());
  return t;
}

}  // namespace advxfer
