#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace advxfer {

/// Channel-major (C,H,W) shape of a pixel grid or feature map.
struct Shape3 {
  int c = 0;
  int h = 0;
  int w = 0;

  std::size_t count() const {
    return static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
           static_cast<std::size_t>(w);
  }
  bool operator==(const Shape3&) const = default;

  std::string str() const {
    return std::to_string(c) + "x" + std::to_string(h) + "x" +
           std::to_string(w);
  }
};

/// Dense float32 grid, channel-major, contiguous.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape3 shape, float fill = 0.0f)
      : shape_(shape), data_(shape.count(), fill) {}
  Tensor(Shape3 shape, std::vector<float> data)
      : shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.count())
      throw std::invalid_argument("Tensor: data size does not match shape " +
                                  shape_.str());
  }

  const Shape3& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  float& at(int c, int y, int x) {
    return data_[(static_cast<std::size_t>(c) * shape_.h + y) * shape_.w + x];
  }
  float at(int c, int y, int x) const {
    return data_[(static_cast<std::size_t>(c) * shape_.h + y) * shape_.w + x];
  }
  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  std::vector<float>& vec() { return data_; }
  const std::vector<float>& vec() const { return data_; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

 private:
  Shape3 shape_;
  std::vector<float> data_;
};

inline float max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b))
    throw std::invalid_argument("max_abs_diff: shape mismatch " +
                                a.shape().str() + " vs " + b.shape().str());
  float m = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const float d = a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
    if (d > m) m = d;
  }
  return m;
}

}  // namespace advxfer
