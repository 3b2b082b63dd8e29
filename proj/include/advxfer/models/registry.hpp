#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "advxfer/nn/network.hpp"

namespace advxfer::models {

using ArchBuilder = std::function<nn::Network(Shape3 input, int num_classes)>;

namespace detail {
inline std::map<std::string, ArchBuilder>& registry() {
  static std::map<std::string, ArchBuilder> reg;
  return reg;
}
}  // namespace detail

inline void register_architecture(const std::string& name, ArchBuilder builder) {
  detail::registry()[name] = std::move(builder);
}

inline std::vector<std::string> registered_architectures();

// Shared helper: conv/pool pyramid that stops once the spatial extent is at
// most `floor_size` or can no longer be halved.
namespace detail {
inline void add_conv_block(nn::Network& net, int out_channels, int kernel) {
  const Shape3 s = net.output_shape();
  net.add(std::make_shared<nn::Conv2d>(s, out_channels, kernel));
  net.add(std::make_shared<nn::Relu>(net.output_shape()));
  net.add(std::make_shared<nn::MaxPool2>(net.output_shape()));
}

inline bool can_pool(const Shape3& s, int floor_size) {
  return s.h > floor_size && s.w > floor_size && s.h % 2 == 0 && s.w % 2 == 0;
}
}  // namespace detail

// MISLnet-style: a constrained prediction-error filter bank in front of a
// conv/pool pyramid. Scales with the input so the same recipe serves 64x64
// desk patches and larger ones.
inline nn::Network build_constrained_net(Shape3 input, int num_classes) {
  nn::Network net(input);
  net.add(std::make_shared<nn::ConstrainedConv2d>(input, 3, 5));
  // residuals are LSB-scale; bring them to O(1) for the conv stack
  net.add(std::make_shared<nn::Scale>(net.output_shape(), 64.0f));
  detail::add_conv_block(net, 8, 3);
  detail::add_conv_block(net, 16, 3);
  while (detail::can_pool(net.output_shape(), 8))
    detail::add_conv_block(net, 16, 3);
  net.add(std::make_shared<nn::Dense>(net.output_shape(), 32));
  net.add(std::make_shared<nn::Relu>(net.output_shape()));
  net.add(std::make_shared<nn::Dense>(net.output_shape(), num_classes));
  return net;
}

// Generic stacked-conv classifier without any forensic prior.
inline nn::Network build_plain_deep(Shape3 input, int num_classes) {
  nn::Network net(input);
  net.add(std::make_shared<nn::Conv2d>(input, 8, 3));
  net.add(std::make_shared<nn::Relu>(net.output_shape()));
  net.add(std::make_shared<nn::Conv2d>(net.output_shape(), 8, 3));
  net.add(std::make_shared<nn::Relu>(net.output_shape()));
  net.add(std::make_shared<nn::MaxPool2>(net.output_shape()));
  detail::add_conv_block(net, 16, 3);
  while (detail::can_pool(net.output_shape(), 8))
    detail::add_conv_block(net, 16, 3);
  net.add(std::make_shared<nn::Dense>(net.output_shape(), 48));
  net.add(std::make_shared<nn::Relu>(net.output_shape()));
  net.add(std::make_shared<nn::Dense>(net.output_shape(), num_classes));
  return net;
}

inline void ensure_builtin_architectures() {
  auto& reg = detail::registry();
  if (!reg.count("constrained_net"))
    reg["constrained_net"] = build_constrained_net;
  if (!reg.count("plain_deep"))
    reg["plain_deep"] = build_plain_deep;
}

inline nn::Network build_architecture(const std::string& name, Shape3 input,
                                      int num_classes) {
  ensure_builtin_architectures();
  if (num_classes < 2)
    throw std::invalid_argument("architecture needs num_classes >= 2");
  const auto& reg = detail::registry();
  const auto it = reg.find(name);
  if (it == reg.end()) {
    std::string known;
    for (const auto& [k, v] : reg) known += (known.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown architecture '" + name +
                                "' (registered: " + known + ")");
  }
  return it->second(input, num_classes);
}

inline std::vector<std::string> registered_architectures() {
  ensure_builtin_architectures();
  std::vector<std::string> names;
  for (const auto& [k, v] : detail::registry()) names.push_back(k);
  return names;
}

}  // namespace advxfer::models
