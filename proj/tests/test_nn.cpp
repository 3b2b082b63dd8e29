#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "advxfer/nn/loss.hpp"
#include "advxfer/nn/network.hpp"
#include "advxfer/nn/optim.hpp"

using namespace advxfer;
using namespace advxfer::nn;

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed, float lo = 0.0f,
                              float hi = 1.0f) {
  auto rng = make_rng(seed);
  std::uniform_real_distribution<float> unif(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = unif(rng);
  return v;
}

double net_loss(const Network& net, const float* x, int target) {
  Tape tape;
  const auto& logits = net.forward(x, tape);
  return cross_entropy_with_grad(logits, target).loss;
}

// Central-difference check of both input and parameter gradients.
void gradcheck(Network& net, std::uint64_t seed, double h = 1e-3,
               double tol = 0.02) {
  net.init(seed);
  net.project_constraints();
  auto x = random_vec(net.input_shape().count(), seed + 1);
  const int target = 0;

  Tape tape;
  const auto& logits = net.forward(x.data(), tape);
  const auto ce = cross_entropy_with_grad(logits, target);
  std::vector<float> dparams(net.n_params(), 0.0f);
  std::vector<float> dx(x.size(), 0.0f);
  net.backward(x.data(), tape, ce.dlogits, dparams.data(), dx.data());

  auto rng = make_rng(seed + 2);
  std::uniform_int_distribution<std::size_t> pick_x(0, x.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_w(0, net.n_params() - 1);

  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t i = pick_x(rng);
    const float keep = x[i];
    x[i] = keep + static_cast<float>(h);
    const double lp = net_loss(net, x.data(), target);
    x[i] = keep - static_cast<float>(h);
    const double lm = net_loss(net, x.data(), target);
    x[i] = keep;
    const double fd = (lp - lm) / (2 * h);
    const double an = dx[i];
    if (std::abs(fd) < 5e-4 && std::abs(an) < 5e-4) continue;  // both ~zero
    ++checked;
    REQUIRE(std::abs(fd - an) <= tol * std::max({1.0, std::abs(fd), std::abs(an)}));
  }
  REQUIRE(checked > 10);

  checked = 0;
  auto params = net.params();
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t i = pick_w(rng);
    const float keep = params[i];
    params[i] = keep + static_cast<float>(h);
    const double lp = net_loss(net, x.data(), target);
    params[i] = keep - static_cast<float>(h);
    const double lm = net_loss(net, x.data(), target);
    params[i] = keep;
    const double fd = (lp - lm) / (2 * h);
    const double an = dparams[i];
    if (std::abs(fd) < 5e-4 && std::abs(an) < 5e-4) continue;
    ++checked;
    REQUIRE(std::abs(fd - an) <= tol * std::max({1.0, std::abs(fd), std::abs(an)}));
  }
  REQUIRE(checked > 10);
}

}  // namespace

TEST_CASE("conv layer equals a direct zero-padded convolution", "[nn][oracle]") {
  const Shape3 in{2, 7, 9};
  Conv2d conv(in, 3, 3);
  std::vector<float> w(conv.n_params());
  auto rng = make_rng(11);
  std::normal_distribution<float> gauss(0.0f, 0.5f);
  for (auto& v : w) v = gauss(rng);
  const auto x = random_vec(in.count(), 5);

  std::vector<float> y(conv.out_shape().count());
  LayerScratch s;
  conv.forward(x.data(), w.data(), y.data(), s);

  // direct loop: y[o][p] = sum_{c,ky,kx} w[o][c][ky][kx] * x[c][p+k-1] + b[o]
  const int k = 3, pad = 1;
  const float* bias = w.data() + 3 * in.c * k * k;
  for (int o = 0; o < 3; ++o)
    for (int oy = 0; oy < in.h; ++oy)
      for (int ox = 0; ox < in.w; ++ox) {
        double acc = bias[o];
        for (int c = 0; c < in.c; ++c)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const int iy = oy + ky - pad, ix = ox + kx - pad;
              if (iy < 0 || iy >= in.h || ix < 0 || ix >= in.w) continue;
              acc += w[static_cast<std::size_t>(((o * in.c + c) * k + ky) * k + kx)] *
                     x[static_cast<std::size_t>((c * in.h + iy) * in.w + ix)];
            }
        const float got = y[static_cast<std::size_t>((o * in.h + oy) * in.w + ox)];
        REQUIRE(got == Catch::Approx(acc).margin(1e-5));
      }
}

TEST_CASE("network gradients match central differences", "[nn][oracle]") {
  SECTION("dense-only") {
    Network net({1, 4, 4});
    net.add(std::make_shared<Dense>(Shape3{1, 4, 4}, 8));
    net.add(std::make_shared<Relu>(Shape3{8, 1, 1}));
    net.add(std::make_shared<Dense>(Shape3{8, 1, 1}, 3));
    gradcheck(net, 100);
  }
  SECTION("conv/pool stack") {
    Network net({1, 8, 8});
    net.add(std::make_shared<Conv2d>(Shape3{1, 8, 8}, 4, 3));
    net.add(std::make_shared<Relu>(Shape3{4, 8, 8}));
    net.add(std::make_shared<MaxPool2>(Shape3{4, 8, 8}));
    net.add(std::make_shared<Dense>(Shape3{4, 4, 4}, 3));
    gradcheck(net, 200);
  }
  SECTION("constrained front end") {
    Network net({1, 8, 8});
    net.add(std::make_shared<ConstrainedConv2d>(Shape3{1, 8, 8}, 2, 5));
    net.add(std::make_shared<Conv2d>(Shape3{2, 8, 8}, 4, 3));
    net.add(std::make_shared<Relu>(Shape3{4, 8, 8}));
    net.add(std::make_shared<MaxPool2>(Shape3{4, 8, 8}));
    net.add(std::make_shared<Dense>(Shape3{4, 4, 4}, 2));
    gradcheck(net, 300);
  }
}

TEST_CASE("constrained filters satisfy the projection invariant", "[nn]") {
  ConstrainedConv2d layer({2, 8, 8}, 3, 5);
  std::vector<float> w(layer.n_params());
  auto rng = make_rng(9);
  layer.init_params(w, rng);

  auto check = [&] {
    const int kk = 25, center = 12;
    for (int slice = 0; slice < 6; ++slice) {
      const float* f = w.data() + slice * kk;
      REQUIRE(f[center] == -1.0f);
      double sum = 0.0;
      for (int i = 0; i < kk; ++i)
        if (i != center) sum += f[i];
      REQUIRE(sum == Catch::Approx(1.0).margin(1e-5));
    }
  };
  check();

  // mimic optimizer steps: perturb then project
  std::normal_distribution<float> gauss(0.0f, 0.1f);
  for (int step = 0; step < 5; ++step) {
    for (auto& v : w) v += gauss(rng);
    layer.project(w);
    check();
  }
}

TEST_CASE("softmax output is a probability simplex", "[nn]") {
  for (int i = 0; i < 50; ++i) {
    const auto logits = random_vec(1 + i % 16, 40 + static_cast<std::uint64_t>(i),
                                   -30.0f, 30.0f);
    const auto p = softmax(logits);
    double sum = 0.0;
    for (const float v : p) {
      REQUIRE(v >= 0.0f);
      sum += v;
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-5));
  }
}

TEST_CASE("cross entropy at a one-hot optimum is ~0 with ~0 gradient", "[nn]") {
  std::vector<float> logits{30.0f, 0.0f, 0.0f};
  const auto ce = cross_entropy_with_grad(logits, 0);
  REQUIRE(ce.loss < 1e-6);
  for (const float g : ce.dlogits) REQUIRE(std::abs(g) < 1e-6f);
  REQUIRE_THROWS_AS(cross_entropy_with_grad(logits, 3), std::invalid_argument);
}

TEST_CASE("maxpool rejects odd spatial dims", "[nn]") {
  REQUIRE_THROWS_AS(MaxPool2(Shape3{1, 7, 8}), std::invalid_argument);
}

TEST_CASE("sgd momentum and lr apply as stated", "[nn]") {
  SgdMomentum opt(2, 0.5);
  std::vector<float> p{1.0f, 2.0f};
  std::vector<float> g{1.0f, -2.0f};
  opt.step(p, g, 0.1, 1.0);
  REQUIRE(p[0] == Catch::Approx(0.9f));
  REQUIRE(p[1] == Catch::Approx(2.2f));
  opt.step(p, g, 0.1, 1.0);  // velocity = 0.5*v + g
  REQUIRE(p[0] == Catch::Approx(0.9f - 0.1f * 1.5f));
}
