#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "mgrt/mlp.hpp"
#include "mgrt/rng.hpp"

using namespace mgrt;

namespace {

// Straight-line re-evaluation of the network from its public layer data.
std::vector<double> naive_forward(const Mlp& net, std::vector<double> x) {
  for (const Layer& layer : net.layers()) {
    std::vector<double> y(layer.out, 0.0);
    for (std::size_t r = 0; r < layer.out; ++r) {
      double acc = layer.b[r];
      for (std::size_t c = 0; c < layer.in; ++c) {
        acc += layer.w[r * layer.in + c] * x[c];
      }
      y[r] = layer.act == Activation::kTanh ? std::tanh(acc) : acc;
    }
    x = std::move(y);
  }
  return x;
}

double loss_of(const Mlp& net, std::span<const double> input,
               const std::vector<double>& mix) {
  const std::vector<double> out = net.forward(input);
  double loss = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) loss += mix[i] * out[i];
  return loss;
}

}  // namespace

TEST_CASE("zero network outputs its final bias") {
  Mlp net({3, 4, 2}, Activation::kTanh, Activation::kLinear);
  net.layer(1).b = {0.25, -1.5};
  const std::vector<double> out = net.forward(std::vector<double>{1.0, -2.0, 3.0});
  CHECK(out == std::vector<double>{0.25, -1.5});
}

TEST_CASE("identity linear layer passes input through") {
  Mlp net({3, 3}, Activation::kLinear, Activation::kLinear);
  net.layer(0).w = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  const std::vector<double> in{0.5, -2.0, 7.0};
  CHECK(net.forward(in) == in);
}

TEST_CASE("seeded forward matches a straight-line re-evaluation") {
  Rng rng = Rng::stream(5, "mlp/init");
  const Mlp net({5, 8, 8, 2}, Activation::kTanh, Activation::kLinear, rng);
  Rng in_rng = Rng::stream(5, "mlp/input");
  for (int i = 0; i < 10; ++i) {
    std::vector<double> x;
    for (int j = 0; j < 5; ++j) x.push_back(in_rng.uniform(-2.0, 2.0));
    const std::vector<double> got = net.forward(x);
    const std::vector<double> want = naive_forward(net, x);
    REQUIRE(got.size() == want.size());
    for (std::size_t j = 0; j < got.size(); ++j) {
      CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("seeded construction is deterministic and in the fan-in range") {
  Rng a = Rng::stream(9, "mlp/one");
  Rng b = Rng::stream(9, "mlp/one");
  const Mlp m1({4, 6, 1}, Activation::kTanh, Activation::kLinear, a);
  const Mlp m2({4, 6, 1}, Activation::kTanh, Activation::kLinear, b);
  CHECK(m1.params() == m2.params());
  for (const Layer& layer : m1.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (double w : layer.w) {
      CHECK(std::abs(w) <= bound);
    }
    for (double bias : layer.b) CHECK(bias == 0.0);
  }
}

TEST_CASE("shape and construction errors") {
  CHECK_THROWS_AS(Mlp({5}, Activation::kTanh, Activation::kLinear),
                  std::invalid_argument);
  CHECK_THROWS_AS(Mlp({5, 0, 1}, Activation::kTanh, Activation::kLinear),
                  std::invalid_argument);
  Mlp net({3, 2}, Activation::kLinear, Activation::kLinear);
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("linear gradient equals the input") {
  Mlp net({2, 1}, Activation::kLinear, Activation::kLinear);
  net.layer(0).w = {0.3, -0.7};
  net.layer(0).b = {0.1};
  MlpCache cache;
  net.forward(std::vector<double>{4.0, -5.0}, &cache);
  const MlpGrads grads = net.backward(cache, std::vector<double>{1.0});
  CHECK(grads.w[0] == std::vector<double>{4.0, -5.0});
  CHECK(grads.b[0] == std::vector<double>{1.0});
  CHECK(grads.input == std::vector<double>{0.3, -0.7});
}

TEST_CASE("zero output gradient zeroes every parameter gradient") {
  Rng rng = Rng::stream(12, "mlp/zero");
  const Mlp net({3, 4, 2}, Activation::kTanh, Activation::kLinear, rng);
  MlpCache cache;
  net.forward(std::vector<double>{0.3, -0.2, 0.9}, &cache);
  const MlpGrads grads = net.backward(cache, std::vector<double>{0.0, 0.0});
  std::vector<double> flat;
  net.flatten_grads(grads, flat);
  for (double g : flat) CHECK(g == 0.0);
}

TEST_CASE("backward matches central finite differences") {
  Rng rng = Rng::stream(3, "mlp/fd");
  Mlp net({3, 5, 4, 2}, Activation::kTanh, Activation::kLinear, rng);
  const std::vector<double> input{0.4, -1.2, 0.8};
  const std::vector<double> mix{0.7, -1.3};

  MlpCache cache;
  net.forward(input, &cache);
  const MlpGrads grads = net.backward(cache, mix);
  std::vector<double> analytic;
  net.flatten_grads(grads, analytic);

  std::vector<double> params = net.params();
  REQUIRE(params.size() == analytic.size());
  const double h = 1e-5;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    net.set_params(params);
    const double up = loss_of(net, input, mix);
    params[i] = keep - h;
    net.set_params(params);
    const double down = loss_of(net, input, mix);
    params[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
    CHECK(std::abs(fd - analytic[i]) / scale < 1e-4);
  }
  net.set_params(params);
}

TEST_CASE("parameter vector round-trips and orders layer by layer") {
  Rng rng = Rng::stream(8, "mlp/params");
  Mlp net({2, 3, 1}, Activation::kTanh, Activation::kLinear, rng);
  CHECK(net.param_count() == (2 * 3 + 3) + (3 * 1 + 1));
  std::vector<double> params = net.params();
  REQUIRE(params.size() == net.param_count());

  params[0] = 42.0;                   // first weight of layer 0
  params[2 * 3] = -7.0;               // first bias of layer 0
  params[2 * 3 + 3] = 3.5;            // first weight of layer 1
  net.set_params(params);
  CHECK(net.layers()[0].w[0] == 42.0);
  CHECK(net.layers()[0].b[0] == -7.0);
  CHECK(net.layers()[1].w[0] == 3.5);
  CHECK(net.params() == params);
  CHECK(net.layer_sizes() == std::vector<std::size_t>{2, 3, 1});

  CHECK_THROWS_AS(net.set_params(std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("sgd steps against the gradient") {
  OptimConfig config;
  config.kind = OptimConfig::Kind::kSgd;
  config.lr = 0.1;
  Optimizer opt(config, 2);
  std::vector<double> params{1.0, -2.0};
  opt.step(params, std::vector<double>{3.0, -4.0});
  CHECK(params[0] == 1.0 - 0.1 * 3.0);
  CHECK(params[1] == -2.0 + 0.1 * 4.0);
}

TEST_CASE("adam first step mirrors the bias-corrected formula") {
  OptimConfig config;
  config.lr = 0.1;
  Optimizer opt(config, 1);
  std::vector<double> params{5.0};
  const double g = 2.0;
  opt.step(params, std::vector<double>{g});
  // First step: mhat = g, vhat = g^2.
  const double expected = 5.0 - 0.1 * g / (std::sqrt(g * g) + config.eps);
  CHECK(params[0] == doctest::Approx(expected).epsilon(1e-15));

  // A driven quadratic shrinks toward its minimum.
  OptimConfig quad;
  quad.lr = 0.01;
  Optimizer opt2(quad, 1);
  std::vector<double> p{4.0};
  for (int i = 0; i < 4000; ++i) {
    opt2.step(p, std::vector<double>{2.0 * p[0]});
  }
  CHECK(std::abs(p[0]) < 0.05);
}

TEST_CASE("optimizer rejects mismatched shapes and bad rates") {
  CHECK_THROWS_AS(Optimizer(OptimConfig{.kind = OptimConfig::Kind::kSgd, .lr = 0.0}, 1),
                  std::invalid_argument);
  Optimizer opt(OptimConfig{}, 2);
  std::vector<double> params{1.0};
  CHECK_THROWS_AS(opt.step(params, std::vector<double>{1.0}), std::invalid_argument);
}
