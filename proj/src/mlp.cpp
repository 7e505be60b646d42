#include "mgrt/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace mgrt {
namespace {

std::vector<Layer> make_layers(const std::vector<std::size_t>& sizes,
                               Activation hidden, Activation output) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("network needs at least input and output sizes");
  }
  std::vector<Layer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] == 0 || sizes[l + 1] == 0) {
      throw std::invalid_argument("layer sizes must be positive");
    }
    Layer layer;
    layer.in = sizes[l];
    layer.out = sizes[l + 1];
    layer.act = (l + 2 < sizes.size()) ? hidden : output;
    layer.w.assign(layer.in * layer.out, 0.0);
    layer.b.assign(layer.out, 0.0);
    layers.push_back(std::move(layer));
  }
  return layers;
}

}  // namespace

std::string to_string(Activation act) {
  return act == Activation::kTanh ? "tanh" : "linear";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "linear") return Activation::kLinear;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

Mlp::Mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation output)
    : layers_(make_layers(sizes, hidden, output)) {}

Mlp::Mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation output,
         Rng& rng)
    : layers_(make_layers(sizes, hidden, output)) {
  for (Layer& layer : layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (double& w : layer.w) {
      w = (2.0 * rng.uniform() - 1.0) * bound;
    }
  }
}

std::vector<double> Mlp::forward(std::span<const double> input, MlpCache* cache) const {
  if (layers_.empty()) {
    throw std::logic_error("forward on an empty network");
  }
  if (input.size() != layers_.front().in) {
    throw std::invalid_argument("input length " + std::to_string(input.size()) +
                                " does not match network input " +
                                std::to_string(layers_.front().in));
  }
  std::vector<double> act(input.begin(), input.end());
  if (cache != nullptr) {
    cache->act.clear();
    cache->act.push_back(act);
  }
  for (const Layer& layer : layers_) {
    std::vector<double> next(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      double z = layer.b[o];
      const double* row = layer.w.data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) {
        z += row[i] * act[i];
      }
      next[o] = layer.act == Activation::kTanh ? std::tanh(z) : z;
    }
    act = std::move(next);
    if (cache != nullptr) {
      cache->act.push_back(act);
    }
  }
  return act;
}

MlpGrads Mlp::backward(const MlpCache& cache, std::span<const double> output_grad) const {
  if (cache.act.size() != layers_.size() + 1) {
    throw std::invalid_argument("cache does not match network depth");
  }
  if (output_grad.size() != layers_.back().out) {
    throw std::invalid_argument("output gradient length mismatch");
  }
  MlpGrads grads;
  grads.w.resize(layers_.size());
  grads.b.resize(layers_.size());

  std::vector<double> up(output_grad.begin(), output_grad.end());
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const Layer& layer = layers_[l];
    const std::vector<double>& in_act = cache.act[l];
    const std::vector<double>& out_act = cache.act[l + 1];
    if (in_act.size() != layer.in || out_act.size() != layer.out) {
      throw std::invalid_argument("cache does not match layer shapes");
    }
    // d(loss)/d(pre-activation); tanh' expressed through the cached output.
    std::vector<double> dpre(layer.out);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double slope =
          layer.act == Activation::kTanh ? 1.0 - out_act[o] * out_act[o] : 1.0;
      dpre[o] = up[o] * slope;
    }
    grads.w[l].assign(layer.in * layer.out, 0.0);
    grads.b[l] = dpre;
    std::vector<double> down(layer.in, 0.0);
    for (std::size_t o = 0; o < layer.out; ++o) {
      const double* row = layer.w.data() + o * layer.in;
      double* grow = grads.w[l].data() + o * layer.in;
      for (std::size_t i = 0; i < layer.in; ++i) {
        grow[i] = dpre[o] * in_act[i];
        down[i] += row[i] * dpre[o];
      }
    }
    up = std::move(down);
  }
  grads.input = std::move(up);
  return grads;
}

std::size_t Mlp::input_size() const {
  if (layers_.empty()) throw std::logic_error("empty network");
  return layers_.front().in;
}

std::size_t Mlp::output_size() const {
  if (layers_.empty()) throw std::logic_error("empty network");
  return layers_.back().out;
}

std::vector<std::size_t> Mlp::layer_sizes() const {
  if (layers_.empty()) throw std::logic_error("empty network");
  std::vector<std::size_t> sizes{layers_.front().in};
  for (const Layer& layer : layers_) {
    sizes.push_back(layer.out);
  }
  return sizes;
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) {
    n += layer.w.size() + layer.b.size();
  }
  return n;
}

std::vector<double> Mlp::params() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const Layer& layer : layers_) {
    flat.insert(flat.end(), layer.w.begin(), layer.w.end());
    flat.insert(flat.end(), layer.b.begin(), layer.b.end());
  }
  return flat;
}

void Mlp::set_params(std::span<const double> flat) {
  if (flat.size() != param_count()) {
    throw std::invalid_argument("parameter vector length mismatch");
  }
  std::size_t at = 0;
  for (Layer& layer : layers_) {
    std::copy(flat.begin() + at, flat.begin() + at + layer.w.size(), layer.w.begin());
    at += layer.w.size();
    std::copy(flat.begin() + at, flat.begin() + at + layer.b.size(), layer.b.begin());
    at += layer.b.size();
  }
}

void Mlp::flatten_grads(const MlpGrads& grads, std::vector<double>& flat) const {
  if (grads.w.size() != layers_.size() || grads.b.size() != layers_.size()) {
    throw std::invalid_argument("gradient shape mismatch");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    flat.insert(flat.end(), grads.w[l].begin(), grads.w[l].end());
    flat.insert(flat.end(), grads.b[l].begin(), grads.b[l].end());
  }
}

Optimizer::Optimizer(OptimConfig config, std::size_t param_count)
    : config_(config), m_(param_count, 0.0), v_(param_count, 0.0) {
  if (!(config_.lr > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw std::invalid_argument("optimizer state does not match parameter count");
  }
  if (config_.kind == OptimConfig::Kind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= config_.lr * grads[i];
    }
    return;
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * grads[i];
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * grads[i] * grads[i];
    const double mhat = m_[i] / bc1;
    const double vhat = v_[i] / bc2;
    params[i] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
  }
}

}  // namespace mgrt
