#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mgrt/rng.hpp"

namespace mgrt {

enum class Activation { kLinear, kTanh };

std::string to_string(Activation act);
Activation activation_from_string(const std::string& name);

struct Layer {
  std::size_t in = 0;
  std::size_t out = 0;
  Activation act = Activation::kLinear;
  std::vector<double> w;  // row-major, `out` rows of `in` columns
  std::vector<double> b;  // length `out`
};

/// Post-activation values of every layer; act[0] is the input itself.
struct MlpCache {
  std::vector<std::vector<double>> act;
};

struct MlpGrads {
  std::vector<std::vector<double>> w;
  std::vector<std::vector<double>> b;
  std::vector<double> input;
};

class Mlp {
 public:
  Mlp() = default;
  /// sizes = {input, hidden..., output}; hidden layers use `hidden`,
  /// the final layer `output`. Parameters start at zero.
  Mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation output);
  /// Same, with weights drawn uniformly in ±1/sqrt(fan_in).
  Mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation output,
      Rng& rng);

  std::vector<double> forward(std::span<const double> input,
                              MlpCache* cache = nullptr) const;
  /// Gradients of a scalar loss given d(loss)/d(output).
  MlpGrads backward(const MlpCache& cache, std::span<const double> output_grad) const;

  std::size_t input_size() const;
  std::size_t output_size() const;
  std::vector<std::size_t> layer_sizes() const;

  const std::vector<Layer>& layers() const { return layers_; }
  Layer& layer(std::size_t i) { return layers_.at(i); }

  /// Flat parameter order: per layer, weights row-major then biases.
  std::size_t param_count() const;
  std::vector<double> params() const;
  void set_params(std::span<const double> flat);
  /// Appends grads to `flat` in the same order as params().
  void flatten_grads(const MlpGrads& grads, std::vector<double>& flat) const;

 private:
  std::vector<Layer> layers_;
};

struct OptimConfig {
  enum class Kind { kAdam, kSgd };
  Kind kind = Kind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Optimizer {
 public:
  Optimizer() = default;
  Optimizer(OptimConfig config, std::size_t param_count);

  void step(std::span<double> params, std::span<const double> grads);
  const OptimConfig& config() const { return config_; }

 private:
  OptimConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::int64_t t_ = 0;
};

}  // namespace mgrt
