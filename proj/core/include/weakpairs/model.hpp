#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "weakpairs/errors.hpp"

namespace weakpairs {

/// Fully connected scorer g: R^d -> R with ReLU hidden layers and an
/// identity output. widths() = [d, h_1, ..., h_L, 1]. A model with no
/// hidden layers is the linear scorer w.x + b.
///
/// Weights are initialized uniform in +-sqrt(6/(fan_in+fan_out)), biases
/// at zero, drawn from the given seed in a fixed layer-major order.
class MlpModel {
 public:
  MlpModel(std::size_t input_dim, const std::vector<std::size_t>& hidden,
           std::uint64_t seed);

  static MlpModel linear(std::size_t input_dim, std::uint64_t seed) {
    return MlpModel(input_dim, {}, seed);
  }

  std::size_t input_dim() const { return widths_.front(); }
  const std::vector<std::size_t>& widths() const { return widths_; }
  std::uint64_t seed() const { return seed_; }

  std::size_t parameter_count() const { return params_.size(); }
  const std::vector<double>& parameters() const { return params_; }
  std::vector<double>& mutable_parameters() { return params_; }

  /// Activations recorded by a cached forward pass, consumed by backward().
  struct Tape {
    std::vector<std::vector<double>> act;  // act[0] = inputs, row-major
    std::size_t batch = 0;
  };

  /// Scores for a row-major batch (n x input_dim).
  std::vector<double> forward(const double* xs, std::size_t n) const;
  std::vector<double> forward(const std::vector<std::vector<double>>& xs) const;
  double score(std::span<const double> x) const;

  std::vector<double> forward(const double* xs, std::size_t n,
                              Tape& tape) const;

  /// Parameter gradient of sum_j dscore[j] * g(x_j) given the tape of the
  /// matching forward pass.
  std::vector<double> backward(const Tape& tape,
                               std::span<const double> dscore) const;

  /// Parameter gradient of sum_j [w_pos[j] l(g(x_j),+1) + w_neg[j]
  /// l(g(x_j),-1)] for the logistic loss; this is the estimator-weighted
  /// training gradient.
  std::vector<double> backward_weighted(const Tape& tape,
                                        std::span<const double> scores,
                                        std::span<const double> w_pos,
                                        std::span<const double> w_neg) const;

 private:
  friend MlpModel load_checkpoint(const std::filesystem::path&);
  MlpModel() = default;
  void init_offsets();

  std::vector<std::size_t> widths_;
  std::vector<double> params_;
  // per layer: offset of W (out x in, row-major) and of b (out)
  std::vector<std::size_t> w_offset_;
  std::vector<std::size_t> b_offset_;
  std::uint64_t seed_ = 0;
};

/// Classic Adam with L2 weight decay added to the gradient before the
/// moment updates; bias-corrected moments.
struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState(std::size_t n_params, double lr, double weight_decay)
      : lr(lr), weight_decay(weight_decay), m(n_params, 0.0),
        v(n_params, 0.0) {}
};

void adam_step(AdamState& state, std::vector<double>& params,
               std::span<const double> grad);

void adam_step(AdamState& state, MlpModel& model,
               std::span<const double> grad);

/// Binary checkpoint: magic "WPCK", u32 version, u64 seed, u32 layer
/// count, u64 widths, then the flat f64 parameter vector. Layout is
/// documented in the README.
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace weakpairs
