#pragma once

#include <functional>

#include "weakpairs/errors.hpp"

namespace weakpairs {

enum class LossKind { Logistic, ZeroOne };

/// ln(1 + exp(-y*z)) in the stable softplus form
/// max(t,0) + log1p(exp(-|t|)) with t = -y*z. No overflow up to |z| ~ 1e308.
double logistic_loss(double z, int y);

/// d/dz logistic_loss = -y * sigmoid(-y*z).
double logistic_loss_grad(double z, int y);

/// 0 if sign(z)*y > 0 else 1; z == 0 counts as predicting +1.
double zero_one_loss(double z, int y);

/// Binary margin loss. Constructible from a LossKind or from an arbitrary
/// callable (the latter is how tests inject constant losses).
class LossFn {
 public:
  LossFn(LossKind kind) : kind_(kind) {}  // NOLINT: implicit by design
  LossFn(std::function<double(double, int)> fn)
      : kind_(LossKind::Logistic), custom_(std::move(fn)) {}

  double operator()(double z, int y) const {
    if (custom_) return custom_(z, y);
    return kind_ == LossKind::Logistic ? logistic_loss(z, y)
                                       : zero_one_loss(z, y);
  }

  /// True only for the stock logistic loss; training requires it.
  bool differentiable() const {
    return !custom_ && kind_ == LossKind::Logistic;
  }

 private:
  LossKind kind_;
  std::function<double(double, int)> custom_;
};

}  // namespace weakpairs
