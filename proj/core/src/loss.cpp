#include "weakpairs/loss.hpp"

#include <cmath>

namespace weakpairs {

double logistic_loss(double z, int y) {
  const double t = -static_cast<double>(y) * z;
  const double hinge = t > 0.0 ? t : 0.0;
  return hinge + std::log1p(std::exp(-std::fabs(t)));
}

double logistic_loss_grad(double z, int y) {
  // -y * sigmoid(-y*z), evaluated through exp(-|t|) only.
  const double t = -static_cast<double>(y) * z;
  const double e = std::exp(-std::fabs(t));
  const double sig = t >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  return -static_cast<double>(y) * sig;
}

double zero_one_loss(double z, int y) {
  const int predicted = z >= 0.0 ? 1 : -1;
  return predicted == y ? 0.0 : 1.0;
}

}  // namespace weakpairs
