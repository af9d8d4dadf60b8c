#include "weakpairs/weak_labels.hpp"

#include <cmath>

namespace weakpairs {

std::pair<double, double> weak_labels_from_posteriors(
    const PosteriorPair& pp) {
  if (!(pp.p >= 0.0 && pp.p <= 1.0) ||
      !(pp.p_prime >= 0.0 && pp.p_prime <= 1.0)) {
    throw InvalidSpec("posterior outside [0,1]");
  }
  const double s = pp.p * pp.p_prime + (1.0 - pp.p) * (1.0 - pp.p_prime);
  const double c = pp.p_prime - pp.p;
  return {s, c};
}

bool feasible_region_check(double s, double c) {
  const double ac = std::fabs(c);
  if (ac > 1.0 + kFeasibilityTol) return false;
  const double lower = 0.5 * (1.0 - c * c);
  const double upper = 1.0 - ac;
  return s >= lower - kFeasibilityTol && s <= upper + kFeasibilityTol;
}

}  // namespace weakpairs
