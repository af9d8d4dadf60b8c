#pragma once

#include <utility>

#include "weakpairs/types.hpp"

namespace weakpairs {

/// Absolute tolerance for the feasibility bounds, chosen so that labels
/// produced by a floating-point round-trip from posteriors always pass.
inline constexpr double kFeasibilityTol = 1e-9;

/// Weak labels from exact posteriors:
///   s = p*p' + (1-p)*(1-p'),   c = p' - p.
/// Throws InvalidSpec if either posterior lies outside [0,1].
std::pair<double, double> weak_labels_from_posteriors(const PosteriorPair& pp);

/// True iff (s, c) is realizable by some posterior pair in [0,1]^2, within
/// kFeasibilityTol. Closed form (confirmed against a brute-force grid over
/// (p, p') at resolution 1e-3, kept as a cross-check test):
///   |c| <= 1  and  (1 - c^2)/2 <= s <= 1 - |c|.
bool feasible_region_check(double s, double c);

}  // namespace weakpairs
