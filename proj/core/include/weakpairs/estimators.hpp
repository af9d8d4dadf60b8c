#pragma once

#include <span>
#include <utility>
#include <vector>

#include "weakpairs/loss.hpp"
#include "weakpairs/types.hpp"

namespace weakpairs {

/// Model outputs for the two points of every pair, aligned with the
/// dataset order. Estimators consume precomputed scores so that the same
/// code path serves evaluation, training and the Monte-Carlo oracles.
struct PairScores {
  std::vector<double> x;
  std::vector<double> x_prime;
};

/// Loss values for the four (point, label) slots of each pair:
///   pos_x  = l(g(x),  +1),  neg_x  = l(g(x),  -1),
///   pos_xp = l(g(x'), +1),  neg_xp = l(g(x'), -1).
struct SlotLosses {
  std::vector<double> pos_x;
  std::vector<double> neg_x;
  std::vector<double> pos_xp;
  std::vector<double> neg_xp;
};

SlotLosses compute_slot_losses(const LossFn& loss, const PairScores& scores);

/// Per-pair multipliers of the four slot losses, already divided by the
/// dataset normalizer. For every uncorrected estimator the risk equals the
/// weighted sum of slot losses; corrected kinds additionally fold the
/// correction derivative into the weights (gradient routing).
struct TermWeights {
  std::vector<double> pos_x;
  std::vector<double> neg_x;
  std::vector<double> pos_xp;
  std::vector<double> neg_xp;

  std::size_t size() const { return pos_x.size(); }
};

/// The four partial risks of the corrected SCD estimator before the
/// correction function is applied. a/b/c/d multiply the slots
/// pos_x/neg_xp/pos_xp/neg_x respectively.
struct CorrectedTerms {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double sum() const { return (a + b) + (c + d); }
};

double apply_correction(CorrectionKind f, double z);

/// Subgradient of the correction at z; defined as 0 at the kink z == 0.
double correction_grad(CorrectionKind f, double z);

// --- Scalar risk estimators -------------------------------------------

/// Sconf estimator: weights (pi- - s)/(pi- - pi+) on positive slots and
/// (pi+ - s)/(pi+ - pi-) on negative slots, averaged over 2n terms.
/// Throws PriorDegenerate when |pi+ - 0.5| < 1e-12.
double sconf_risk(const PairDataset& data, const ClassPrior& prior,
                  const LossFn& loss, const PairScores& scores);

/// ConfDiff estimator: (1/2n) sum of (pi+ - c) l(g(x),+1)
/// + (pi- - c) l(g(x'),-1) + (pi+ + c) l(g(x'),+1) + (pi- + c) l(g(x),-1).
double confdiff_risk(const PairDataset& data, const ClassPrior& prior,
                     const LossFn& loss, const PairScores& scores);

/// gamma * sconf + (1-gamma) * confdiff. The endpoints reproduce the
/// component estimators bit-for-bit; gamma == 0 never touches the Sconf
/// weights, so it is valid at a balanced prior.
double convex_risk(const PairDataset& data, const ClassPrior& prior,
                   const LossFn& loss, const PairScores& scores, double gamma);

/// The forward and reverse pair losses of the joint estimator:
///   L(x,x')  = (2 pi+ (pi+ - c) + pi- - s) l(g(x),+1)
///            + (2 pi- (pi- - c) + pi+ - s) l(g(x'),-1)
///   L(x',x)  = same with c -> -c and the roles of x, x' swapped.
std::pair<double, double> scd_pair_loss(const WeakPair& pair,
                                        const ClassPrior& prior,
                                        const LossFn& loss, double score_x,
                                        double score_xp);

/// (1/2n) sum of (L_fwd + L_rev). Valid at any prior in (0,1).
double scd_risk(const PairDataset& data, const ClassPrior& prior,
                const LossFn& loss, const PairScores& scores);

/// (1/n) sum of (lambda L_fwd + (1-lambda) L_rev). lambda == 0.5
/// reproduces scd_risk bit-for-bit.
double scd_risk_lambda(const PairDataset& data, const ClassPrior& prior,
                       const LossFn& loss, const PairScores& scores,
                       double lambda);

/// f(A) + f(B) + f(C) + f(D) with the four partial risks returned
/// alongside. CorrectionKind::None reproduces scd_risk bit-for-bit.
std::pair<double, CorrectedTerms> corrected_scd_risk(const PairDataset& data,
                                                     const ClassPrior& prior,
                                                     const LossFn& loss,
                                                     const PairScores& scores,
                                                     CorrectionKind correction);

/// gamma * (f applied to the two grouped Sconf sums) + (1-gamma) * (f
/// applied to the four grouped ConfDiff sums). None reproduces convex_risk
/// bit-for-bit.
double corrected_convex_risk(const PairDataset& data, const ClassPrior& prior,
                             const LossFn& loss, const PairScores& scores,
                             double gamma, CorrectionKind correction);

// --- Unified dispatch --------------------------------------------------

/// Evaluates the estimator selected by `spec`. Rejects Supervised (which
/// trains on labeled data, not pairs).
double risk_value(const PairDataset& data, const ClassPrior& prior,
                  const EstimatorSpec& spec, const LossFn& loss,
                  const PairScores& scores);

/// Slot-loss weights for backpropagation; corrected kinds fold the
/// correction subgradient at the current partial sums into the weights.
TermWeights term_weights(const PairDataset& data, const ClassPrior& prior,
                         const EstimatorSpec& spec, const LossFn& loss,
                         const PairScores& scores);

// --- Span-level core (no PairDataset required) -------------------------
// The weights depend on the labels only through (s, c); these entry points
// let the trainer evaluate mini-batches without materializing sub-datasets
// and let the verifier reuse one set of slot losses across estimators.

double risk_from_slots(std::span<const double> s, std::span<const double> c,
                       const ClassPrior& prior, const EstimatorSpec& spec,
                       const SlotLosses& slots);

TermWeights term_weights_from_slots(std::span<const double> s,
                                    std::span<const double> c,
                                    const ClassPrior& prior,
                                    const EstimatorSpec& spec,
                                    const SlotLosses& slots);

std::pair<double, CorrectedTerms> corrected_scd_from_slots(
    std::span<const double> s, std::span<const double> c,
    const ClassPrior& prior, const SlotLosses& slots,
    CorrectionKind correction);

/// The partial sums a corrected estimator applies f to: {A,B,C,D} for
/// CorrectedScd, the active sconf/confdiff groups for CorrectedConvex.
/// Empty for uncorrected kinds.
std::vector<double> corrected_group_sums(std::span<const double> s,
                                         std::span<const double> c,
                                         const ClassPrior& prior,
                                         const EstimatorSpec& spec,
                                         const SlotLosses& slots);

}  // namespace weakpairs
