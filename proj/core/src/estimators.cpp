#include "weakpairs/estimators.hpp"

#include <cmath>

#include "weakpairs/summation.hpp"

namespace weakpairs {

namespace {

void require_nonempty(std::size_t n) {
  if (n == 0) throw EmptyDataset();
}

void require_distinct(const ClassPrior& prior) {
  if (prior.is_degenerate()) throw PriorDegenerate(prior.pi_plus());
}

void require_aligned(std::size_t n_pairs, const SlotLosses& slots) {
  if (slots.pos_x.size() != n_pairs)
    throw DimensionMismatch(n_pairs, slots.pos_x.size());
}

double slot_sum(std::span<const double> w, std::span<const double> l) {
  std::vector<double> terms(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) terms[i] = w[i] * l[i];
  return pairwise_sum(terms);
}

struct SlotSums {
  double pos_x = 0.0;
  double neg_x = 0.0;
  double pos_xp = 0.0;
  double neg_xp = 0.0;
};

SlotSums slot_sums(const TermWeights& w, const SlotLosses& l) {
  SlotSums out;
  out.pos_x = slot_sum(w.pos_x, l.pos_x);
  out.neg_x = slot_sum(w.neg_x, l.neg_x);
  out.pos_xp = slot_sum(w.pos_xp, l.pos_xp);
  out.neg_xp = slot_sum(w.neg_xp, l.neg_xp);
  return out;
}

TermWeights make_weights(std::size_t n) {
  TermWeights w;
  w.pos_x.resize(n);
  w.neg_x.resize(n);
  w.pos_xp.resize(n);
  w.neg_xp.resize(n);
  return w;
}

// Eq.-3 weights: both +1 slots share (pi- - s)/(pi- - pi+), both -1 slots
// share (pi+ - s)/(pi+ - pi-); the 1/2n normalizer is folded in.
TermWeights sconf_weights(std::span<const double> s, const ClassPrior& prior,
                          std::size_t n) {
  require_distinct(prior);
  const double pip = prior.pi_plus();
  const double pim = prior.pi_minus();
  const double denom_pos = pim - pip;
  const double denom_neg = pip - pim;
  const double norm = 1.0 / (2.0 * static_cast<double>(n));
  TermWeights w = make_weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double wp = ((pim - s[i]) / denom_pos) * norm;
    const double wn = ((pip - s[i]) / denom_neg) * norm;
    w.pos_x[i] = wp;
    w.pos_xp[i] = wp;
    w.neg_x[i] = wn;
    w.neg_xp[i] = wn;
  }
  return w;
}

// Eq.-4 weights.
TermWeights confdiff_weights(std::span<const double> c,
                             const ClassPrior& prior, std::size_t n) {
  const double pip = prior.pi_plus();
  const double pim = prior.pi_minus();
  const double norm = 1.0 / (2.0 * static_cast<double>(n));
  TermWeights w = make_weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.pos_x[i] = (pip - c[i]) * norm;
    w.neg_xp[i] = (pim - c[i]) * norm;
    w.pos_xp[i] = (pip + c[i]) * norm;
    w.neg_x[i] = (pim + c[i]) * norm;
  }
  return w;
}

// Lambda-family weights. The forward loss L(x,x') covers the pos_x and
// neg_xp slots, the reverse loss the pos_xp and neg_x slots. lambda = 0.5
// halves the base coefficients exactly, which is what makes scd_risk and
// scd_risk_lambda(0.5) bit-identical.
TermWeights scd_lambda_weights(std::span<const double> s,
                               std::span<const double> c,
                               const ClassPrior& prior, double lambda,
                               std::size_t n) {
  const double pip = prior.pi_plus();
  const double pim = prior.pi_minus();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double mu = 1.0 - lambda;
  TermWeights w = make_weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pos_base = pim - s[i];
    const double neg_base = pip - s[i];
    w.pos_x[i] = lambda * ((2.0 * pip * (pip - c[i]) + pos_base) * inv_n);
    w.neg_xp[i] = lambda * ((2.0 * pim * (pim - c[i]) + neg_base) * inv_n);
    w.pos_xp[i] = mu * ((2.0 * pip * (pip + c[i]) + pos_base) * inv_n);
    w.neg_x[i] = mu * ((2.0 * pim * (pim + c[i]) + neg_base) * inv_n);
  }
  return w;
}

double pair_grouped_value(const SlotSums& sums) {
  return (sums.pos_x + sums.neg_xp) + (sums.pos_xp + sums.neg_x);
}

double sconf_grouped_value(const SlotSums& sums) {
  return (sums.pos_x + sums.pos_xp) + (sums.neg_x + sums.neg_xp);
}

double sconf_value(std::span<const double> s, const ClassPrior& prior,
                   const SlotLosses& slots) {
  const std::size_t n = s.size();
  require_nonempty(n);
  require_aligned(n, slots);
  return sconf_grouped_value(slot_sums(sconf_weights(s, prior, n), slots));
}

double confdiff_value(std::span<const double> c, const ClassPrior& prior,
                      const SlotLosses& slots) {
  const std::size_t n = c.size();
  require_nonempty(n);
  require_aligned(n, slots);
  return pair_grouped_value(slot_sums(confdiff_weights(c, prior, n), slots));
}

double scd_lambda_value(std::span<const double> s, std::span<const double> c,
                        const ClassPrior& prior, double lambda,
                        const SlotLosses& slots) {
  const std::size_t n = s.size();
  require_nonempty(n);
  require_aligned(n, slots);
  return pair_grouped_value(
      slot_sums(scd_lambda_weights(s, c, prior, lambda, n), slots));
}

double convex_value(std::span<const double> s, std::span<const double> c,
                    const ClassPrior& prior, double gamma,
                    const SlotLosses& slots) {
  if (gamma == 0.0) return confdiff_value(c, prior, slots);
  if (gamma == 1.0) return sconf_value(s, prior, slots);
  return gamma * sconf_value(s, prior, slots) +
         (1.0 - gamma) * confdiff_value(c, prior, slots);
}

std::pair<double, CorrectedTerms> corrected_scd_value(
    std::span<const double> s, std::span<const double> c,
    const ClassPrior& prior, const SlotLosses& slots,
    CorrectionKind correction) {
  const std::size_t n = s.size();
  require_nonempty(n);
  require_aligned(n, slots);
  const SlotSums sums =
      slot_sums(scd_lambda_weights(s, c, prior, 0.5, n), slots);
  CorrectedTerms terms{sums.pos_x, sums.neg_xp, sums.pos_xp, sums.neg_x};
  const double value = (apply_correction(correction, terms.a) +
                        apply_correction(correction, terms.b)) +
                       (apply_correction(correction, terms.c) +
                        apply_correction(correction, terms.d));
  return {value, terms};
}

double corrected_convex_value(std::span<const double> s,
                              std::span<const double> c,
                              const ClassPrior& prior, double gamma,
                              const SlotLosses& slots,
                              CorrectionKind correction) {
  const std::size_t n = s.size();
  require_nonempty(n);
  require_aligned(n, slots);
  double sconf_part = 0.0;
  if (gamma > 0.0) {
    const SlotSums sums = slot_sums(sconf_weights(s, prior, n), slots);
    const double pos_group = sums.pos_x + sums.pos_xp;
    const double neg_group = sums.neg_x + sums.neg_xp;
    sconf_part = apply_correction(correction, pos_group) +
                 apply_correction(correction, neg_group);
  }
  double cd_part = 0.0;
  if (gamma < 1.0) {
    const SlotSums sums = slot_sums(confdiff_weights(c, prior, n), slots);
    cd_part = (apply_correction(correction, sums.pos_x) +
               apply_correction(correction, sums.neg_xp)) +
              (apply_correction(correction, sums.pos_xp) +
               apply_correction(correction, sums.neg_x));
  }
  if (gamma == 0.0) return cd_part;
  if (gamma == 1.0) return sconf_part;
  return gamma * sconf_part + (1.0 - gamma) * cd_part;
}

void scale(std::vector<double>& v, double factor) {
  for (double& x : v) x *= factor;
}

TermWeights corrected_scd_weights(std::span<const double> s,
                                  std::span<const double> c,
                                  const ClassPrior& prior,
                                  const SlotLosses& slots,
                                  CorrectionKind correction) {
  const std::size_t n = s.size();
  TermWeights w = scd_lambda_weights(s, c, prior, 0.5, n);
  if (correction == CorrectionKind::None) return w;
  const SlotSums sums = slot_sums(w, slots);
  scale(w.pos_x, correction_grad(correction, sums.pos_x));
  scale(w.neg_xp, correction_grad(correction, sums.neg_xp));
  scale(w.pos_xp, correction_grad(correction, sums.pos_xp));
  scale(w.neg_x, correction_grad(correction, sums.neg_x));
  return w;
}

TermWeights corrected_convex_weights(std::span<const double> s,
                                     std::span<const double> c,
                                     const ClassPrior& prior, double gamma,
                                     const SlotLosses& slots,
                                     CorrectionKind correction) {
  const std::size_t n = s.size();
  TermWeights out = make_weights(n);
  if (gamma > 0.0) {
    TermWeights ws = sconf_weights(s, prior, n);
    double f_pos = 1.0;
    double f_neg = 1.0;
    if (correction != CorrectionKind::None) {
      const SlotSums sums = slot_sums(ws, slots);
      f_pos = correction_grad(correction, sums.pos_x + sums.pos_xp);
      f_neg = correction_grad(correction, sums.neg_x + sums.neg_xp);
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.pos_x[i] += gamma * f_pos * ws.pos_x[i];
      out.pos_xp[i] += gamma * f_pos * ws.pos_xp[i];
      out.neg_x[i] += gamma * f_neg * ws.neg_x[i];
      out.neg_xp[i] += gamma * f_neg * ws.neg_xp[i];
    }
  }
  if (gamma < 1.0) {
    TermWeights wc = confdiff_weights(c, prior, n);
    double fa = 1.0, fb = 1.0, fc = 1.0, fd = 1.0;
    if (correction != CorrectionKind::None) {
      const SlotSums sums = slot_sums(wc, slots);
      fa = correction_grad(correction, sums.pos_x);
      fb = correction_grad(correction, sums.neg_xp);
      fc = correction_grad(correction, sums.pos_xp);
      fd = correction_grad(correction, sums.neg_x);
    }
    const double mu = 1.0 - gamma;
    for (std::size_t i = 0; i < n; ++i) {
      out.pos_x[i] += mu * fa * wc.pos_x[i];
      out.neg_xp[i] += mu * fb * wc.neg_xp[i];
      out.pos_xp[i] += mu * fc * wc.pos_xp[i];
      out.neg_x[i] += mu * fd * wc.neg_x[i];
    }
  }
  return out;
}

}  // namespace

SlotLosses compute_slot_losses(const LossFn& loss, const PairScores& scores) {
  const std::size_t n = scores.x.size();
  if (scores.x_prime.size() != n)
    throw DimensionMismatch(n, scores.x_prime.size());
  SlotLosses slots;
  slots.pos_x.resize(n);
  slots.neg_x.resize(n);
  slots.pos_xp.resize(n);
  slots.neg_xp.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    slots.pos_x[i] = loss(scores.x[i], +1);
    slots.neg_x[i] = loss(scores.x[i], -1);
    slots.pos_xp[i] = loss(scores.x_prime[i], +1);
    slots.neg_xp[i] = loss(scores.x_prime[i], -1);
  }
  return slots;
}

double apply_correction(CorrectionKind f, double z) {
  switch (f) {
    case CorrectionKind::Relu:
      return z > 0.0 ? z : 0.0;
    case CorrectionKind::Abs:
      return std::fabs(z);
    case CorrectionKind::None:
      return z;
  }
  return z;
}

double correction_grad(CorrectionKind f, double z) {
  switch (f) {
    case CorrectionKind::Relu:
      return z > 0.0 ? 1.0 : 0.0;
    case CorrectionKind::Abs:
      return z > 0.0 ? 1.0 : (z < 0.0 ? -1.0 : 0.0);
    case CorrectionKind::None:
      return 1.0;
  }
  return 1.0;
}

double sconf_risk(const PairDataset& data, const ClassPrior& prior,
                  const LossFn& loss, const PairScores& scores) {
  const auto s = data.s_values();
  return sconf_value(s, prior, compute_slot_losses(loss, scores));
}

double confdiff_risk(const PairDataset& data, const ClassPrior& prior,
                     const LossFn& loss, const PairScores& scores) {
  const auto c = data.c_values();
  return confdiff_value(c, prior, compute_slot_losses(loss, scores));
}

double convex_risk(const PairDataset& data, const ClassPrior& prior,
                   const LossFn& loss, const PairScores& scores,
                   double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw InvalidSpec("gamma must lie in [0,1]");
  const auto s = data.s_values();
  const auto c = data.c_values();
  return convex_value(s, c, prior, gamma, compute_slot_losses(loss, scores));
}

std::pair<double, double> scd_pair_loss(const WeakPair& pair,
                                        const ClassPrior& prior,
                                        const LossFn& loss, double score_x,
                                        double score_xp) {
  const double pip = prior.pi_plus();
  const double pim = prior.pi_minus();
  const double s = pair.s;
  const double c = pair.c;
  const double fwd = (2.0 * pip * (pip - c) + pim - s) * loss(score_x, +1) +
                     (2.0 * pim * (pim - c) + pip - s) * loss(score_xp, -1);
  const double rev = (2.0 * pip * (pip + c) + pim - s) * loss(score_xp, +1) +
                     (2.0 * pim * (pim + c) + pip - s) * loss(score_x, -1);
  return {fwd, rev};
}

double scd_risk(const PairDataset& data, const ClassPrior& prior,
                const LossFn& loss, const PairScores& scores) {
  return scd_risk_lambda(data, prior, loss, scores, 0.5);
}

double scd_risk_lambda(const PairDataset& data, const ClassPrior& prior,
                       const LossFn& loss, const PairScores& scores,
                       double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw InvalidSpec("lambda must lie in [0,1]");
  const auto s = data.s_values();
  const auto c = data.c_values();
  return scd_lambda_value(s, c, prior, lambda,
                          compute_slot_losses(loss, scores));
}

std::pair<double, CorrectedTerms> corrected_scd_risk(
    const PairDataset& data, const ClassPrior& prior, const LossFn& loss,
    const PairScores& scores, CorrectionKind correction) {
  const auto s = data.s_values();
  const auto c = data.c_values();
  return corrected_scd_value(s, c, prior, compute_slot_losses(loss, scores),
                             correction);
}

double corrected_convex_risk(const PairDataset& data, const ClassPrior& prior,
                             const LossFn& loss, const PairScores& scores,
                             double gamma, CorrectionKind correction) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw InvalidSpec("gamma must lie in [0,1]");
  const auto s = data.s_values();
  const auto c = data.c_values();
  return corrected_convex_value(s, c, prior, gamma,
                                compute_slot_losses(loss, scores), correction);
}

double risk_from_slots(std::span<const double> s, std::span<const double> c,
                       const ClassPrior& prior, const EstimatorSpec& spec,
                       const SlotLosses& slots) {
  spec.validate();
  switch (spec.kind) {
    case EstimatorKind::Sconf:
      return sconf_value(s, prior, slots);
    case EstimatorKind::ConfDiff:
      return confdiff_value(c, prior, slots);
    case EstimatorKind::Convex:
      return convex_value(s, c, prior, spec.gamma, slots);
    case EstimatorKind::Scd:
      return scd_lambda_value(s, c, prior, 0.5, slots);
    case EstimatorKind::ScdLambda:
      return scd_lambda_value(s, c, prior, spec.lambda, slots);
    case EstimatorKind::CorrectedScd:
      return corrected_scd_value(s, c, prior, slots, spec.correction).first;
    case EstimatorKind::CorrectedConvex:
      return corrected_convex_value(s, c, prior, spec.gamma, slots,
                                    spec.correction);
    case EstimatorKind::Supervised:
      throw InvalidSpec("supervised risk is defined on labeled data, not pairs");
  }
  throw InvalidSpec("unhandled estimator kind");
}

TermWeights term_weights_from_slots(std::span<const double> s,
                                    std::span<const double> c,
                                    const ClassPrior& prior,
                                    const EstimatorSpec& spec,
                                    const SlotLosses& slots) {
  spec.validate();
  const std::size_t n = s.size();
  require_nonempty(n);
  switch (spec.kind) {
    case EstimatorKind::Sconf:
      return sconf_weights(s, prior, n);
    case EstimatorKind::ConfDiff:
      return confdiff_weights(c, prior, n);
    case EstimatorKind::Convex: {
      if (spec.gamma == 0.0) return confdiff_weights(c, prior, n);
      if (spec.gamma == 1.0) return sconf_weights(s, prior, n);
      TermWeights ws = sconf_weights(s, prior, n);
      TermWeights wc = confdiff_weights(c, prior, n);
      TermWeights out = make_weights(n);
      const double g = spec.gamma;
      const double mu = 1.0 - g;
      for (std::size_t i = 0; i < n; ++i) {
        out.pos_x[i] = g * ws.pos_x[i] + mu * wc.pos_x[i];
        out.neg_x[i] = g * ws.neg_x[i] + mu * wc.neg_x[i];
        out.pos_xp[i] = g * ws.pos_xp[i] + mu * wc.pos_xp[i];
        out.neg_xp[i] = g * ws.neg_xp[i] + mu * wc.neg_xp[i];
      }
      return out;
    }
    case EstimatorKind::Scd:
      return scd_lambda_weights(s, c, prior, 0.5, n);
    case EstimatorKind::ScdLambda:
      return scd_lambda_weights(s, c, prior, spec.lambda, n);
    case EstimatorKind::CorrectedScd:
      return corrected_scd_weights(s, c, prior, slots, spec.correction);
    case EstimatorKind::CorrectedConvex:
      return corrected_convex_weights(s, c, prior, spec.gamma, slots,
                                      spec.correction);
    case EstimatorKind::Supervised:
      throw InvalidSpec(
          "supervised term weights are defined on labeled data, not pairs");
  }
  throw InvalidSpec("unhandled estimator kind");
}

double risk_value(const PairDataset& data, const ClassPrior& prior,
                  const EstimatorSpec& spec, const LossFn& loss,
                  const PairScores& scores) {
  const auto s = data.s_values();
  const auto c = data.c_values();
  return risk_from_slots(s, c, prior, spec, compute_slot_losses(loss, scores));
}

TermWeights term_weights(const PairDataset& data, const ClassPrior& prior,
                         const EstimatorSpec& spec, const LossFn& loss,
                         const PairScores& scores) {
  const auto s = data.s_values();
  const auto c = data.c_values();
  return term_weights_from_slots(s, c, prior, spec,
                                 compute_slot_losses(loss, scores));
}

std::pair<double, CorrectedTerms> corrected_scd_from_slots(
    std::span<const double> s, std::span<const double> c,
    const ClassPrior& prior, const SlotLosses& slots,
    CorrectionKind correction) {
  return corrected_scd_value(s, c, prior, slots, correction);
}

std::vector<double> corrected_group_sums(std::span<const double> s,
                                         std::span<const double> c,
                                         const ClassPrior& prior,
                                         const EstimatorSpec& spec,
                                         const SlotLosses& slots) {
  const std::size_t n = s.size();
  require_nonempty(n);
  require_aligned(n, slots);
  std::vector<double> groups;
  if (spec.kind == EstimatorKind::CorrectedScd) {
    const SlotSums sums =
        slot_sums(scd_lambda_weights(s, c, prior, 0.5, n), slots);
    groups = {sums.pos_x, sums.neg_xp, sums.pos_xp, sums.neg_x};
  } else if (spec.kind == EstimatorKind::CorrectedConvex) {
    if (spec.gamma > 0.0) {
      const SlotSums sums = slot_sums(sconf_weights(s, prior, n), slots);
      groups.push_back(sums.pos_x + sums.pos_xp);
      groups.push_back(sums.neg_x + sums.neg_xp);
    }
    if (spec.gamma < 1.0) {
      const SlotSums sums = slot_sums(confdiff_weights(c, prior, n), slots);
      groups.push_back(sums.pos_x);
      groups.push_back(sums.neg_xp);
      groups.push_back(sums.pos_xp);
      groups.push_back(sums.neg_x);
    }
  }
  return groups;
}

}  // namespace weakpairs
