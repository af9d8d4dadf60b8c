#include "weakpairs/types.hpp"

#include <cstdio>

namespace weakpairs {

void EstimatorSpec::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw InvalidSpec("gamma must lie in [0,1]");
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw InvalidSpec("lambda must lie in [0,1]");
}

bool EstimatorSpec::requires_distinct_prior() const {
  switch (kind) {
    case EstimatorKind::Sconf:
      return true;
    case EstimatorKind::Convex:
    case EstimatorKind::CorrectedConvex:
      return gamma > 0.0;
    default:
      return false;
  }
}

namespace {

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string correction_suffix(CorrectionKind c) {
  switch (c) {
    case CorrectionKind::Relu:
      return "-ReLU";
    case CorrectionKind::Abs:
      return "-ABS";
    default:
      return "";
  }
}

}  // namespace

std::string EstimatorSpec::display_name() const {
  switch (kind) {
    case EstimatorKind::Sconf:
      return "Sconf";
    case EstimatorKind::ConfDiff:
      return "ConfDiff";
    case EstimatorKind::Convex:
      return "Convex(gamma=" + two_decimals(gamma) + ")";
    case EstimatorKind::Scd:
      return "SCD";
    case EstimatorKind::ScdLambda:
      return "SCD(lambda=" + two_decimals(lambda) + ")";
    case EstimatorKind::CorrectedScd:
      return "SCD" + (correction == CorrectionKind::None
                          ? std::string("-Unbiased")
                          : correction_suffix(correction));
    case EstimatorKind::CorrectedConvex:
      return "Convex(gamma=" + two_decimals(gamma) + ")" +
             (correction == CorrectionKind::None
                  ? std::string("-Unbiased")
                  : correction_suffix(correction));
    case EstimatorKind::Supervised:
      return "Supervised";
  }
  return "?";
}

EstimatorSpec parse_estimator(const std::string& name) {
  EstimatorSpec spec;
  auto with = [&spec](EstimatorKind k, CorrectionKind c) {
    spec.kind = k;
    spec.correction = c;
    return spec;
  };
  if (name == "sconf") return with(EstimatorKind::Sconf, CorrectionKind::None);
  if (name == "confdiff")
    return with(EstimatorKind::ConfDiff, CorrectionKind::None);
  if (name == "convex")
    return with(EstimatorKind::Convex, CorrectionKind::None);
  if (name == "convex-relu")
    return with(EstimatorKind::CorrectedConvex, CorrectionKind::Relu);
  if (name == "convex-abs")
    return with(EstimatorKind::CorrectedConvex, CorrectionKind::Abs);
  if (name == "scd") return with(EstimatorKind::Scd, CorrectionKind::None);
  if (name == "scd-lambda")
    return with(EstimatorKind::ScdLambda, CorrectionKind::None);
  if (name == "scd-relu")
    return with(EstimatorKind::CorrectedScd, CorrectionKind::Relu);
  if (name == "scd-abs")
    return with(EstimatorKind::CorrectedScd, CorrectionKind::Abs);
  if (name == "supervised")
    return with(EstimatorKind::Supervised, CorrectionKind::None);
  throw InvalidSpec(
      "unknown estimator '" + name +
      "' (expected one of: sconf, confdiff, convex, convex-relu, convex-abs, "
      "scd, scd-lambda, scd-relu, scd-abs, supervised)");
}

const char* to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Sconf:
      return "sconf";
    case EstimatorKind::ConfDiff:
      return "confdiff";
    case EstimatorKind::Convex:
      return "convex";
    case EstimatorKind::Scd:
      return "scd";
    case EstimatorKind::ScdLambda:
      return "scd-lambda";
    case EstimatorKind::CorrectedScd:
      return "corrected-scd";
    case EstimatorKind::CorrectedConvex:
      return "corrected-convex";
    case EstimatorKind::Supervised:
      return "supervised";
  }
  return "?";
}

const char* to_string(CorrectionKind kind) {
  switch (kind) {
    case CorrectionKind::None:
      return "none";
    case CorrectionKind::Relu:
      return "relu";
    case CorrectionKind::Abs:
      return "abs";
  }
  return "?";
}

}  // namespace weakpairs
