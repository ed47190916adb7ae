#include "minav/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "minav/estimators.hpp"

namespace minav {

const char* to_string(Detector detector) {
  switch (detector) {
    case Detector::ChiSquared: return "chi2";
    case Detector::Normalized: return "norm";
    case Detector::Eigenvalue: return "eig";
  }
  return "unknown";
}

namespace {

constexpr double kGammaEps = 1e-16;
constexpr int kGammaMaxIter = 100000;

// Series for P(a, x), valid and fast for x < a + 1.
double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kGammaMaxIter; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kGammaEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x) (modified Lentz), used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kGammaEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kGammaMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kGammaEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double regularized_gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double chi2_statistic(const MeasurementPacket& packet, const NavStated& state) {
  return mi_cost(packet, state);
}

double chi2_pvalue(double statistic, double dof) {
  return regularized_gamma_q(0.5 * dof, 0.5 * std::max(statistic, 0.0));
}

double chi2_threshold(double upper_tail, double dof) {
  if (!(upper_tail > 0.0 && upper_tail < 1.0) || !(dof > 0.0)) {
    throw Error(ErrorCode::BadConfig, "need 0 < alpha < 1 and dof > 0");
  }
  double lo = 0.0;
  double hi = std::max(1.0, dof);
  while (chi2_pvalue(hi, dof) > upper_tail) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (chi2_pvalue(mid, dof) > upper_tail ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DetectionResult threshold_test(Detector detector, double statistic, double threshold) {
  DetectionResult result;
  result.detector = detector;
  result.statistic = statistic;
  result.threshold = threshold;
  result.reject = statistic > threshold;
  return result;
}

DetectionResult chi2_test(const MeasurementPacket& packet, const NavStated& state, double alpha,
                          double dof) {
  if (dof <= 0.0) dof = default_chi2_dof(packet);
  const double statistic = chi2_statistic(packet, state);
  DetectionResult result =
      threshold_test(Detector::ChiSquared, statistic, chi2_threshold(alpha, dof));
  result.p_value = chi2_pvalue(statistic, dof);
  return result;
}

double normalized_statistic(const MeasurementPacket& packet, const NavStated& state) {
  double energy = 0.0;
  for (const auto& y : packet.readings) energy += y.squaredNorm();
  if (!(energy > 0.0)) throw Error(ErrorCode::ZeroSignal, "all readings are zero");
  return chi2_statistic(packet, state) / energy;
}

double eigenvalue_criterion(const ChannelMatrix& channel) {
  const Vector3d values = gramian_eigenvalues(channel);
  const double mean = values.mean();
  if (!(mean > 0.0)) throw Error(ErrorCode::ZeroChannel, "channel matrix is zero");
  return (values / mean - Vector3d(2.0, 0.5, 0.5)).norm();
}

RocCurve roc_curve(std::span<const double> scores_h0, std::span<const double> scores_h1) {
  if (scores_h0.empty() || scores_h1.empty()) {
    throw Error(ErrorCode::BadConfig, "ROC needs scores under both hypotheses");
  }
  auto not_nan = [](double s) { return !std::isnan(s); };
  if (!std::all_of(scores_h0.begin(), scores_h0.end(), not_nan) ||
      !std::all_of(scores_h1.begin(), scores_h1.end(), not_nan)) {
    throw Error(ErrorCode::BadConfig, "ROC scores must not be NaN");
  }
  std::vector<double> h0(scores_h0.begin(), scores_h0.end());
  std::vector<double> h1(scores_h1.begin(), scores_h1.end());
  std::sort(h0.begin(), h0.end(), std::greater<>());
  std::sort(h1.begin(), h1.end(), std::greater<>());

  const double n0 = static_cast<double>(h0.size());
  const double n1 = static_cast<double>(h1.size());
  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t i0 = 0, i1 = 0;
  // Each distinct score is a threshold; both counts absorb all ties at once.
  while (i0 < h0.size() || i1 < h1.size()) {
    double t = -std::numeric_limits<double>::infinity();
    if (i0 < h0.size()) t = std::max(t, h0[i0]);
    if (i1 < h1.size()) t = std::max(t, h1[i1]);
    while (i0 < h0.size() && h0[i0] >= t) ++i0;
    while (i1 < h1.size() && h1[i1] >= t) ++i1;
    const RocPoint next{static_cast<double>(i0) / n0, static_cast<double>(i1) / n1};
    const RocPoint& prev = curve.points.back();
    curve.auc += (next.fpr - prev.fpr) * 0.5 * (next.tpr + prev.tpr);
    curve.points.push_back(next);
  }
  return curve;
}

}  // namespace minav
