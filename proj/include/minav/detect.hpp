#pragma once

#include <optional>
#include <span>
#include <vector>

#include "minav/baseline.hpp"
#include "minav/common.hpp"
#include "minav/dipole.hpp"
#include "minav/geom.hpp"

namespace minav {

enum class Detector { ChiSquared, Normalized, Eigenvalue };

const char* to_string(Detector detector);

/// Every detector treats large statistics as evidence of a fault.
struct DetectionResult {
  double statistic{0.0};
  std::optional<double> p_value;  // chi-squared only
  double threshold{0.0};
  bool reject{false};
  Detector detector{Detector::ChiSquared};
};

/// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
double regularized_gamma_q(double a, double x);

/// Weighted residual sum T(x) = sum_k |y_k - h_{m_k}(x)|^2_{P^{-1}}.
double chi2_statistic(const MeasurementPacket& packet, const NavStated& state);

/// Upper tail probability of a chi-squared variable with `dof` degrees of
/// freedom.
double chi2_pvalue(double statistic, double dof);

/// x with chi2_pvalue(x, dof) == upper_tail.
double chi2_threshold(double upper_tail, double dof);

/// Degrees of freedom of T at the true state: 3N.
inline double default_chi2_dof(const MeasurementPacket& packet) {
  return 3.0 * static_cast<double>(packet.size());
}

/// Chi-squared test at level alpha. dof <= 0 selects default_chi2_dof. When
/// the state is an estimate, up to 6 degrees of freedom are absorbed by the
/// fit, so the default test is slightly conservative.
DetectionResult chi2_test(const MeasurementPacket& packet, const NavStated& state, double alpha,
                          double dof = 0.0);

/// T(x) / sum_k |y_k|^2. Throws ZeroSignal when all readings vanish.
double normalized_statistic(const MeasurementPacket& packet, const NavStated& state);

/// Distance of the mean-normalized Gramian spectrum from [2, 1/2, 1/2].
double eigenvalue_criterion(const ChannelMatrix& channel);

DetectionResult threshold_test(Detector detector, double statistic, double threshold);

struct RocPoint {
  double fpr{0.0};
  double tpr{0.0};
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
  double auc{0.0};
};

/// Exact empirical ROC over the pooled scores, AUC by the trapezoidal rule.
RocCurve roc_curve(std::span<const double> scores_h0, std::span<const double> scores_h1);

}  // namespace minav
