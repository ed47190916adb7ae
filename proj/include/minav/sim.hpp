#pragma once

// Monte-Carlo harness for the simulation studies: RMSE versus prior
// uncertainty, detector ROC, and accelerometer-prior fusion.
//
// Every trial draws from its own counter-derived random stream, so results are
// identical for any number of worker threads.

#include <cstdint>
#include <vector>

#include "minav/common.hpp"
#include "minav/crb.hpp"
#include "minav/detect.hpp"
#include "minav/dipole.hpp"
#include "minav/estimators.hpp"
#include "minav/random.hpp"

namespace minav {

enum class HemisphereReference { Truth, PriorMean };

struct ExperimentConfig {
  NavStated truth{Vector3d(1.0, 1.0, 1.0), {}};
  double c{1.0};
  MomentSchedule schedule{MomentSchedule::axis_cycle(1.0, 30)};
  double sigma{0.1};
  int trials{10000};
  std::uint64_t seed{1};
  std::vector<double> prior_sweep;
  PriorTarget prior_target{PriorTarget::Orientation};
  /// Reference for resolving the MAP hemisphere. PriorMean only differs from
  /// Truth for position priors.
  HemisphereReference hemisphere_reference{HemisphereReference::Truth};
  /// Worker threads; 0 means the hardware concurrency, capped by MINAV_THREADS.
  unsigned threads{0};

  Matrix3d noise_cov() const { return sigma * sigma * Matrix3d::Identity(); }

  /// Throws BadConfig.
  void validate() const;
};

/// Worker count used for `requested`; 0 selects the hardware concurrency
/// capped by MINAV_THREADS.
unsigned resolve_thread_count(unsigned requested);

struct RmseEstimate {
  double rmse{0.0};
  /// Monte-Carlo standard error of the RMSE (delta method).
  double standard_error{0.0};
};

struct RmsePoint {
  double sweep{0.0};
  RmseEstimate ml_position, ml_orientation;
  RmseEstimate map_position, map_orientation;
  /// Bound for the estimand block from data plus prior information.
  double crb{0.0};
  /// Bound for the estimand block when the prior target is known exactly.
  double crb_perfect{0.0};

  const RmseEstimate& ml(StateBlock block) const {
    return block == StateBlock::Position ? ml_position : ml_orientation;
  }
  const RmseEstimate& map(StateBlock block) const {
    return block == StateBlock::Position ? map_position : map_orientation;
  }
};

struct RmseCurve {
  PriorTarget prior_target{PriorTarget::Orientation};
  /// The block whose accuracy the curve is about: position for orientation
  /// priors and vice versa.
  StateBlock estimand{StateBlock::Position};
  std::vector<RmsePoint> points;
  int trials_used{0};
  int failed_trials{0};
};

/// Per trial: simulate a packet, draw a prior mean around the truth with each
/// sweep standard deviation, run ML and MAP, resolve the hemisphere, and
/// accumulate scalar RMSEs sqrt(E|e|^2 / 3). Trials where an estimator throws
/// are dropped; more than 1% dropped throws TooManyFailures.
RmseCurve run_rmse_experiment(const ExperimentConfig& config);

struct DetectorRoc {
  Detector detector{Detector::ChiSquared};
  std::vector<double> scores_h0;
  std::vector<double> scores_h1;
  RocCurve curve;
};

struct RocExperiment {
  double h1_noise_scale{2.0};
  std::vector<DetectorRoc> detectors;  // chi2, norm, eig
  int failed_trials{0};

  const DetectorRoc& get(Detector detector) const;
};

/// H0 packets use noise covariance P, H1 packets h1_noise_scale * P; both are
/// scored under the model P at the ML estimate (chi2, norm) or on the
/// estimated channel (eig).
RocExperiment run_roc_experiment(const ExperimentConfig& config, double h1_noise_scale = 2.0);

/// Quasi-static specific force R(psi) [0, 0, g] plus isotropic noise.
Vec3List simulate_accel_samples(const EulerAnglesd& psi, std::size_t count, double noise_std,
                                Rng& rng);

struct EcdfPoint {
  double value{0.0};
  double probability{0.0};
};

/// Empirical CDF of the samples; nondecreasing, last probability is 1.
std::vector<EcdfPoint> ecdf(std::vector<double> samples);

double median(std::vector<double> samples);

struct FusionResult {
  std::vector<double> ml_errors;   // |r_hat - r|, sorted
  std::vector<double> map_errors;  // sorted
  double ml_median{0.0};
  double map_median{0.0};
  double median_ratio{0.0};  // map / ml
  int failed_trials{0};
};

FusionResult run_fusion_experiment(const ExperimentConfig& config, double accel_noise_std,
                                   double prior_sigma, std::size_t accel_samples = 100);

}  // namespace minav
