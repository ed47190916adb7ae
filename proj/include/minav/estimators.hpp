#pragma once

#include <optional>
#include <vector>

#include "minav/common.hpp"
#include "minav/dipole.hpp"
#include "minav/geom.hpp"
#include "minav/nlls.hpp"

namespace minav {

enum class PriorTarget { Position, Orientation };

/// Gaussian prior over the position or the Euler angles. Diagonal priors may
/// carry +inf variances, which contribute no information at all.
struct GaussianPrior {
  PriorTarget target{PriorTarget::Position};
  Vector3d mean{Vector3d::Zero()};
  Vector3d variances{Vector3d::Constant(1.0)};
  std::optional<Matrix3d> covariance;  // full form; overrides `variances`

  static GaussianPrior diagonal(PriorTarget target, const Vector3d& mean,
                                const Vector3d& variances);
  static GaussianPrior isotropic(PriorTarget target, const Vector3d& mean, double stddev);
  static GaussianPrior full(PriorTarget target, const Vector3d& mean, const Matrix3d& covariance);

  /// Throws InvalidPrior on non-positive variances or a non-SPD covariance.
  void validate() const;

  /// Rows W with W^T W = Sigma^{-1}; infinite-variance components have no row.
  Eigen::Matrix<double, Eigen::Dynamic, 3> whitening() const;

  Matrix3d information() const;
};

struct EstimateResult {
  NavStated state;
  double cost{0.0};  // includes prior terms
  int iterations{0};
  bool converged{false};
  double gradient_norm{0.0};
  Matrix6d covariance{Matrix6d::Zero()};
};

/// sum_k |y_k - h_{m_k}(x)|^2 weighted by P_k^{-1}.
double mi_cost(const MeasurementPacket& packet, const NavStated& state);

/// Maximum-likelihood estimate. Packets carrying gyro deltas are rotation
/// stabilized first.
EstimateResult ml_estimate(const MeasurementPacket& packet, const NavStated& init,
                           const SolverOptions& options = {});

/// ML estimate initialized from the closed-form baseline estimator.
EstimateResult ml_estimate(const MeasurementPacket& packet, const SolverOptions& options = {});

/// MAP estimate with at most one prior per target. With no informative prior
/// components this runs exactly the same iterations as ml_estimate.
EstimateResult map_estimate(const MeasurementPacket& packet, const NavStated& init,
                            const std::vector<GaussianPrior>& priors,
                            const SolverOptions& options = {});

EstimateResult map_estimate(const MeasurementPacket& packet,
                            const std::vector<GaussianPrior>& priors,
                            const SolverOptions& options = {});

/// Flips the sign of r when -r is strictly closer to `reference`.
NavStated resolve_hemisphere(const NavStated& estimate, const Vector3d& reference);

inline constexpr double kGravity = 9.81;

struct RollPitch {
  double roll{0.0};
  double pitch{0.0};
};

/// Roll and pitch from averaged specific-force samples, assuming the sensor
/// is quasi-static so that the mean reading is R(psi) * [0, 0, g].
RollPitch accel_roll_pitch(const Vec3List& accel_samples);

/// Prior with mean (roll, pitch, 0), variances (sigma^2, sigma^2, inf).
GaussianPrior orientation_prior_from_accel(const Vec3List& accel_samples, double sigma);

}  // namespace minav
