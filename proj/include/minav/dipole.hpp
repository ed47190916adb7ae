#pragma once

// Point-dipole field model and its analytic derivatives.
//
//   h_m(x) = c * R(psi) / |r|^3 * (3 r r^T / |r|^2 - I) m

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "minav/common.hpp"
#include "minav/geom.hpp"

namespace minav {

inline constexpr double kMinRange = 1e-9;

namespace detail {

template <typename Scalar>
Scalar checked_range(const Vector3<Scalar>& r) {
  const Scalar n = r.norm();
  if (!(n >= Scalar(kMinRange))) {
    throw Error(ErrorCode::DegenerateRange, "receiver too close to the transmitter");
  }
  return n;
}

}  // namespace detail

/// Field in the transmitter frame, i.e. before rotation into the receiver.
template <typename Scalar>
Vector3<Scalar> transmitter_frame_field(const Vector3<Scalar>& r, const Vector3<Scalar>& m,
                                        Scalar c) {
  const Scalar n = detail::checked_range(r);
  const Scalar n2 = n * n;
  return c / (n2 * n) * (Scalar(3) * r.dot(m) / n2 * r - m);
}

template <typename Scalar>
Vector3<Scalar> dipole_field(const NavState<Scalar>& state, const Vector3<Scalar>& m, Scalar c) {
  return euler_to_rotation(state.psi) * transmitter_frame_field(state.r, m, c);
}

/// d h / d r.
template <typename Scalar>
Matrix3<Scalar> position_jacobian(const NavState<Scalar>& state, const Vector3<Scalar>& m,
                                  Scalar c) {
  const Vector3<Scalar>& r = state.r;
  const Scalar n = detail::checked_range(r);
  const Scalar n2 = n * n;
  const Scalar rm = r.dot(m);
  const Matrix3<Scalar> inner = rm * Matrix3<Scalar>::Identity() + r * m.transpose() +
                                m * r.transpose() - (Scalar(5) * rm / n2) * r * r.transpose();
  return (c * Scalar(3) / (n2 * n2 * n)) * euler_to_rotation(state.psi) * inner;
}

/// d h / d(roll, pitch, yaw); column j is dR/dpsi_j applied to the
/// transmitter-frame field.
template <typename Scalar>
Matrix3<Scalar> orientation_jacobian(const NavState<Scalar>& state, const Vector3<Scalar>& m,
                                     Scalar c) {
  const Vector3<Scalar> f = transmitter_frame_field(state.r, m, c);
  const auto partials = rotation_partials(state.psi);
  Matrix3<Scalar> jac;
  for (int j = 0; j < 3; ++j) jac.col(j) = partials[j] * f;
  return jac;
}

/// Derivative of h with respect to |r| at fixed direction: -3/|r| * h.
template <typename Scalar>
Vector3<Scalar> range_derivative(const NavState<Scalar>& state, const Vector3<Scalar>& m,
                                 Scalar c) {
  const Scalar n = detail::checked_range(state.r);
  return Scalar(-3) / n * dipole_field(state, m, c);
}

/// Full 3x6 Jacobian [d h / d r | d h / d psi].
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 6> state_jacobian(const NavState<Scalar>& state,
                                           const Vector3<Scalar>& m, Scalar c) {
  Eigen::Matrix<Scalar, 3, 6> jac;
  jac.template leftCols<3>() = position_jacobian(state, m, c);
  jac.template rightCols<3>() = orientation_jacobian(state, m, c);
  return jac;
}

struct MomentSchedule {
  Vec3List moments;

  std::size_t size() const { return moments.size(); }

  /// [m,0,0], [0,m,0], [0,0,m] repeated; n must be a positive multiple of 3.
  static MomentSchedule axis_cycle(double m, std::size_t n);

  /// Moment magnitude if this schedule is an axis cycle (as produced by
  /// axis_cycle, any nonzero m), otherwise nullopt.
  std::optional<double> axis_cycle_magnitude() const;
};

/// One transmission as received.
struct MeasurementPacket {
  double c{1.0};
  MomentSchedule schedule;
  Vec3List readings;
  Matrix3d noise_cov{Matrix3d::Identity()};
  /// Per-sample covariances; empty means noise_cov applies to every sample.
  /// Filled in by rotation stabilization when the rotated noise is not
  /// isotropic.
  std::vector<Matrix3d> sample_noise_covs;
  /// Orientation of the receiver at sample k relative to sample 1, so that
  /// R(psi_k) = R(gyro_deltas[k]) * R(psi_1). The first entry is zero.
  std::optional<std::vector<EulerAnglesd>> gyro_deltas;
  /// Accelerometer specific-force samples (m/s^2) taken during the transmission.
  std::optional<Vec3List> accel;

  std::size_t size() const { return readings.size(); }

  const Matrix3d& noise_cov_at(std::size_t k) const {
    return sample_noise_covs.empty() ? noise_cov : sample_noise_covs[k];
  }

  /// Checks lengths, finiteness and that covariances are symmetric positive
  /// definite. Throws InvalidPacket.
  void validate() const;
};

/// y_k = h_{m_k}(x) + e_k with e_k ~ N(0, P) from a generator seeded by
/// `seed`. A zero P yields noise-free readings.
MeasurementPacket simulate_packet(const NavStated& state, const MomentSchedule& schedule,
                                  double c, const Matrix3d& noise_cov, std::uint64_t seed);

/// As simulate_packet, but the receiver orientation at sample k is
/// R(deltas[k]) * R(state.psi). The deltas are stored in the packet.
MeasurementPacket simulate_rotating_packet(const NavStated& state,
                                           const MomentSchedule& schedule, double c,
                                           const Matrix3d& noise_cov,
                                           const std::vector<EulerAnglesd>& deltas,
                                           std::uint64_t seed);

}  // namespace minav
