#pragma once

// Closed-form estimator: rotation stabilization, channel-matrix least squares,
// RSSI ranging, Gramian eigenvector direction and polar-factor orientation.

#include "minav/common.hpp"
#include "minav/dipole.hpp"
#include "minav/geom.hpp"

namespace minav {

/// Estimated channel: column j is the field received per unit moment along
/// transmitter axis j.
struct ChannelMatrix {
  Matrix3d s{Matrix3d::Zero()};

  Matrix3d gramian() const { return s.transpose() * s; }
};

/// Replaces y_k by R(phi_k)^T y_k and the noise covariance by
/// R(phi_k)^T P R(phi_k). Isotropic P is left untouched. Throws MissingGyro.
MeasurementPacket rotation_stabilize(const MeasurementPacket& packet);

/// rotation_stabilize when gyro deltas are present, otherwise a copy.
MeasurementPacket static_equivalent(const MeasurementPacket& packet);

/// Linear least-squares channel estimate. Axis-cycled schedules reduce to
/// per-axis averaging; other schedules go through the normal equations and
/// throw UnsupportedSchedule when those are singular.
ChannelMatrix estimate_channel(const MeasurementPacket& packet);

/// 20 log10 |S|_F. Throws ZeroChannel.
double rssi(const ChannelMatrix& channel);

/// RSSI a noise-free channel has at range r0 for scale factor c.
double reference_rssi(double c, double r0);

double range_from_rssi(double rho, double rho0, double r0);

/// Dominant eigenvector of S^T S with its largest-magnitude entry positive.
Vector3d direction_from_channel(const ChannelMatrix& channel);

/// Eigenvalues of S^T S in descending order.
Vector3d gramian_eigenvalues(const ChannelMatrix& channel);

/// Orthogonal polar factor of (3 u u^T - I) S^T, sign-corrected to a proper
/// rotation. That factor is R(psi)^T under this library's convention, so the
/// transpose is returned.
Matrix3d orientation_from_channel(const ChannelMatrix& channel, const Vector3d& u_max);

NavStated baseline_estimate(const MeasurementPacket& packet, double rho0, double r0);

/// Uses the reference RSSI implied by packet.c at r0 = 1 m.
NavStated baseline_estimate(const MeasurementPacket& packet);

}  // namespace minav
