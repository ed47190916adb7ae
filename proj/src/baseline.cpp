#include "minav/baseline.hpp"

#include <cmath>

namespace minav {

MeasurementPacket rotation_stabilize(const MeasurementPacket& packet) {
  if (!packet.gyro_deltas) throw Error(ErrorCode::MissingGyro, "packet has no gyro deltas");
  const auto& deltas = *packet.gyro_deltas;
  if (deltas.size() != packet.size()) {
    throw Error(ErrorCode::InvalidPacket, "gyro_deltas length differs from readings");
  }

  MeasurementPacket out = packet;
  const bool isotropic =
      packet.sample_noise_covs.empty() &&
      packet.noise_cov == Matrix3d(packet.noise_cov(0, 0) * Matrix3d::Identity());
  if (!isotropic) out.sample_noise_covs.assign(packet.size(), packet.noise_cov);

  for (std::size_t k = 0; k < packet.size(); ++k) {
    const EulerAnglesd& phi = deltas[k];
    if (phi.roll == 0.0 && phi.pitch == 0.0 && phi.yaw == 0.0) continue;
    const Matrix3d rot = euler_to_rotation(phi);
    out.readings[k] = rot.transpose() * packet.readings[k];
    if (!isotropic) {
      out.sample_noise_covs[k] = rot.transpose() * packet.noise_cov_at(k) * rot;
    }
  }
  // Already expressed in the frame of the first sample.
  out.gyro_deltas.reset();
  return out;
}

MeasurementPacket static_equivalent(const MeasurementPacket& packet) {
  return packet.gyro_deltas ? rotation_stabilize(packet) : packet;
}

ChannelMatrix estimate_channel(const MeasurementPacket& packet) {
  if (packet.readings.size() != packet.schedule.size() || packet.readings.empty()) {
    throw Error(ErrorCode::InvalidPacket, "readings and moments must have equal nonzero length");
  }
  ChannelMatrix channel;
  if (const auto m = packet.schedule.axis_cycle_magnitude()) {
    Vector3d counts = Vector3d::Zero();
    for (std::size_t k = 0; k < packet.size(); ++k) {
      const int axis = static_cast<int>(k % 3);
      channel.s.col(axis) += packet.readings[k];
      counts(axis) += 1.0;
    }
    for (int j = 0; j < 3; ++j) channel.s.col(j) /= counts(j) * *m;
    return channel;
  }

  // Y = S M in the least-squares sense: S = Y M^T (M M^T)^{-1}.
  Matrix3d gram = Matrix3d::Zero();
  Matrix3d cross = Matrix3d::Zero();
  for (std::size_t k = 0; k < packet.size(); ++k) {
    const Vector3d& m = packet.schedule.moments[k];
    gram += m * m.transpose();
    cross += packet.readings[k] * m.transpose();
  }
  Eigen::LDLT<Matrix3d> ldlt(gram);
  const double scale = gram.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      !(ldlt.vectorD().minCoeff() > 1e-12 * scale)) {
    throw Error(ErrorCode::UnsupportedSchedule, "moment schedule does not span three axes");
  }
  channel.s = ldlt.solve(cross.transpose()).transpose();
  return channel;
}

double rssi(const ChannelMatrix& channel) {
  const double norm = channel.s.norm();
  if (!(norm > 0.0)) throw Error(ErrorCode::ZeroChannel, "channel matrix is zero");
  return 20.0 * std::log10(norm);
}

double reference_rssi(double c, double r0) {
  // |S|_F^2 = tr(S^T S) = 6 c^2 / |r|^6 for a noise-free channel.
  return 20.0 * std::log10(std::sqrt(6.0) * std::abs(c) / (r0 * r0 * r0));
}

double range_from_rssi(double rho, double rho0, double r0) {
  return r0 * std::pow(10.0, (rho0 - rho) / 60.0);
}

Vector3d gramian_eigenvalues(const ChannelMatrix& channel) {
  Eigen::SelfAdjointEigenSolver<Matrix3d> eig(channel.gramian(), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().reverse();
}

Vector3d direction_from_channel(const ChannelMatrix& channel) {
  if (!channel.s.allFinite()) throw Error(ErrorCode::DegenerateGramian, "non-finite channel");
  Eigen::SelfAdjointEigenSolver<Matrix3d> eig(channel.gramian());
  const Vector3d values = eig.eigenvalues();  // ascending
  if (!(values(2) - values(1) > 1e-12 * std::abs(values(2)))) {
    throw Error(ErrorCode::DegenerateGramian, "dominant Gramian eigenvalue is not unique");
  }
  Vector3d u = eig.eigenvectors().col(2).normalized();
  Eigen::Index imax;
  u.cwiseAbs().maxCoeff(&imax);
  if (u(imax) < 0.0) u = -u;
  return u;
}

Matrix3d orientation_from_channel(const ChannelMatrix& channel, const Vector3d& u_max) {
  const Matrix3d shape = 3.0 * u_max * u_max.transpose() - Matrix3d::Identity();
  const Matrix3d a = shape * channel.s.transpose();
  Eigen::JacobiSVD<Matrix3d> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector3d sv = svd.singularValues();
  if (!(sv(2) >= 1e-12 * sv(0)) || !(sv(0) > 0.0)) {
    throw Error(ErrorCode::RankDeficient, "channel does not determine an orientation");
  }
  Matrix3d polar = svd.matrixU() * svd.matrixV().transpose();
  if (polar.determinant() < 0.0) polar = -polar;
  // For a noise-free channel S = c/|r|^3 R (3uu^T - I), the factor above is
  // exactly R^T.
  return polar.transpose();
}

NavStated baseline_estimate(const MeasurementPacket& packet, double rho0, double r0) {
  if (!(r0 > 0.0)) throw Error(ErrorCode::BadConfig, "reference range must be positive");
  const MeasurementPacket stabilized = static_equivalent(packet);
  const ChannelMatrix channel = estimate_channel(stabilized);
  const double range = range_from_rssi(rssi(channel), rho0, r0);
  const Vector3d u = direction_from_channel(channel);
  const Matrix3d rot = orientation_from_channel(channel, u);
  return {range * u, rotation_to_euler(rot)};
}

NavStated baseline_estimate(const MeasurementPacket& packet) {
  return baseline_estimate(packet, reference_rssi(packet.c, 1.0), 1.0);
}

}  // namespace minav
