#include "minav/dipole.hpp"

#include <cmath>
#include <string>

#include "minav/random.hpp"

namespace minav {

MomentSchedule MomentSchedule::axis_cycle(double m, std::size_t n) {
  if (n == 0 || n % 3 != 0) {
    throw Error(ErrorCode::BadConfig, "axis cycle length must be a positive multiple of 3");
  }
  if (m == 0.0 || !std::isfinite(m)) {
    throw Error(ErrorCode::BadConfig, "moment magnitude must be finite and nonzero");
  }
  MomentSchedule schedule;
  schedule.moments.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector3d moment = Vector3d::Zero();
    moment(static_cast<int>(k % 3)) = m;
    schedule.moments.push_back(moment);
  }
  return schedule;
}

std::optional<double> MomentSchedule::axis_cycle_magnitude() const {
  if (moments.empty() || moments.size() % 3 != 0) return std::nullopt;
  const double m = moments.front()(0);
  if (m == 0.0) return std::nullopt;
  for (std::size_t k = 0; k < moments.size(); ++k) {
    Vector3d expected = Vector3d::Zero();
    expected(static_cast<int>(k % 3)) = m;
    if (moments[k] != expected) return std::nullopt;
  }
  return m;
}

namespace {

bool is_spd(const Matrix3d& cov) {
  if (!cov.allFinite()) return false;
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12 * cov.cwiseAbs().maxCoeff()) {
    return false;
  }
  Eigen::LLT<Matrix3d> llt(cov);
  return llt.info() == Eigen::Success;
}

}  // namespace

void MeasurementPacket::validate() const {
  if (readings.size() != schedule.size()) {
    throw Error(ErrorCode::InvalidPacket, "readings length (" + std::to_string(readings.size()) +
                                              ") differs from moments length (" +
                                              std::to_string(schedule.size()) + ")");
  }
  if (readings.empty()) throw Error(ErrorCode::InvalidPacket, "packet has no readings");
  if (!std::isfinite(c)) throw Error(ErrorCode::InvalidPacket, "scale factor is not finite");
  for (const auto& m : schedule.moments) {
    if (!m.allFinite() || m.isZero(0.0)) {
      throw Error(ErrorCode::InvalidPacket, "moments must be finite and nonzero");
    }
  }
  for (const auto& y : readings) {
    if (!y.allFinite()) throw Error(ErrorCode::NonFiniteResidual, "non-finite reading");
  }
  if (!is_spd(noise_cov)) {
    throw Error(ErrorCode::InvalidPacket, "noise covariance is not symmetric positive definite");
  }
  if (!sample_noise_covs.empty()) {
    if (sample_noise_covs.size() != readings.size()) {
      throw Error(ErrorCode::InvalidPacket, "per-sample covariance count differs from readings");
    }
    for (const auto& cov : sample_noise_covs) {
      if (!is_spd(cov)) {
        throw Error(ErrorCode::InvalidPacket, "per-sample covariance is not SPD");
      }
    }
  }
  if (gyro_deltas && gyro_deltas->size() != readings.size()) {
    throw Error(ErrorCode::InvalidPacket, "gyro_deltas length differs from readings");
  }
  if (accel) {
    for (const auto& a : *accel) {
      if (!a.allFinite()) throw Error(ErrorCode::InvalidPacket, "non-finite accelerometer sample");
    }
  }
}

namespace {

MeasurementPacket simulate_impl(const NavStated& state, const MomentSchedule& schedule, double c,
                                const Matrix3d& noise_cov, const std::vector<EulerAnglesd>* deltas,
                                std::uint64_t seed) {
  const bool noise_free = noise_cov.isZero(0.0);
  Matrix3d factor = Matrix3d::Zero();
  if (!noise_free) {
    Eigen::LLT<Matrix3d> llt(noise_cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::InvalidPacket, "noise covariance is not positive definite");
    }
    factor = llt.matrixL();
  }

  MeasurementPacket packet;
  packet.c = c;
  packet.schedule = schedule;
  packet.noise_cov = noise_free ? Matrix3d::Identity() : noise_cov;
  packet.readings.reserve(schedule.size());

  const Matrix3d base_rot = euler_to_rotation(state.psi);
  Rng rng(seed);
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const Vector3d field = transmitter_frame_field(state.r, schedule.moments[k], c);
    const Matrix3d rot = deltas ? Matrix3d(euler_to_rotation((*deltas)[k]) * base_rot) : base_rot;
    Vector3d y = rot * field;
    if (!noise_free) y += factor * rng.normal3();
    packet.readings.push_back(y);
  }
  if (deltas) packet.gyro_deltas = *deltas;
  return packet;
}

}  // namespace

MeasurementPacket simulate_packet(const NavStated& state, const MomentSchedule& schedule,
                                  double c, const Matrix3d& noise_cov, std::uint64_t seed) {
  return simulate_impl(state, schedule, c, noise_cov, nullptr, seed);
}

MeasurementPacket simulate_rotating_packet(const NavStated& state,
                                           const MomentSchedule& schedule, double c,
                                           const Matrix3d& noise_cov,
                                           const std::vector<EulerAnglesd>& deltas,
                                           std::uint64_t seed) {
  if (deltas.size() != schedule.size()) {
    throw Error(ErrorCode::InvalidPacket, "need one orientation delta per sample");
  }
  return simulate_impl(state, schedule, c, noise_cov, &deltas, seed);
}

}  // namespace minav
