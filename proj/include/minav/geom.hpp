#pragma once

// Frames and Euler-angle conventions.
//
// Orientation is a roll-pitch-yaw triple with
//
//   R(psi) = Rx(roll) * Ry(pitch) * Rz(yaw)
//
// where each factor is a frame (passive) rotation, so R maps vectors expressed
// in the transmitter frame into the receiver frame. For example
// R(0, 0, pi/2) = [[0, 1, 0], [-1, 0, 0], [0, 0, 1]].

#include <array>
#include <cmath>
#include <numbers>

#include "minav/common.hpp"

namespace minav {

template <typename Scalar>
struct EulerAngles {
  Scalar roll{0};
  Scalar pitch{0};
  Scalar yaw{0};

  Vector3<Scalar> vector() const { return {roll, pitch, yaw}; }

  static EulerAngles from_vector(const Vector3<Scalar>& v) { return {v(0), v(1), v(2)}; }
};

/// Receiver position and orientation relative to the transmitter frame.
template <typename Scalar>
struct NavState {
  Vector3<Scalar> r{Vector3<Scalar>::Zero()};
  EulerAngles<Scalar> psi{};

  Eigen::Matrix<Scalar, 6, 1> vector() const {
    Eigen::Matrix<Scalar, 6, 1> x;
    x << r, psi.vector();
    return x;
  }

  static NavState from_vector(const Eigen::Matrix<Scalar, 6, 1>& x) {
    return {x.template head<3>(), EulerAngles<Scalar>::from_vector(x.template tail<3>())};
  }
};

using EulerAnglesd = EulerAngles<double>;
using NavStated = NavState<double>;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  using std::remainder;
  constexpr Scalar kTwoPi = Scalar(2) * std::numbers::pi_v<Scalar>;
  Scalar w = remainder(a, kTwoPi);
  if (w <= -std::numbers::pi_v<Scalar>) w += kTwoPi;
  return w;
}

/// (a - b) wrapped into (-pi, pi].
template <typename Scalar>
Scalar angle_residual(Scalar a, Scalar b) {
  return wrap_angle(a - b);
}

template <typename Scalar>
Matrix3<Scalar> rotation_x(Scalar a) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(a), s = sin(a);
  Matrix3<Scalar> m;
  m << 1, 0, 0, 0, c, s, 0, -s, c;
  return m;
}

template <typename Scalar>
Matrix3<Scalar> rotation_y(Scalar a) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(a), s = sin(a);
  Matrix3<Scalar> m;
  m << c, 0, -s, 0, 1, 0, s, 0, c;
  return m;
}

template <typename Scalar>
Matrix3<Scalar> rotation_z(Scalar a) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(a), s = sin(a);
  Matrix3<Scalar> m;
  m << c, s, 0, -s, c, 0, 0, 0, 1;
  return m;
}

template <typename Scalar>
Matrix3<Scalar> euler_to_rotation(const EulerAngles<Scalar>& psi) {
  return rotation_x(psi.roll) * rotation_y(psi.pitch) * rotation_z(psi.yaw);
}

/// Partial derivatives of R(psi) with respect to roll, pitch and yaw.
template <typename Scalar>
std::array<Matrix3<Scalar>, 3> rotation_partials(const EulerAngles<Scalar>& psi) {
  using std::cos;
  using std::sin;
  // d/da of a single-axis frame rotation: same pattern with (c, s) -> (-s, c)
  // and the fixed axis zeroed.
  auto dx = [](Scalar a) {
    const Scalar c = cos(a), s = sin(a);
    Matrix3<Scalar> m;
    m << 0, 0, 0, 0, -s, c, 0, -c, -s;
    return m;
  };
  auto dy = [](Scalar a) {
    const Scalar c = cos(a), s = sin(a);
    Matrix3<Scalar> m;
    m << -s, 0, -c, 0, 0, 0, c, 0, -s;
    return m;
  };
  auto dz = [](Scalar a) {
    const Scalar c = cos(a), s = sin(a);
    Matrix3<Scalar> m;
    m << -s, c, 0, -c, -s, 0, 0, 0, 0;
    return m;
  };
  const Matrix3<Scalar> rx = rotation_x(psi.roll);
  const Matrix3<Scalar> ry = rotation_y(psi.pitch);
  const Matrix3<Scalar> rz = rotation_z(psi.yaw);
  return {dx(psi.roll) * ry * rz, rx * dy(psi.pitch) * rz, rx * ry * dz(psi.yaw)};
}

/// Brings an Euler triple into the canonical ranges roll, yaw in (-pi, pi] and
/// pitch in [-pi/2, pi/2] without changing the rotation it represents.
template <typename Scalar>
EulerAngles<Scalar> normalize(const EulerAngles<Scalar>& psi) {
  constexpr Scalar kPi = std::numbers::pi_v<Scalar>;
  Scalar roll = psi.roll;
  Scalar pitch = wrap_angle(psi.pitch);
  Scalar yaw = psi.yaw;
  if (pitch > kPi / 2) {
    pitch = kPi - pitch;
    roll += kPi;
    yaw += kPi;
  } else if (pitch < -kPi / 2) {
    pitch = -kPi - pitch;
    roll += kPi;
    yaw += kPi;
  }
  return {wrap_angle(roll), pitch, wrap_angle(yaw)};
}

/// Inverse of euler_to_rotation. At gimbal lock (cos(pitch) == 0) roll is set
/// to zero and yaw absorbs the remaining rotation.
template <typename Scalar>
EulerAngles<Scalar> rotation_to_euler(const Matrix3<Scalar>& rot) {
  using std::abs;
  using std::atan2;
  using std::hypot;
  const Scalar ortho_err = (rot.transpose() * rot - Matrix3<Scalar>::Identity()).norm();
  if (!(ortho_err <= Scalar(1e-6)) || !(rot.determinant() > Scalar(0))) {
    throw Error(ErrorCode::NotARotation, "matrix is not a proper rotation");
  }
  // Row 0 of Rx*Ry*Rz is [cp*cy, cp*sy, -sp]; column 2 is [-sp, sr*cp, cr*cp].
  const Scalar cos_pitch = hypot(rot(0, 0), rot(0, 1));
  if (cos_pitch < Scalar(1e-12)) {
    // roll := 0, so R = Ry(+-pi/2) * Rz(yaw) whose middle row is [-sy, cy, 0].
    const Scalar pitch = rot(0, 2) < 0 ? std::numbers::pi_v<Scalar> / 2
                                       : -std::numbers::pi_v<Scalar> / 2;
    return {Scalar(0), pitch, wrap_angle(atan2(-rot(1, 0), rot(1, 1)))};
  }
  return {wrap_angle(atan2(rot(1, 2), rot(2, 2))), atan2(-rot(0, 2), cos_pitch),
          wrap_angle(atan2(rot(0, 1), rot(0, 0)))};
}

}  // namespace minav
