#include <gtest/gtest.h>

#include <numbers>

#include "minav/geom.hpp"
#include "minav/random.hpp"

namespace minav {
namespace {

using std::numbers::pi;

TEST(EulerToRotation, ZeroIsIdentity) {
  EXPECT_TRUE(euler_to_rotation(EulerAnglesd{}).isApprox(Matrix3d::Identity(), 0.0));
}

TEST(EulerToRotation, YawQuarterTurn) {
  Matrix3d want;
  want << 0, 1, 0, -1, 0, 0, 0, 0, 1;
  EXPECT_LT((euler_to_rotation(EulerAnglesd{0.0, 0.0, pi / 2}) - want).norm(), 1e-15);
}

TEST(EulerToRotation, ComposesRollPitchYaw) {
  const EulerAnglesd psi{0.4, -0.7, 2.1};
  const Matrix3d want = rotation_x(0.4) * rotation_y(-0.7) * rotation_z(2.1);
  EXPECT_LT((euler_to_rotation(psi) - want).norm(), 1e-15);
}

TEST(EulerToRotation, RandomAnglesAreProperRotations) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const EulerAnglesd psi{10 * rng.normal(), 10 * rng.normal(), 10 * rng.normal()};
    const Matrix3d rot = euler_to_rotation(psi);
    EXPECT_LT((rot.transpose() * rot - Matrix3d::Identity()).norm(), 1e-12);
    EXPECT_NEAR(rot.determinant(), 1.0, 1e-12);
  }
}

TEST(RotationToEuler, IdentityIsZero) {
  const EulerAnglesd psi = rotation_to_euler(Matrix3d::Identity().eval());
  EXPECT_EQ(psi.roll, 0.0);
  EXPECT_EQ(psi.pitch, 0.0);
  EXPECT_EQ(psi.yaw, 0.0);
}

TEST(RotationToEuler, RoundTripExample) {
  const EulerAnglesd psi = rotation_to_euler(euler_to_rotation(EulerAnglesd{0.3, -0.2, 1.1}));
  EXPECT_NEAR(psi.roll, 0.3, 1e-10);
  EXPECT_NEAR(psi.pitch, -0.2, 1e-10);
  EXPECT_NEAR(psi.yaw, 1.1, 1e-10);
}

TEST(RotationToEuler, RoundTripAwayFromGimbalLock) {
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const EulerAnglesd psi{pi * (2 * rng.uniform() - 1), (pi / 2 - 1e-6) * (2 * rng.uniform() - 1),
                           pi * (2 * rng.uniform() - 1)};
    const EulerAnglesd back = rotation_to_euler(euler_to_rotation(psi));
    EXPECT_NEAR(angle_residual(back.roll, psi.roll), 0.0, 1e-10);
    EXPECT_NEAR(back.pitch, psi.pitch, 1e-10);
    EXPECT_NEAR(angle_residual(back.yaw, psi.yaw), 0.0, 1e-10);
  }
}

TEST(RotationToEuler, GimbalLockSetsRollToZero) {
  for (double sign : {1.0, -1.0}) {
    const Matrix3d rot = euler_to_rotation(EulerAnglesd{0.7, sign * pi / 2, -0.4});
    const EulerAnglesd psi = rotation_to_euler(rot);
    EXPECT_EQ(psi.roll, 0.0);
    EXPECT_NEAR(psi.pitch, sign * pi / 2, 1e-8);
    EXPECT_LT((euler_to_rotation(psi) - rot).norm(), 1e-10);
  }
}

TEST(RotationToEuler, RejectsNonRotations) {
  Matrix3d reflect = Matrix3d::Identity();
  reflect(2, 2) = -1.0;
  try {
    rotation_to_euler(reflect);
    FAIL() << "expected NotARotation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotARotation);
  }
  EXPECT_THROW(rotation_to_euler((1.01 * Matrix3d::Identity()).eval()), Error);
}

TEST(AngleResidual, Examples) {
  EXPECT_DOUBLE_EQ(angle_residual(0.1, 0.0), 0.1);
  EXPECT_NEAR(angle_residual(pi - 0.05, -pi + 0.05), -0.1, 1e-14);
  for (double x : {-3.0, 0.0, 1.5, 100.0}) EXPECT_EQ(angle_residual(x, x), 0.0);
}

TEST(AngleResidual, RangeAndAntisymmetry) {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const double a = pi * (2 * rng.uniform() - 1), b = pi * (2 * rng.uniform() - 1);
    const double d = angle_residual(a, b);
    EXPECT_GT(d, -pi);
    EXPECT_LE(d, pi);
    if (std::abs(std::abs(d) - pi) > 1e-9) EXPECT_DOUBLE_EQ(d, -angle_residual(b, a));
  }
  EXPECT_EQ(wrap_angle(-pi), pi);
}

TEST(Normalize, FoldsPitchAndPreservesRotation) {
  const EulerAnglesd psi{0.3, 2.0, -5.0};
  const EulerAnglesd n = normalize(psi);
  EXPECT_LE(std::abs(n.pitch), pi / 2);
  EXPECT_GT(n.roll, -pi);
  EXPECT_LE(n.yaw, pi);
  EXPECT_LT((euler_to_rotation(n) - euler_to_rotation(psi)).norm(), 1e-12);
}

TEST(RotationPartials, MatchFiniteDifferences) {
  const EulerAnglesd psi{0.3, -0.5, 1.2};
  const auto partials = rotation_partials(psi);
  const double h = 1e-6;
  for (int i = 0; i < 3; ++i) {
    Vector3d hi = psi.vector(), lo = psi.vector();
    hi(i) += h;
    lo(i) -= h;
    const Matrix3d fd = (euler_to_rotation(EulerAnglesd::from_vector(hi)) -
                         euler_to_rotation(EulerAnglesd::from_vector(lo))) / (2 * h);
    EXPECT_LT((partials[i] - fd).norm(), 1e-9);
  }
}

TEST(Geom, WorksWithLongDouble) {
  const EulerAngles<long double> psi{0.3L, -0.2L, 1.1L};
  const EulerAngles<long double> back = rotation_to_euler(euler_to_rotation(psi));
  EXPECT_NEAR(static_cast<double>(back.yaw), 1.1, 1e-15);
}

}  // namespace
}  // namespace minav
