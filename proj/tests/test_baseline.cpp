#include <gtest/gtest.h>

#include <algorithm>

#include "minav/baseline.hpp"
#include "minav/estimators.hpp"
#include "test_support.hpp"

namespace minav {
namespace {

Matrix3d true_channel(const NavStated& x, double c) {
  Matrix3d s;
  for (int j = 0; j < 3; ++j) s.col(j) = dipole_field(x, Vector3d::Unit(j).eval(), c);
  return s;
}

Matrix3d gramian_identity(const Vector3d& r, double c) {
  const double n2 = r.squaredNorm();
  return c * c / (n2 * n2 * n2) * (3.0 * r * r.transpose() / n2 + Matrix3d::Identity());
}

void expect_code(ErrorCode code, const std::function<void()>& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code);
  }
}

TEST(EstimateChannel, NoiseFreeIsExact) {
  const NavStated truth = test::default_truth();
  const ChannelMatrix s = estimate_channel(test::noise_free_packet(truth));
  EXPECT_LT((s.s - true_channel(truth, 1.0)).norm(), 1e-15);
  const Vector3d eig = gramian_eigenvalues(s);
  EXPECT_NEAR(eig(0) / eig(2), 4.0, 1e-12);
  EXPECT_NEAR(eig(1) / eig(2), 1.0, 1e-12);
  EXPECT_NEAR(eig(0), 4.0 / 27.0, 1e-15);
}

TEST(EstimateChannel, GramianIdentity) {
  Rng rng(51);
  for (int i = 0; i < 100; ++i) {
    const NavStated x = test::random_state(rng, 0.5, 3.0);
    const double c = 0.5 + rng.uniform();
    const Matrix3d g = estimate_channel(test::noise_free_packet(x, c)).gramian();
    const Matrix3d want = gramian_identity(x.r, c);
    EXPECT_LT((g - want).cwiseAbs().maxCoeff(), 1e-12 * want.cwiseAbs().maxCoeff());
  }
}

TEST(EstimateChannel, ConsistentForLongSchedules) {
  const NavStated truth{Vector3d(0.8, -0.6, 1.1), {0.1, -0.2, 0.3}};
  const std::size_t n = 9999;
  const double sigma = 0.1;
  const MeasurementPacket p = simulate_packet(truth, MomentSchedule::axis_cycle(1.0, n), 1.0,
                                              sigma * sigma * Matrix3d::Identity(), 77);
  const Matrix3d err = estimate_channel(p).s - true_channel(truth, 1.0);
  EXPECT_LT(err.cwiseAbs().maxCoeff(), 3.0 * sigma / std::sqrt(n / 3.0));
}

TEST(EstimateChannel, NormalizesByMomentMagnitude) {
  const NavStated truth = test::default_truth();
  const ChannelMatrix s1 = estimate_channel(test::noise_free_packet(truth, 1.0, 1.0));
  MeasurementPacket p = test::noise_free_packet(truth, 1.0, 1.0);
  p.schedule = MomentSchedule::axis_cycle(2.0, 30);
  EXPECT_LT((estimate_channel(p).s - 0.5 * s1.s).norm(), 1e-15);
}

TEST(EstimateChannel, GeneralSchedules) {
  const NavStated truth{Vector3d(0.8, -0.6, 1.1), {0.1, -0.2, 0.3}};
  MomentSchedule sched;
  sched.moments = {Vector3d(1, 1, 0), Vector3d(0, 1, 1), Vector3d(1, 0, 1), Vector3d(1, -1, 2)};
  const MeasurementPacket p = simulate_packet(truth, sched, 1.0, Matrix3d::Zero(), 0);
  EXPECT_LT((estimate_channel(p).s - true_channel(truth, 1.0)).norm(), 1e-12);

  sched.moments = {Vector3d(1, 0, 0), Vector3d(2, 0, 0), Vector3d(0, 1, 0)};
  const MeasurementPacket bad = simulate_packet(truth, sched, 1.0, Matrix3d::Zero(), 0);
  expect_code(ErrorCode::UnsupportedSchedule, [&] { estimate_channel(bad); });
}

TEST(Rssi, Examples) {
  EXPECT_NEAR(rssi(ChannelMatrix{Matrix3d::Identity() / std::sqrt(3.0)}), 0.0, 1e-14);
  const Matrix3d s = true_channel(test::default_truth(), 1.0);
  EXPECT_NEAR(s.norm(), std::sqrt(6.0) / (3.0 * std::sqrt(3.0)), 1e-15);
  EXPECT_NEAR(rssi(ChannelMatrix{s}), -6.5321, 5e-5);
  EXPECT_NEAR(rssi(ChannelMatrix{10.0 * s}) - rssi(ChannelMatrix{s}), 20.0, 1e-12);
  expect_code(ErrorCode::ZeroChannel, [] { rssi(ChannelMatrix{}); });
}

TEST(RangeFromRssi, Examples) {
  EXPECT_DOUBLE_EQ(range_from_rssi(3.0, 3.0, 2.5), 2.5);
  EXPECT_NEAR(reference_rssi(1.0, 1.0), 7.7815, 5e-5);
  EXPECT_NEAR(range_from_rssi(-6.5321, 7.7815, 1.0), 1.7321, 1e-4);
  EXPECT_NEAR(range_from_rssi(reference_rssi(1.0, 1.0),
                              reference_rssi(1.0, 1.0), 1.0), 1.0, 1e-15);
  EXPECT_NEAR(range_from_rssi(-50.0, 10.0, 1.5), 15.0, 1e-12);
}

TEST(RangeFromRssi, RecoversRangeOnNoiseFreeChannels) {
  Rng rng(52);
  for (int i = 0; i < 100; ++i) {
    const NavStated x = test::random_state(rng);
    const double c = 0.5 + rng.uniform(), r0 = 0.5 + rng.uniform();
    const double rho = rssi(ChannelMatrix{true_channel(x, c)});
    EXPECT_NEAR(range_from_rssi(rho, reference_rssi(c, r0), r0), x.r.norm(), 1e-12 * x.r.norm());
  }
}

TEST(DirectionFromChannel, Examples) {
  const Vector3d u = direction_from_channel(ChannelMatrix{true_channel(test::default_truth(), 1.0)});
  EXPECT_LT((u - Vector3d::Ones() / std::sqrt(3.0)).norm(), 1e-12);
  const NavStated z{Vector3d(0, 0, 2), {0.3, 0.1, -0.2}};
  EXPECT_LT((direction_from_channel(ChannelMatrix{true_channel(z, 1.0)}) - Vector3d::UnitZ()).norm(),
            1e-12);
  const NavStated neg{Vector3d(-0.2, -1, -0.5), {}};
  const Vector3d un = direction_from_channel(ChannelMatrix{true_channel(neg, 1.0)});
  EXPECT_LT((un + neg.r.normalized()).norm(), 1e-12);
  expect_code(ErrorCode::DegenerateGramian,
              [] { direction_from_channel(ChannelMatrix{Matrix3d::Identity()}); });
}

TEST(OrientationFromChannel, RecoversRotation) {
  Rng rng(53);
  for (int i = 0; i < 100; ++i) {
    const NavStated x = test::random_state(rng, 0.5, 3.0);
    const ChannelMatrix s{true_channel(x, 1.0)};
    const Vector3d u = direction_from_channel(s);
    const Matrix3d rot = orientation_from_channel(s, u);
    EXPECT_LT((rot - euler_to_rotation(x.psi)).norm(), 1e-10);
    EXPECT_EQ(orientation_from_channel(s, -u), rot);
  }
}

TEST(OrientationFromChannel, AlwaysProperRotation) {
  Rng rng(54);
  for (int i = 0; i < 200; ++i) {
    Matrix3d m;
    for (int k = 0; k < 9; ++k) m(k / 3, k % 3) = rng.normal();
    Vector3d u = rng.normal3();
    u.normalize();
    const Matrix3d rot = orientation_from_channel(ChannelMatrix{m}, u);
    EXPECT_LT((rot.transpose() * rot - Matrix3d::Identity()).norm(), 1e-12);
    EXPECT_NEAR(rot.determinant(), 1.0, 1e-12);
  }
  Matrix3d rank_one = Vector3d(1, 2, 3) * Vector3d(1, 0, 1).transpose();
  expect_code(ErrorCode::RankDeficient,
              [&] { orientation_from_channel(ChannelMatrix{rank_one}, Vector3d::UnitX()); });
}

TEST(RotationStabilize, Behaviour) {
  MeasurementPacket p = test::default_packet(55);
  expect_code(ErrorCode::MissingGyro, [&] { rotation_stabilize(p); });

  p.gyro_deltas = std::vector<EulerAnglesd>(p.size());
  const MeasurementPacket same = rotation_stabilize(p);
  EXPECT_EQ(same.readings, p.readings);
  EXPECT_EQ(same.noise_cov, p.noise_cov);

  for (std::size_t k = 0; k < p.size(); ++k) (*p.gyro_deltas)[k] = {0.1 * k, 0.05, -0.02 * k};
  const MeasurementPacket iso = rotation_stabilize(p);
  EXPECT_EQ(iso.noise_cov, p.noise_cov);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_EQ(iso.noise_cov_at(k), p.noise_cov);

  p.noise_cov = Vector3d(0.01, 0.02, 0.03).asDiagonal();
  const MeasurementPacket aniso = rotation_stabilize(p);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const Matrix3d rot = euler_to_rotation((*p.gyro_deltas)[k]);
    EXPECT_LT((aniso.noise_cov_at(k) - rot.transpose() * p.noise_cov * rot).norm(), 1e-15);
    EXPECT_LT((aniso.readings[k] - rot.transpose() * p.readings[k]).norm(), 1e-15);
  }
}

TEST(RotationStabilize, MatchesStaticPacket) {
  const NavStated truth{Vector3d(1.0, 0.5, -0.8), {0.2, -0.1, 0.5}};
  std::vector<EulerAnglesd> deltas;
  for (int k = 0; k < 30; ++k) deltas.push_back({0.02 * k, 0.01 * k, -0.03 * k});
  const MeasurementPacket still =
      simulate_packet(truth, test::default_schedule(), 1.0, Matrix3d::Zero(), 0);
  const MeasurementPacket moving =
      simulate_rotating_packet(truth, test::default_schedule(), 1.0, Matrix3d::Zero(), deltas, 0);
  const MeasurementPacket stabilized = rotation_stabilize(moving);
  for (std::size_t k = 0; k < still.size(); ++k) {
    EXPECT_LT((stabilized.readings[k] - still.readings[k]).norm(), 1e-14);
  }

  const MeasurementPacket noisy = simulate_rotating_packet(truth, test::default_schedule(), 1.0,
                                                           test::default_noise(), deltas, 9);
  const Matrix3d err = estimate_channel(rotation_stabilize(noisy)).s - estimate_channel(still).s;
  EXPECT_LT(err.cwiseAbs().maxCoeff(), 4.0 * 0.1 / std::sqrt(10.0));
}

TEST(BaselineEstimate, NoiseFreeRecoversTruthUpToHemisphere) {
  Rng rng(56);
  for (int i = 0; i < 100; ++i) {
    const NavStated truth = test::random_state(rng, 0.5, 5.0);
    const double c = 0.5 + rng.uniform();
    const NavStated est = resolve_hemisphere(baseline_estimate(test::noise_free_packet(truth, c)),
                                             truth.r);
    EXPECT_LT((est.r - truth.r).norm(), 1e-9);
    EXPECT_LT((euler_to_rotation(est.psi) - euler_to_rotation(truth.psi)).norm(), 1e-9);
  }
}

TEST(BaselineEstimate, ExplicitReference) {
  const NavStated truth{Vector3d(2.0, -1.0, 0.5), {0.1, 0.2, 0.3}};
  const MeasurementPacket p = test::noise_free_packet(truth, 3.0);
  const NavStated est = baseline_estimate(p, reference_rssi(3.0, 2.0), 2.0);
  EXPECT_NEAR(est.r.norm(), truth.r.norm(), 1e-12);
  const NavStated wrong = baseline_estimate(p, reference_rssi(3.0, 2.0) + 60.0, 2.0);
  EXPECT_NEAR(wrong.r.norm(), 10.0 * truth.r.norm(), 1e-9);
}

TEST(BaselineEstimate, CloseToMlAndGoodInitializer) {
  std::vector<double> gaps;
  int fast = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    const MeasurementPacket p = test::default_packet(2000 + i);
    const NavStated base = resolve_hemisphere(baseline_estimate(p), Vector3d::Ones());
    const EstimateResult ml = ml_estimate(p, base);
    gaps.push_back((base.r - resolve_hemisphere(ml.state, Vector3d::Ones()).r).norm());
    if (ml.iterations <= 25) ++fast;
  }
  std::nth_element(gaps.begin(), gaps.begin() + trials / 2, gaps.end());
  EXPECT_LT(gaps[trials / 2], 0.05);
  EXPECT_GE(fast, 0.99 * trials);
}

}  // namespace
}  // namespace minav
