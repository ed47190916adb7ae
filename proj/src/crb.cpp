#include "minav/crb.hpp"

#include <cmath>

namespace minav {

namespace {

void check_axis_cycle_config(int n, double sigma) {
  if (n <= 0 || n % 3 != 0) {
    throw Error(ErrorCode::BadConfig, "N must be a positive multiple of 3");
  }
  if (!(sigma > 0.0)) throw Error(ErrorCode::BadConfig, "sigma must be positive");
}

MatrixXd guarded_inverse(const MatrixXd& info) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(info, Eigen::EigenvaluesOnly);
  const VectorXd values = eig.eigenvalues();
  if (!(values.minCoeff() > 1e-12 * values.maxCoeff())) {
    throw Error(ErrorCode::SingularInformation, "information matrix is not invertible");
  }
  Eigen::LLT<MatrixXd> llt(info);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularInformation, "information matrix is not positive definite");
  }
  return llt.solve(MatrixXd::Identity(info.rows(), info.cols()));
}

int block_offset(const FisherInfo& fim, StateBlock block) {
  if (fim.matrix.rows() == 6) return block == StateBlock::Position ? 0 : 3;
  if (fim.matrix.rows() == 3 && block == StateBlock::Position &&
      fim.kind == FisherKind::PositionKnownOrientation) {
    return 0;
  }
  throw Error(ErrorCode::BadConfig, "requested block is not part of this information matrix");
}

}  // namespace

Matrix3d position_information_term(const Vector3d& r, const Vector3d& m, double c,
                                   double sigma) {
  const double rr = r.squaredNorm();
  if (!(std::sqrt(rr) >= kMinRange)) {
    throw Error(ErrorCode::DegenerateRange, "receiver too close to the transmitter");
  }
  const double rm = r.dot(m);
  const Matrix3d rmT = r * m.transpose();
  const Matrix3d inner = rm * rm * Matrix3d::Identity() + rr * m * m.transpose() -
                         2.0 * rm * (rmT + rmT.transpose()) +
                         (5.0 * rm * rm / rr + m.squaredNorm()) * r * r.transpose();
  const double r10 = rr * rr * rr * rr * rr;
  return 9.0 * c * c / (sigma * sigma * r10) * inner;
}

FisherInfo position_fim_closed(const Vector3d& r, int n, double c, double m, double sigma) {
  check_axis_cycle_config(n, sigma);
  Matrix3d cycle = Matrix3d::Zero();
  for (int axis = 0; axis < 3; ++axis) {
    cycle += position_information_term(r, m * Vector3d::Unit(axis), c, sigma);
  }
  return {cycle * (n / 3), FisherKind::PositionKnownOrientation, FisherSource::ClosedForm};
}

FisherInfo full_fim(const NavStated& state, const MomentSchedule& schedule, double c,
                    const Matrix3d& noise_cov) {
  Eigen::LLT<Matrix3d> llt(noise_cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::BadConfig, "noise covariance is not positive definite");
  }
  const Matrix3d precision = llt.solve(Matrix3d::Identity());
  Matrix6d info = Matrix6d::Zero();
  for (const auto& m : schedule.moments) {
    const Eigen::Matrix<double, 3, 6> jac = state_jacobian(state, m, c);
    info += jac.transpose() * precision * jac;
  }
  return {0.5 * (info + info.transpose()), FisherKind::FullState, FisherSource::Numeric};
}

double range_fisher(const Vector3d& r, int n, double c, double m, double sigma) {
  check_axis_cycle_config(n, sigma);
  const double rr = r.squaredNorm();
  return 18.0 * n * c * c * m * m / (sigma * sigma * rr * rr * rr * rr);
}

FisherInfo add_prior_information(const FisherInfo& fim, const std::vector<GaussianPrior>& priors) {
  if (fim.matrix.rows() != 6 || fim.matrix.cols() != 6) {
    throw Error(ErrorCode::BadConfig, "prior information needs a 6x6 full-state FIM");
  }
  FisherInfo out = fim;
  for (const auto& prior : priors) {
    prior.validate();
    const int offset = prior.target == PriorTarget::Position ? 0 : 3;
    out.matrix.block<3, 3>(offset, offset) += prior.information();
  }
  return out;
}

double scalar_rmse_bound(const FisherInfo& fim, StateBlock block) {
  const int offset = block_offset(fim, block);
  const MatrixXd inverse = guarded_inverse(fim.matrix);
  return std::sqrt(inverse.block<3, 3>(offset, offset).trace() / 3.0);
}

double known_complement_rmse_bound(const FisherInfo& fim, StateBlock block) {
  const int offset = block_offset(fim, block);
  const MatrixXd sub = fim.matrix.block<3, 3>(offset, offset);
  return std::sqrt(guarded_inverse(sub).trace() / 3.0);
}

}  // namespace minav
