#include "minav/estimators.hpp"

#include <cmath>
#include <limits>

#include "minav/baseline.hpp"

namespace minav {

GaussianPrior GaussianPrior::diagonal(PriorTarget target, const Vector3d& mean,
                                      const Vector3d& variances) {
  GaussianPrior prior;
  prior.target = target;
  prior.mean = mean;
  prior.variances = variances;
  return prior;
}

GaussianPrior GaussianPrior::isotropic(PriorTarget target, const Vector3d& mean, double stddev) {
  return diagonal(target, mean, Vector3d::Constant(stddev * stddev));
}

GaussianPrior GaussianPrior::full(PriorTarget target, const Vector3d& mean,
                                  const Matrix3d& covariance) {
  GaussianPrior prior;
  prior.target = target;
  prior.mean = mean;
  prior.covariance = covariance;
  return prior;
}

void GaussianPrior::validate() const {
  if (!mean.allFinite()) throw Error(ErrorCode::InvalidPrior, "prior mean is not finite");
  if (covariance) {
    const Matrix3d& cov = *covariance;
    Eigen::LLT<Matrix3d> llt(cov);
    if (!cov.allFinite() || !cov.isApprox(cov.transpose()) || llt.info() != Eigen::Success) {
      throw Error(ErrorCode::InvalidPrior, "prior covariance is not symmetric positive definite");
    }
    return;
  }
  for (int i = 0; i < 3; ++i) {
    if (!(variances(i) > 0.0)) {
      throw Error(ErrorCode::InvalidPrior, "prior variances must be positive");
    }
  }
}

Eigen::Matrix<double, Eigen::Dynamic, 3> GaussianPrior::whitening() const {
  if (covariance) {
    const Matrix3d lower = Eigen::LLT<Matrix3d>(*covariance).matrixL();
    return lower.triangularView<Eigen::Lower>().solve(Matrix3d::Identity());
  }
  Eigen::Matrix<double, Eigen::Dynamic, 3> rows(0, 3);
  for (int i = 0; i < 3; ++i) {
    if (std::isinf(variances(i))) continue;
    rows.conservativeResize(rows.rows() + 1, Eigen::NoChange);
    rows.row(rows.rows() - 1) = Eigen::RowVector3d::Unit(i) / std::sqrt(variances(i));
  }
  return rows;
}

Matrix3d GaussianPrior::information() const {
  const auto w = whitening();
  return w.transpose() * w;
}

namespace {

/// Whitened MI residuals plus one block per informative prior, over the
/// parameter vector [r; roll; pitch; yaw].
class MapProblem {
 public:
  MapProblem(const MeasurementPacket& packet, const std::vector<GaussianPrior>& priors)
      : packet_(static_equivalent(packet)) {
    packet_.validate();
    whiten_.reserve(packet_.size());
    for (std::size_t k = 0; k < packet_.size(); ++k) {
      if (k > 0 && packet_.sample_noise_covs.empty()) {
        whiten_.push_back(whiten_.front());
        continue;
      }
      const Matrix3d lower = Eigen::LLT<Matrix3d>(packet_.noise_cov_at(k)).matrixL();
      whiten_.push_back(lower.triangularView<Eigen::Lower>().solve(Matrix3d::Identity()));
    }

    bool seen[2] = {false, false};
    for (const auto& prior : priors) {
      prior.validate();
      const int slot = prior.target == PriorTarget::Position ? 0 : 1;
      if (seen[slot]) throw Error(ErrorCode::InvalidPrior, "at most one prior per target");
      seen[slot] = true;
      auto rows = prior.whitening();
      if (rows.rows() == 0) continue;
      prior_blocks_.push_back({prior.target, prior.mean, std::move(rows)});
    }
    rows_ = 3 * static_cast<Eigen::Index>(packet_.size());
    for (const auto& block : prior_blocks_) rows_ += block.whitening.rows();
  }

  void operator()(const VectorXd& x, VectorXd& residual, MatrixXd* jacobian) const {
    const NavStated state = NavStated::from_vector(x);
    residual.resize(rows_);
    if (jacobian) jacobian->setZero(rows_, 6);

    const Matrix3d rot = euler_to_rotation(state.psi);
    const auto partials = rotation_partials(state.psi);
    for (std::size_t k = 0; k < packet_.size(); ++k) {
      const Eigen::Index row = 3 * static_cast<Eigen::Index>(k);
      const Vector3d& m = packet_.schedule.moments[k];
      const Vector3d field = transmitter_frame_field(state.r, m, packet_.c);
      residual.segment<3>(row) = whiten_[k] * (packet_.readings[k] - rot * field);
      if (jacobian) {
        Eigen::Matrix<double, 3, 6> dh;
        dh.leftCols<3>() = position_jacobian(state, m, packet_.c);
        for (int j = 0; j < 3; ++j) dh.col(3 + j) = partials[j] * field;
        jacobian->block<3, 6>(row, 0) = -whiten_[k] * dh;
      }
    }

    Eigen::Index row = 3 * static_cast<Eigen::Index>(packet_.size());
    for (const auto& block : prior_blocks_) {
      Vector3d diff;
      if (block.target == PriorTarget::Position) {
        diff = state.r - block.mean;
      } else {
        const Vector3d psi = state.psi.vector();
        for (int i = 0; i < 3; ++i) diff(i) = angle_residual(psi(i), block.mean(i));
      }
      const Eigen::Index n = block.whitening.rows();
      residual.segment(row, n) = block.whitening * diff;
      if (jacobian) {
        const int col = block.target == PriorTarget::Position ? 0 : 3;
        jacobian->block(row, col, n, 3) = block.whitening;
      }
      row += n;
    }
  }

 private:
  struct PriorBlock {
    PriorTarget target;
    Vector3d mean;
    Eigen::Matrix<double, Eigen::Dynamic, 3> whitening;
  };

  MeasurementPacket packet_;
  std::vector<Matrix3d> whiten_;
  std::vector<PriorBlock> prior_blocks_;
  Eigen::Index rows_{0};
};

}  // namespace

double mi_cost(const MeasurementPacket& packet, const NavStated& state) {
  MapProblem problem(packet, {});
  VectorXd residual;
  problem(state.vector(), residual, nullptr);
  return residual.squaredNorm();
}

EstimateResult map_estimate(const MeasurementPacket& packet, const NavStated& init,
                            const std::vector<GaussianPrior>& priors,
                            const SolverOptions& options) {
  if (!(init.r.norm() >= kMinRange)) {
    throw Error(ErrorCode::DegenerateRange, "initial position at the transmitter");
  }
  MapProblem problem(packet, priors);
  const NllsResult nlls = solve_nlls(std::cref(problem), init.vector(), options);

  EstimateResult result;
  NavStated state = NavStated::from_vector(nlls.x);
  state.psi = normalize(state.psi);
  result.state = state;
  result.cost = nlls.cost;
  result.iterations = nlls.iterations;
  result.converged = nlls.converged;
  result.gradient_norm = nlls.gradient_norm;
  result.covariance = nlls.covariance;
  return result;
}

EstimateResult map_estimate(const MeasurementPacket& packet,
                            const std::vector<GaussianPrior>& priors,
                            const SolverOptions& options) {
  return map_estimate(packet, baseline_estimate(packet), priors, options);
}

EstimateResult ml_estimate(const MeasurementPacket& packet, const NavStated& init,
                           const SolverOptions& options) {
  return map_estimate(packet, init, {}, options);
}

EstimateResult ml_estimate(const MeasurementPacket& packet, const SolverOptions& options) {
  return ml_estimate(packet, baseline_estimate(packet), options);
}

NavStated resolve_hemisphere(const NavStated& estimate, const Vector3d& reference) {
  NavStated out = estimate;
  if ((-estimate.r - reference).norm() < (estimate.r - reference).norm()) out.r = -estimate.r;
  return out;
}

RollPitch accel_roll_pitch(const Vec3List& accel_samples) {
  if (accel_samples.empty()) throw Error(ErrorCode::NotStatic, "no accelerometer samples");
  Vector3d mean = Vector3d::Zero();
  for (const auto& a : accel_samples) mean += a;
  mean /= static_cast<double>(accel_samples.size());
  const double magnitude = mean.norm();
  if (!(std::abs(magnitude - kGravity) <= 0.2 * kGravity)) {
    throw Error(ErrorCode::NotStatic, "mean specific force is not within 20% of g");
  }
  return {std::atan2(mean.y(), mean.z()), std::atan2(-mean.x(), std::hypot(mean.y(), mean.z()))};
}

GaussianPrior orientation_prior_from_accel(const Vec3List& accel_samples, double sigma) {
  const RollPitch rp = accel_roll_pitch(accel_samples);
  const double var = sigma * sigma;
  return GaussianPrior::diagonal(PriorTarget::Orientation, Vector3d(rp.roll, rp.pitch, 0.0),
                                 Vector3d(var, var, std::numeric_limits<double>::infinity()));
}

}  // namespace minav
