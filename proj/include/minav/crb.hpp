#pragma once

#include <vector>

#include "minav/common.hpp"
#include "minav/dipole.hpp"
#include "minav/estimators.hpp"
#include "minav/geom.hpp"

namespace minav {

enum class FisherKind { PositionKnownOrientation, FullState, RangeScalar };
enum class FisherSource { ClosedForm, Numeric };

struct FisherInfo {
  MatrixXd matrix;
  FisherKind kind{FisherKind::FullState};
  FisherSource source{FisherSource::Numeric};
};

/// Per-sample position information with known orientation and P = sigma^2 I:
///   9 c^2 / (sigma^2 |r|^10) ((r.m)^2 I + |r|^2 m m^T
///     - 2 (r.m)(r m^T + m r^T) + (5 (r.m)^2 / |r|^2 + |m|^2) r r^T)
Matrix3d position_information_term(const Vector3d& r, const Vector3d& m, double c, double sigma);

/// Closed-form position FIM for an axis-cycled schedule of n samples with
/// moment magnitude m. The diagonal is
///   6 n c^2 m^2 / (sigma^2 |r|^8) (1 + 2 r_i^2 / |r|^2).
/// Throws BadConfig unless n is a positive multiple of 3.
FisherInfo position_fim_closed(const Vector3d& r, int n, double c, double m, double sigma);

/// sum_k J_k^T P^{-1} J_k with J_k = [d h / d r | d h / d psi].
FisherInfo full_fim(const NavStated& state, const MomentSchedule& schedule, double c,
                    const Matrix3d& noise_cov);

/// 18 n c^2 m^2 / (sigma^2 |r|^8).
double range_fisher(const Vector3d& r, int n, double c, double m, double sigma);

/// Adds the prior information blocks to a 6x6 FIM.
FisherInfo add_prior_information(const FisherInfo& fim, const std::vector<GaussianPrior>& priors);

enum class StateBlock { Position, Orientation };

/// sqrt(tr([I^{-1}]_block) / 3) from the inverse of the whole matrix. A 3x3
/// position FIM only has a Position block. Throws SingularInformation when the
/// smallest eigenvalue is below 1e-12 times the largest.
double scalar_rmse_bound(const FisherInfo& fim, StateBlock block);

/// Bound for one block of a 6x6 FIM when the other block is known exactly:
/// sqrt(tr(I_bb^{-1}) / 3).
double known_complement_rmse_bound(const FisherInfo& fim, StateBlock block);

}  // namespace minav
