#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace minav {

template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

using Vector3d = Eigen::Vector3d;
using Matrix3d = Eigen::Matrix3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using VectorXd = Eigen::VectorXd;
using MatrixXd = Eigen::MatrixXd;

using Vec3List = std::vector<Vector3d>;

enum class ErrorCode {
  DegenerateRange,
  NotARotation,
  SingularNormalEquations,
  NonFiniteResidual,
  InvalidPrior,
  NotStatic,
  MissingGyro,
  UnsupportedSchedule,
  ZeroChannel,
  DegenerateGramian,
  RankDeficient,
  BadConfig,
  SingularInformation,
  ZeroSignal,
  InvalidPacket,
  TooManyFailures,
  SchemaError,
};

const char* to_string(ErrorCode code);

/// All library failures are reported through this exception; `code()` lets
/// callers (the CLI in particular) map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::NotARotation: return "NotARotation";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::NonFiniteResidual: return "NonFiniteResidual";
    case ErrorCode::InvalidPrior: return "InvalidPrior";
    case ErrorCode::NotStatic: return "NotStatic";
    case ErrorCode::MissingGyro: return "MissingGyro";
    case ErrorCode::UnsupportedSchedule: return "UnsupportedSchedule";
    case ErrorCode::ZeroChannel: return "ZeroChannel";
    case ErrorCode::DegenerateGramian: return "DegenerateGramian";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::InvalidPacket: return "InvalidPacket";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

}  // namespace minav
