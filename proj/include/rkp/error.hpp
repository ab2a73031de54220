#pragma once

#include <stdexcept>
#include <string>

namespace rkp {

/// Classes of failure raised by the library. Each maps to a distinct CLI exit
/// code through exit_code().
enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  Io,
  Parse,
  SingularPivot,
  RankCollapse,
  NoConvergence,
  Stagnation,
  DegenerateColumn,
  BasisNotOrthonormal,
  ZeroProjection,
  InconsistentOrWrongK,
  SingularDraw,
  NotNullBasis,
  InconsistentRhs,
  ConstraintDeficient,
  DependentNullVectors,
  Inconclusive,
  InvalidCurve,
  PointTooClose,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
    case ErrorKind::SingularPivot: return "SingularPivot";
    case ErrorKind::RankCollapse: return "RankCollapse";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::Stagnation: return "Stagnation";
    case ErrorKind::DegenerateColumn: return "DegenerateColumn";
    case ErrorKind::BasisNotOrthonormal: return "BasisNotOrthonormal";
    case ErrorKind::ZeroProjection: return "ZeroProjection";
    case ErrorKind::InconsistentOrWrongK: return "InconsistentOrWrongK";
    case ErrorKind::SingularDraw: return "SingularDraw";
    case ErrorKind::NotNullBasis: return "NotNullBasis";
    case ErrorKind::InconsistentRhs: return "InconsistentRhs";
    case ErrorKind::ConstraintDeficient: return "ConstraintDeficient";
    case ErrorKind::DependentNullVectors: return "DependentNullVectors";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::InvalidCurve: return "InvalidCurve";
    case ErrorKind::PointTooClose: return "PointTooClose";
  }
  return "Unknown";
}

/// Process exit code for a failure class. 1 is reserved for usage errors.
inline int exit_code(ErrorKind kind) { return 10 + static_cast<int>(kind); }

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, double diagnostic = 0.0)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        diagnostic_(diagnostic) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Numeric context attached by the thrower, e.g. the smallest pivot seen
  // before an LU factorization gave up.
  double diagnostic() const noexcept { return diagnostic_; }

 private:
  ErrorKind kind_;
  double diagnostic_;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw Error(ErrorKind::InvalidArgument, what);
}

}  // namespace rkp
