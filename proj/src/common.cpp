#include <cmath>

#include "gsik/error.hpp"
#include "gsik/math.hpp"

namespace gsik {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Dimension: return "dimension mismatch";
    case ErrorCode::Index: return "index out of range";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::SingularDiagonal: return "singular diagonal";
    case ErrorCode::EmptyTask: return "empty task";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  if ((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol;
}

bool all_finite(const Eigen::Ref<const VecX>& v) { return v.allFinite(); }

}  // namespace gsik
