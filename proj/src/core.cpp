#include "clsnet/core.hpp"

#include <cmath>

namespace clsnet {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::out_of_range: return "out of range";
    case ErrorCode::not_hermitian: return "not hermitian";
    case ErrorCode::symmetry_violated: return "symmetry violated";
    case ErrorCode::step_underflow: return "step-size underflow";
    case ErrorCode::non_finite: return "non-finite value";
    case ErrorCode::schedule_conflict: return "schedule conflict";
    case ErrorCode::no_route: return "no route";
    case ErrorCode::unschedulable: return "unschedulable";
    case ErrorCode::config: return "config error";
  }
  return "unknown";
}

std::string to_string(const Entry& e) {
  return "(" + std::to_string(e.row) + "," + std::to_string(e.col) + ")";
}

StateVector StateVector::normalized(CVector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::invalid_argument, "cannot normalize a zero or non-finite state");
  }
  return StateVector(amplitudes / n);
}

StateVector StateVector::basis(std::size_t dimension, Site site) {
  if (site >= dimension) {
    throw Error(ErrorCode::out_of_range, "basis site " + std::to_string(site) + " outside dimension " +
                                             std::to_string(dimension));
  }
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dimension));
  v(static_cast<Eigen::Index>(site)) = 1.0;
  return StateVector(std::move(v));
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  if (!m.allFinite()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace clsnet
