#pragma once

#include <compare>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace clsnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using Site = std::size_t;

inline constexpr double pi = std::numbers::pi;

enum class ErrorCode {
  invalid_argument,
  out_of_range,
  not_hermitian,
  symmetry_violated,
  step_underflow,
  non_finite,
  schedule_conflict,
  no_route,
  unschedulable,
  config,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// C API and the CLI can map it onto a status or an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Unordered matrix position; always stored with row <= col.
struct Entry {
  Site row = 0;
  Site col = 0;

  Entry() = default;
  Entry(Site a, Site b) : row(a < b ? a : b), col(a < b ? b : a) {}

  bool diagonal() const { return row == col; }
  friend auto operator<=>(const Entry&, const Entry&) = default;
};

std::string to_string(const Entry& e);

/// Normalized complex amplitude vector over lattice sites.
class StateVector {
 public:
  StateVector() = default;
  explicit StateVector(CVector amplitudes) : amps_(std::move(amplitudes)) {}

  /// Scales `amplitudes` to unit norm; throws on a zero vector.
  static StateVector normalized(CVector amplitudes);
  static StateVector basis(std::size_t dimension, Site site);

  std::size_t dimension() const { return static_cast<std::size_t>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  CVector& amplitudes() { return amps_; }
  Complex operator[](Site i) const { return amps_(static_cast<Eigen::Index>(i)); }
  double norm() const { return amps_.norm(); }

 private:
  CVector amps_;
};

bool is_symmetric(const Matrix& m, double tol = 1e-12);

}  // namespace clsnet
