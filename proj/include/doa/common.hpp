#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace doa {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kHalfPi = kPi / 2.0;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Numerical failure on otherwise valid inputs (solver breakdown,
/// non-convergence, indefinite matrix where PSD was required, ...).
/// Precondition violations use std::invalid_argument / std::domain_error.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input carries no resolvable signal direction (flat eigenvalue spectrum,
/// zero cross-correlation trace). Callers may skip the offending block.
class degenerate_input : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

}  // namespace doa
