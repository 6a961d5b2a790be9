#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "doa/common.hpp"
#include "doa/estimators.hpp"

namespace doa {

/// Inputs of the coherent-combining lower bound: one subarray of m_elements
/// at the given spacing, l_snapshots, per-antenna linear SNR, and k_combined
/// independently combined subarrays (k_combined = 1 is the single-array case,
/// m_elements = N gives the full-array bound).
struct CrlbInputs {
  int m_elements = 0;
  int l_snapshots = 1;
  double snr_linear = 1.0;
  double theta = 0.0;  // radians
  double spacing = 0.5;
  double wavelength = 1.0;
  int k_combined = 1;

  void validate() const {
    if (m_elements < 2) throw std::invalid_argument("CrlbInputs: m_elements must be >= 2");
    if (l_snapshots < 1) throw std::invalid_argument("CrlbInputs: l_snapshots must be >= 1");
    if (!(snr_linear > 0.0)) throw std::invalid_argument("CrlbInputs: snr_linear must be > 0");
    if (!(std::abs(theta) <= kHalfPi)) throw std::invalid_argument("CrlbInputs: |theta| <= pi/2");
    if (k_combined < 1) throw std::invalid_argument("CrlbInputs: k_combined must be >= 1");
    if (!(spacing > 0.0) || !(wavelength > 0.0))
      throw std::invalid_argument("CrlbInputs: spacing and wavelength must be positive");
  }
};

/// Variance bound lambda^2 / (8 pi^2 K L SNR cos^2(theta) dbar2) in radians^2,
/// with dbar2 the sum of squared mean-centered element positions. Returns
/// +infinity as the divergence flag when cos(theta) vanishes (endfire).
inline double crlb_psac(const CrlbInputs& in) {
  in.validate();
  double mean = 0.0;
  for (int m = 0; m < in.m_elements; ++m) mean += m * in.spacing;
  mean /= in.m_elements;
  double dbar2 = 0.0;
  for (int m = 0; m < in.m_elements; ++m) {
    const double dev = m * in.spacing - mean;
    dbar2 += dev * dev;
  }
  const double c = std::cos(in.theta);
  if (std::abs(c) < 1e-12) return std::numeric_limits<double>::infinity();  // endfire
  const double denom = 8.0 * kPi * kPi * in.k_combined * in.l_snapshots * in.snr_linear *
                       c * c * dbar2;
  if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
  return in.wavelength * in.wavelength / denom;
}

/// Analytic operation-count model of one estimator run.
struct ComplexityModel {
  Method method = Method::RootMusicFull;
  int n_total = 0;
  int k_subarrays = 1;
  int m_per_subarray = 0;
  int n_init = 0;
  int l_snapshots = 1;
  int beta_pi = 1;  // power-iteration product count, PiMaxCsca only

  void validate() const {
    if (n_total < 1 || k_subarrays < 1 || m_per_subarray < 1 || l_snapshots < 1)
      throw std::invalid_argument("ComplexityModel: counts must be positive");
    if (method == Method::PiMaxCsca && (n_init < 1 || beta_pi < 1))
      throw std::invalid_argument("ComplexityModel: PiMaxCsca needs n_init and beta_pi >= 1");
  }
};

namespace detail {
// m^3 - m^2 + m*L*(2m + 1): covariance plus eigen-decomposition of one
// m-element block, the shared building term of every model below.
inline double subspace_term(double m, double l) {
  return m * m * m - m * m + m * l * (2.0 * m + 1.0);
}
}  // namespace detail

/// FLOP counts, evaluated exactly as modeled:
///   full Root-MUSIC:  N^3 - N^2 + N L (2N + 1)
///   PSAC:             K (M^3 - M^2 + M L (2M + 1))
///   PSCC:             M^3 - M^2 + M L (2M + 1) + K(K-1)/2 * M^3
///   PI-Max-CSCA:      N0^3 - N0^2 + N0 L (2 N0 + 1) + N L (1 + 2N) + (beta-1) N^2
inline double flops(const ComplexityModel& model) {
  model.validate();
  const double n = model.n_total;
  const double k = model.k_subarrays;
  const double m = model.m_per_subarray;
  const double n0 = model.n_init;
  const double l = model.l_snapshots;
  switch (model.method) {
    case Method::RootMusicFull:
      return detail::subspace_term(n, l);
    case Method::Psac:
      return k * detail::subspace_term(m, l);
    case Method::Pscc:
      return detail::subspace_term(m, l) + 0.5 * k * (k - 1.0) * m * m * m;
    case Method::PiMaxCsca:
      return detail::subspace_term(n0, l) + n * l * (1.0 + 2.0 * n) +
             (model.beta_pi - 1.0) * n * n;
  }
  throw std::invalid_argument("flops: unknown method");
}

/// sqrt(mean((estimate - truth)^2)), radians in, radians out.
inline double rmse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw std::invalid_argument("rmse: empty estimate list");
  double acc = 0.0;
  for (double e : estimates) {
    const double d = e - truth;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

}  // namespace doa
