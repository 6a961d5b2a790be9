#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>

#include "doa/common.hpp"
#include "doa/rng.hpp"

namespace doa {

/// Geometry of a uniform linear array and its partition into K contiguous
/// subarrays of M elements each (N = K*M). Element n sits at (n-1)*spacing
/// with the phase reference at the left edge. n_init is the size of the
/// leading subarray used for the coarse initial estimate.
struct ArrayConfig {
  int n_total = 0;
  int k_subarrays = 1;
  int m_per_subarray = 0;
  int n_init = 0;
  double spacing = 0.5;
  double wavelength = 1.0;

  static ArrayConfig make(int n_total, int k_subarrays, int n_init,
                          double spacing = 0.5, double wavelength = 1.0) {
    if (n_total < 1 || k_subarrays < 1)
      throw std::invalid_argument("ArrayConfig: counts must be positive");
    if (n_total % k_subarrays != 0)
      throw std::invalid_argument("ArrayConfig: n_total must equal k_subarrays * m_per_subarray");
    if (n_init < 1 || n_init > n_total)
      throw std::invalid_argument("ArrayConfig: n_init must lie in [1, n_total]");
    if (!(spacing > 0.0) || !(wavelength > 0.0))
      throw std::invalid_argument("ArrayConfig: spacing and wavelength must be positive");
    return {n_total, k_subarrays, n_total / k_subarrays, n_init, spacing, wavelength};
  }

  /// Position of element `index` (0-based), in the same unit as wavelength.
  double position(int index) const { return index * spacing; }
};

namespace detail {
inline void check_theta(double theta) {
  if (!(std::abs(theta) < kHalfPi))
    throw std::domain_error("theta must satisfy |theta| < pi/2");
}
}  // namespace detail

/// Array manifold slice: element m equals
/// exp(j*2*pi*(start_index+m)*spacing*sin(theta)/wavelength), m = 0..count-1.
/// start_index = (k-1)*M yields the manifold of subarray k including its
/// global phase prefactor.
inline Eigen::VectorXcd steering_vector(double theta, int count, int start_index,
                                        const ArrayConfig& config) {
  detail::check_theta(theta);
  if (count < 1) throw std::invalid_argument("steering_vector: count must be >= 1");
  if (start_index < 0) throw std::invalid_argument("steering_vector: start_index must be >= 0");
  const double phase_step =
      2.0 * kPi * config.spacing * std::sin(theta) / config.wavelength;
  Eigen::VectorXcd a(count);
  for (int m = 0; m < count; ++m) {
    const double phi = phase_step * static_cast<double>(start_index + m);
    a(m) = cplx{std::cos(phi), std::sin(phi)};
  }
  return a;
}

/// d a(theta)/d theta = j*(2*pi/wavelength)*cos(theta) * D * a(theta) with
/// D = diag(positions), evaluated for the leading `count` elements.
inline Eigen::VectorXcd steering_derivative(double theta, int count,
                                            const ArrayConfig& config) {
  Eigen::VectorXcd a = steering_vector(theta, count, 0, config);
  const double factor = 2.0 * kPi / config.wavelength * std::cos(theta);
  Eigen::VectorXcd da(count);
  for (int m = 0; m < count; ++m)
    da(m) = cplx{0.0, factor * config.position(m)} * a(m);
  return da;
}

/// One emitter's worth of received snapshots plus the ground truth that
/// generated them.
struct SnapshotMatrix {
  Eigen::MatrixXcd samples;  // n_total x l_snapshots
  double true_theta = 0.0;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  ArrayConfig config;
  bool noiseless = false;

  int l_snapshots() const { return static_cast<int>(samples.cols()); }

  /// Rows of subarray k (0-based), the contiguous block k*M .. (k+1)*M-1.
  Eigen::MatrixXcd subarray(int k) const {
    if (k < 0 || k >= config.k_subarrays)
      throw std::invalid_argument("subarray index out of range");
    return samples.middleRows(k * config.m_per_subarray, config.m_per_subarray);
  }
};

/// Synthesizes y(l) = a_N(theta) s(l) + w(l), l = 1..L, with a random-phase
/// constant-modulus source of power 10^(snr_db/10) and CSCG noise of unit
/// power, both drawn from the given seed. The fixed source modulus keeps the
/// per-snapshot SNR equal to the nominal one; a Gaussian source amplitude
/// would fade beneath the estimation threshold on a few percent of
/// single-snapshot trials no matter how high the nominal SNR. With
/// noiseless=true the noise term is dropped (oracle runs).
inline SnapshotMatrix synthesize(const ArrayConfig& config, double theta,
                                 double snr_db, int l_snapshots,
                                 std::uint64_t seed, bool noiseless = false) {
  detail::check_theta(theta);
  if (l_snapshots < 1) throw std::invalid_argument("synthesize: l_snapshots must be >= 1");
  const int n = config.n_total;
  const double signal_amp = std::sqrt(std::pow(10.0, snr_db / 10.0));
  Eigen::VectorXcd a = steering_vector(theta, n, 0, config);

  SplitMix64 rng(seed);
  Eigen::MatrixXcd y(n, l_snapshots);
  for (int l = 0; l < l_snapshots; ++l) {
    const cplx s = signal_amp * rng.unit_phase();
    for (int i = 0; i < n; ++i) {
      cplx w = noiseless ? cplx{0.0, 0.0} : rng.gaussian();
      y(i, l) = a(i) * s + w;
    }
  }
  return {std::move(y), theta, snr_db, seed, config, noiseless};
}

}  // namespace doa
