#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "doa/array_model.hpp"
#include "doa/common.hpp"
#include "doa/spectral_core.hpp"

namespace doa {

/// One-sided form of p(z) = a^T(1/z) * U_N U_N^H * a(z) after multiplying by
/// z^{M-1}: coeffs(k) multiplies z^k, k = 0..2M-2. Conjugate-reciprocal
/// symmetry coeffs(k) = conj(coeffs(2M-2-k)) holds by construction, so roots
/// come in (z, 1/conj(z)) pairs.
struct MusicPolynomial {
  Eigen::VectorXcd coeffs;

  int subarray_dim() const { return (static_cast<int>(coeffs.size()) + 1) / 2; }
};

/// Eigenvectors of the M-q smallest eigenvalues, columns orthonormal.
inline Eigen::MatrixXcd noise_subspace(const HermitianMatrix& r, int q_sources) {
  if (q_sources < 0 || q_sources >= r.dim())
    throw std::invalid_argument("noise_subspace: need q_sources < dim");
  EigenPair ep = hermitian_evd(r);
  return ep.vectors.rightCols(r.dim() - q_sources);
}

/// Builds the rooting polynomial from a noise-subspace basis by summing the
/// diagonals of C = U_N U_N^H. The lower triangle is filled by conjugation,
/// which keeps the coefficient symmetry exact.
inline MusicPolynomial music_polynomial(const Eigen::MatrixXcd& noise_basis) {
  const int m = static_cast<int>(noise_basis.rows());
  if (m < 2) throw std::invalid_argument("music_polynomial: need at least 2 elements");
  const Eigen::MatrixXcd c = noise_basis * noise_basis.adjoint();
  Eigen::VectorXcd coeffs(2 * m - 1);
  for (int k = 0; k < m; ++k) {
    cplx s{0.0, 0.0};
    for (int r = 0; r + k < m; ++r) s += c(r, r + k);
    coeffs(m - 1 + k) = s;
    coeffs(m - 1 - k) = std::conj(s);
  }
  return {std::move(coeffs)};
}

namespace detail {

/// Parlett-Reinsch style balancing with powers of two (exact scalings), to
/// tame the norm spread of companion matrices before the QR iteration.
inline void balance_in_place(Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(a.rows());
  const double gamma = 0.9;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      double row_norm = 0.0, col_norm = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        row_norm += std::abs(a(i, j));
        col_norm += std::abs(a(j, i));
      }
      if (row_norm == 0.0 || col_norm == 0.0) continue;
      int exponent = 0;
      std::frexp(row_norm / col_norm, &exponent);
      exponent /= 2;
      if (exponent == 0) continue;
      const double scaled_col = std::ldexp(col_norm, exponent);
      const double scaled_row = std::ldexp(row_norm, -exponent);
      if (scaled_col + scaled_row < gamma * (col_norm + row_norm)) {
        changed = true;
        const double up = std::ldexp(1.0, exponent);
        const double down = std::ldexp(1.0, -exponent);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          a(i, j) *= down;
          a(j, i) *= up;
        }
      }
    }
  }
}

/// Newton refinement of a selected root's phase on the unit circle, where the
/// polynomial restricts to the real pseudospectrum
///   q(phi) = s_0 + 2 Re sum_{k>=1} s_k e^{j k phi},  s_k = coeffs(M-1+k).
/// A companion root of a single-snapshot covariance can sit well inside the
/// circle, and an exactly-on-circle double root carries sqrt(eps) sensitivity;
/// in both cases arg(z) alone misses the spectrum minimum, while q has a
/// simple, well-conditioned minimum there. Steps beyond half a lobe width or
/// into non-convex territory abandon the refinement and keep phi unchanged.
inline double refine_phase_on_circle(const Eigen::VectorXcd& coeffs, double phi) {
  const int m = (static_cast<int>(coeffs.size()) + 1) / 2;
  const double step_cap = kPi / (2.0 * m);
  double current = phi;
  for (int iter = 0; iter < 30; ++iter) {
    double q1 = 0.0, q2 = 0.0;
    const cplx rot{std::cos(current), std::sin(current)};
    cplx power = rot;
    for (int k = 1; k < m; ++k) {
      const cplx term = coeffs(m - 1 + k) * power;
      q1 -= 2.0 * k * term.imag();
      q2 -= 2.0 * k * k * term.real();
      power *= rot;
    }
    if (!(q2 > 0.0)) return phi;  // not convex here: keep the companion phase
    const double step = -q1 / q2;
    if (std::abs(step) > step_cap) return phi;
    current += step;
    if (std::abs(step) < 1e-14) break;
  }
  return current;
}

/// On-circle pseudospectrum value q(phi) = ||U_N^H a(phi)||^2 evaluated from
/// the polynomial coefficients.
inline double circle_spectrum_value(const Eigen::VectorXcd& coeffs, double phi) {
  const int m = (static_cast<int>(coeffs.size()) + 1) / 2;
  double q = coeffs(m - 1).real();
  const cplx rot{std::cos(phi), std::sin(phi)};
  cplx power = rot;
  for (int k = 1; k < m; ++k) {
    q += 2.0 * (coeffs(m - 1 + k) * power).real();
    power *= rot;
  }
  return q;
}

}  // namespace detail

/// All roots of sum_k coeffs(k) z^k via eigenvalues of the balanced companion
/// matrix. Leading coefficients that are negligible against the largest one
/// are trimmed first.
inline Eigen::VectorXcd polynomial_roots(const Eigen::VectorXcd& coeffs) {
  const double max_abs = coeffs.size() > 0 ? coeffs.cwiseAbs().maxCoeff() : 0.0;
  if (max_abs == 0.0) return Eigen::VectorXcd(0);
  int degree = static_cast<int>(coeffs.size()) - 1;
  while (degree > 0 && std::abs(coeffs(degree)) <= 1e-14 * max_abs) --degree;
  if (degree == 0) return Eigen::VectorXcd(0);
  if (degree == 1) {
    Eigen::VectorXcd root(1);
    root(0) = -coeffs(0) / coeffs(1);
    return root;
  }
  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  for (int i = 0; i + 1 < degree; ++i) companion(i + 1, i) = cplx{1.0, 0.0};
  for (int i = 0; i < degree; ++i) companion(i, degree - 1) = -coeffs(i) / coeffs(degree);
  detail::balance_in_place(companion);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw numerical_error("polynomial_roots: companion eigenvalue iteration failed");
  return solver.eigenvalues();
}

/// Root-MUSIC on a covariance matrix: noise subspace, rooting polynomial,
/// companion-matrix roots restricted to strictly inside the unit circle, each
/// phase-refined on the circle, then the q deepest pseudospectrum dips mapped
/// through theta = arcsin(lambda*arg(z)/(2*pi*d)). Modulus alone misranks
/// roots on shallow single-snapshot spectra, so candidates are ordered by the
/// MUSIC criterion value itself. Roots whose phase falls outside the arcsin
/// domain are skipped in favor of the next-best root. Angles are returned
/// sorted ascending.
inline std::vector<double> root_music(const HermitianMatrix& r, int q_sources,
                                      const ArrayConfig& config) {
  const int m = r.dim();
  if (q_sources < 1 || q_sources >= m)
    throw std::invalid_argument("root_music: need 1 <= q_sources < dim");
  if (config.spacing > config.wavelength / 2.0 + 1e-12)
    throw std::invalid_argument("root_music: spacing must not exceed wavelength/2");

  EigenPair ep = hermitian_evd(r);
  const double lmax = ep.values(0);
  if (!(lmax > 0.0) || ep.values(0) - ep.values(m - 1) <= 1e-12 * lmax)
    throw degenerate_input("root_music: flat eigenvalue spectrum, no resolvable source");

  MusicPolynomial poly = music_polynomial(ep.vectors.rightCols(m - q_sources));
  Eigen::VectorXcd roots = polynomial_roots(poly.coeffs);

  struct Candidate {
    cplx z;
    double phase;
    double depth;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(roots.size());
  for (int i = 0; i < roots.size(); ++i) {
    const cplx z = roots(i);
    if (!(std::abs(z) < 1.0)) continue;
    const double phase = detail::refine_phase_on_circle(poly.coeffs, std::arg(z));
    candidates.push_back({z, phase, detail::circle_spectrum_value(poly.coeffs, phase)});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.depth < b.depth; });

  const double phase_to_sine = config.wavelength / (2.0 * kPi * config.spacing);
  std::vector<double> angles;
  std::vector<Candidate> picked;
  for (const Candidate& c : candidates) {
    if (static_cast<int>(angles.size()) == q_sources) break;
    // Skip duplicates of an already selected dip: the conjugate-reciprocal
    // partner of a near-circle double root can also land inside the circle,
    // and distinct roots can refine into the same minimum.
    bool duplicate = false;
    for (const Candidate& p : picked)
      if (std::abs(c.z * std::conj(p.z) - 1.0) < 1e-6 ||
          std::abs(c.phase - p.phase) < 1e-7)
        duplicate = true;
    if (duplicate) continue;
    const double u = phase_to_sine * c.phase;
    if (std::abs(u) > 1.0) continue;  // invalid root, fall back to next-best
    angles.push_back(std::asin(u));
    picked.push_back(c);
  }
  if (static_cast<int>(angles.size()) < q_sources)
    throw numerical_error("root_music: fewer valid roots than requested sources");
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace doa
