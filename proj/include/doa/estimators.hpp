#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "doa/array_model.hpp"
#include "doa/common.hpp"
#include "doa/root_music.hpp"
#include "doa/spectral_core.hpp"

namespace doa {

enum class Method { RootMusicFull, Psac, Pscc, PiMaxCsca };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::RootMusicFull: return "rootmusic";
    case Method::Psac: return "psac";
    case Method::Pscc: return "pscc";
    case Method::PiMaxCsca: return "pimaxcsca";
  }
  return "unknown";
}

inline std::optional<Method> method_from_name(const std::string& name) {
  if (name == "rootmusic") return Method::RootMusicFull;
  if (name == "psac") return Method::Psac;
  if (name == "pscc") return Method::Pscc;
  if (name == "pimaxcsca") return Method::PiMaxCsca;
  return std::nullopt;
}

struct DirectionEstimate {
  double theta = 0.0;  // radians
  Method method = Method::RootMusicFull;
  std::optional<int> iterations_pi;
  std::optional<int> iterations_sca;
  std::vector<double> candidates;    // empty when not applicable
  std::vector<double> per_subarray;  // empty when not applicable
};

/// Termination controls for the quadratic-approximation refinement. The
/// absolute threshold on P_n = |J(theta_n) - J(theta_{n-1})| is
/// epsilon_rel * J(theta_0), so the criterion scales with the objective.
struct ScaSettings {
  double epsilon_rel = 1e-6;
  int max_iter = 50;
  double step_clip = deg2rad(2.0);  // radians

  void validate() const {
    if (!(epsilon_rel > 0.0)) throw std::invalid_argument("ScaSettings: epsilon_rel must be > 0");
    if (max_iter < 1) throw std::invalid_argument("ScaSettings: max_iter must be >= 1");
    if (!(step_clip > 0.0)) throw std::invalid_argument("ScaSettings: step_clip must be > 0");
  }
};

/// Baseline: sample covariance of the whole array, then Root-MUSIC with q=1.
inline DirectionEstimate estimate_full_root_music(const SnapshotMatrix& snap) {
  HermitianMatrix r = sample_covariance(snap.samples);
  const double theta = root_music(r, 1, snap.config)[0];
  DirectionEstimate out;
  out.theta = theta;
  out.method = Method::RootMusicFull;
  return out;
}

/// Partitioned subarray auto-correlation combining: per-subarray covariance
/// and Root-MUSIC, then the arithmetic mean of the K estimates. Degenerate
/// subarrays are excluded from the mean; it is an error only if all fail.
inline DirectionEstimate estimate_psac(const SnapshotMatrix& snap) {
  const ArrayConfig& cfg = snap.config;
  std::vector<double> per;
  per.reserve(cfg.k_subarrays);
  for (int k = 0; k < cfg.k_subarrays; ++k) {
    try {
      HermitianMatrix r = sample_covariance(
          Eigen::MatrixXcd(snap.samples.middleRows(k * cfg.m_per_subarray, cfg.m_per_subarray)));
      per.push_back(root_music(r, 1, cfg)[0]);
    } catch (const degenerate_input&) {
      // excluded from the combination
    }
  }
  if (per.empty()) throw numerical_error("psac: every subarray estimate is degenerate");
  double sum = 0.0;
  for (double v : per) sum += v;
  DirectionEstimate out;
  out.theta = sum / static_cast<double>(per.size());
  out.method = Method::Psac;
  out.per_subarray = std::move(per);
  return out;
}

/// Cross-correlation phase of a subarray pair: z = tr(pinv(R_cross) * R_acm)
/// with R_cross the sample cross-covariance and R_acm the product of the
/// principal square roots of the two auto-covariances. Noiselessly
/// arg z = (2*pi/lambda)*i*M*d*sin(theta) for pair offset i. The sample
/// cross-covariance has rank <= L, hence the pseudo-inverse.
inline cplx pscc_phase(const Eigen::MatrixXcd& yk, const Eigen::MatrixXcd& yki) {
  if (yk.rows() != yki.rows() || yk.cols() != yki.cols())
    throw std::invalid_argument("pscc_phase: subarray blocks must have equal shape");
  const double l = static_cast<double>(yk.cols());
  Eigen::MatrixXcd cross = (yk * yki.adjoint()) / l;
  Eigen::MatrixXcd sqrt_k = hermitian_sqrt(sample_covariance(yk));
  Eigen::MatrixXcd sqrt_ki = hermitian_sqrt(sample_covariance(yki));
  Eigen::MatrixXcd acm = sqrt_k * sqrt_ki.adjoint();
  const cplx z = (pseudo_inverse(cross) * acm).trace();
  if (std::abs(z) < 1e-12)
    throw degenerate_input("pscc_phase: cross-correlation trace is numerically zero");
  return z;
}

/// Every angle consistent with the pair phase: theta_j = arcsin(u_j) for all
/// integers j with u_j = lambda*(arg z + 2*pi*j)/(2*pi*offset*M*d) in [-1, 1]
/// (boundary included). Negative j are required to reach negative angles.
inline std::vector<double> pscc_candidates(cplx z, int offset, const ArrayConfig& config) {
  if (!(std::abs(z) > 0.0)) throw std::invalid_argument("pscc_candidates: z must be nonzero");
  if (offset < 1) throw std::invalid_argument("pscc_candidates: offset must be >= 1");
  const double scale = 2.0 * kPi * offset * config.m_per_subarray * config.spacing /
                       config.wavelength;
  const double phase = std::arg(z);
  const long j_lo = static_cast<long>(std::ceil((-scale - phase) / (2.0 * kPi))) - 1;
  const long j_hi = static_cast<long>(std::floor((scale - phase) / (2.0 * kPi))) + 1;
  std::vector<double> candidates;
  for (long j = j_lo; j <= j_hi; ++j) {
    double u = (phase + 2.0 * kPi * static_cast<double>(j)) / scale;
    if (std::abs(u) > 1.0 + 1e-12) continue;
    u = std::clamp(u, -1.0, 1.0);
    candidates.push_back(std::asin(u));
  }
  if (candidates.empty())
    throw numerical_error("pscc_candidates: no feasible wrap index (unreachable)");
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

/// Partitioned subarray cross-correlation combining: a coarse PSAC estimate
/// disambiguates the K(K-1)/2 pair phases; the per-pair selections are
/// averaged. Degenerate pairs are skipped with the combining count reduced.
inline DirectionEstimate estimate_pscc(const SnapshotMatrix& snap) {
  const ArrayConfig& cfg = snap.config;
  if (cfg.k_subarrays < 2)
    throw std::invalid_argument("pscc: needs at least two subarrays");
  const DirectionEstimate coarse = estimate_psac(snap);

  std::vector<double> picked;
  std::vector<double> first_candidates;
  for (int k = 0; k + 1 < cfg.k_subarrays; ++k) {
    for (int k2 = k + 1; k2 < cfg.k_subarrays; ++k2) {
      cplx z;
      try {
        z = pscc_phase(snap.subarray(k), snap.subarray(k2));
      } catch (const degenerate_input&) {
        continue;
      }
      std::vector<double> cands = pscc_candidates(z, k2 - k, cfg);
      double best = cands.front();
      for (double c : cands)
        if (std::abs(c - coarse.theta) < std::abs(best - coarse.theta)) best = c;
      picked.push_back(best);
      if (first_candidates.empty()) first_candidates = std::move(cands);
    }
  }
  if (picked.empty()) throw numerical_error("pscc: every subarray pair is degenerate");
  double sum = 0.0;
  for (double v : picked) sum += v;
  DirectionEstimate out;
  out.theta = sum / static_cast<double>(picked.size());
  out.method = Method::Pscc;
  out.candidates = std::move(first_candidates);
  return out;
}

/// Correlation objective J(theta) = |Vs^H a_N(theta)|^2.
inline double objective_J(double theta, const Eigen::VectorXcd& vs,
                          const ArrayConfig& config) {
  if (!(vs.norm() > 0.0)) throw std::invalid_argument("objective_J: Vs must be nonzero");
  Eigen::VectorXcd a = steering_vector(theta, config.n_total, 0, config);
  return std::norm(vs.dot(a));
}

struct ScaDerivatives {
  double j = 0.0;
  double j1 = 0.0;
  double j2 = 0.0;
};

/// J and its first two angle derivatives via the quadratic forms
///   A = a^H P D a,  B = a^H D P a,  C = a^H D P D a,
///   Dq = a^H D^2 P a,  E = a^H P D^2 a,      P = Vs Vs^H,
/// giving J' = j*(2pi/lambda)*cos(theta)*(A - B) and
/// J'' = j*(2pi/lambda)*sin(theta)*(B - A)
///       + (8pi^2/lambda^2)*cos^2(theta)*C
///       - (4pi^2/lambda^2)*cos^2(theta)*(Dq + E).
/// Both are analytically real; a residual imaginary part above
/// 1e-9 of the value's scale indicates an internal inconsistency.
inline ScaDerivatives sca_derivatives(double theta, const Eigen::VectorXcd& vs,
                                      const ArrayConfig& config) {
  const int n = config.n_total;
  if (vs.size() != n) throw std::invalid_argument("sca_derivatives: Vs dimension mismatch");
  const double vs2 = vs.squaredNorm();
  if (!(vs2 > 0.0)) throw std::invalid_argument("sca_derivatives: Vs must be nonzero");

  Eigen::VectorXcd a = steering_vector(theta, n, 0, config);
  Eigen::VectorXcd da(n), d2a(n);
  for (int m = 0; m < n; ++m) {
    const double p = config.position(m);
    da(m) = p * a(m);
    d2a(m) = p * p * a(m);
  }
  const cplx vs_h_a = vs.dot(a);
  const cplx vs_h_da = vs.dot(da);
  const cplx vs_h_d2a = vs.dot(d2a);

  const cplx qa = std::conj(vs_h_a) * vs_h_da;    // A
  const cplx qb = std::conj(vs_h_da) * vs_h_a;    // B
  const cplx qc = std::conj(vs_h_da) * vs_h_da;   // C
  const cplx qd = std::conj(vs_h_d2a) * vs_h_a;   // Dq
  const cplx qe = std::conj(vs_h_a) * vs_h_d2a;   // E

  const double kappa = 2.0 * kPi / config.wavelength;
  const double c = std::cos(theta), s = std::sin(theta);
  const cplx junit{0.0, 1.0};
  const cplx j1c = junit * kappa * c * (qa - qb);
  const cplx j2c = junit * kappa * s * (qb - qa) + 2.0 * kappa * kappa * c * c * qc -
                   kappa * kappa * c * c * (qd + qe);

  const double pmax = config.position(n - 1);
  const double ref = kappa * (1.0 + kappa) * (1.0 + pmax) * (1.0 + pmax) *
                     static_cast<double>(n) * vs2;
  if (std::abs(j1c.imag()) > 1e-9 * (std::abs(j1c) + ref) ||
      std::abs(j2c.imag()) > 1e-9 * (std::abs(j2c) + ref))
    throw numerical_error("sca_derivatives: non-real derivative, internal inconsistency");

  return {std::norm(vs_h_a), j1c.real(), j2c.real()};
}

struct ScaResult {
  double theta = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {
inline double clamp_angle(double theta) {
  return std::clamp(theta, -kHalfPi + 1e-6, kHalfPi - 1e-6);
}
}  // namespace detail

/// Newton-style ascent theta <- theta - J'/J'' on the correlation objective,
/// terminated when P_n = |J(theta_n) - J(theta_{n-1})| falls below
/// epsilon_rel * J(theta_0). The step is safeguarded two ways: its magnitude
/// is clamped to step_clip, and when J'' >= 0 the quadratic model admits no
/// maximum, so a null step is taken and the P_n rule stops at the incumbent
/// (an exploratory jump of +-step_clip does not terminate on large arrays,
/// whose correlation lobes are far narrower than any fixed clip). Iterates
/// stay inside (-pi/2 + 1e-6, pi/2 - 1e-6). On non-convergence the
/// best-objective iterate is returned with converged=false.
inline ScaResult sca_refine(double theta0, const Eigen::VectorXcd& vs,
                            const ScaSettings& settings, const ArrayConfig& config) {
  detail::check_theta(theta0);
  settings.validate();
  double theta = detail::clamp_angle(theta0);
  ScaDerivatives cur = sca_derivatives(theta, vs, config);
  const double epsilon = settings.epsilon_rel * std::max(cur.j, 1e-300);
  double j_prev = cur.j;
  double theta_best = theta;
  double j_best = cur.j;

  int iterations = 0;
  while (iterations < settings.max_iter) {
    double step = 0.0;
    if (cur.j2 < 0.0) {
      step = -cur.j1 / cur.j2;
      if (std::abs(step) > settings.step_clip)
        step = std::copysign(settings.step_clip, step);
    }
    ++iterations;
    theta = detail::clamp_angle(theta + step);
    cur = sca_derivatives(theta, vs, config);
    if (cur.j > j_best) {
      j_best = cur.j;
      theta_best = theta;
    }
    const double pn = std::abs(cur.j - j_prev);
    j_prev = cur.j;
    if (pn < epsilon) return {theta, iterations, true};
  }
  return {theta_best, iterations, false};
}

/// Power-iteration max-correlation SCA pipeline:
///  1. coarse angle from the leading n_init rows via Root-MUSIC,
///  2. x0 = a_N(coarse) and power iteration on the full-array covariance
///     for the refined steering estimate Vs (beta products recorded),
///  3. SCA refinement of the coarse angle against Vs.
inline DirectionEstimate estimate_pi_max_csca(const SnapshotMatrix& snap,
                                              const ScaSettings& settings = {}) {
  const ArrayConfig& cfg = snap.config;
  double theta_init;
  try {
    HermitianMatrix r0 = sample_covariance(Eigen::MatrixXcd(snap.samples.topRows(cfg.n_init)));
    theta_init = root_music(r0, 1, cfg)[0];
  } catch (const numerical_error& e) {
    throw numerical_error(std::string("pi_max_csca initial estimate: ") + e.what());
  }

  PowerIterationResult pi;
  try {
    HermitianMatrix r = sample_covariance(snap.samples);
    Eigen::VectorXcd x0 = steering_vector(theta_init, cfg.n_total, 0, cfg);
    pi = power_iteration(r, x0);
  } catch (const numerical_error& e) {
    throw numerical_error(std::string("pi_max_csca power iteration: ") + e.what());
  }

  ScaResult sca;
  try {
    sca = sca_refine(theta_init, pi.vector, settings, cfg);
  } catch (const numerical_error& e) {
    throw numerical_error(std::string("pi_max_csca refinement: ") + e.what());
  }

  DirectionEstimate out;
  out.theta = sca.theta;
  out.method = Method::PiMaxCsca;
  out.iterations_pi = pi.iterations;
  out.iterations_sca = sca.iterations;
  return out;
}

}  // namespace doa
