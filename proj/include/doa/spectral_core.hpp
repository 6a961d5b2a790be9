#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <utility>

#include "doa/array_model.hpp"
#include "doa/common.hpp"

namespace doa {

/// Complex Hermitian matrix. Construction symmetrizes (A + A^H)/2, so the
/// stored entries equal their conjugate transpose exactly.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const Eigen::MatrixXcd& raw) {
    if (raw.rows() != raw.cols())
      throw std::invalid_argument("HermitianMatrix: matrix must be square");
    entries_ = 0.5 * (raw + raw.adjoint());
  }

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return entries_; }

 private:
  Eigen::MatrixXcd entries_;
};

/// Full spectral decomposition, eigenvalues real and sorted descending,
/// vectors.col(i) paired with values(i), columns orthonormal.
struct EigenPair {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

/// R = (1/L) * Y * Y^H over the L snapshot columns of Y.
inline HermitianMatrix sample_covariance(const Eigen::MatrixXcd& snapshots) {
  if (snapshots.cols() < 1)
    throw std::invalid_argument("sample_covariance: need at least one snapshot");
  const double l = static_cast<double>(snapshots.cols());
  return HermitianMatrix((snapshots * snapshots.adjoint()) / l);
}

inline HermitianMatrix sample_covariance(const SnapshotMatrix& y) {
  return sample_covariance(y.samples);
}

inline EigenPair hermitian_evd(const HermitianMatrix& r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(r.matrix());
  if (solver.info() != Eigen::Success)
    throw numerical_error("hermitian_evd: eigenvalue iteration failed to converge");
  // Eigen sorts ascending; flip to descending.
  const int n = r.dim();
  EigenPair out;
  out.values = solver.eigenvalues().reverse();
  out.vectors.resize(n, n);
  for (int i = 0; i < n; ++i) out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  return out;
}

/// Principal Hermitian square root S = U * Lambda^{1/2} * U^H of a PSD matrix.
/// Eigenvalues in [-1e-10*lambda_max, 0) clamp to zero; anything lower is
/// treated as a genuinely indefinite input.
inline Eigen::MatrixXcd hermitian_sqrt(const HermitianMatrix& r) {
  EigenPair ep = hermitian_evd(r);
  const int n = r.dim();
  const double lmax = std::max(ep.values(0), 0.0);
  Eigen::VectorXd sqrt_vals(n);
  for (int i = 0; i < n; ++i) {
    double v = ep.values(i);
    if (v < -1e-10 * lmax)
      throw numerical_error("hermitian_sqrt: matrix is not positive semidefinite");
    sqrt_vals(i) = std::sqrt(std::max(v, 0.0));
  }
  return ep.vectors * sqrt_vals.asDiagonal() * ep.vectors.adjoint();
}

/// Moore-Penrose pseudo-inverse; singular values below tol_rel * sigma_max
/// are treated as zero.
inline Eigen::MatrixXcd pseudo_inverse(const Eigen::MatrixXcd& a,
                                       double tol_rel = 1e-10) {
  if (a.size() == 0) return Eigen::MatrixXcd(a.cols(), a.rows());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = tol_rel * (sigma.size() > 0 ? sigma(0) : 0.0);
  Eigen::VectorXd inv_sigma = Eigen::VectorXd::Zero(sigma.size());
  for (int i = 0; i < sigma.size(); ++i)
    if (sigma(i) > cutoff && sigma(i) > 0.0) inv_sigma(i) = 1.0 / sigma(i);
  return svd.matrixV() * inv_sigma.asDiagonal() * svd.matrixU().adjoint();
}

struct PowerIterationResult {
  Eigen::VectorXcd vector;  // unit norm
  int iterations = 0;       // matrix-vector products performed (beta)
  bool converged = false;
};

/// Power iteration x <- R x with per-step renormalization (direction is
/// unchanged; unnormalized iterates overflow for large ||R||). Stops when the
/// alignment residual 1 - |x_n^H x_{n-1}| drops below tol. Reaching max_iter
/// is reported via converged=false, not thrown: the last iterate is still the
/// best available steering estimate.
inline PowerIterationResult power_iteration(const HermitianMatrix& r,
                                            const Eigen::VectorXcd& x0,
                                            double tol = 1e-10,
                                            int max_iter = 100) {
  if (x0.size() != r.dim())
    throw std::invalid_argument("power_iteration: x0 dimension mismatch");
  const double n0 = x0.norm();
  if (!(n0 > 0.0)) throw std::invalid_argument("power_iteration: x0 must be nonzero");
  if (max_iter < 1) throw std::invalid_argument("power_iteration: max_iter must be >= 1");

  const double breakdown = 1e-300;
  Eigen::VectorXcd x = x0 / n0;
  for (int n = 1; n <= max_iter; ++n) {
    Eigen::VectorXcd y = r.matrix() * x;
    const double ny = y.norm();
    if (!(ny > breakdown))
      throw numerical_error("power_iteration: iterate annihilated (x0 orthogonal to range?)");
    y /= ny;
    const double residual = 1.0 - std::abs(y.dot(x));
    x = std::move(y);
    if (residual < tol) return {std::move(x), n, true};
  }
  return {std::move(x), max_iter, false};
}

}  // namespace doa
