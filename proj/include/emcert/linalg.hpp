#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace emcert::linalg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Orthonormal basis of the null space of `a`: right singular vectors whose
/// singular value is at most `threshold`.
inline MatrixXd null_space_below(const MatrixXd& a, int cols, double threshold) {
  if (cols == 0) return MatrixXd(0, 0);
  if (a.rows() == 0) return MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > threshold) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

/// Orthonormal basis (columns) of the null space of `a`.
///
/// Singular values at or below `rel_tol * sigma_max` count as zero; when
/// sigma_max itself is zero the absolute tolerance `abs_tol` is used instead,
/// so an all-zero matrix has the whole domain as its null space.
inline MatrixXd null_space(const MatrixXd& a, int cols, double rel_tol = 1e-8,
                           double abs_tol = 1e-14) {
  if (cols == 0) return MatrixXd(0, 0);
  if (a.rows() == 0) return MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeFullV);
  const VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  const double tol = smax > abs_tol ? rel_tol * smax : abs_tol;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

/// Orthonormal basis of the column span of `a` (same threshold rule as null_space).
inline MatrixXd range_basis(const MatrixXd& a, double rel_tol = 1e-8, double abs_tol = 1e-14) {
  if (a.cols() == 0 || a.rows() == 0) return MatrixXd(a.rows(), 0);
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU);
  const VectorXd& s = svd.singularValues();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  const double tol = smax > abs_tol ? rel_tol * smax : abs_tol;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

/// Orthonormal complement of the span of the orthonormal columns `q` in R^n.
inline MatrixXd orthogonal_complement(const MatrixXd& q, int n) {
  if (q.cols() == 0) return MatrixXd::Identity(n, n);
  return null_space(q.transpose(), n);
}

/// Largest principal angle (radians) between the spans of two orthonormal
/// bases. Spans of different dimension are reported as pi/2; two empty
/// spans are identical.
inline double largest_principal_angle(const MatrixXd& a, const MatrixXd& b) {
  if (a.cols() != b.cols()) return M_PI / 2;
  if (a.cols() == 0) return 0.0;
  // sin of the largest angle is the norm of b's component outside span(a).
  const MatrixXd outside = b - a * (a.transpose() * b);
  const double s = Eigen::JacobiSVD<MatrixXd>(outside).singularValues()(0);
  return std::asin(std::clamp(s, 0.0, 1.0));
}

/// Norm of the component of the columns of `b` outside span of orthonormal `a`.
inline double inclusion_residual(const MatrixXd& a, const MatrixXd& b) {
  if (b.cols() == 0) return 0.0;
  if (a.cols() == 0) return b.norm();
  return (b - a * (a.transpose() * b)).norm();
}

inline MatrixXd symmetrize(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

struct SymmetricEigen {
  VectorXd values;   // ascending
  MatrixXd vectors;  // columns
};

inline SymmetricEigen symmetric_eigen(const MatrixXd& a) {
  if (a.rows() == 0) return {VectorXd(0), MatrixXd(0, 0)};
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a));
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Largest absolute entry; 0 for an empty matrix.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double spectral_radius(const VectorXd& eigenvalues) {
  return eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
}

/// Minimal-norm least-squares solution of a x = b.
inline VectorXd min_norm_solve(const MatrixXd& a, const VectorXd& b) {
  if (a.cols() == 0) return VectorXd(0);
  if (a.rows() == 0) return VectorXd::Zero(a.cols());
  return a.completeOrthogonalDecomposition().solve(b);
}

inline bool all_finite(const MatrixXd& a) { return a.allFinite(); }

}  // namespace emcert::linalg
