#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "emcert/error.hpp"
#include "emcert/linalg.hpp"

namespace emcert {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Coordinates of a Lie algebra element in the basis of its LieGroupSpec.
struct AlgebraElement {
  VectorXd coeffs;

  AlgebraElement() = default;
  explicit AlgebraElement(VectorXd c) : coeffs(std::move(c)) {}
  static AlgebraElement zero(int dim) { return AlgebraElement(VectorXd::Zero(dim)); }

  int dim() const { return static_cast<int>(coeffs.size()); }
};

/// Coordinates of an element of the dual algebra in the dual basis.
struct DualElement {
  VectorXd coeffs;

  DualElement() = default;
  explicit DualElement(VectorXd c) : coeffs(std::move(c)) {}
  static DualElement zero(int dim) { return DualElement(VectorXd::Zero(dim)); }

  int dim() const { return static_cast<int>(coeffs.size()); }
};

/// Natural pairing <alpha, zeta>.
inline double pairing(const DualElement& alpha, const AlgebraElement& zeta) {
  if (alpha.dim() != zeta.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "pairing of dual and algebra elements");
  }
  return alpha.coeffs.dot(zeta.coeffs);
}

/// Defining constraint checked whenever a GroupElement is constructed.
enum class GroupConstraint {
  SpecialOrthogonal,  // g^T g = I, det g = 1
  SpecialEuclidean,   // [[R, t], [0, 1]] with R special orthogonal
  General,            // invertible
};

class LieGroupSpec;

/// A matrix in the group. Only LieGroupSpec creates these, after validation.
class GroupElement {
 public:
  const MatrixXd& matrix() const { return matrix_; }

  GroupElement inverse() const { return GroupElement(matrix_.inverse()); }
  GroupElement operator*(const GroupElement& other) const {
    return GroupElement(matrix_ * other.matrix_);
  }

 private:
  friend class LieGroupSpec;
  explicit GroupElement(MatrixXd m) : matrix_(std::move(m)) {}
  MatrixXd matrix_;
};

/// Finite-dimensional matrix Lie group together with a basis of its algebra,
/// structure constants and an inner product on algebra coordinates.
class LieGroupSpec {
 public:
  static constexpr double kConstraintTol = 1e-9;
  static constexpr double kStructureTol = 1e-12;
  static constexpr double kExpansionTol = 1e-9;

  /// Builds a spec from generator matrices; structure constants are computed
  /// by expanding commutators in the basis.
  static LieGroupSpec from_basis(std::string name, int matrix_dim, std::vector<MatrixXd> basis,
                                 MatrixXd inner_product,
                                 GroupConstraint constraint = GroupConstraint::SpecialOrthogonal,
                                 std::vector<MatrixXd> discrete_samples = {}) {
    LieGroupSpec spec(std::move(name), matrix_dim, std::move(basis), std::move(inner_product),
                      constraint);
    spec.compute_structure_constants();
    spec.validate_structure();
    for (auto& m : discrete_samples) spec.discrete_.push_back(spec.element(std::move(m)));
    return spec;
  }

  /// Builds a spec with explicitly supplied structure constants, laid out as
  /// c[(i * dim + j) * dim + k]. They must match the basis commutators.
  static LieGroupSpec from_structure(std::string name, int matrix_dim, std::vector<MatrixXd> basis,
                                     std::vector<double> structure_constants,
                                     MatrixXd inner_product,
                                     GroupConstraint constraint = GroupConstraint::SpecialOrthogonal,
                                     std::vector<MatrixXd> discrete_samples = {}) {
    LieGroupSpec spec = from_basis(std::move(name), matrix_dim, std::move(basis),
                                   std::move(inner_product), constraint,
                                   std::move(discrete_samples));
    const std::size_t n = static_cast<std::size_t>(spec.dim_) * spec.dim_ * spec.dim_;
    if (structure_constants.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "structure constants must have dim^3 entries");
    }
    double scale = 1.0;
    for (double c : spec.c_) scale = std::max(scale, std::abs(c));
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(structure_constants[i] - spec.c_[i]) > kStructureTol * scale) {
        throw Error(ErrorCode::Structure,
                    "structure constants disagree with basis commutators in group '" +
                        spec.name_ + "'");
      }
    }
    spec.c_ = std::move(structure_constants);
    spec.validate_structure();
    return spec;
  }

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int matrix_dim() const { return matrix_dim_; }
  GroupConstraint constraint() const { return constraint_; }
  const std::vector<MatrixXd>& basis() const { return basis_; }
  const std::vector<GroupElement>& discrete_samples() const { return discrete_; }

  double structure_constant(int i, int j, int k) const {
    return c_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }
  const std::vector<double>& structure_constants() const { return c_; }

  /// Inner product on algebra coordinates.
  const MatrixXd& inner_product() const { return inner_; }
  /// Induced inner product on dual coordinates (inverse matrix).
  const MatrixXd& dual_inner_product() const { return dual_inner_; }

  double norm(const AlgebraElement& z) const {
    check(z);
    return std::sqrt(std::max(0.0, z.coeffs.dot(inner_ * z.coeffs)));
  }
  double norm(const DualElement& a) const {
    check(a);
    return std::sqrt(std::max(0.0, a.coeffs.dot(dual_inner_ * a.coeffs)));
  }

  /// Matrix sum_i z_i e_i.
  MatrixXd hat(const AlgebraElement& z) const {
    check(z);
    MatrixXd m = MatrixXd::Zero(matrix_dim_, matrix_dim_);
    for (int i = 0; i < dim_; ++i) m += z.coeffs(i) * basis_[i];
    return m;
  }

  /// Coordinates of an algebra matrix in the basis, by least squares with a
  /// residual check.
  AlgebraElement vee(const MatrixXd& m) const {
    if (m.rows() != matrix_dim_ || m.cols() != matrix_dim_) {
      throw Error(ErrorCode::DimensionMismatch, "matrix size does not match group '" + name_ + "'");
    }
    if (dim_ == 0) {
      if (m.norm() > kExpansionTol) {
        throw Error(ErrorCode::BasisExpansion, "nonzero matrix in trivial algebra");
      }
      return AlgebraElement(VectorXd(0));
    }
    const Eigen::Map<const VectorXd> flat(m.data(), m.size());
    VectorXd c = flat_basis_qr_.solve(flat);
    const double residual = (flat_basis_ * c - flat).norm();
    if (residual > kExpansionTol * std::max(1.0, m.norm())) {
      std::ostringstream os;
      os << "residual " << residual << " expanding matrix in basis of '" << name_ << "'";
      throw Error(ErrorCode::BasisExpansion, os.str());
    }
    return AlgebraElement(std::move(c));
  }

  GroupElement identity() const { return GroupElement(MatrixXd::Identity(matrix_dim_, matrix_dim_)); }

  /// Validates `m` against the group's defining constraint.
  GroupElement element(MatrixXd m) const {
    const double v = constraint_violation(m);
    if (!(v <= kConstraintTol)) {
      std::ostringstream os;
      os << "matrix violates constraints of group '" << name_ << "' by " << v;
      throw Error(ErrorCode::GroupConstraint, os.str());
    }
    return GroupElement(std::move(m));
  }

  double constraint_violation(const MatrixXd& m) const {
    if (m.rows() != matrix_dim_ || m.cols() != matrix_dim_ || !m.allFinite()) {
      return std::numeric_limits<double>::infinity();
    }
    const int d = matrix_dim_;
    switch (constraint_) {
      case GroupConstraint::SpecialOrthogonal:
        return std::max(linalg::max_abs(m.transpose() * m - MatrixXd::Identity(d, d)),
                        std::abs(m.determinant() - 1.0));
      case GroupConstraint::SpecialEuclidean: {
        const MatrixXd r = m.topLeftCorner(d - 1, d - 1);
        double v = std::max(linalg::max_abs(r.transpose() * r - MatrixXd::Identity(d - 1, d - 1)),
                            std::abs(r.determinant() - 1.0));
        v = std::max(v, linalg::max_abs(m.row(d - 1).head(d - 1)));
        return std::max(v, std::abs(m(d - 1, d - 1) - 1.0));
      }
      case GroupConstraint::General:
        return std::abs(m.determinant()) > 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  void check(const AlgebraElement& z) const {
    if (z.dim() != dim_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "algebra element of length " + std::to_string(z.dim()) + " for group '" + name_ +
                      "' of dimension " + std::to_string(dim_));
    }
  }
  void check(const DualElement& a) const {
    if (a.dim() != dim_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "dual element of length " + std::to_string(a.dim()) + " for group '" + name_ +
                      "' of dimension " + std::to_string(dim_));
    }
  }

  /// Largest Jacobi-identity residual over basis triples.
  double jacobi_residual() const {
    double worst = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k)
          for (int m = 0; m < dim_; ++m) {
            // [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j], component m
            double s = 0.0;
            for (int l = 0; l < dim_; ++l) {
              s += structure_constant(i, j, l) * structure_constant(l, k, m) +
                   structure_constant(j, k, l) * structure_constant(l, i, m) +
                   structure_constant(k, i, l) * structure_constant(l, j, m);
            }
            worst = std::max(worst, std::abs(s));
          }
    return worst;
  }

 private:
  LieGroupSpec(std::string name, int matrix_dim, std::vector<MatrixXd> basis, MatrixXd inner,
               GroupConstraint constraint)
      : name_(std::move(name)),
        dim_(static_cast<int>(basis.size())),
        matrix_dim_(matrix_dim),
        constraint_(constraint),
        basis_(std::move(basis)),
        inner_(std::move(inner)) {
    if (matrix_dim_ < 1) throw Error(ErrorCode::DimensionMismatch, "matrix dimension must be >= 1");
    for (const auto& b : basis_) {
      if (b.rows() != matrix_dim_ || b.cols() != matrix_dim_) {
        throw Error(ErrorCode::DimensionMismatch, "basis matrix size mismatch in '" + name_ + "'");
      }
    }
    if (inner_.rows() != dim_ || inner_.cols() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, "inner product must be dim x dim in '" + name_ + "'");
    }
    if (linalg::max_abs(inner_ - inner_.transpose()) > kStructureTol * std::max(1.0, inner_.norm())) {
      throw Error(ErrorCode::Structure, "inner product not symmetric in '" + name_ + "'");
    }
    if (dim_ > 0) {
      Eigen::LLT<MatrixXd> llt(inner_);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::Structure, "inner product not positive definite in '" + name_ + "'");
      }
      dual_inner_ = inner_.inverse();
    } else {
      dual_inner_ = MatrixXd(0, 0);
    }
    flat_basis_ = MatrixXd(matrix_dim_ * matrix_dim_, dim_);
    for (int i = 0; i < dim_; ++i) {
      flat_basis_.col(i) = Eigen::Map<const VectorXd>(basis_[i].data(), basis_[i].size());
    }
    if (dim_ > 0) {
      flat_basis_qr_.compute(flat_basis_);
      if (flat_basis_qr_.rank() != dim_) {
        throw Error(ErrorCode::Structure, "basis matrices are linearly dependent in '" + name_ + "'");
      }
    }
  }

  void compute_structure_constants() {
    c_.assign(static_cast<std::size_t>(dim_) * dim_ * dim_, 0.0);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        const MatrixXd comm = basis_[i] * basis_[j] - basis_[j] * basis_[i];
        const AlgebraElement c = vee(comm);
        for (int k = 0; k < dim_; ++k) c_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k] = c.coeffs(k);
      }
  }

  void validate_structure() const {
    double scale = 1.0;
    for (double c : c_) scale = std::max(scale, std::abs(c));
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k) {
          if (std::abs(structure_constant(i, j, k) + structure_constant(j, i, k)) > kStructureTol * scale) {
            throw Error(ErrorCode::Structure, "structure constants not antisymmetric in '" + name_ + "'");
          }
        }
    if (jacobi_residual() > kStructureTol * scale * scale) {
      throw Error(ErrorCode::Structure, "Jacobi identity fails in '" + name_ + "'");
    }
  }

  std::string name_;
  int dim_ = 0;
  int matrix_dim_ = 1;
  GroupConstraint constraint_ = GroupConstraint::SpecialOrthogonal;
  std::vector<MatrixXd> basis_;
  std::vector<double> c_;
  MatrixXd inner_;
  MatrixXd dual_inner_;
  MatrixXd flat_basis_;
  Eigen::ColPivHouseholderQR<MatrixXd> flat_basis_qr_;
  std::vector<GroupElement> discrete_;
};

// ---------------------------------------------------------------------------
// Algebra operations

/// [zeta, eta] from the structure constants.
inline AlgebraElement bracket(const LieGroupSpec& g, const AlgebraElement& zeta,
                              const AlgebraElement& eta) {
  g.check(zeta);
  g.check(eta);
  const int n = g.dim();
  VectorXd out = VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (zeta.coeffs(i) == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      const double w = zeta.coeffs(i) * eta.coeffs(j);
      if (w == 0.0) continue;
      for (int k = 0; k < n; ++k) out(k) += w * g.structure_constant(i, j, k);
    }
  }
  return AlgebraElement(std::move(out));
}

/// Matrix of ad_zeta acting on algebra coordinates.
inline MatrixXd ad_matrix(const LieGroupSpec& g, const AlgebraElement& zeta) {
  g.check(zeta);
  const int n = g.dim();
  MatrixXd m = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) m(k, j) += zeta.coeffs(i) * g.structure_constant(i, j, k);
  return m;
}

/// Matrix exponential of hat(zeta) (scaling and squaring with Pade).
inline GroupElement exponential(const LieGroupSpec& g, const AlgebraElement& zeta) {
  const MatrixXd x = g.hat(zeta);
  MatrixXd e = x.exp();
  return g.element(std::move(e));
}

/// Ad_g zeta, the coordinates of g hat(zeta) g^{-1}.
inline AlgebraElement adjoint(const LieGroupSpec& g, const GroupElement& h, const AlgebraElement& zeta) {
  const MatrixXd& m = h.matrix();
  return g.vee(m * g.hat(zeta) * m.inverse());
}

/// Matrix of Ad_g on algebra coordinates.
inline MatrixXd adjoint_matrix(const LieGroupSpec& g, const GroupElement& h) {
  const int n = g.dim();
  MatrixXd a(n, n);
  for (int k = 0; k < n; ++k) {
    VectorXd e = VectorXd::Unit(n, k);
    a.col(k) = adjoint(g, h, AlgebraElement(e)).coeffs;
  }
  return a;
}

/// Ad*_g alpha defined by <Ad*_g alpha, zeta> = <alpha, Ad_g zeta>.
/// Equivariant momentum maps satisfy J(g.z) = Ad*_{g^{-1}} J(z).
inline DualElement coadjoint(const LieGroupSpec& g, const GroupElement& h, const DualElement& alpha) {
  g.check(alpha);
  return DualElement(adjoint_matrix(g, h).transpose() * alpha.coeffs);
}

/// ad*_zeta mu with <ad*_zeta mu, eta> = -<mu, [zeta, eta]>. This is the
/// infinitesimal generator of g -> Ad*_{g^{-1}} mu.
inline DualElement coadjoint_algebra(const LieGroupSpec& g, const AlgebraElement& zeta,
                                     const DualElement& mu) {
  g.check(mu);
  return DualElement(-ad_matrix(g, zeta).transpose() * mu.coeffs);
}

/// Cholesky factor L of the inner product (M = L L^T); used to produce
/// bases orthonormal with respect to M.
inline MatrixXd inner_product_factor(const LieGroupSpec& g) {
  if (g.dim() == 0) return MatrixXd(0, 0);
  return Eigen::LLT<MatrixXd>(g.inner_product()).matrixL();
}

/// Columns of `vectors` (algebra coordinates) made orthonormal in the
/// group's inner product, dropping dependent directions.
inline std::vector<AlgebraElement> orthonormalize(const LieGroupSpec& g, const MatrixXd& vectors,
                                                  double rel_tol = 1e-8) {
  std::vector<AlgebraElement> out;
  if (g.dim() == 0 || vectors.cols() == 0) return out;
  const MatrixXd l = inner_product_factor(g);
  const MatrixXd y = linalg::range_basis(l.transpose() * vectors, rel_tol);
  const MatrixXd z = l.transpose().triangularView<Eigen::Upper>().solve(y);
  for (Eigen::Index k = 0; k < z.cols(); ++k) out.emplace_back(VectorXd(z.col(k)));
  return out;
}

/// Null space of a linear map on algebra coordinates, orthonormal in the
/// group inner product. Singular values of map * L^{-T} at or below
/// `threshold` count as zero.
inline std::vector<AlgebraElement> algebra_null_space(const LieGroupSpec& g, const MatrixXd& map,
                                                      double threshold) {
  std::vector<AlgebraElement> out;
  if (g.dim() == 0) return out;
  const MatrixXd l = inner_product_factor(g);
  // zeta = L^{-T} y  =>  |zeta|_M = |y|
  const MatrixXd l_inv_t = l.transpose().triangularView<Eigen::Upper>().solve(
      MatrixXd::Identity(g.dim(), g.dim()));
  const MatrixXd ny = linalg::null_space_below(map * l_inv_t, g.dim(), threshold);
  const MatrixXd z = l_inv_t * ny;
  for (Eigen::Index k = 0; k < z.cols(); ++k) out.emplace_back(VectorXd(z.col(k)));
  return out;
}

/// Stacks a list of algebra elements as columns.
inline MatrixXd as_columns(const std::vector<AlgebraElement>& v, int dim) {
  MatrixXd m(dim, static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = v[k].coeffs;
  return m;
}

/// Basis of g_mu = { zeta : ad*_zeta mu = 0 }, orthonormal in the inner product.
inline std::vector<AlgebraElement> momentum_isotropy_algebra(const LieGroupSpec& g, const DualElement& mu,
                                                             double tol_null = 1e-8) {
  g.check(mu);
  const int n = g.dim();
  MatrixXd map(n, n);
  for (int k = 0; k < n; ++k) {
    map.col(k) = coadjoint_algebra(g, AlgebraElement(VectorXd::Unit(n, k)), mu).coeffs;
  }
  const double scale = mu.coeffs.norm();
  return algebra_null_space(g, map, scale > 0 ? tol_null * scale : 1e-14);
}

/// M-orthogonal projection of zeta onto the complement of span(orthonormal basis).
inline AlgebraElement project_out(const LieGroupSpec& g, const AlgebraElement& zeta,
                                  const std::vector<AlgebraElement>& orthonormal) {
  VectorXd v = zeta.coeffs;
  for (const auto& b : orthonormal) v -= b.coeffs.dot(g.inner_product() * zeta.coeffs) * b.coeffs;
  return AlgebraElement(std::move(v));
}

// ---------------------------------------------------------------------------
// Invariant inner products

struct InvarianceReport {
  int samples = 0;
  double max_violation_algebra = 0.0;  // | |Ad_g z| - |z| |
  double max_violation_dual = 0.0;     // | |Ad*_g a| - |a| |
  double max_pairing_excess = 0.0;     // max(0, <a,z> - |a| |z|)
  double tolerance = 1e-8;
  std::string offending_sample;        // empty when passed
  bool passed = true;
};

/// Random group element exp(sum c_i b_i) with c_i ~ N(0, scale^2).
inline GroupElement random_subgroup_element(const LieGroupSpec& g, const std::vector<AlgebraElement>& sub,
                                            std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  VectorXd z = VectorXd::Zero(g.dim());
  for (const auto& b : sub) z += normal(rng) * b.coeffs;
  return exponential(g, AlgebraElement(z));
}

/// Checks Ad-invariance of the algebra norm and Ad*-invariance of the dual
/// norm on group elements exp(subalgebra) plus `extra` (e.g. discrete samples).
inline InvarianceReport check_invariance_under(const LieGroupSpec& g, const std::vector<AlgebraElement>& sub,
                                               const std::vector<GroupElement>& extra, int n_samples,
                                               std::uint64_t seed = 7, double tol = 1e-8) {
  if (n_samples < 1) throw Error(ErrorCode::Usage, "n_samples must be >= 1");
  InvarianceReport rep;
  rep.tolerance = tol;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int n = g.dim();
  auto random_vec = [&] {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = normal(rng);
    return v;
  };
  std::vector<std::pair<GroupElement, std::string>> elems;
  for (int s = 0; s < n_samples; ++s) {
    elems.emplace_back(random_subgroup_element(g, sub, rng, 1.5), "exp sample " + std::to_string(s));
  }
  for (std::size_t s = 0; s < extra.size(); ++s) {
    elems.emplace_back(extra[s], "discrete sample " + std::to_string(s));
  }
  for (const auto& [h, label] : elems) {
    const MatrixXd ad = adjoint_matrix(g, h);
    for (int trial = 0; trial < 3; ++trial) {
      const AlgebraElement z(random_vec());
      const DualElement a(random_vec());
      const double vz = std::abs(g.norm(AlgebraElement(ad * z.coeffs)) - g.norm(z));
      const double va = std::abs(g.norm(DualElement(ad.transpose() * a.coeffs)) - g.norm(a));
      const double excess = std::max(0.0, pairing(a, z) - g.norm(a) * g.norm(z));
      rep.max_violation_algebra = std::max(rep.max_violation_algebra, vz);
      rep.max_violation_dual = std::max(rep.max_violation_dual, va);
      rep.max_pairing_excess = std::max(rep.max_pairing_excess, excess);
      if (rep.passed && (vz > tol || va > tol || excess > tol)) {
        rep.passed = false;
        rep.offending_sample = label;
      }
    }
    ++rep.samples;
  }
  return rep;
}

/// Invariance of the inner products under the whole group (identity
/// component sampled through exp, plus the spec's discrete samples).
inline InvarianceReport check_invariant_inner_products(const LieGroupSpec& g, int n_samples,
                                                       std::uint64_t seed = 7, double tol = 1e-8) {
  std::vector<AlgebraElement> full;
  for (int k = 0; k < g.dim(); ++k) full.emplace_back(VectorXd(VectorXd::Unit(g.dim(), k)));
  return check_invariance_under(g, full, g.discrete_samples(), n_samples, seed, tol);
}

// ---------------------------------------------------------------------------
// Built-in groups

inline MatrixXd so3_hat(const Eigen::Vector3d& w) {
  MatrixXd m(3, 3);
  m << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
  return m;
}

inline LieGroupSpec trivial_group() {
  return LieGroupSpec::from_basis("trivial", 1, {}, MatrixXd(0, 0));
}

inline LieGroupSpec so3_group(MatrixXd inner_product = MatrixXd::Identity(3, 3)) {
  return LieGroupSpec::from_basis("so3", 3,
                                  {so3_hat({1, 0, 0}), so3_hat({0, 1, 0}), so3_hat({0, 0, 1})},
                                  std::move(inner_product));
}

/// SO(2) as 2x2 rotation matrices; the generator rotates counterclockwise.
inline LieGroupSpec torus1_group() {
  MatrixXd e(2, 2);
  e << 0, -1, 1, 0;
  return LieGroupSpec::from_basis("torus1", 2, {e}, MatrixXd::Identity(1, 1));
}

inline LieGroupSpec torus2_group() {
  MatrixXd e1 = MatrixXd::Zero(4, 4);
  MatrixXd e2 = MatrixXd::Zero(4, 4);
  e1(0, 1) = -1;
  e1(1, 0) = 1;
  e2(2, 3) = -1;
  e2(3, 2) = 1;
  return LieGroupSpec::from_basis("torus2", 4, {e1, e2}, MatrixXd::Identity(2, 2));
}

inline const std::vector<std::string>& builtin_group_names() {
  static const std::vector<std::string> names = {"trivial", "so3", "torus1", "torus2"};
  return names;
}

inline LieGroupSpec builtin_group(const std::string& name) {
  if (name == "trivial") return trivial_group();
  if (name == "so3") return so3_group();
  if (name == "torus1") return torus1_group();
  if (name == "torus2") return torus2_group();
  throw Error(ErrorCode::UnknownSystem,
              "unknown group '" + name + "' (known: trivial, so3, torus1, torus2)");
}

}  // namespace emcert
