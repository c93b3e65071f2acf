#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "emcert/error.hpp"
#include "emcert/lie.hpp"
#include "emcert/linalg.hpp"

namespace emcert {

/// A point of the phase-space chart.
using Point = Eigen::VectorXd;

/// Finite-dimensional Poisson manifold (one chart) with a Hamiltonian, a
/// group action, its momentum map and a vector of Casimirs.
///
/// Callbacks must be re-entrant: the library evaluates them from several
/// threads when experiments run in parallel. Optional analytic derivatives
/// replace the finite-difference fallbacks when present.
struct PhaseSpaceSystem {
  std::string name;
  int n = 0;
  LieGroupSpec group = trivial_group();

  std::function<MatrixXd(const Point&)> poisson_tensor;
  std::function<double(const Point&)> hamiltonian;
  std::function<VectorXd(const Point&)> momentum_map;  // length group.dim(); may be empty when dim = 0
  std::function<VectorXd(const Point&)> casimirs;      // length dim_v; may be empty when dim_v = 0
  int dim_v = 0;
  MatrixXd inner_product_v = MatrixXd(0, 0);
  std::function<Point(const GroupElement&, const Point&)> action;
  /// For linear actions: n x n matrices A_i with zeta_M(z) = sum zeta_i A_i z.
  std::vector<MatrixXd> linear_generators;

  std::function<VectorXd(const Point&)> hamiltonian_gradient;
  std::function<MatrixXd(const Point&)> hamiltonian_hessian;
  std::function<MatrixXd(const Point&)> momentum_jacobian;                // dim_g x n
  std::function<std::vector<MatrixXd>(const Point&)> momentum_hessians;   // one per component
  std::function<MatrixXd(const Point&)> casimir_jacobian;                 // dim_v x n
  std::function<std::vector<MatrixXd>(const Point&)> casimir_hessians;

  std::map<std::string, double> parameters;

  int dim_g() const { return group.dim(); }
};

enum class DerivativeMode { Auto, FiniteDifference };

namespace numdiff {

inline constexpr double kFirstOrderStep = 1e-5;
inline constexpr double kSecondOrderStep = 1e-4;

inline double step(double h0, double x) { return h0 * std::max(1.0, std::abs(x)); }

/// Central-difference Jacobian of a vector map (rows = outputs).
inline MatrixXd jacobian(const std::function<VectorXd(const Point&)>& f, const Point& z, int m,
                         double h0 = kFirstOrderStep) {
  const int n = static_cast<int>(z.size());
  MatrixXd jac(m, n);
  Point zp = z, zm = z;
  for (int i = 0; i < n; ++i) {
    const double h = step(h0, z(i));
    zp(i) = z(i) + h;
    zm(i) = z(i) - h;
    const VectorXd fp = f(zp), fm = f(zm);
    if (!fp.allFinite() || !fm.allFinite()) {
      throw EvaluationError("non-finite sample in finite-difference Jacobian", i);
    }
    jac.col(i) = (fp - fm) / (zp(i) - zm(i));
    zp(i) = z(i);
    zm(i) = z(i);
  }
  return jac;
}

inline VectorXd gradient(const std::function<double(const Point&)>& f, const Point& z,
                         double h0 = kFirstOrderStep) {
  const int n = static_cast<int>(z.size());
  VectorXd g(n);
  Point zp = z, zm = z;
  for (int i = 0; i < n; ++i) {
    const double h = step(h0, z(i));
    zp(i) = z(i) + h;
    zm(i) = z(i) - h;
    const double fp = f(zp), fm = f(zm);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw EvaluationError("non-finite sample in finite-difference gradient", i);
    }
    g(i) = (fp - fm) / (zp(i) - zm(i));
    zp(i) = z(i);
    zm(i) = z(i);
  }
  return g;
}

/// Second differences, symmetrized as (A + A^T) / 2.
inline MatrixXd hessian(const std::function<double(const Point&)>& f, const Point& z,
                        double h0 = kSecondOrderStep) {
  const int n = static_cast<int>(z.size());
  MatrixXd hess(n, n);
  const double f0 = f(z);
  auto eval = [&](const Point& p, int idx) {
    const double v = f(p);
    if (!std::isfinite(v)) throw EvaluationError("non-finite sample in finite-difference Hessian", idx);
    return v;
  };
  if (!std::isfinite(f0)) throw EvaluationError("non-finite value at Hessian base point", 0);
  for (int i = 0; i < n; ++i) {
    const double hi = step(h0, z(i));
    Point p = z;
    p(i) = z(i) + hi;
    const double fp = eval(p, i);
    p(i) = z(i) - hi;
    const double fm = eval(p, i);
    hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (int j = i + 1; j < n; ++j) {
      const double hj = step(h0, z(j));
      Point q = z;
      q(i) += hi;
      q(j) += hj;
      const double fpp = eval(q, j);
      q(j) = z(j) - hj;
      const double fpm = eval(q, j);
      q(i) = z(i) - hi;
      const double fmm = eval(q, j);
      q(j) = z(j) + hj;
      const double fmp = eval(q, j);
      hess(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
      hess(j, i) = hess(i, j);
    }
  }
  return linalg::symmetrize(hess);
}

}  // namespace numdiff

// ---------------------------------------------------------------------------
// Evaluation

inline void check_point(const PhaseSpaceSystem& sys, const Point& z) {
  if (z.size() != sys.n) {
    throw Error(ErrorCode::DimensionMismatch, "point of length " + std::to_string(z.size()) +
                                                  " for system '" + sys.name + "' of dimension " +
                                                  std::to_string(sys.n));
  }
}

inline void require_finite(const VectorXd& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) throw EvaluationError(std::string("non-finite ") + what, static_cast<int>(i));
  }
}

inline double hamiltonian(const PhaseSpaceSystem& sys, const Point& z) {
  check_point(sys, z);
  const double h = sys.hamiltonian(z);
  if (!std::isfinite(h)) throw EvaluationError("non-finite Hamiltonian", 0);
  return h;
}

inline DualElement momentum(const PhaseSpaceSystem& sys, const Point& z) {
  check_point(sys, z);
  if (sys.dim_g() == 0 || !sys.momentum_map) return DualElement(VectorXd::Zero(sys.dim_g()));
  VectorXd j = sys.momentum_map(z);
  if (j.size() != sys.dim_g()) throw Error(ErrorCode::DimensionMismatch, "momentum map length");
  require_finite(j, "momentum map");
  return DualElement(std::move(j));
}

inline VectorXd casimirs(const PhaseSpaceSystem& sys, const Point& z) {
  check_point(sys, z);
  if (sys.dim_v == 0 || !sys.casimirs) return VectorXd(0);
  VectorXd c = sys.casimirs(z);
  if (c.size() != sys.dim_v) throw Error(ErrorCode::DimensionMismatch, "Casimir vector length");
  require_finite(c, "Casimir value");
  return c;
}

inline MatrixXd poisson_tensor(const PhaseSpaceSystem& sys, const Point& z) {
  check_point(sys, z);
  MatrixXd b = sys.poisson_tensor(z);
  if (b.rows() != sys.n || b.cols() != sys.n) throw Error(ErrorCode::DimensionMismatch, "Poisson tensor size");
  return b;
}

inline Point act(const PhaseSpaceSystem& sys, const GroupElement& g, const Point& z) {
  check_point(sys, z);
  if (!sys.action) return z;
  return sys.action(g, z);
}

// ---------------------------------------------------------------------------
// Derivatives

inline VectorXd hamiltonian_gradient(const PhaseSpaceSystem& sys, const Point& z,
                                     DerivativeMode mode = DerivativeMode::Auto) {
  check_point(sys, z);
  VectorXd g = (mode == DerivativeMode::Auto && sys.hamiltonian_gradient)
                   ? sys.hamiltonian_gradient(z)
                   : numdiff::gradient([&](const Point& p) { return hamiltonian(sys, p); }, z);
  require_finite(g, "Hamiltonian gradient");
  return g;
}

inline MatrixXd hamiltonian_hessian(const PhaseSpaceSystem& sys, const Point& z,
                                    DerivativeMode mode = DerivativeMode::Auto) {
  check_point(sys, z);
  if (mode == DerivativeMode::Auto && sys.hamiltonian_hessian) return linalg::symmetrize(sys.hamiltonian_hessian(z));
  return numdiff::hessian([&](const Point& p) { return hamiltonian(sys, p); }, z);
}

/// DJ(z), dim_g x n.
inline MatrixXd momentum_jacobian(const PhaseSpaceSystem& sys, const Point& z,
                                  DerivativeMode mode = DerivativeMode::Auto) {
  check_point(sys, z);
  if (sys.dim_g() == 0 || !sys.momentum_map) return MatrixXd::Zero(sys.dim_g(), sys.n);
  if (mode == DerivativeMode::Auto && sys.momentum_jacobian) return sys.momentum_jacobian(z);
  return numdiff::jacobian([&](const Point& p) { return momentum(sys, p).coeffs; }, z, sys.dim_g());
}

/// Hessian of each momentum component.
inline std::vector<MatrixXd> momentum_hessians(const PhaseSpaceSystem& sys, const Point& z,
                                               DerivativeMode mode = DerivativeMode::Auto) {
  check_point(sys, z);
  if (sys.dim_g() == 0 || !sys.momentum_map) return std::vector<MatrixXd>(sys.dim_g(), MatrixXd::Zero(sys.n, sys.n));
  if (mode == DerivativeMode::Auto && sys.momentum_hessians) return sys.momentum_hessians(z);
  std::vector<MatrixXd> out;
  for (int k = 0; k < sys.dim_g(); ++k) {
    out.push_back(numdiff::hessian([&](const Point& p) { return momentum(sys, p).coeffs(k); }, z));
  }
  return out;
}

/// DC(z), dim_v x n.
inline MatrixXd casimir_jacobian(const PhaseSpaceSystem& sys, const Point& z,
                                 DerivativeMode mode = DerivativeMode::Auto) {
  check_point(sys, z);
  if (sys.dim_v == 0 || !sys.casimirs) return MatrixXd::Zero(0, sys.n);
  if (mode == DerivativeMode::Auto && sys.casimir_jacobian) return sys.casimir_jacobian(z);
  return numdiff::jacobian([&](const Point& p) { return casimirs(sys, p); }, z, sys.dim_v);
}

inline std::vector<MatrixXd> casimir_hessians(const PhaseSpaceSystem& sys, const Point& z,
                                              DerivativeMode mode = DerivativeMode::Auto) {
  check_point(sys, z);
  if (sys.dim_v == 0 || !sys.casimirs) return {};
  if (mode == DerivativeMode::Auto && sys.casimir_hessians) return sys.casimir_hessians(z);
  std::vector<MatrixXd> out;
  for (int k = 0; k < sys.dim_v; ++k) {
    out.push_back(numdiff::hessian([&](const Point& p) { return casimirs(sys, p)(k); }, z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Vector fields

/// X_H(z) = B(z) grad H(z).
inline VectorXd hamiltonian_vector_field(const PhaseSpaceSystem& sys, const Point& z,
                                         DerivativeMode mode = DerivativeMode::Auto) {
  VectorXd x = poisson_tensor(sys, z) * hamiltonian_gradient(sys, z, mode);
  require_finite(x, "Hamiltonian vector field");
  return x;
}

/// zeta_M(z) = d/dt|0 exp(t zeta) . z
inline VectorXd infinitesimal_generator(const PhaseSpaceSystem& sys, const AlgebraElement& zeta,
                                        const Point& z) {
  check_point(sys, z);
  sys.group.check(zeta);
  if (sys.dim_g() == 0) return VectorXd::Zero(sys.n);
  if (!sys.linear_generators.empty()) {
    VectorXd v = VectorXd::Zero(sys.n);
    for (int i = 0; i < sys.dim_g(); ++i) {
      if (zeta.coeffs(i) != 0.0) v += zeta.coeffs(i) * (sys.linear_generators[i] * z);
    }
    return v;
  }
  const double norm = zeta.coeffs.norm();
  if (norm == 0.0) return VectorXd::Zero(sys.n);
  const double t = numdiff::kFirstOrderStep / std::max(1.0, norm);
  const Point zp = act(sys, exponential(sys.group, AlgebraElement(t * zeta.coeffs)), z);
  const Point zm = act(sys, exponential(sys.group, AlgebraElement(-t * zeta.coeffs)), z);
  return (zp - zm) / (2.0 * t);
}

/// n x dim_g matrix whose columns are the generators of the basis elements.
inline MatrixXd generator_matrix(const PhaseSpaceSystem& sys, const Point& z) {
  MatrixXd m(sys.n, sys.dim_g());
  for (int i = 0; i < sys.dim_g(); ++i) {
    m.col(i) = infinitesimal_generator(sys, AlgebraElement(VectorXd::Unit(sys.dim_g(), i)), z);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Structure checks

struct CheckResult {
  double max_violation = 0.0;
  bool passed = true;
};

struct StructureReport {
  int samples = 0;
  double tolerance = 1e-6;
  CheckResult poisson_antisymmetry;
  CheckResult poisson_jacobi;
  CheckResult identity_action;
  CheckResult hamiltonian_invariance;   // H(g.z) = H(z)
  CheckResult casimir_invariance;       // C(g.z) = C(z), g in G_mu
  CheckResult casimir_property;         // {C_k, z_i} = 0
  CheckResult momentum_equivariance;    // J(g.z) = Ad*_{g^-1} J(z)
  CheckResult generator_consistency;    // X_{J_zeta} = zeta_M

  bool passed() const {
    return poisson_antisymmetry.passed && poisson_jacobi.passed && identity_action.passed &&
           hamiltonian_invariance.passed && casimir_invariance.passed && casimir_property.passed &&
           momentum_equivariance.passed && generator_consistency.passed;
  }

  std::vector<std::pair<std::string, const CheckResult*>> entries() const {
    return {{"poisson_antisymmetry", &poisson_antisymmetry},
            {"poisson_jacobi", &poisson_jacobi},
            {"identity_action", &identity_action},
            {"hamiltonian_invariance", &hamiltonian_invariance},
            {"casimir_invariance", &casimir_invariance},
            {"casimir_property", &casimir_property},
            {"momentum_equivariance", &momentum_equivariance},
            {"generator_consistency", &generator_consistency}};
  }
};

/// Jacobi identity residual of the Poisson bracket on coordinate triples,
/// with derivatives of B by central differences.
inline double poisson_jacobi_residual(const PhaseSpaceSystem& sys, const Point& z) {
  const int n = sys.n;
  const MatrixXd b = poisson_tensor(sys, z);
  std::vector<MatrixXd> db(n);
  for (int l = 0; l < n; ++l) {
    const double h = numdiff::step(numdiff::kFirstOrderStep, z(l));
    Point zp = z, zm = z;
    zp(l) += h;
    zm(l) -= h;
    db[l] = (poisson_tensor(sys, zp) - poisson_tensor(sys, zm)) / (zp(l) - zm(l));
  }
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) {
          s += b(i, l) * db[l](j, k) + b(j, l) * db[l](k, i) + b(k, l) * db[l](i, j);
        }
        worst = std::max(worst, std::abs(s));
      }
  return worst;
}

namespace detail {
inline void record(CheckResult& r, double v, double tol) {
  r.max_violation = std::max(r.max_violation, v);
  if (!(v <= tol)) r.passed = false;
}
}  // namespace detail

/// Samples points uniformly in [-scale, scale]^n and group elements through
/// exp (plus discrete samples) and checks the structural hypotheses.
inline StructureReport check_structure(const PhaseSpaceSystem& sys, int n_samples, std::uint64_t seed = 11,
                                       double tol = 1e-6, double sample_scale = 1.0) {
  if (n_samples < 1) throw Error(ErrorCode::Usage, "n_samples must be >= 1");
  StructureReport rep;
  rep.tolerance = tol;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-sample_scale, sample_scale);
  std::vector<AlgebraElement> full;
  for (int k = 0; k < sys.dim_g(); ++k) full.emplace_back(VectorXd(VectorXd::Unit(sys.dim_g(), k)));

  for (int s = 0; s < n_samples; ++s) {
    Point z(sys.n);
    for (int i = 0; i < sys.n; ++i) z(i) = uni(rng);

    const MatrixXd b = poisson_tensor(sys, z);
    detail::record(rep.poisson_antisymmetry, linalg::max_abs(b + b.transpose()), tol);
    detail::record(rep.poisson_jacobi, poisson_jacobi_residual(sys, z), tol);
    detail::record(rep.identity_action, linalg::max_abs(act(sys, sys.group.identity(), z) - z), 0.0);

    std::vector<GroupElement> elems{random_subgroup_element(sys.group, full, rng, 1.5)};
    if (s < static_cast<int>(sys.group.discrete_samples().size())) elems.push_back(sys.group.discrete_samples()[s]);

    const double h = hamiltonian(sys, z);
    const DualElement j = momentum(sys, z);
    for (const auto& g : elems) {
      const Point gz = act(sys, g, z);
      detail::record(rep.hamiltonian_invariance, std::abs(hamiltonian(sys, gz) - h), tol);
      const DualElement expected = coadjoint(sys.group, g.inverse(), j);
      detail::record(rep.momentum_equivariance, (momentum(sys, gz).coeffs - expected.coeffs).norm(), tol);
    }

    if (sys.dim_v > 0) {
      const VectorXd c = casimirs(sys, z);
      const auto g_mu = momentum_isotropy_algebra(sys.group, j);
      const GroupElement g = random_subgroup_element(sys.group, g_mu, rng, 1.5);
      detail::record(rep.casimir_invariance, (casimirs(sys, act(sys, g, z)) - c).norm(), tol);
      const MatrixXd dc = casimir_jacobian(sys, z);
      // {C_k, z_i} = (B grad C_k)_i
      detail::record(rep.casimir_property, linalg::max_abs(b * dc.transpose()), tol);
    }

    if (sys.dim_g() > 0) {
      const MatrixXd dj = momentum_jacobian(sys, z);
      const MatrixXd gens = generator_matrix(sys, z);
      // X_{J_zeta} = B dJ^T zeta, compared on basis elements
      detail::record(rep.generator_consistency, linalg::max_abs(b * dj.transpose() - gens), tol);
    }
    ++rep.samples;
  }
  return rep;
}

/// check_structure that throws on failure (strict mode).
inline StructureReport require_structure(const PhaseSpaceSystem& sys, int n_samples, std::uint64_t seed = 11,
                                         double tol = 1e-6) {
  StructureReport rep = check_structure(sys, n_samples, seed, tol);
  if (!rep.passed()) {
    std::string failed;
    for (const auto& [name, r] : rep.entries()) {
      if (!r->passed) failed += (failed.empty() ? "" : ", ") + name;
    }
    throw Error(ErrorCode::Structure, "system '" + sys.name + "' fails structure checks: " + failed);
  }
  return rep;
}

}  // namespace emcert
