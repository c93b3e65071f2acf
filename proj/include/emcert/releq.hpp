#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "emcert/error.hpp"
#include "emcert/lie.hpp"
#include "emcert/linalg.hpp"
#include "emcert/phase.hpp"

namespace emcert {

/// A point z_e whose trajectory is exp(t xi) . z_e, with mu = J(z_e).
struct RelativeEquilibrium {
  Point z_e;
  AlgebraElement xi;
  DualElement mu;
  double residual_norm = 0.0;
  /// The isotropy algebra at z_e is nontrivial, so xi is only determined
  /// up to it; xi is then the minimal-norm representative.
  bool isotropy_nontrivial = false;
  int iterations = 0;
};

struct ReleqOptions {
  double tol_re = 1e-9;
  double tol_null = 1e-8;
  int max_iterations = 200;
};

/// |X_H(z) - xi_M(z)|
inline double relative_equilibrium_residual(const PhaseSpaceSystem& sys, const Point& z, const AlgebraElement& xi) {
  return (hamiltonian_vector_field(sys, z) - infinitesimal_generator(sys, xi, z)).norm();
}

/// Basis of g_z = { zeta : zeta_M(z) = 0 }, orthonormal in the group inner product.
inline std::vector<AlgebraElement> point_isotropy_algebra(const PhaseSpaceSystem& sys, const Point& z,
                                                          double tol_null = 1e-8) {
  if (sys.dim_g() == 0) return {};
  const MatrixXd gens = generator_matrix(sys, z);
  const MatrixXd l = inner_product_factor(sys.group);
  const MatrixXd l_inv_t =
      l.transpose().triangularView<Eigen::Upper>().solve(MatrixXd::Identity(sys.dim_g(), sys.dim_g()));
  const double smax = Eigen::JacobiSVD<MatrixXd>(gens * l_inv_t).singularValues()(0);
  const double threshold = smax > 1e-14 ? tol_null * smax : 1e-14;
  return algebra_null_space(sys.group, gens, threshold);
}

namespace detail {

/// Minimal-norm xi for fixed z: least squares on the generator matrix.
inline AlgebraElement best_generator(const PhaseSpaceSystem& sys, const Point& z) {
  if (sys.dim_g() == 0) return AlgebraElement(VectorXd(0));
  return AlgebraElement(linalg::min_norm_solve(generator_matrix(sys, z), hamiltonian_vector_field(sys, z)));
}

inline RelativeEquilibrium finish(const PhaseSpaceSystem& sys, const Point& z, const AlgebraElement& xi,
                                  int iterations, const ReleqOptions& opt) {
  RelativeEquilibrium re;
  re.z_e = z;
  const auto iso = point_isotropy_algebra(sys, z, opt.tol_null);
  re.isotropy_nontrivial = !iso.empty();
  re.xi = project_out(sys.group, xi, iso);
  re.mu = momentum(sys, z);
  re.residual_norm = relative_equilibrium_residual(sys, z, re.xi);
  re.iterations = iterations;
  return re;
}

}  // namespace detail

/// Validates a given (z, xi) pair, reducing xi to its minimal-norm
/// representative modulo the isotropy algebra.
inline RelativeEquilibrium make_relative_equilibrium(const PhaseSpaceSystem& sys, const Point& z,
                                                     const AlgebraElement& xi, const ReleqOptions& opt = {}) {
  const double r = relative_equilibrium_residual(sys, z, xi);
  if (!(r <= opt.tol_re)) {
    throw Error(ErrorCode::Structure,
                "not a relative equilibrium: residual " + std::to_string(r) + " exceeds tolerance");
  }
  return detail::finish(sys, z, xi, 0, opt);
}

/// Levenberg-Marquardt on 1/2 |X_H(z) - xi_M(z)|^2 over (z, xi). Group-orbit
/// directions are neutral, so steps are damped minimal-norm solves.
///
/// The Casimir values of z0 are held as extra residual rows: X_H vanishes to
/// second order at degenerate points such as the origin of a Lie-Poisson
/// space, and without the rows the iteration drifts there instead of to an
/// equilibrium on the symplectic leaf of the seed.
inline RelativeEquilibrium find_relative_equilibrium(const PhaseSpaceSystem& sys, const Point& z0,
                                                     const AlgebraElement& xi0, const ReleqOptions& opt = {}) {
  check_point(sys, z0);
  sys.group.check(xi0);
  if (!z0.allFinite() || !xi0.coeffs.allFinite()) {
    throw Error(ErrorCode::Evaluation, "initial guess is not finite");
  }
  const int n = sys.n;
  const int m = sys.dim_g();

  if (relative_equilibrium_residual(sys, z0, xi0) <= opt.tol_re) return detail::finish(sys, z0, xi0, 0, opt);
  const AlgebraElement xi_ls = detail::best_generator(sys, z0);
  if (relative_equilibrium_residual(sys, z0, xi_ls) <= opt.tol_re) return detail::finish(sys, z0, xi_ls, 0, opt);

  const int nc = sys.dim_v;
  const VectorXd c0 = casimirs(sys, z0);
  VectorXd x(n + m);
  x.head(n) = z0;
  x.tail(m) = xi0.coeffs;
  auto residual = [&](const VectorXd& v) -> VectorXd {
    const Point z = v.head(n);
    VectorXd out(n + nc);
    out.head(n) = hamiltonian_vector_field(sys, z) - infinitesimal_generator(sys, AlgebraElement(v.tail(m)), z);
    if (nc > 0) out.tail(nc) = casimirs(sys, z) - c0;
    return out;
  };
  VectorXd r = residual(x);
  double cost = r.norm();
  double damping = -1.0;

  for (int it = 1; it <= opt.max_iterations; ++it) {
    MatrixXd jac = MatrixXd::Zero(n + nc, n + m);
    const AlgebraElement xi(x.tail(m));
    jac.topLeftCorner(n, n) = numdiff::jacobian(
        [&](const Point& z) { return VectorXd(hamiltonian_vector_field(sys, z) - infinitesimal_generator(sys, xi, z)); },
        x.head(n), n);
    if (m > 0) jac.topRightCorner(n, m) = -generator_matrix(sys, x.head(n));
    if (nc > 0) jac.bottomLeftCorner(nc, n) = casimir_jacobian(sys, x.head(n));
    const MatrixXd jtj = jac.transpose() * jac;
    const VectorXd jtr = jac.transpose() * r;
    if (damping < 0) damping = 1e-6 * std::max(1e-12, jtj.diagonal().maxCoeff());

    bool accepted = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      const MatrixXd lhs = jtj + damping * MatrixXd::Identity(n + m, n + m);
      const VectorXd step = lhs.ldlt().solve(-jtr);
      const VectorXd trial = x + step;
      VectorXd rt;
      try {
        rt = residual(trial);
      } catch (const EvaluationError&) {
        damping *= 10.0;
        continue;
      }
      if (rt.norm() < cost) {
        x = trial;
        r = rt;
        cost = rt.norm();
        damping = std::max(damping / 10.0, 1e-15);
        accepted = true;
      } else {
        damping *= 10.0;
      }
    }
    if (cost <= opt.tol_re) return detail::finish(sys, x.head(n), AlgebraElement(x.tail(m)), it, opt);
    if (!accepted) break;
  }
  throw NonConvergenceError("relative-equilibrium solve did not reach tolerance", cost);
}

}  // namespace emcert
