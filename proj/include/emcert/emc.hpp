#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "emcert/error.hpp"
#include "emcert/lie.hpp"
#include "emcert/linalg.hpp"
#include "emcert/phase.hpp"
#include "emcert/releq.hpp"

namespace emcert {

enum class SignBranch { Positive = 1, Negative = -1 };

enum class Verdict {
  CertifiedStable,
  Inconclusive_Indefinite,
  Inconclusive_KernelMismatch,
  Failed_EM1,
  Failed_EM3,
  Failed_SigmaCap,
};

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::CertifiedStable: return "CertifiedStable";
    case Verdict::Inconclusive_Indefinite: return "Inconclusive_Indefinite";
    case Verdict::Inconclusive_KernelMismatch: return "Inconclusive_KernelMismatch";
    case Verdict::Failed_EM1: return "Failed_EM1";
    case Verdict::Failed_EM3: return "Failed_EM3";
    case Verdict::Failed_SigmaCap: return "Failed_SigmaCap";
  }
  return "unknown";
}

inline const char* to_string(SignBranch b) { return b == SignBranch::Positive ? "positive" : "negative"; }

inline double sign_of(SignBranch b) { return b == SignBranch::Positive ? 1.0 : -1.0; }

/// Relative tolerances are multiplied by the spectral radius of the matrix
/// being classified, floored at the rounding error of assembling it.
struct EmcTolerances {
  double zero_rel = 1e-7;
  double pos_rel = 1e-6;
  double angle = 1e-4;
  double crit = 1e-8;
  double null = 1e-8;
  double inclusion = 1e-6;
  double em3 = 1e-9;
};

struct EmcProblem {
  PhaseSpaceSystem sys;
  RelativeEquilibrium re;
  EmcTolerances tol;
  double sigma_max = 1e6;
  int xi_search_budget = 101;
  /// Half-width of the xi search box; 0 picks a scale from grad H and DJ.
  double search_radius = 0.0;
  /// Radius of the tube around the G_mu-orbit where f is evaluated.
  double tube_radius = 0.5;
};

struct EmcCertificate {
  VectorXd lambda;
  int lambda_nullspace_dim = 0;
  AlgebraElement xi_used;
  std::optional<SignBranch> sign_branch;
  std::optional<double> sigma;
  int K_dim = 0;
  int orbit_dim_in_K = 0;
  VectorXd spectrum;
  int zero_cluster_dim = 0;
  double kernel_principal_angle = 0.0;
  Verdict verdict = Verdict::Inconclusive_Indefinite;

  // diagnostics
  double em1_residual = 0.0;
  double em3_violation = 0.0;
  double tol_zero = 0.0;
  double tol_pos = 0.0;
  double slice_spectrum_min = std::numeric_limits<double>::quiet_NaN();
  double search_margin = 0.0;
  int search_dim = 0;
  int candidates_evaluated = 0;
  double momentum_norm_violation = 0.0;

  // data needed to rebuild f = +-f1 + sigma f2
  Point z_e;
  DualElement mu;
  VectorXd casimirs_at_z_e;
  double emc_at_z_e = 0.0;
  double tube_radius = 0.5;
  EmcTolerances tolerances;
};

// ---------------------------------------------------------------------------
// EM3 and generator choice

struct ProjectedGenerator {
  AlgebraElement xi_perp;
  bool em3_ok = true;
  double violation = 0.0;
  std::vector<AlgebraElement> isotropy;  // basis of g_{z_e}
};

/// Group elements among the discrete samples that fix z.
inline std::vector<GroupElement> discrete_isotropy(const PhaseSpaceSystem& sys, const Point& z) {
  std::vector<GroupElement> out;
  for (const auto& g : sys.group.discrete_samples()) {
    if ((act(sys, g, z) - z).norm() <= 1e-9 * std::max(1.0, z.norm())) out.push_back(g);
  }
  return out;
}

/// max |[zeta, xi]| over the isotropy basis and |Ad_g xi - xi| over
/// discrete isotropy samples.
inline double em3_violation(const PhaseSpaceSystem& sys, const AlgebraElement& xi,
                            const std::vector<AlgebraElement>& isotropy, const std::vector<GroupElement>& discrete) {
  double v = 0.0;
  for (const auto& z : isotropy) v = std::max(v, sys.group.norm(bracket(sys.group, z, xi)));
  for (const auto& g : discrete) {
    v = std::max(v, sys.group.norm(AlgebraElement(adjoint(sys.group, g, xi).coeffs - xi.coeffs)));
  }
  return v;
}

/// Component of xi in the complement of g_{z_e} orthogonal in the group
/// inner product, which must be Ad(G_{z_e})-invariant; then checks
/// G_{z_e} in G_xi at the algebra level and on discrete samples.
inline ProjectedGenerator project_generator(const PhaseSpaceSystem& sys, const Point& z_e, const AlgebraElement& xi,
                                            const EmcTolerances& tol = {}) {
  if (!xi.coeffs.allFinite()) throw Error(ErrorCode::Evaluation, "generator is not finite");
  ProjectedGenerator out;
  out.isotropy = point_isotropy_algebra(sys, z_e, tol.null);
  const auto discrete = discrete_isotropy(sys, z_e);
  if (!out.isotropy.empty() || !discrete.empty()) {
    const InvarianceReport inv = check_invariance_under(sys.group, out.isotropy, discrete, 8, 17);
    if (!inv.passed) {
      throw Error(ErrorCode::InvariantProduct,
                  "inner product of group '" + sys.group.name() +
                      "' is not invariant under the isotropy group of z_e (" + inv.offending_sample +
                      "); supply an inner product invariant under it (one exists since the isotropy is compact)");
    }
  }
  out.xi_perp = project_out(sys.group, xi, out.isotropy);
  out.violation = em3_violation(sys, out.xi_perp, out.isotropy, discrete);
  out.em3_ok = out.violation <= tol.em3 * std::max(1.0, sys.group.norm(out.xi_perp));
  return out;
}

// ---------------------------------------------------------------------------
// EM1

struct LambdaSolution {
  VectorXd lambda;
  double residual = 0.0;   // |grad of the EMC function| at z_e
  int nullspace_dim = 0;
  MatrixXd nullspace;      // dim_v x nullspace_dim, orthonormal
  bool em1_ok = true;
};

/// grad H - DJ^T xi, the part of the EMC gradient not involving lambda.
inline VectorXd energy_momentum_gradient(const PhaseSpaceSystem& sys, const Point& z, const AlgebraElement& xi) {
  VectorXd g = hamiltonian_gradient(sys, z);
  if (sys.dim_g() > 0) g -= momentum_jacobian(sys, z).transpose() * xi.coeffs;
  return g;
}

/// Minimal-norm least-squares solution of DC^T lambda = -(grad H - DJ^T xi).
inline LambdaSolution solve_lambda(const PhaseSpaceSystem& sys, const Point& z_e, const AlgebraElement& xi,
                                   const EmcTolerances& tol = {}) {
  LambdaSolution s;
  const VectorXd g = energy_momentum_gradient(sys, z_e, xi);
  const MatrixXd dct = casimir_jacobian(sys, z_e).transpose();
  s.lambda = linalg::min_norm_solve(dct, -g);
  s.residual = sys.dim_v > 0 ? (g + dct * s.lambda).norm() : g.norm();
  s.nullspace = linalg::null_space(dct, sys.dim_v, tol.null);
  s.nullspace_dim = static_cast<int>(s.nullspace.cols());
  s.em1_ok = s.residual <= tol.crit;
  return s;
}

/// H(z) - <J(z), xi> + <lambda, C(z)>
inline double emc_value(const PhaseSpaceSystem& sys, const Point& z, const VectorXd& lambda, const AlgebraElement& xi) {
  double v = hamiltonian(sys, z);
  if (sys.dim_g() > 0) v -= pairing(momentum(sys, z), xi);
  if (sys.dim_v > 0) v += lambda.dot(casimirs(sys, z));
  return v;
}

inline VectorXd emc_gradient(const PhaseSpaceSystem& sys, const Point& z, const VectorXd& lambda,
                             const AlgebraElement& xi) {
  VectorXd g = energy_momentum_gradient(sys, z, xi);
  if (sys.dim_v > 0) g += casimir_jacobian(sys, z).transpose() * lambda;
  return g;
}

inline MatrixXd emc_hessian(const PhaseSpaceSystem& sys, const Point& z, const VectorXd& lambda,
                            const AlgebraElement& xi) {
  MatrixXd h = hamiltonian_hessian(sys, z);
  if (sys.dim_g() > 0) {
    const auto hj = momentum_hessians(sys, z);
    for (int k = 0; k < sys.dim_g(); ++k) h -= xi.coeffs(k) * hj[k];
  }
  if (sys.dim_v > 0) {
    const auto hc = casimir_hessians(sys, z);
    for (int k = 0; k < sys.dim_v; ++k) h += lambda(k) * hc[k];
  }
  return linalg::symmetrize(h);
}

// ---------------------------------------------------------------------------
// Subspaces

/// Orthonormal basis of K = ker DJ(z_e) cap ker DC(z_e).
inline MatrixXd constraint_space(const PhaseSpaceSystem& sys, const Point& z_e, double tol_null = 1e-8) {
  MatrixXd stacked(sys.dim_g() + sys.dim_v, sys.n);
  if (sys.dim_g() > 0) stacked.topRows(sys.dim_g()) = momentum_jacobian(sys, z_e);
  if (sys.dim_v > 0) stacked.bottomRows(sys.dim_v) = casimir_jacobian(sys, z_e);
  return linalg::null_space(stacked, sys.n, tol_null);
}

/// Orthonormal basis of span{ zeta_M(z_e) : zeta in subalgebra }.
inline MatrixXd orbit_tangent_basis(const PhaseSpaceSystem& sys, const Point& z_e,
                                    const std::vector<AlgebraElement>& subalgebra, double tol_null = 1e-8) {
  MatrixXd gens(sys.n, static_cast<Eigen::Index>(subalgebra.size()));
  for (std::size_t k = 0; k < subalgebra.size(); ++k) {
    gens.col(static_cast<Eigen::Index>(k)) = infinitesimal_generator(sys, subalgebra[k], z_e);
  }
  return linalg::range_basis(gens, tol_null);
}

// ---------------------------------------------------------------------------
// EM2

enum class Definiteness { Positive, Negative, Indefinite, KernelMismatch };

struct RestrictedHessian {
  VectorXd spectrum;   // ascending
  MatrixXd eigenvectors;  // in K coordinates
  int K_dim = 0;
  int orbit_dim_in_K = 0;
  int zero_cluster_dim = 0;
  double kernel_principal_angle = 0.0;
  double inclusion_residual = 0.0;
  double tol_zero = 0.0;
  double tol_pos = 0.0;
  Definiteness definiteness = Definiteness::Indefinite;
};

/// Compresses the Hessian to K, clusters numerically-zero eigenvalues,
/// matches their eigenspace against the orbit tangent and classifies the rest.
///
/// term_scale is the size of the summands the Hessian was assembled from.
/// Eigenvalues below the rounding error of that sum count as zero even when
/// the whole restricted spectrum is rounding noise, which relative
/// tolerances alone would classify as definite.
inline RestrictedHessian restricted_hessian_classify(const MatrixXd& hessian, const MatrixXd& k_basis,
                                                     const MatrixXd& orbit_basis, const EmcTolerances& tol = {},
                                                     double term_scale = 0.0) {
  RestrictedHessian out;
  out.K_dim = static_cast<int>(k_basis.cols());
  out.inclusion_residual = linalg::inclusion_residual(k_basis, orbit_basis);
  if (out.inclusion_residual > tol.inclusion) {
    throw Error(ErrorCode::Structure,
                "orbit tangent is not contained in K (residual " + std::to_string(out.inclusion_residual) +
                    "); momentum map or isotropy algebra is inconsistent");
  }
  const MatrixXd hk = k_basis.transpose() * hessian * k_basis;
  const auto eig = linalg::symmetric_eigen(hk);
  out.spectrum = eig.values;
  out.eigenvectors = eig.vectors;
  const double rho = linalg::spectral_radius(eig.values);
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * std::max(term_scale, linalg::max_abs(hessian));
  out.tol_zero = std::max(tol.zero_rel * rho, noise);
  out.tol_pos = std::max(tol.pos_rel * rho, noise);

  const MatrixXd orbit_in_k = linalg::range_basis(k_basis.transpose() * orbit_basis, tol.null);
  out.orbit_dim_in_K = static_cast<int>(orbit_in_k.cols());

  std::vector<Eigen::Index> zero_idx;
  bool has_pos = false, has_neg = false, has_ambiguous = false;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double e = eig.values(i);
    if (std::abs(e) <= out.tol_zero) {
      zero_idx.push_back(i);
    } else if (e > out.tol_pos) {
      has_pos = true;
    } else if (e < -out.tol_pos) {
      has_neg = true;
    } else {
      has_ambiguous = true;
    }
  }
  out.zero_cluster_dim = static_cast<int>(zero_idx.size());
  MatrixXd zero_space(out.K_dim, out.zero_cluster_dim);
  for (int c = 0; c < out.zero_cluster_dim; ++c) zero_space.col(c) = eig.vectors.col(zero_idx[c]);
  out.kernel_principal_angle = linalg::largest_principal_angle(zero_space, orbit_in_k);

  if (has_pos && has_neg) {
    out.definiteness = Definiteness::Indefinite;
  } else if (out.zero_cluster_dim != out.orbit_dim_in_K || out.kernel_principal_angle > tol.angle) {
    out.definiteness = Definiteness::KernelMismatch;
  } else if (has_ambiguous) {
    out.definiteness = Definiteness::Indefinite;
  } else {
    out.definiteness = has_neg ? Definiteness::Negative : Definiteness::Positive;
  }
  return out;
}

// ---------------------------------------------------------------------------
// sigma

/// D^2 f2 at z_e, exact there since J - mu and C - C(z_e) vanish:
/// 2 DJ^T M_g* DJ + 2 DC^T M_V DC.
inline MatrixXd f2_hessian_at(const PhaseSpaceSystem& sys, const Point& z_e) {
  MatrixXd h = MatrixXd::Zero(sys.n, sys.n);
  if (sys.dim_g() > 0) {
    const MatrixXd dj = momentum_jacobian(sys, z_e);
    h += 2.0 * dj.transpose() * sys.group.dual_inner_product() * dj;
  }
  if (sys.dim_v > 0) {
    const MatrixXd dc = casimir_jacobian(sys, z_e);
    h += 2.0 * dc.transpose() * sys.inner_product_v * dc;
  }
  return linalg::symmetrize(h);
}

struct SigmaSelection {
  std::optional<double> sigma;
  double slice_spectrum_min = 0.0;
  MatrixXd slice_basis;
};

/// Smallest eigenvalue of (s D^2 EMC + sigma D^2 f2) on the slice.
inline double slice_min_eigenvalue(const MatrixXd& f1_slice, const MatrixXd& f2_slice, double sigma) {
  if (f1_slice.rows() == 0) return std::numeric_limits<double>::infinity();
  return linalg::symmetric_eigen(f1_slice + sigma * f2_slice).values(0);
}

/// Starting at sigma = 1, doubles until the slice Hessian of f is positive
/// definite, then bisects the threshold and returns twice it (capped).
inline SigmaSelection select_sigma(const PhaseSpaceSystem& sys, const Point& z_e, const VectorXd& lambda,
                                   const AlgebraElement& xi, SignBranch branch, const MatrixXd& orbit_basis,
                                   double sigma_max = 1e6, const EmcTolerances& tol = {}) {
  SigmaSelection out;
  out.slice_basis = linalg::orthogonal_complement(orbit_basis, sys.n);
  const MatrixXd& s = out.slice_basis;
  const MatrixXd f1 = sign_of(branch) * (s.transpose() * emc_hessian(sys, z_e, lambda, xi) * s);
  const MatrixXd f2 = s.transpose() * f2_hessian_at(sys, z_e) * s;
  double rho = linalg::spectral_radius(linalg::symmetric_eigen(f1).values);
  if (rho == 0.0) rho = linalg::spectral_radius(linalg::symmetric_eigen(f2).values);
  const double tol_pos = tol.pos_rel * rho;
  auto passes = [&](double sig) { return slice_min_eigenvalue(f1, f2, sig) > tol_pos; };

  double hi = 1.0;
  if (!passes(hi)) {
    double lo = hi;
    while (!passes(hi)) {
      if (hi >= sigma_max) {
        out.slice_spectrum_min = slice_min_eigenvalue(f1, f2, sigma_max);
        return out;
      }
      lo = hi;
      hi = std::min(2.0 * hi, sigma_max);
    }
    for (int it = 0; it < 60 && hi - lo > 1e-6 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (passes(mid) ? hi : lo) = mid;
    }
    hi = std::min(2.0 * hi, sigma_max);
  }
  out.sigma = hi;
  out.slice_spectrum_min = slice_min_eigenvalue(f1, f2, hi);
  return out;
}

// ---------------------------------------------------------------------------
// Patrick's velocity map and the Liapunov function

struct OrbitProjection {
  GroupElement g;          // minimizer of |g . z_e - z| over G_mu
  double distance = 0.0;
  double gradient_norm = 0.0;
  bool converged = true;
};

/// Nearest point to z on the orbit of z_e under exp(subalgebra), by
/// Gauss-Newton with left-multiplicative updates. Multi-start from the
/// identity, quarter/half turns along each basis direction and the discrete
/// samples that fix mu; ties keep the earlier seed.
inline OrbitProjection nearest_orbit_point(const PhaseSpaceSystem& sys, const Point& z_e,
                                           const std::vector<AlgebraElement>& subalgebra, const Point& z,
                                           const std::vector<GroupElement>& extra_seeds = {}) {
  const LieGroupSpec& grp = sys.group;
  std::vector<GroupElement> seeds{grp.identity()};
  for (const auto& b : subalgebra) {
    for (double t : {M_PI / 2, -M_PI / 2, M_PI}) seeds.push_back(exponential(grp, AlgebraElement(t * b.coeffs)));
  }
  for (const auto& g : extra_seeds) seeds.push_back(g);

  std::optional<OrbitProjection> best;
  const int k = static_cast<int>(subalgebra.size());
  for (const auto& seed : seeds) {
    GroupElement g = seed;
    Point y = act(sys, g, z_e);
    VectorXd d = y - z;
    double dist = d.norm();
    double grad = 0.0;
    bool converged = k == 0;
    for (int it = 0; it < 100 && k > 0; ++it) {
      MatrixXd jac(sys.n, k);
      for (int c = 0; c < k; ++c) jac.col(c) = infinitesimal_generator(sys, subalgebra[c], y);
      const VectorXd jtd = jac.transpose() * d;
      grad = jtd.norm();
      if (grad <= 1e-13 * std::max(1.0, dist) || jac.norm() == 0.0) {
        converged = true;
        break;
      }
      VectorXd delta = -linalg::min_norm_solve(jac, d);
      bool improved = false;
      for (int ls = 0; ls < 40; ++ls) {
        VectorXd eta = VectorXd::Zero(grp.dim());
        for (int c = 0; c < k; ++c) eta += delta(c) * subalgebra[c].coeffs;
        const GroupElement trial = exponential(grp, AlgebraElement(eta)) * g;
        const Point yt = act(sys, trial, z_e);
        const double dt = (yt - z).norm();
        if (dt < dist) {
          g = trial;
          y = yt;
          d = yt - z;
          dist = dt;
          improved = true;
          break;
        }
        delta *= 0.5;
      }
      if (!improved) {
        // No decrease along the Gauss-Newton direction: stationary to roundoff.
        converged = grad <= 1e-7 * std::max(1.0, dist);
        break;
      }
    }
    if (!best || dist < best->distance - 1e-14 * std::max(1.0, dist)) {
      best = OrbitProjection{g, dist, grad, converged};
    }
  }
  return *best;
}

/// Data for evaluating f = s f1 + sigma f2 near the G_mu-orbit of z_e.
class LiapunovFunction {
 public:
  LiapunovFunction(PhaseSpaceSystem sys, const EmcCertificate& cert) : sys_(std::move(sys)), cert_(cert) {
    if (!cert.sign_branch || !cert.sigma) {
      throw Error(ErrorCode::Usage,
                  std::string("certificate with verdict ") + to_string(cert.verdict) +
                      " carries no sign branch and sigma; the Liapunov function is undefined");
    }
    g_mu_ = momentum_isotropy_algebra(sys_.group, cert.mu, cert.tolerances.null);
    for (const auto& g : sys_.group.discrete_samples()) {
      if ((coadjoint(sys_.group, g.inverse(), cert.mu).coeffs - cert.mu.coeffs).norm() <=
          1e-9 * std::max(1.0, cert.mu.coeffs.norm())) {
        discrete_mu_.push_back(g);
      }
    }
  }

  const PhaseSpaceSystem& system() const { return sys_; }
  const EmcCertificate& certificate() const { return cert_; }
  const std::vector<AlgebraElement>& momentum_isotropy() const { return g_mu_; }
  const std::vector<GroupElement>& discrete_momentum_isotropy() const { return discrete_mu_; }

  OrbitProjection project(const Point& z) const {
    return nearest_orbit_point(sys_, cert_.z_e, g_mu_, z, discrete_mu_);
  }

  /// Ad_{g*} xi where g* . z_e is the nearest orbit point to z.
  AlgebraElement patrick_velocity(const Point& z) const {
    const OrbitProjection p = project(z);
    if (p.distance > cert_.tube_radius) {
      throw Error(ErrorCode::OutOfNeighborhood, "point at orbit distance " + std::to_string(p.distance) +
                                                    " is outside the tube radius " +
                                                    std::to_string(cert_.tube_radius));
    }
    if (!p.converged) {
      throw Error(ErrorCode::OutOfNeighborhood, "orbit projection did not reach a local minimum");
    }
    return adjoint(sys_.group, p.g, cert_.xi_used);
  }

  double f2(const Point& z) const {
    double v = 0.0;
    if (sys_.dim_g() > 0) {
      const double jn = sys_.group.norm(DualElement(momentum(sys_, z).coeffs - cert_.mu.coeffs));
      v += jn * jn;
    }
    if (sys_.dim_v > 0) {
      const VectorXd dc = casimirs(sys_, z) - cert_.casimirs_at_z_e;
      v += dc.dot(sys_.inner_product_v * dc);
    }
    return v;
  }

  struct Value {
    double f = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
  };

  Value operator()(const Point& z) const {
    Value out;
    const AlgebraElement v = patrick_velocity(z);
    double f1 = hamiltonian(sys_, z);
    if (sys_.dim_g() > 0) f1 -= pairing(momentum(sys_, z), v);
    if (sys_.dim_v > 0) f1 += cert_.lambda.dot(casimirs(sys_, z));
    out.f1 = f1 - cert_.emc_at_z_e;
    out.f2 = f2(z);
    out.f = sign_of(*cert_.sign_branch) * out.f1 + *cert_.sigma * out.f2;
    return out;
  }

 private:
  PhaseSpaceSystem sys_;
  EmcCertificate cert_;
  std::vector<AlgebraElement> g_mu_;
  std::vector<GroupElement> discrete_mu_;
};

inline AlgebraElement patrick_velocity(const PhaseSpaceSystem& sys, const EmcCertificate& cert, const Point& z) {
  return LiapunovFunction(sys, cert).patrick_velocity(z);
}

inline LiapunovFunction::Value liapunov_eval(const PhaseSpaceSystem& sys, const EmcCertificate& cert, const Point& z) {
  return LiapunovFunction(sys, cert)(z);
}

// ---------------------------------------------------------------------------
// certify

namespace detail {

struct Candidate {
  AlgebraElement xi;
  LambdaSolution lambda;
  VectorXd lambda_value;
  double em3_violation = 0.0;
  bool em3_ok = true;
  double objective = -std::numeric_limits<double>::infinity();
};

/// Relative spectral margin: with the expected number of kernel directions
/// dropped, the larger of min(e) and min(-e) over the remaining eigenvalues,
/// divided by the spectral radius.
inline double spectral_margin(const VectorXd& eigenvalues, int kernel_dim) {
  std::vector<double> e(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  std::sort(e.begin(), e.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  e.erase(e.begin(), e.begin() + std::min<std::size_t>(kernel_dim, e.size()));
  if (e.empty()) return 1.0;
  const double rho = std::max(std::abs(*std::max_element(e.begin(), e.end(), [](double a, double b) {
                                return std::abs(a) < std::abs(b);
                              })),
                              1e-300);
  const double lo = *std::min_element(e.begin(), e.end());
  const double hi = *std::max_element(e.begin(), e.end());
  return std::max(lo, -hi) / rho;
}

}  // namespace detail

/// Runs the energy-momentum-Casimir test on a relative equilibrium: EM3 via
/// the projected generator, EM1 via the Casimir multipliers, EM2 via the
/// restricted Hessian, then sigma for f. The xi freedom along g_{z_e} and the
/// lambda freedom along null(DC^T) are searched for the largest spectral margin.
inline EmcCertificate certify(const EmcProblem& problem) {
  const PhaseSpaceSystem& sys = problem.sys;
  const EmcTolerances& tol = problem.tol;
  const RelativeEquilibrium& re = problem.re;
  check_point(sys, re.z_e);
  sys.group.check(re.xi);
  if (!(problem.sigma_max >= 1.0)) throw Error(ErrorCode::Usage, "sigma_max must be >= 1");
  if (problem.xi_search_budget < 1) throw Error(ErrorCode::Usage, "xi_search_budget must be >= 1");
  if (!(tol.zero_rel > 0 && tol.pos_rel > 0 && tol.angle > 0 && tol.crit > 0)) {
    throw Error(ErrorCode::Usage, "tolerances must be strictly positive");
  }
  const Point& z_e = re.z_e;

  EmcCertificate cert;
  cert.z_e = z_e;
  cert.mu = momentum(sys, z_e);
  cert.casimirs_at_z_e = casimirs(sys, z_e);
  cert.tube_radius = problem.tube_radius;
  cert.tolerances = tol;

  const auto g_mu = momentum_isotropy_algebra(sys.group, cert.mu, tol.null);
  if (!g_mu.empty()) {
    cert.momentum_norm_violation = check_invariance_under(sys.group, g_mu, {}, 8, 23).max_violation_dual;
  }
  const ProjectedGenerator proj = project_generator(sys, z_e, re.xi, tol);
  const auto discrete = discrete_isotropy(sys, z_e);
  const MatrixXd k_basis = constraint_space(sys, z_e, tol.null);
  const MatrixXd orbit = orbit_tangent_basis(sys, z_e, g_mu, tol.null);
  const MatrixXd hessian_base = [&] {
    // The Hessian is affine in (xi, lambda); cache the pieces.
    return hamiltonian_hessian(sys, z_e);
  }();
  const auto hj = momentum_hessians(sys, z_e);
  const auto hc = casimir_hessians(sys, z_e);
  auto hessian_of = [&](const AlgebraElement& xi, const VectorXd& lambda) {
    MatrixXd h = hessian_base;
    for (int k = 0; k < sys.dim_g(); ++k) h -= xi.coeffs(k) * hj[k];
    for (int k = 0; k < sys.dim_v; ++k) h += lambda(k) * hc[k];
    return linalg::symmetrize(h);
  };
  const int orbit_dim_in_k =
      static_cast<int>(linalg::range_basis(k_basis.transpose() * orbit, tol.null).cols());

  const LambdaSolution base_lambda = solve_lambda(sys, z_e, proj.xi_perp, tol);
  const int d_xi = static_cast<int>(proj.isotropy.size());
  const int d_lam = base_lambda.nullspace_dim;
  const int d = d_xi + d_lam;
  cert.search_dim = d;

  double xi_radius = problem.search_radius;
  if (!(xi_radius > 0)) {
    const double dj = sys.dim_g() > 0 ? Eigen::JacobiSVD<MatrixXd>(momentum_jacobian(sys, z_e)).singularValues()(0) : 0.0;
    const double gh = hamiltonian_gradient(sys, z_e).norm();
    xi_radius = 4.0 * std::max(1.0, dj > 1e-12 ? gh / dj : gh) + sys.group.norm(proj.xi_perp);
  }
  const double lam_radius = 4.0 * std::max(1.0, base_lambda.lambda.norm());

  auto evaluate = [&](const VectorXd& offset) {
    detail::Candidate c;
    VectorXd xi = proj.xi_perp.coeffs;
    for (int i = 0; i < d_xi; ++i) xi += offset(i) * proj.isotropy[i].coeffs;
    c.xi = AlgebraElement(xi);
    c.lambda = d_xi > 0 ? solve_lambda(sys, z_e, c.xi, tol) : base_lambda;
    c.lambda_value = c.lambda.lambda;
    if (d_lam > 0) c.lambda_value += c.lambda.nullspace * offset.tail(d_lam);
    c.em3_violation = d_xi > 0 ? em3_violation(sys, c.xi, proj.isotropy, discrete) : proj.violation;
    c.em3_ok = c.em3_violation <= tol.em3 * std::max(1.0, sys.group.norm(c.xi));
    if (d_lam > 0) {
      c.lambda.residual = emc_gradient(sys, z_e, c.lambda_value, c.xi).norm();
      c.lambda.em1_ok = c.lambda.residual <= tol.crit;
    }
    if (c.lambda.em1_ok && c.em3_ok) {
      const MatrixXd hk = k_basis.transpose() * hessian_of(c.xi, c.lambda_value) * k_basis;
      c.objective = detail::spectral_margin(linalg::symmetric_eigen(hk).values, orbit_dim_in_k);
    }
    ++cert.candidates_evaluated;
    return c;
  };

  detail::Candidate best = evaluate(VectorXd::Zero(d));
  if (d > 0) {
    VectorXd radius(d);
    radius.head(d_xi).setConstant(xi_radius);
    radius.tail(d_lam).setConstant(lam_radius);
    // Coarse grid, at most ~2e5 points in total.
    int per_dim = problem.xi_search_budget;
    while (per_dim > 3 && std::pow(static_cast<double>(per_dim), d) > 2e5) per_dim = (per_dim + 1) / 2;
    const VectorXd spacing = per_dim > 1 ? VectorXd(2.0 * radius / (per_dim - 1)) : VectorXd(radius);
    VectorXd best_offset = VectorXd::Zero(d);
    std::vector<int> idx(d, 0);
    for (;;) {
      VectorXd off(d);
      for (int i = 0; i < d; ++i) off(i) = per_dim > 1 ? -radius(i) + idx[i] * spacing(i) : 0.0;
      detail::Candidate c = evaluate(off);
      if (c.objective > best.objective) {
        best = std::move(c);
        best_offset = off;
      }
      int pos = 0;
      while (pos < d && ++idx[pos] == per_dim) idx[pos++] = 0;
      if (pos == d) break;
    }
    // Coordinate-wise golden-section refinement around the best grid point.
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int sweep = 0; sweep < 3; ++sweep) {
      for (int i = 0; i < d; ++i) {
        double a = best_offset(i) - spacing(i), b = best_offset(i) + spacing(i);
        auto at = [&](double t) {
          VectorXd off = best_offset;
          off(i) = t;
          return evaluate(off);
        };
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        detail::Candidate c1 = at(x1), c2 = at(x2);
        for (int it = 0; it < 60 && b - a > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
          if (c1.objective >= c2.objective) {
            b = x2;
            x2 = x1;
            c2 = std::move(c1);
            x1 = b - phi * (b - a);
            c1 = at(x1);
          } else {
            a = x1;
            x1 = x2;
            c1 = std::move(c2);
            x2 = a + phi * (b - a);
            c2 = at(x2);
          }
        }
        if (c1.objective > best.objective) {
          best = std::move(c1);
          best_offset(i) = x1;
        }
        if (c2.objective > best.objective) {
          best = std::move(c2);
          best_offset(i) = x2;
        }
      }
    }
  }

  cert.xi_used = best.xi;
  cert.lambda = best.lambda_value;
  cert.lambda_nullspace_dim = best.lambda.nullspace_dim;
  cert.em1_residual = best.lambda.residual;
  cert.em3_violation = best.em3_violation;
  cert.search_margin = best.objective;
  cert.K_dim = static_cast<int>(k_basis.cols());
  cert.orbit_dim_in_K = orbit_dim_in_k;
  cert.emc_at_z_e = emc_value(sys, z_e, cert.lambda, cert.xi_used);

  if (!best.lambda.em1_ok) {
    cert.verdict = Verdict::Failed_EM1;
    return cert;
  }
  if (!best.em3_ok) {
    cert.verdict = Verdict::Failed_EM3;
    return cert;
  }
  double term_scale = hessian_base.norm();
  for (int k = 0; k < sys.dim_g(); ++k) term_scale += std::abs(cert.xi_used.coeffs(k)) * hj[k].norm();
  for (int k = 0; k < sys.dim_v; ++k) term_scale += std::abs(cert.lambda(k)) * hc[k].norm();
  const RestrictedHessian rh =
      restricted_hessian_classify(hessian_of(cert.xi_used, cert.lambda), k_basis, orbit, tol, term_scale);
  cert.spectrum = rh.spectrum;
  cert.zero_cluster_dim = rh.zero_cluster_dim;
  cert.kernel_principal_angle = rh.kernel_principal_angle;
  cert.orbit_dim_in_K = rh.orbit_dim_in_K;
  cert.tol_zero = rh.tol_zero;
  cert.tol_pos = rh.tol_pos;
  switch (rh.definiteness) {
    case Definiteness::Indefinite:
      cert.verdict = Verdict::Inconclusive_Indefinite;
      return cert;
    case Definiteness::KernelMismatch:
      cert.verdict = Verdict::Inconclusive_KernelMismatch;
      return cert;
    case Definiteness::Positive:
      cert.sign_branch = SignBranch::Positive;
      break;
    case Definiteness::Negative:
      cert.sign_branch = SignBranch::Negative;
      break;
  }
  const SigmaSelection sel =
      select_sigma(sys, z_e, cert.lambda, cert.xi_used, *cert.sign_branch, orbit, problem.sigma_max, tol);
  cert.slice_spectrum_min = sel.slice_spectrum_min;
  if (!sel.sigma) {
    cert.verdict = Verdict::Failed_SigmaCap;
    return cert;
  }
  cert.sigma = sel.sigma;
  cert.verdict = Verdict::CertifiedStable;
  return cert;
}

// ---------------------------------------------------------------------------
// Audit of a certificate against the properties its construction relies on

struct CertificateAudit {
  double em1_gradient = 0.0;            // |grad EMC(z_e)|
  double k_annihilation = 0.0;          // max |DJ v|, |DC v| over K columns
  double orbit_in_k_residual = 0.0;     // component of g_mu . z_e outside K
  double f_invariance = 0.0;            // max |f(g z) - f(z)|, g in G_mu
  double f1_slice_agreement = 0.0;      // max |f1(z) - (EMC(z) - EMC(z_e))| on the slice
  double f2_kernel_angle = 0.0;         // ker D^2 f2|slice vs K cap slice
  double f2_slice_min = 0.0;            // smallest eigenvalue of D^2 f2 on the slice
  double slice_min_with_sigma = 0.0;    // smallest eigenvalue of D^2 f on the slice
  bool f_evaluated = false;
};

inline CertificateAudit audit_certificate(const PhaseSpaceSystem& sys, const EmcCertificate& cert, int n_samples = 8,
                                          std::uint64_t seed = 29, double offset = 1e-2) {
  CertificateAudit a;
  const EmcTolerances& tol = cert.tolerances;
  const Point& z_e = cert.z_e;
  a.em1_gradient = emc_gradient(sys, z_e, cert.lambda, cert.xi_used).norm();
  const MatrixXd k = constraint_space(sys, z_e, tol.null);
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    if (sys.dim_g() > 0) a.k_annihilation = std::max(a.k_annihilation, (momentum_jacobian(sys, z_e) * k.col(c)).norm());
    if (sys.dim_v > 0) a.k_annihilation = std::max(a.k_annihilation, (casimir_jacobian(sys, z_e) * k.col(c)).norm());
  }
  const auto g_mu = momentum_isotropy_algebra(sys.group, cert.mu, tol.null);
  const MatrixXd orbit = orbit_tangent_basis(sys, z_e, g_mu, tol.null);
  a.orbit_in_k_residual = linalg::inclusion_residual(k, orbit);

  const MatrixXd slice = linalg::orthogonal_complement(orbit, sys.n);
  const MatrixXd f2s = slice.transpose() * f2_hessian_at(sys, z_e) * slice;
  const auto f2eig = linalg::symmetric_eigen(f2s);
  a.f2_slice_min = f2eig.values.size() ? f2eig.values(0) : 0.0;
  const double rho2 = linalg::spectral_radius(f2eig.values);
  std::vector<Eigen::Index> zero;
  for (Eigen::Index i = 0; i < f2eig.values.size(); ++i) {
    if (std::abs(f2eig.values(i)) <= tol.zero_rel * rho2) zero.push_back(i);
  }
  MatrixXd ker(slice.cols(), static_cast<Eigen::Index>(zero.size()));
  for (std::size_t c = 0; c < zero.size(); ++c) ker.col(static_cast<Eigen::Index>(c)) = f2eig.vectors.col(zero[c]);
  // K cap slice = K minus the orbit tangent, in slice coordinates
  const MatrixXd k_cap_slice = linalg::range_basis(slice.transpose() * k, tol.null);
  a.f2_kernel_angle = linalg::largest_principal_angle(ker, k_cap_slice);

  if (!cert.sign_branch || !cert.sigma) return a;
  const MatrixXd f1s = sign_of(*cert.sign_branch) * (slice.transpose() * emc_hessian(sys, z_e, cert.lambda, cert.xi_used) * slice);
  a.slice_min_with_sigma = slice_min_eigenvalue(f1s, f2s, *cert.sigma);

  const LiapunovFunction f(sys, cert);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int s = 0; s < n_samples; ++s) {
    VectorXd u(sys.n);
    for (int i = 0; i < sys.n; ++i) u(i) = normal(rng);
    const Point z = z_e + offset * u.normalized();
    const GroupElement g = random_subgroup_element(sys.group, g_mu, rng, 1.0);
    a.f_invariance = std::max(a.f_invariance, std::abs(f(act(sys, g, z)).f - f(z).f));

    if (slice.cols() > 0) {
      VectorXd w(slice.cols());
      for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
      const Point zs = z_e + offset * (slice * w.normalized());
      const double expected = emc_value(sys, zs, cert.lambda, cert.xi_used) - cert.emc_at_z_e;
      a.f1_slice_agreement = std::max(a.f1_slice_agreement, std::abs(f(zs).f1 - expected));
    }
  }
  a.f_evaluated = true;
  return a;
}

}  // namespace emcert
