// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "emcert/dynamics.hpp"
#include "emcert/emc.hpp"
#include "emcert/releq.hpp"
#include "emcert/systems.hpp"
#include "emcert/verify.hpp"

using namespace emcert;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Collects failed sub-checks of one criterion.
class Criterion {
 public:
  explicit Criterion(int id) : id_(id), t0_(Clock::now()) {}

  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void within(double value, double bound, const std::string& what) {
    require(std::isfinite(value) && value <= bound, what + " = " + fmt(value) + " > " + fmt(bound));
  }
  void near(double value, double expected, double tol, const std::string& what) {
    require(std::abs(value - expected) <= tol, what + " = " + fmt(value) + ", expected " + fmt(expected));
  }

  bool finish(const std::string& summary, double time_limit = 0.0) {
    const double t = seconds_since(t0_);
    if (time_limit > 0.0) within(t, time_limit, "runtime (s)");
    const bool ok = failures_.empty();
    std::printf("criterion %d: %s  %s  [%.2f s]\n", id_, ok ? "PASS" : "FAIL", summary.c_str(), t);
    for (const auto& f : failures_) std::printf("    - %s\n", f.c_str());
    std::fflush(stdout);
    return ok;
  }

  static std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
  }

 private:
  int id_;
  Clock::time_point t0_;
  std::vector<std::string> failures_;
};

template <typename V>
std::string str(V v) {
  return to_string(v);
}

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

EmcCertificate certify_at(const PhaseSpaceSystem& sys, const Point& z, const AlgebraElement& xi) {
  EmcProblem p;
  p.sys = sys;
  p.re = make_relative_equilibrium(sys, z, xi);
  return certify(p);
}

Point sleeping(double omega, double i3 = 1.0) { return pt({0, 0, i3 * omega, 0, 0, 1}); }

EmcCertificate certify_top(double omega) {
  return certify_at(systems::lagrange_top(1, 1, 1, omega), sleeping(omega), AlgebraElement(VectorXd::Zero(1)));
}

RelativeEquilibrium oscillator_re() {
  return find_relative_equilibrium(systems::symmetric_oscillator(), pt({1, 0, 0, 0, 1, 0}),
                                   AlgebraElement(VectorXd(Eigen::Vector3d(0, 0, 1))));
}

/// Golden-section minimum of a unimodal function on [a, b].
double golden_min(const std::function<double(double)>& f, double a, double b) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    if (f(x1) < f(x2)) {
      b = x2;
    } else {
      a = x1;
    }
  }
  return 0.5 * (a + b);
}

// Second variation of the sleeping top on each transverse 2-plane, from the
// energy-Casimir function with C1 = Pi.Gamma and C2 = |Gamma|^2.
double top_lambda2(double xi, double omega) { return xi - omega; }
double top_lambda1(double mgl, double i3, double omega, double lambda2) { return -(mgl + lambda2 * i3 * omega) / 2.0; }
Eigen::Matrix2d top_block(double i1, double lambda1, double lambda2) {
  Eigen::Matrix2d b;
  b << 1.0 / i1, lambda2, lambda2, 2.0 * lambda1;
  return b;
}
/// -I1 det(block); negative exactly when the block is positive definite.
double top_margin(double mgl, double i1, double i3, double omega, double lambda2) {
  return -i1 * top_block(i1, top_lambda1(mgl, i3, omega, lambda2), lambda2).determinant();
}

bool criterion1() {
  Criterion c(1);
  const auto sys = systems::rigid_body(1, 2, 3);
  const AlgebraElement none(VectorXd(0));
  // Energy-Casimir Hessian on the sphere at axis j: diag(1/I_i - 1/I_j), i != j.
  auto hand = [](int j) {
    const double inertia[3] = {1, 2, 3};
    std::vector<double> d;
    for (int i = 0; i < 3; ++i) {
      if (i != j) d.push_back(1.0 / inertia[i] - 1.0 / inertia[j]);
    }
    std::sort(d.begin(), d.end());
    return d;
  };
  auto timed = [&](int axis) {
    const auto t0 = Clock::now();
    const auto cert = certify_at(sys, Point::Unit(3, axis), none);
    c.within(seconds_since(t0), 1.0, "runtime at axis " + std::to_string(axis + 1) + " (s)");
    return cert;
  };

  const auto major = timed(2);
  c.require(major.verdict == Verdict::CertifiedStable, "axis 3 verdict " + str(major.verdict));
  c.require(major.sign_branch == SignBranch::Positive, "axis 3 branch is not positive");
  const auto e3 = hand(2);
  c.require(major.spectrum.size() == 2, "axis 3 spectrum size");
  if (major.spectrum.size() == 2) {
    c.near(major.spectrum(0), e3[0], 1e-6, "axis 3 eigenvalue 1");
    c.near(major.spectrum(1), e3[1], 1e-6, "axis 3 eigenvalue 2");
  }

  const auto minor = timed(0);
  c.require(minor.verdict == Verdict::CertifiedStable, "axis 1 verdict " + str(minor.verdict));
  c.require(minor.sign_branch == SignBranch::Negative, "axis 1 branch is not negative");
  const auto e1 = hand(0);
  c.require(minor.spectrum.size() == 2, "axis 1 spectrum size");
  if (minor.spectrum.size() == 2) {
    c.near(minor.spectrum(0), e1[0], 1e-6, "axis 1 eigenvalue 1");
    c.near(minor.spectrum(1), e1[1], 1e-6, "axis 1 eigenvalue 2");
  }

  const auto mid = timed(1);
  c.require(mid.verdict == Verdict::Inconclusive_Indefinite, "axis 2 verdict " + str(mid.verdict));

  return c.finish("rigid body (1,2,3): axis 3 spectrum {" + Criterion::fmt(major.spectrum(0)) + ", " +
                  Criterion::fmt(major.spectrum(1)) + "}, axis 1 spectrum {" + Criterion::fmt(minor.spectrum(0)) +
                  ", " + Criterion::fmt(minor.spectrum(1)) + "}, axis 2 " + str(mid.verdict));
}

bool criterion2() {
  Criterion c(2);
  const double mgl = 1, i1 = 1, i3 = 1;
  const double threshold = 2.0 * std::sqrt(mgl * i1) / i3;

  // Block margin as a function of xi, computed two ways: from the closed form
  // and from the certifier's own restricted Hessian.
  const double omega = 2.5;
  const auto sys = systems::lagrange_top(mgl, i1, i3, omega);
  const MatrixXd k = constraint_space(sys, sleeping(omega));
  auto pipeline_margin = [&](double xi) {
    const AlgebraElement x(VectorXd::Constant(1, xi));
    const auto s = solve_lambda(sys, sleeping(omega), x);
    const MatrixXd hk = k.transpose() * emc_hessian(sys, sleeping(omega), s.lambda, x) * k;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (hk + hk.transpose()));
    const VectorXd e = eig.eigenvalues();
    return -i1 * e(0) * e(e.size() - 1);
  };
  const double best = golden_min([&](double xi) { return top_margin(mgl, i1, i3, omega, top_lambda2(xi, omega)); },
                                 -5.0, 5.0);
  const double oracle = top_margin(mgl, i1, i3, omega, top_lambda2(best, omega));
  c.near(oracle, -0.5625, 1e-6, "closed-form optimal margin");
  const double best_pipeline = golden_min(pipeline_margin, -5.0, 5.0);
  c.near(pipeline_margin(best_pipeline), -0.5625, 1e-6, "pipeline optimal margin");

  const auto stable = certify_top(omega);
  c.require(stable.verdict == Verdict::CertifiedStable, "omega 2.5 verdict " + str(stable.verdict));
  if (stable.lambda.size() == 2) {
    c.require(top_margin(mgl, i1, i3, omega, stable.lambda(1)) < 0.0, "certificate xi lies outside the stable window");
  }
  const auto low = certify_top(1.5);
  c.require(low.verdict != Verdict::CertifiedStable, "omega 1.5 certified");
  c.require(low.verdict == Verdict::Inconclusive_Indefinite || low.verdict == Verdict::Inconclusive_KernelMismatch,
            "omega 1.5 verdict " + str(low.verdict));

  // Scan [1.9, 2.1] at 0.05. The closed form decides each point independently.
  const auto t0 = Clock::now();
  std::string scan;
  double flip = std::nan("");
  bool prev_stable = false;
  for (int i = 0; i <= 4; ++i) {
    const double w = 1.9 + 0.05 * i;
    const bool s = certify_top(w).verdict == Verdict::CertifiedStable;
    const bool expected = i3 * i3 * w * w > 4.0 * i1 * mgl + 1e-12;
    c.require(s == expected, "omega " + Criterion::fmt(w) + (s ? " certified" : " not certified"));
    if (i > 0 && s && !prev_stable) flip = w;
    prev_stable = s;
    scan += s ? "S" : "-";
  }
  c.within(seconds_since(t0), 10.0, "scan runtime (s)");
  c.require(flip >= 1.9 && flip <= 2.1, "verdict does not flip inside [1.9, 2.1]");

  return c.finish("sleeping top: threshold " + Criterion::fmt(threshold) + ", optimal margin " +
                  Criterion::fmt(oracle) + ", scan 1.90..2.10 " + scan + ", first stable " + Criterion::fmt(flip));
}

struct Corroboration {
  bool ok = false;
  int in_tube = 0;
  int violations = 0;
  double worst_excess = -INFINITY;
};

/// Criteria 3 and 4 share the trajectories.
Corroboration criteria3and4() {
  Criterion c3(3);
  const auto sys = systems::rigid_body(1, 2, 3);
  ExperimentProtocol proto;
  proto.deltas = {1e-3};
  proto.samples_per_delta = 20;
  proto.T = 100.0;
  proto.h = 1e-3;
  proto.keep_series = true;

  Corroboration out;
  std::string summary;
  for (int axis : {2, 0, 1}) {
    const auto re = make_relative_equilibrium(sys, Point::Unit(3, axis), AlgebraElement(VectorXd(0)));
    EmcProblem p;
    p.sys = sys;
    p.re = re;
    const auto cert = certify(p);
    const auto rep = stability_experiment(sys, re, cert, proto);
    const double dist = rep.per_delta.at(0).max_orbit_distance;
    summary += "axis " + std::to_string(axis + 1) + " " + Criterion::fmt(dist) + " " + str(rep.verdict) + "; ";
    if (axis == 1) {
      c3.require(rep.verdict == EmpiricalVerdict::escape_observed, "axis 2 verdict " + str(rep.verdict));
      c3.require(dist > 0.5, "axis 2 max distance " + Criterion::fmt(dist) + " <= 0.5");
      continue;
    }
    c3.require(rep.verdict == EmpiricalVerdict::consistent_with_stable,
               "axis " + std::to_string(axis + 1) + " verdict " + str(rep.verdict));
    c3.within(dist, 1e-2, "axis " + std::to_string(axis + 1) + " max orbit distance");
    c3.require(rep.samples.size() == 20u, "sample count");

    // Recheck the bound from the recorded series rather than trusting the count.
    for (const auto& s : rep.samples) {
      if (!s.started_in_tube || !s.ls3_bound) continue;
      ++out.in_tube;
      const double slack = 10.0 * s.drift.max();
      int v = 0;
      for (std::size_t k = 0; k < s.series.f.size(); ++k) {
        if (!std::isfinite(s.series.f[k])) continue;
        const double excess = s.series.f[k] - (*s.ls3_bound + std::max(slack, s.slack));
        out.worst_excess = std::max(out.worst_excess, s.series.f[k] - *s.ls3_bound - slack);
        v += excess > 0.0;
      }
      out.violations += std::max(v, s.violations);
    }
  }
  const bool ok3 = c3.finish(summary + "T = 100, h = 1e-3, delta = 1e-3, 20 samples", 60.0);

  Criterion c4(4);
  c4.require(out.in_tube > 0, "no trajectory started in the tube");
  c4.require(out.violations == 0, std::to_string(out.violations) + " bound violations");
  const bool ok4 = c4.finish(std::to_string(out.in_tube) + " trajectories in the tube, " +
                             std::to_string(out.violations) + " violations, max f - bound - 10 drift = " +
                             Criterion::fmt(out.worst_excess));
  out.ok = ok3 && ok4;
  return out;
}

bool criterion5() {
  Criterion c(5);
  for (const auto& e : system_catalog()) {
    const auto sys = instantiate_system(e.name);
    const auto rep = check_structure(sys, 25, 11, 1e-8);
    c.require(rep.passed(), "structure check fails on " + e.name);
    for (const auto& [name, r] : rep.entries()) c.within(r->max_violation, 1e-8, e.name + " " + name);
  }

  struct Named {
    std::string label;
    PhaseSpaceSystem sys;
    EmcCertificate cert;
  };
  std::vector<Named> cases;
  const auto rb = systems::rigid_body(1, 2, 3);
  cases.push_back({"rigid_body axis 3", rb, certify_at(rb, pt({0, 0, 1}), AlgebraElement(VectorXd(0)))});
  cases.push_back({"rigid_body axis 1", rb, certify_at(rb, pt({1, 0, 0}), AlgebraElement(VectorXd(0)))});
  cases.push_back({"lagrange_top omega 2.5", systems::lagrange_top(1, 1, 1, 2.5), certify_top(2.5)});
  const auto osc = systems::symmetric_oscillator();
  {
    EmcProblem p;
    p.sys = osc;
    p.re = oscillator_re();
    cases.push_back({"symmetric_oscillator circular", osc, certify(p)});
  }
  double worst_angle = 0.0;
  for (const auto& k : cases) {
    c.require(k.cert.verdict == Verdict::CertifiedStable, k.label + " verdict " + to_string(k.cert.verdict));
    const auto a = audit_certificate(k.sys, k.cert);
    c.require(a.f_evaluated, k.label + " Liapunov function not evaluated");
    c.within(a.em1_gradient, 1e-8, k.label + " EM1 gradient");
    c.within(a.k_annihilation, 1e-8, k.label + " K annihilation");
    c.within(a.orbit_in_k_residual, 1e-8, k.label + " orbit tangent outside K");
    c.within(a.f_invariance, 1e-7, k.label + " f invariance");
    c.within(a.f1_slice_agreement, 1e-8, k.label + " f1 slice agreement");
    c.within(a.f2_kernel_angle, 1e-4, k.label + " f2 kernel angle");
    worst_angle = std::max(worst_angle, a.f2_kernel_angle);
  }
  return c.finish("structure on " + std::to_string(system_catalog().size()) + " systems, audits on " +
                  std::to_string(cases.size()) + " certificates, worst f2 kernel angle " + Criterion::fmt(worst_angle));
}

bool criterion6() {
  Criterion c(6);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal;

  // Analytic derivatives against central differences.
  double worst = 0.0;
  auto rel = [](const MatrixXd& fd, const MatrixXd& an) {
    return (fd - an).cwiseAbs().maxCoeff() / std::max(1.0, an.cwiseAbs().maxCoeff());
  };
  for (const auto& e : system_catalog()) {
    const auto sys = instantiate_system(e.name);
    for (int s = 0; s < 100; ++s) {
      Point z(sys.n);
      for (int i = 0; i < sys.n; ++i) z(i) = normal(rng);
      const double eh = rel(hamiltonian_gradient(sys, z, DerivativeMode::FiniteDifference), hamiltonian_gradient(sys, z));
      double ej = 0.0, ec = 0.0;
      if (sys.dim_g() > 0) ej = rel(momentum_jacobian(sys, z, DerivativeMode::FiniteDifference), momentum_jacobian(sys, z));
      if (sys.dim_v > 0) ec = rel(casimir_jacobian(sys, z, DerivativeMode::FiniteDifference), casimir_jacobian(sys, z));
      worst = std::max({worst, eh, ej, ec});
    }
  }
  c.within(worst, 1e-5, "finite-difference gradient error");

  // rk4 on the oscillator, whose flow is a rotation in each (q_i, p_i) plane.
  const auto osc = systems::symmetric_oscillator();
  const Point z0 = pt({1.0, -0.3, 0.2, 0.1, 0.8, -0.5});
  const double T = 2.0;
  Point exact(6);
  exact << z0.head<3>() * std::cos(T) + z0.tail<3>() * std::sin(T), -z0.head<3>() * std::sin(T) + z0.tail<3>() * std::cos(T);
  std::vector<double> errs;
  for (double h : {0.2, 0.1, 0.05}) errs.push_back((integrate(osc, z0, T, h).states.back() - exact).norm());
  const double f1 = errs[0] / errs[1], f2 = errs[1] / errs[2];
  c.require(f1 >= 8.0 && f1 <= 32.0, "rk4 factor 0.2/0.1 = " + Criterion::fmt(f1));
  c.require(f2 >= 8.0 && f2 <= 32.0, "rk4 factor 0.1/0.05 = " + Criterion::fmt(f2));

  // Group identities on every built-in group with a nontrivial algebra.
  double lie = 0.0;
  for (const std::string name : {"so3", "torus1", "torus2"}) {
    const auto g = builtin_group(name);
    const int n = g.dim();
    lie = std::max(lie, g.jacobi_residual());
    for (int s = 0; s < 20; ++s) {
      VectorXd a(n), b(n), m(n);
      for (int i = 0; i < n; ++i) {
        a(i) = normal(rng);
        b(i) = normal(rng);
        m(i) = normal(rng);
      }
      const AlgebraElement zeta(a), eta(b);
      const DualElement mu(m);
      const GroupElement h = exponential(g, zeta);
      // exp(zeta) exp(-zeta) = identity
      const MatrixXd id = h.matrix() * exponential(g, AlgebraElement(VectorXd(-a))).matrix();
      lie = std::max(lie, (id - MatrixXd::Identity(id.rows(), id.cols())).cwiseAbs().maxCoeff());
      // Ad_{exp zeta} = exp(ad_zeta)
      const MatrixXd ad_exp = ad_matrix(g, zeta).exp();
      lie = std::max(lie, (adjoint_matrix(g, h) - ad_exp).cwiseAbs().maxCoeff() / std::max(1.0, ad_exp.norm()));
      // <Ad*_g mu, eta> = <mu, Ad_g eta>
      const double lhs = pairing(coadjoint(g, h, mu), eta), rhs = pairing(mu, adjoint(g, h, eta));
      lie = std::max(lie, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
      // <ad*_zeta mu, eta> = -<mu, [zeta, eta]>
      lie = std::max(lie, std::abs(pairing(coadjoint_algebra(g, zeta, mu), eta) + pairing(mu, bracket(g, zeta, eta))));
    }
  }
  c.within(lie, 1e-10, "Lie group identity residual");

  return c.finish("max FD gradient error " + Criterion::fmt(worst) + ", rk4 factors " + Criterion::fmt(f1) + ", " +
                  Criterion::fmt(f2) + ", Lie identities " + Criterion::fmt(lie));
}

bool criterion7() {
  Criterion c(7);
  std::mt19937_64 rng(2024);
  double worst = 0.0;

  auto check = [&](const std::string& label, const PhaseSpaceSystem& sys, const RelativeEquilibrium& re) {
    EmcProblem p;
    p.sys = sys;
    p.re = re;
    const auto base = certify(p);
    const auto g_mu = momentum_isotropy_algebra(sys.group, re.mu);
    c.require(!g_mu.empty(), label + " has trivial momentum isotropy");
    for (int s = 0; s < 5; ++s) {
      const GroupElement g = random_subgroup_element(sys.group, g_mu, rng, 2.0);
      const Point gz = act(sys, g, re.z_e);
      EmcProblem q = p;
      q.re = make_relative_equilibrium(sys, gz, re.xi);
      const auto moved = certify(q);
      c.require(moved.verdict == base.verdict, label + " sample " + std::to_string(s) + " verdict " +
                                                   str(moved.verdict) + " vs " + str(base.verdict));
      if (moved.spectrum.size() != base.spectrum.size()) {
        c.require(false, label + " spectrum size changed");
        continue;
      }
      const double d = base.spectrum.size() ? (moved.spectrum - base.spectrum).cwiseAbs().maxCoeff() : 0.0;
      worst = std::max(worst, d);
      c.within(d, 1e-6, label + " sample " + std::to_string(s) + " spectrum change");
    }
  };
  check("lagrange_top", systems::lagrange_top(1, 1, 1, 2.5),
        make_relative_equilibrium(systems::lagrange_top(1, 1, 1, 2.5), sleeping(2.5), AlgebraElement(VectorXd::Zero(1))));
  check("symmetric_oscillator", systems::symmetric_oscillator(), oscillator_re());

  return c.finish("5 elements of the momentum isotropy group per system, max spectrum change " + Criterion::fmt(worst));
}

}  // namespace

int main() {
  int failed = 0;
  auto guard = [&](int id, const std::function<bool()>& f) {
    try {
      failed += !f();
    } catch (const std::exception& e) {
      std::printf("criterion %d: FAIL  exception: %s\n", id, e.what());
      ++failed;
    }
  };
  guard(1, criterion1);
  guard(2, criterion2);
  guard(3, [] { return criteria3and4().ok; });
  guard(5, criterion5);
  guard(6, criterion6);
  guard(7, criterion7);
  std::printf("%s\n", failed == 0 ? "acceptance: PASS" : "acceptance: FAIL");
  return failed == 0 ? 0 : 1;
}
