#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "emcert/dynamics.hpp"
#include "emcert/emc.hpp"
#include "emcert/error.hpp"
#include "emcert/lie.hpp"
#include "emcert/phase.hpp"
#include "emcert/releq.hpp"

namespace emcert {

struct OrbitDistance {
  double distance = 0.0;
  /// The optimizer stopped away from a stationary point; distance is then
  /// only an upper bound.
  bool degraded = false;
};

/// Distance from z to the G_mu-orbit of z_e, mu = J(z_e).
class OrbitMetric {
 public:
  OrbitMetric(const PhaseSpaceSystem& sys, const Point& z_e, double tol_null = 1e-8) : sys_(&sys), z_e_(z_e) {
    const DualElement mu = momentum(sys, z_e);
    g_mu_ = momentum_isotropy_algebra(sys.group, mu, tol_null);
    for (const auto& g : sys.group.discrete_samples()) {
      if ((coadjoint(sys.group, g.inverse(), mu).coeffs - mu.coeffs).norm() <= 1e-9 * std::max(1.0, mu.coeffs.norm())) {
        discrete_.push_back(g);
      }
    }
  }

  OrbitDistance operator()(const Point& z) const {
    check_point(*sys_, z);
    const OrbitProjection p = nearest_orbit_point(*sys_, z_e_, g_mu_, z, discrete_);
    return {p.distance, !p.converged};
  }

  const std::vector<AlgebraElement>& momentum_isotropy() const { return g_mu_; }

 private:
  const PhaseSpaceSystem* sys_;
  Point z_e_;
  std::vector<AlgebraElement> g_mu_;
  std::vector<GroupElement> discrete_;
};

inline OrbitDistance orbit_distance(const PhaseSpaceSystem& sys, const Point& z, const RelativeEquilibrium& re) {
  return OrbitMetric(sys, re.z_e)(z);
}

/// |H(z0) - H(z_e)| + |J(z0) - mu|_* |xi| + |C_lambda(z0) - C_lambda(z_e)| + sigma |f2(z0)|.
/// Every term is a constant of motion, so this bounds f along the flow from z0.
inline double ls3_bound(const PhaseSpaceSystem& sys, const EmcCertificate& cert, const Point& z0) {
  if (!cert.sigma) {
    throw Error(ErrorCode::Usage, std::string("certificate with verdict ") + to_string(cert.verdict) +
                                      " has no sigma; the bound is undefined");
  }
  check_point(sys, z0);
  double b = std::abs(hamiltonian(sys, z0) - hamiltonian(sys, cert.z_e));
  double f2 = 0.0;
  if (sys.dim_g() > 0) {
    const double dj = sys.group.norm(DualElement(momentum(sys, z0).coeffs - cert.mu.coeffs));
    b += dj * sys.group.norm(cert.xi_used);
    f2 += dj * dj;
  }
  if (sys.dim_v > 0) {
    const VectorXd dc = casimirs(sys, z0) - cert.casimirs_at_z_e;
    b += std::abs(cert.lambda.dot(dc));
    f2 += dc.dot(sys.inner_product_v * dc);
  }
  return b + *cert.sigma * std::abs(f2);
}

enum class EmpiricalVerdict { consistent_with_stable, escape_observed, inconclusive };

inline const char* to_string(EmpiricalVerdict v) {
  switch (v) {
    case EmpiricalVerdict::consistent_with_stable: return "consistent_with_stable";
    case EmpiricalVerdict::escape_observed: return "escape_observed";
    case EmpiricalVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

struct ExperimentProtocol {
  std::vector<double> deltas{1e-4, 1e-3, 1e-2};
  int samples_per_delta = 20;
  double T = 100.0;
  double h = 1e-3;
  Method method = Method::rk4;
  double escape_radius = 0.5;
  /// Escapes only count towards the verdict for perturbations up to this size.
  double escape_delta_max = 1e-2;
  std::uint64_t seed = 1;
  /// Orbit distance and f are evaluated every record_stride steps.
  int record_stride = 10;
  /// 0 uses the hardware concurrency.
  int threads = 0;
  bool keep_series = false;
};

struct SampleSeries {
  std::vector<double> t;
  std::vector<double> orbit_distance;
  std::vector<double> f;  // NaN where f is not evaluated
};

struct SampleResult {
  double delta = 0.0;
  int index = 0;
  Point z0;
  double max_orbit_distance = 0.0;
  std::optional<double> max_f;
  std::optional<double> ls3_bound;
  double slack = 0.0;
  int violations = 0;
  bool started_in_tube = false;
  bool degraded_distance = false;
  ConservationDrift drift;
  std::optional<std::string> failure;
  SampleSeries series;
};

struct DeltaSummary {
  double delta = 0.0;
  double max_orbit_distance = 0.0;
  std::optional<double> max_f;
  int violations = 0;
  int failures = 0;
  double max_drift = 0.0;
};

struct StabilityExperimentReport {
  ExperimentProtocol protocol;
  std::vector<DeltaSummary> per_delta;
  std::vector<SampleResult> samples;
  int violations = 0;
  bool ls3_monitored = false;
  EmpiricalVerdict verdict = EmpiricalVerdict::inconclusive;
};

namespace detail {

inline Point random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd u(n);
  do {
    for (int i = 0; i < n; ++i) u(i) = normal(rng);
  } while (u.norm() == 0.0);
  return u.normalized();
}

/// Roundoff floor added to the LS3 slack: f and the bound are both sums of
/// O(1) quantities differing by cancellation.
inline double ls3_roundoff_floor(const PhaseSpaceSystem& sys, const EmcCertificate& cert) {
  double scale = 1.0 + std::abs(hamiltonian(sys, cert.z_e));
  if (sys.dim_g() > 0) scale += sys.group.norm(cert.mu) * sys.group.norm(cert.xi_used);
  if (sys.dim_v > 0) scale += std::abs(cert.lambda.dot(cert.casimirs_at_z_e));
  return 1e3 * std::numeric_limits<double>::epsilon() * scale;
}

}  // namespace detail

/// Perturbs z_e by delta * u for random unit u, integrates, and tracks the
/// orbit distance and, for certificates carrying sigma, f against the
/// LS3 bound. Samples run in parallel; each has its own seeded generator.
inline StabilityExperimentReport stability_experiment(const PhaseSpaceSystem& sys, const RelativeEquilibrium& re,
                                                      const EmcCertificate& cert, const ExperimentProtocol& protocol) {
  check_point(sys, re.z_e);
  if (protocol.deltas.empty()) throw Error(ErrorCode::Usage, "empty perturbation ladder");
  for (double d : protocol.deltas) {
    if (!(d >= 0) || !std::isfinite(d)) throw Error(ErrorCode::Usage, "perturbation sizes must be >= 0");
  }
  if (protocol.samples_per_delta < 1) throw Error(ErrorCode::Usage, "samples_per_delta must be >= 1");
  if (protocol.record_stride < 1) throw Error(ErrorCode::Usage, "record_stride must be >= 1");
  if (!(protocol.escape_radius > 0)) throw Error(ErrorCode::Usage, "escape radius must be > 0");
  if (!(protocol.T > 0) || !(protocol.h > 0) || protocol.h > protocol.T) {
    throw Error(ErrorCode::Usage, "integration requires T > 0, h > 0 and h <= T");
  }

  StabilityExperimentReport report;
  report.protocol = protocol;
  report.ls3_monitored = cert.sigma.has_value() && cert.sign_branch.has_value();
  const OrbitMetric metric(sys, re.z_e, cert.tolerances.null);
  std::optional<LiapunovFunction> lf;
  if (report.ls3_monitored) lf.emplace(sys, cert);
  const double floor = report.ls3_monitored ? detail::ls3_roundoff_floor(sys, cert) : 0.0;

  const int per = protocol.samples_per_delta;
  const std::size_t total = protocol.deltas.size() * static_cast<std::size_t>(per);
  report.samples.resize(total);

  auto run_one = [&](std::size_t job) {
    const std::size_t di = job / per;
    const int si = static_cast<int>(job % per);
    SampleResult& s = report.samples[job];
    s.delta = protocol.deltas[di];
    s.index = si;
    std::seed_seq seq{static_cast<std::uint64_t>(protocol.seed), static_cast<std::uint64_t>(di),
                      static_cast<std::uint64_t>(si)};
    std::mt19937_64 rng(seq);
    s.z0 = re.z_e + s.delta * detail::random_unit(rng, sys.n);
    try {
      const OrbitDistance d0 = metric(s.z0);
      s.started_in_tube = d0.distance <= cert.tube_radius;
      const bool monitor = report.ls3_monitored && s.started_in_tube;
      if (monitor) s.ls3_bound = ls3_bound(sys, cert, s.z0);

      // First pass: drift over every step and the sampled points.
      DriftAccumulator drift(sys);
      std::vector<Point> sampled;
      std::vector<double> sampled_t;
      const long n = static_cast<long>(std::ceil(protocol.T / protocol.h - 1e-9));
      integrate_observed(sys, s.z0, protocol.T, protocol.h, protocol.method, [&](int k, double t, const Point& z) {
        drift.add(z);
        if (k % protocol.record_stride == 0 || k == n) {
          sampled.push_back(z);
          sampled_t.push_back(t);
        }
      });
      s.drift = drift.drift();
      s.slack = 10.0 * s.drift.max() + floor;
      for (std::size_t k = 0; k < sampled.size(); ++k) {
        const OrbitDistance od = metric(sampled[k]);
        s.max_orbit_distance = std::max(s.max_orbit_distance, od.distance);
        s.degraded_distance = s.degraded_distance || od.degraded;
        double fv = std::numeric_limits<double>::quiet_NaN();
        if (monitor && od.distance <= cert.tube_radius) {
          fv = (*lf)(sampled[k]).f;
          s.max_f = s.max_f ? std::max(*s.max_f, fv) : fv;
          if (fv > *s.ls3_bound + s.slack) ++s.violations;
        }
        if (protocol.keep_series) {
          s.series.t.push_back(sampled_t[k]);
          s.series.orbit_distance.push_back(od.distance);
          s.series.f.push_back(fv);
        }
      }
    } catch (const Error& e) {
      s.failure = e.what();
    }
  };

  int threads = protocol.threads > 0 ? protocol.threads : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(total));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t job = next++; job < total; job = next++) run_one(job);
    });
  }
  for (auto& th : pool) th.join();

  bool escaped = false;
  bool failed = false;
  for (std::size_t di = 0; di < protocol.deltas.size(); ++di) {
    DeltaSummary sum;
    sum.delta = protocol.deltas[di];
    for (int si = 0; si < per; ++si) {
      const SampleResult& s = report.samples[di * per + si];
      sum.max_orbit_distance = std::max(sum.max_orbit_distance, s.max_orbit_distance);
      if (s.max_f) sum.max_f = sum.max_f ? std::max(*sum.max_f, *s.max_f) : *s.max_f;
      sum.violations += s.violations;
      sum.max_drift = std::max(sum.max_drift, s.drift.max());
      if (s.failure) ++sum.failures;
      if (s.delta <= protocol.escape_delta_max && s.max_orbit_distance > protocol.escape_radius) escaped = true;
    }
    failed = failed || sum.failures > 0;
    report.violations += sum.violations;
    report.per_delta.push_back(sum);
  }
  if (escaped) {
    report.verdict = EmpiricalVerdict::escape_observed;
  } else if (failed) {
    report.verdict = EmpiricalVerdict::inconclusive;
  } else {
    report.verdict = EmpiricalVerdict::consistent_with_stable;
  }
  return report;
}

}  // namespace emcert
