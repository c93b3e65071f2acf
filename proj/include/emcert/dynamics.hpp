#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "emcert/error.hpp"
#include "emcert/phase.hpp"

namespace emcert {

enum class Method { rk4, implicit_midpoint };

inline const char* to_string(Method m) { return m == Method::rk4 ? "rk4" : "implicit_midpoint"; }

inline Method parse_method(const std::string& s) {
  if (s == "rk4") return Method::rk4;
  if (s == "implicit_midpoint") return Method::implicit_midpoint;
  throw Error(ErrorCode::Usage, "unknown integration method '" + s + "' (rk4, implicit_midpoint)");
}

struct Trajectory {
  std::vector<double> times;
  std::vector<Point> states;
  Method method = Method::rk4;
  double step = 0.0;

  std::size_t size() const { return times.size(); }
};

/// Thrown when the state stops being finite; carries the time of failure.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double t) : Error(ErrorCode::BlowUp, what + " at t = " + std::to_string(t)), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

class StepFailureError : public Error {
 public:
  StepFailureError(const std::string& what, double t)
      : Error(ErrorCode::StepFailure, what + " at t = " + std::to_string(t)), t_(t) {}
  double time() const noexcept { return t_; }

 private:
  double t_;
};

namespace detail {

inline Point rk4_step(const PhaseSpaceSystem& sys, const Point& z, double h) {
  const VectorXd k1 = hamiltonian_vector_field(sys, z);
  const VectorXd k2 = hamiltonian_vector_field(sys, z + 0.5 * h * k1);
  const VectorXd k3 = hamiltonian_vector_field(sys, z + 0.5 * h * k2);
  const VectorXd k4 = hamiltonian_vector_field(sys, z + h * k3);
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Solves w = z + h X((z + w)/2): fixed-point iteration first, then damped
/// Newton with a finite-difference Jacobian.
inline Point midpoint_step(const PhaseSpaceSystem& sys, const Point& z, double h, double t) {
  constexpr double tol = 1e-12;
  const double scale = std::max(1.0, z.norm());
  auto residual = [&](const Point& w) -> VectorXd {
    return w - z - h * hamiltonian_vector_field(sys, 0.5 * (z + w));
  };
  Point w = rk4_step(sys, z, h);
  for (int it = 0; it < 50; ++it) {
    const Point next = z + h * hamiltonian_vector_field(sys, 0.5 * (z + w));
    const double change = (next - w).norm();
    w = next;
    if (change <= tol * scale) return w;
  }
  VectorXd r = residual(w);
  for (int it = 0; it < 30; ++it) {
    if (r.norm() <= tol * scale) return w;
    const MatrixXd jac = numdiff::jacobian([&](const Point& v) { return residual(v); }, w, sys.n);
    VectorXd dw = jac.colPivHouseholderQr().solve(-r);
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      const Point trial = w + dw;
      const VectorXd rt = residual(trial);
      if (rt.allFinite() && rt.norm() < r.norm()) {
        w = trial;
        r = rt;
        improved = true;
        break;
      }
      dw *= 0.5;
    }
    if (!improved) break;
  }
  if (r.norm() <= tol * scale) return w;
  throw StepFailureError("implicit midpoint stage equation did not converge (residual " +
                             std::to_string(r.norm()) + ")",
                         t);
}

}  // namespace detail

/// Fixed-step integration of dz/dt = B(z) grad H(z) over [0, T] with
/// n = ceil(T/h) steps of size T/n. The observer sees every step.
inline void integrate_observed(const PhaseSpaceSystem& sys, const Point& z0, double T, double h, Method method,
                               const std::function<void(int, double, const Point&)>& observer) {
  check_point(sys, z0);
  if (!(T > 0) || !(h > 0) || h > T || !std::isfinite(T)) {
    throw Error(ErrorCode::Usage, "integration requires T > 0, h > 0 and h <= T");
  }
  if (!z0.allFinite()) throw BlowUpError("initial state is not finite", 0.0);
  const long n = static_cast<long>(std::ceil(T / h - 1e-9));
  const double dt = T / static_cast<double>(n);
  Point z = z0;
  observer(0, 0.0, z);
  for (long k = 1; k <= n; ++k) {
    const double t_prev = (k - 1) * dt;
    try {
      z = method == Method::rk4 ? detail::rk4_step(sys, z, dt) : detail::midpoint_step(sys, z, dt, t_prev);
    } catch (const EvaluationError&) {
      throw BlowUpError("vector field evaluation failed", t_prev);
    }
    const double t = k == n ? T : k * dt;
    if (!z.allFinite()) throw BlowUpError("state is not finite", t);
    observer(static_cast<int>(k), t, z);
  }
}

/// Stores every record_stride-th state plus the final one.
inline Trajectory integrate(const PhaseSpaceSystem& sys, const Point& z0, double T, double h,
                            Method method = Method::rk4, int record_stride = 1) {
  if (record_stride < 1) throw Error(ErrorCode::Usage, "record_stride must be >= 1");
  Trajectory tr;
  tr.method = method;
  tr.step = T / std::ceil(T / h - 1e-9);
  const long n = static_cast<long>(std::ceil(T / h - 1e-9));
  integrate_observed(sys, z0, T, h, method, [&](int k, double t, const Point& z) {
    if (k % record_stride == 0 || k == n) {
      tr.times.push_back(t);
      tr.states.push_back(z);
    }
  });
  return tr;
}

struct ConservationDrift {
  double hamiltonian = 0.0;  // max |H(z) - H(z0)|
  double momentum = 0.0;     // max |J(z) - J(z0)| in the dual norm
  double casimirs = 0.0;     // max |C(z) - C(z0)| in the V norm

  double max() const { return std::max({hamiltonian, momentum, casimirs}); }
};

/// Running maxima, fed one state at a time.
class DriftAccumulator {
 public:
  explicit DriftAccumulator(const PhaseSpaceSystem& sys) : sys_(&sys) {}

  void add(const Point& z) {
    const double h = hamiltonian(*sys_, z);
    const VectorXd j = sys_->dim_g() > 0 ? momentum(*sys_, z).coeffs : VectorXd(0);
    const VectorXd c = sys_->dim_v > 0 ? casimirs(*sys_, z) : VectorXd(0);
    if (!started_) {
      h0_ = h;
      j0_ = j;
      c0_ = c;
      started_ = true;
      return;
    }
    d_.hamiltonian = std::max(d_.hamiltonian, std::abs(h - h0_));
    if (j.size() > 0) d_.momentum = std::max(d_.momentum, sys_->group.norm(DualElement(j - j0_)));
    if (c.size() > 0) {
      const VectorXd dc = c - c0_;
      d_.casimirs = std::max(d_.casimirs, std::sqrt(std::max(0.0, dc.dot(sys_->inner_product_v * dc))));
    }
  }

  const ConservationDrift& drift() const { return d_; }

 private:
  const PhaseSpaceSystem* sys_;
  bool started_ = false;
  double h0_ = 0.0;
  VectorXd j0_, c0_;
  ConservationDrift d_;
};

inline ConservationDrift conservation_drift(const PhaseSpaceSystem& sys, const Trajectory& traj) {
  if (traj.states.empty()) throw Error(ErrorCode::Usage, "empty trajectory");
  DriftAccumulator acc(sys);
  for (const auto& z : traj.states) acc.add(z);
  return acc.drift();
}

/// Header "t,z1,...,zn", one row per recorded state, full precision.
inline void write_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  os << "t";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",z" << i;
  os << '\n';
  std::ostringstream row;
  row.precision(17);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    row.str("");
    row << traj.times[k];
    for (Eigen::Index i = 0; i < n; ++i) row << ',' << traj.states[k](i);
    os << row.str() << '\n';
  }
}

}  // namespace emcert
