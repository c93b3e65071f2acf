#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "emcert/error.hpp"
#include "emcert/lie.hpp"
#include "emcert/phase.hpp"

namespace emcert {

struct ParameterSpec {
  std::string name;
  double default_value = 0.0;
  double min = -std::numeric_limits<double>::infinity();
  double max = std::numeric_limits<double>::infinity();
  bool min_exclusive = false;
  std::string description;

  bool admissible(double v) const {
    if (!std::isfinite(v)) return false;
    if (min_exclusive ? !(v > min) : !(v >= min)) return false;
    return v <= max;
  }
};

struct KnownEquilibrium {
  std::string name;
  Point point;
  VectorXd xi;
};

using ParameterMap = std::map<std::string, double>;

struct SystemCatalogEntry {
  std::string name;
  std::string description;
  std::vector<ParameterSpec> parameters;
  std::function<PhaseSpaceSystem(const ParameterMap&)> construct;
  std::function<std::vector<KnownEquilibrium>(const ParameterMap&)> seeds;
};

namespace systems {

inline Eigen::Matrix3d hat3(const Eigen::Vector3d& w) {
  Eigen::Matrix3d m;
  m << 0, -w(2), w(1), w(2), 0, -w(0), -w(1), w(0), 0;
  return m;
}

inline MatrixXd canonical_tensor(int dof) {
  MatrixXd b = MatrixXd::Zero(2 * dof, 2 * dof);
  b.topRightCorner(dof, dof) = MatrixXd::Identity(dof, dof);
  b.bottomLeftCorner(dof, dof) = -MatrixXd::Identity(dof, dof);
  return b;
}

/// Free rigid body in body coordinates Pi, Lie-Poisson tensor -hat(Pi),
/// trivial symmetry group and Casimir |Pi|^2.
inline PhaseSpaceSystem rigid_body(double i1, double i2, double i3) {
  PhaseSpaceSystem s;
  s.name = "rigid_body";
  s.n = 3;
  s.group = trivial_group();
  const Eigen::Vector3d inv(1.0 / i1, 1.0 / i2, 1.0 / i3);
  s.poisson_tensor = [](const Point& z) -> MatrixXd { return -hat3(z.head<3>()); };
  s.hamiltonian = [inv](const Point& z) { return 0.5 * (z.head<3>().array().square() * inv.array()).sum(); };
  s.hamiltonian_gradient = [inv](const Point& z) -> VectorXd { return z.head<3>().cwiseProduct(inv); };
  s.hamiltonian_hessian = [inv](const Point&) -> MatrixXd { return inv.asDiagonal().toDenseMatrix(); };
  s.dim_v = 1;
  s.inner_product_v = MatrixXd::Identity(1, 1);
  s.casimirs = [](const Point& z) -> VectorXd { return VectorXd::Constant(1, z.head<3>().squaredNorm()); };
  s.casimir_jacobian = [](const Point& z) -> MatrixXd { return 2.0 * z.head<3>().transpose(); };
  s.casimir_hessians = [](const Point&) { return std::vector<MatrixXd>{2.0 * MatrixXd::Identity(3, 3)}; };
  s.action = [](const GroupElement&, const Point& z) { return z; };
  s.parameters = {{"I1", i1}, {"I2", i2}, {"I3", i3}};
  return s;
}

/// Heavy symmetric (Lagrange) top on R^6 = (Pi, Gamma) with the
/// Lie-Poisson tensor -[[hat Pi, hat Gamma], [hat Gamma, 0]], symmetry
/// S^1 rotating both vectors about e3, momentum Pi_3 and Casimirs
/// (|Gamma|^2, Pi . Gamma).
inline PhaseSpaceSystem lagrange_top(double mgl, double i1, double i3, double omega) {
  PhaseSpaceSystem s;
  s.name = "lagrange_top";
  s.n = 6;
  s.group = torus1_group();
  s.poisson_tensor = [](const Point& z) -> MatrixXd {
    MatrixXd b = MatrixXd::Zero(6, 6);
    const Eigen::Matrix3d pi = hat3(z.head<3>());
    const Eigen::Matrix3d ga = hat3(z.tail<3>());
    b.topLeftCorner(3, 3) = -pi;
    b.topRightCorner(3, 3) = -ga;
    b.bottomLeftCorner(3, 3) = -ga;
    return b;
  };
  s.hamiltonian = [=](const Point& z) {
    return 0.5 * (z(0) * z(0) + z(1) * z(1)) / i1 + 0.5 * z(2) * z(2) / i3 + mgl * z(5);
  };
  s.hamiltonian_gradient = [=](const Point& z) -> VectorXd {
    VectorXd g(6);
    g << z(0) / i1, z(1) / i1, z(2) / i3, 0, 0, mgl;
    return g;
  };
  s.hamiltonian_hessian = [=](const Point&) -> MatrixXd {
    MatrixXd h = MatrixXd::Zero(6, 6);
    h(0, 0) = h(1, 1) = 1.0 / i1;
    h(2, 2) = 1.0 / i3;
    return h;
  };
  s.momentum_map = [](const Point& z) -> VectorXd { return VectorXd::Constant(1, z(2)); };
  s.momentum_jacobian = [](const Point&) -> MatrixXd {
    MatrixXd j = MatrixXd::Zero(1, 6);
    j(0, 2) = 1.0;
    return j;
  };
  s.momentum_hessians = [](const Point&) { return std::vector<MatrixXd>{MatrixXd::Zero(6, 6)}; };
  s.dim_v = 2;
  s.inner_product_v = MatrixXd::Identity(2, 2);
  s.casimirs = [](const Point& z) -> VectorXd {
    VectorXd c(2);
    c << z.tail<3>().squaredNorm(), z.head<3>().dot(z.tail<3>());
    return c;
  };
  s.casimir_jacobian = [](const Point& z) -> MatrixXd {
    MatrixXd j = MatrixXd::Zero(2, 6);
    j.block(0, 3, 1, 3) = 2.0 * z.tail<3>().transpose();
    j.block(1, 0, 1, 3) = z.tail<3>().transpose();
    j.block(1, 3, 1, 3) = z.head<3>().transpose();
    return j;
  };
  s.casimir_hessians = [](const Point&) {
    MatrixXd h1 = MatrixXd::Zero(6, 6);
    h1.bottomRightCorner(3, 3) = 2.0 * MatrixXd::Identity(3, 3);
    MatrixXd h2 = MatrixXd::Zero(6, 6);
    h2.topRightCorner(3, 3) = MatrixXd::Identity(3, 3);
    h2.bottomLeftCorner(3, 3) = MatrixXd::Identity(3, 3);
    return std::vector<MatrixXd>{h1, h2};
  };
  s.action = [](const GroupElement& g, const Point& z) -> Point {
    Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
    r.topLeftCorner<2, 2>() = g.matrix();
    Point out(6);
    out.head<3>() = r * z.head<3>();
    out.tail<3>() = r * z.tail<3>();
    return out;
  };
  MatrixXd gen = MatrixXd::Zero(6, 6);
  gen.topLeftCorner(3, 3) = hat3({0, 0, 1});
  gen.bottomRightCorner(3, 3) = hat3({0, 0, 1});
  s.linear_generators = {gen};
  s.parameters = {{"Mgl", mgl}, {"I1", i1}, {"I3", i3}, {"omega", omega}};
  return s;
}

/// Isotropic oscillator on T*R^3 with SO(3) acting diagonally; J = q x p.
inline PhaseSpaceSystem symmetric_oscillator() {
  PhaseSpaceSystem s;
  s.name = "symmetric_oscillator";
  s.n = 6;
  s.group = so3_group();
  const MatrixXd b = canonical_tensor(3);
  s.poisson_tensor = [b](const Point&) { return b; };
  s.hamiltonian = [](const Point& z) { return 0.5 * z.squaredNorm(); };
  s.hamiltonian_gradient = [](const Point& z) -> VectorXd { return z; };
  s.hamiltonian_hessian = [](const Point&) -> MatrixXd { return MatrixXd::Identity(6, 6); };
  s.momentum_map = [](const Point& z) -> VectorXd {
    return Eigen::Vector3d(z.head<3>()).cross(Eigen::Vector3d(z.tail<3>()));
  };
  s.momentum_jacobian = [](const Point& z) -> MatrixXd {
    MatrixXd j(3, 6);
    j.leftCols(3) = -hat3(z.tail<3>());
    j.rightCols(3) = hat3(z.head<3>());
    return j;
  };
  s.momentum_hessians = [](const Point&) {
    std::vector<MatrixXd> hs;
    for (int k = 0; k < 3; ++k) {
      MatrixXd h = MatrixXd::Zero(6, 6);
      // J_k = eps_kij q_i p_j
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const double e = ((k - i) * (i - j) * (j - k)) / 2.0;  // Levi-Civita symbol
          h(i, 3 + j) = e;
          h(3 + j, i) = e;
        }
      hs.push_back(h);
    }
    return hs;
  };
  s.action = [](const GroupElement& g, const Point& z) -> Point {
    Point out(6);
    out.head<3>() = g.matrix() * z.head<3>();
    out.tail<3>() = g.matrix() * z.tail<3>();
    return out;
  };
  for (int k = 0; k < 3; ++k) {
    MatrixXd gen = MatrixXd::Zero(6, 6);
    const Eigen::Matrix3d e = hat3(Eigen::Vector3d::Unit(k));
    gen.topLeftCorner(3, 3) = e;
    gen.bottomRightCorner(3, 3) = e;
    s.linear_generators.push_back(gen);
  }
  return s;
}

/// Planar harmonic oscillator, H = J = (q^2 + p^2) / 2, with S^1 acting by
/// the flow of J (clockwise rotation of (q, p)).
inline PhaseSpaceSystem harmonic_s1() {
  PhaseSpaceSystem s;
  s.name = "harmonic_s1";
  s.n = 2;
  s.group = torus1_group();
  const MatrixXd b = canonical_tensor(1);
  s.poisson_tensor = [b](const Point&) { return b; };
  s.hamiltonian = [](const Point& z) { return 0.5 * z.squaredNorm(); };
  s.hamiltonian_gradient = [](const Point& z) -> VectorXd { return z; };
  s.hamiltonian_hessian = [](const Point&) -> MatrixXd { return MatrixXd::Identity(2, 2); };
  s.momentum_map = [](const Point& z) -> VectorXd { return VectorXd::Constant(1, 0.5 * z.squaredNorm()); };
  s.momentum_jacobian = [](const Point& z) -> MatrixXd { return z.transpose(); };
  s.momentum_hessians = [](const Point&) { return std::vector<MatrixXd>{MatrixXd::Identity(2, 2)}; };
  s.action = [](const GroupElement& g, const Point& z) -> Point { return g.matrix().transpose() * z; };
  MatrixXd gen(2, 2);
  gen << 0, 1, -1, 0;
  s.linear_generators = {gen};
  return s;
}

}  // namespace systems

// ---------------------------------------------------------------------------
// Catalog

inline const std::vector<SystemCatalogEntry>& system_catalog() {
  static const std::vector<SystemCatalogEntry> catalog = [] {
    std::vector<SystemCatalogEntry> c;
    const double inf = std::numeric_limits<double>::infinity();

    c.push_back(SystemCatalogEntry{
        "rigid_body",
        "free rigid body, trivial symmetry, Casimir |Pi|^2",
        {{"I1", 1.0, 0.0, inf, true, "principal moment of inertia 1"},
         {"I2", 2.0, 0.0, inf, true, "principal moment of inertia 2"},
         {"I3", 3.0, 0.0, inf, true, "principal moment of inertia 3"}},
        [](const ParameterMap& p) { return systems::rigid_body(p.at("I1"), p.at("I2"), p.at("I3")); },
        [](const ParameterMap&) {
          std::vector<KnownEquilibrium> seeds;
          const char* names[] = {"axis1", "axis2", "axis3"};
          for (int k = 0; k < 3; ++k) {
            seeds.push_back({std::string("+") + names[k], Point(Point::Unit(3, k)), VectorXd(0)});
            Point minus = Point::Zero(3);
            minus(k) = -1.0;
            seeds.push_back({std::string("-") + names[k], minus, VectorXd(0)});
          }
          return seeds;
        }});

    c.push_back(SystemCatalogEntry{
        "lagrange_top",
        "heavy symmetric top, S^1 symmetry about e3, Casimirs (|Gamma|^2, Pi.Gamma)",
        {{"Mgl", 1.0, 0.0, inf, false, "weight times distance of fixed point to center of mass"},
         {"I1", 1.0, 0.0, inf, true, "transverse moment of inertia"},
         {"I3", 1.0, 0.0, inf, true, "axial moment of inertia"},
         {"omega", 2.5, -inf, inf, false, "spin rate of the sleeping state"}},
        [](const ParameterMap& p) {
          return systems::lagrange_top(p.at("Mgl"), p.at("I1"), p.at("I3"), p.at("omega"));
        },
        [](const ParameterMap& p) {
          Point z(6);
          z << 0, 0, p.at("I3") * p.at("omega"), 0, 0, 1;
          return std::vector<KnownEquilibrium>{{"sleeping", z, VectorXd::Zero(1)}};
        }});

    c.push_back(SystemCatalogEntry{
        "symmetric_oscillator",
        "isotropic 3D oscillator, SO(3) acting diagonally, J = q x p",
        {},
        [](const ParameterMap&) { return systems::symmetric_oscillator(); },
        [](const ParameterMap&) {
          Point z(6);
          z << 1, 0, 0, 0, 1, 0;
          return std::vector<KnownEquilibrium>{{"circular", z, VectorXd(Eigen::Vector3d(0, 0, 1))}};
        }});

    c.push_back(SystemCatalogEntry{
        "harmonic_s1",
        "planar harmonic oscillator with its own S^1 symmetry",
        {},
        [](const ParameterMap&) { return systems::harmonic_s1(); },
        [](const ParameterMap&) {
          return std::vector<KnownEquilibrium>{{"unit_circle", Point(Point::Unit(2, 0)), VectorXd::Ones(1)}};
        }});
    return c;
  }();
  return catalog;
}

inline const SystemCatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : system_catalog()) {
    if (e.name == name) return e;
  }
  std::string known;
  for (const auto& e : system_catalog()) known += (known.empty() ? "" : ", ") + e.name;
  throw Error(ErrorCode::UnknownSystem, "unknown system '" + name + "' (known: " + known + ")");
}

/// Fills defaults and validates names and ranges.
inline ParameterMap resolve_parameters(const SystemCatalogEntry& entry, const ParameterMap& params) {
  ParameterMap out;
  for (const auto& spec : entry.parameters) out[spec.name] = spec.default_value;
  for (const auto& [key, value] : params) {
    auto it = std::find_if(entry.parameters.begin(), entry.parameters.end(),
                           [&](const ParameterSpec& s) { return s.name == key; });
    if (it == entry.parameters.end()) {
      std::string known;
      for (const auto& s : entry.parameters) known += (known.empty() ? "" : ", ") + s.name;
      throw Error(ErrorCode::Parameter, "unknown parameter '" + key + "' for system '" + entry.name +
                                            "' (admissible: " + (known.empty() ? "none" : known) + ")");
    }
    if (!it->admissible(value)) {
      std::ostringstream os;
      os << "parameter '" << key << "' = " << value << " out of range for system '" << entry.name << "' (must be "
         << (it->min_exclusive ? "> " : ">= ") << it->min << " and <= " << it->max << ")";
      throw Error(ErrorCode::Parameter, os.str());
    }
    out[key] = value;
  }
  return out;
}

inline PhaseSpaceSystem instantiate_system(const std::string& name, const ParameterMap& params = {}) {
  const auto& entry = catalog_entry(name);
  return entry.construct(resolve_parameters(entry, params));
}

inline std::vector<KnownEquilibrium> known_equilibria(const std::string& name, const ParameterMap& params = {}) {
  const auto& entry = catalog_entry(name);
  return entry.seeds(resolve_parameters(entry, params));
}

}  // namespace emcert
