#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "emcert/emc.hpp"
#include "emcert/releq.hpp"
#include "emcert/systems.hpp"

using namespace emcert;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Usage;
}

}  // namespace

TEST(Catalog, ListsTheFourSystems) {
  std::set<std::string> names;
  for (const auto& e : system_catalog()) names.insert(e.name);
  EXPECT_EQ(names, (std::set<std::string>{"rigid_body", "lagrange_top", "symmetric_oscillator", "harmonic_s1"}));
}

TEST(Catalog, DefaultsPassStructureChecks) {
  for (const auto& e : system_catalog()) {
    const auto sys = instantiate_system(e.name);
    const auto rep = check_structure(sys, 25, 3, 1e-8);
    EXPECT_TRUE(rep.passed()) << e.name;
    for (const auto& [name, r] : rep.entries()) EXPECT_LE(r->max_violation, 1e-8) << e.name << " " << name;
  }
}

TEST(Catalog, SeedsAreRelativeEquilibria) {
  for (const auto& e : system_catalog()) {
    const auto sys = instantiate_system(e.name);
    const auto seeds = known_equilibria(e.name);
    EXPECT_FALSE(seeds.empty()) << e.name;
    for (const auto& s : seeds) {
      EXPECT_LE(relative_equilibrium_residual(sys, s.point, AlgebraElement(s.xi)), 1e-12) << e.name << " " << s.name;
    }
  }
}

TEST(Catalog, ParametersArePassedThrough) {
  const auto sys = instantiate_system("rigid_body", {{"I1", 2.0}, {"I3", 5.0}});
  EXPECT_EQ(sys.parameters.at("I1"), 2.0);
  EXPECT_EQ(sys.parameters.at("I2"), 2.0);
  EXPECT_EQ(sys.parameters.at("I3"), 5.0);
  // H = 1/2 sum Pi_i^2 / I_i
  EXPECT_DOUBLE_EQ(hamiltonian(sys, pt({1, 1, 1})), 0.5 * (0.5 + 0.5 + 0.2));
}

TEST(Catalog, UnknownSystem) {
  EXPECT_EQ(code_of([] { instantiate_system("double_pendulum"); }), ErrorCode::UnknownSystem);
  try {
    instantiate_system("double_pendulum");
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("lagrange_top"), std::string::npos);
  }
}

TEST(Catalog, ParameterErrors) {
  EXPECT_EQ(code_of([] { instantiate_system("rigid_body", {{"I4", 1.0}}); }), ErrorCode::Parameter);
  EXPECT_EQ(code_of([] { instantiate_system("rigid_body", {{"I1", 0.0}}); }), ErrorCode::Parameter);
  EXPECT_EQ(code_of([] { instantiate_system("rigid_body", {{"I2", -1.0}}); }), ErrorCode::Parameter);
  EXPECT_EQ(code_of([] { instantiate_system("lagrange_top", {{"Mgl", -0.1}}); }), ErrorCode::Parameter);
  EXPECT_EQ(code_of([] { instantiate_system("lagrange_top", {{"omega", std::nan("")}}); }), ErrorCode::Parameter);
  EXPECT_EQ(code_of([] { instantiate_system("symmetric_oscillator", {{"k", 1.0}}); }), ErrorCode::Parameter);
  try {
    instantiate_system("rigid_body", {{"I4", 1.0}});
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("I1, I2, I3"), std::string::npos);
  }
}

TEST(Catalog, BoundaryValues) {
  EXPECT_NO_THROW(instantiate_system("lagrange_top", {{"Mgl", 0.0}}));
  EXPECT_NO_THROW(instantiate_system("lagrange_top", {{"omega", -3.0}}));
}

TEST(RigidBody, AxisSeedsAndStructure) {
  const auto seeds = known_equilibria("rigid_body", {{"I1", 1.0}, {"I2", 2.0}, {"I3", 3.0}});
  ASSERT_EQ(seeds.size(), 6u);
  for (const auto& s : seeds) {
    EXPECT_NEAR(s.point.norm(), 1.0, 0.0);
    EXPECT_EQ(s.point.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_EQ(s.xi.size(), 0);
  }
  EXPECT_EQ(seeds[1].name, "-axis1");
  EXPECT_EQ(seeds[1].point, pt({-1, 0, 0}));
  EXPECT_FALSE(std::signbit(seeds[1].point(1)));
}

TEST(RigidBody, TensorAndCasimir) {
  const auto sys = systems::rigid_body(1, 2, 3);
  const Point z = pt({0.3, -0.4, 1.2});
  MatrixXd expected(3, 3);
  expected << 0, 1.2, 0.4, -1.2, 0, 0.3, -0.4, -0.3, 0;  // -hat(z)
  EXPECT_EQ(poisson_tensor(sys, z), expected);
  EXPECT_DOUBLE_EQ(casimirs(sys, z)(0), z.squaredNorm());
  EXPECT_EQ(sys.dim_g(), 0);
}

TEST(RigidBody, SphericalInertiaIsAcceptedAndDegenerate) {
  const auto sys = instantiate_system("rigid_body", {{"I1", 1.0}, {"I2", 1.0}, {"I3", 1.0}});
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  for (int s = 0; s < 5; ++s) {
    const Point z = pt({n(rng), n(rng), n(rng)}).normalized();
    EmcProblem p;
    p.sys = sys;
    p.re = make_relative_equilibrium(sys, z, AlgebraElement(VectorXd(0)));
    const auto c = certify(p);
    EXPECT_LE(c.spectrum.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(c.verdict, Verdict::Inconclusive_KernelMismatch);
  }
}

TEST(LagrangeTop, ModelTerms) {
  const auto sys = instantiate_system("lagrange_top", {{"Mgl", 2.0}, {"I1", 0.5}, {"I3", 4.0}, {"omega", 1.0}});
  const Point z = pt({1, 2, 3, 0.1, 0.2, 0.3});
  EXPECT_DOUBLE_EQ(hamiltonian(sys, z), 0.5 * (1 + 4) / 0.5 + 9.0 / 8.0 + 2.0 * 0.3);
  EXPECT_DOUBLE_EQ(momentum(sys, z).coeffs(0), 3.0);
  EXPECT_NEAR(casimirs(sys, z)(0), 0.14, 1e-15);
  EXPECT_NEAR(casimirs(sys, z)(1), 1.4, 1e-15);
  MatrixXd b = poisson_tensor(sys, z);
  EXPECT_EQ(b.bottomRightCorner(3, 3), MatrixXd::Zero(3, 3));
  EXPECT_EQ(MatrixXd(b.topLeftCorner(3, 3)), MatrixXd(-systems::hat3(z.head<3>())));
  EXPECT_EQ(MatrixXd(b.topRightCorner(3, 3)), MatrixXd(-systems::hat3(z.tail<3>())));
}

TEST(LagrangeTop, SleepingStateFullIsotropy) {
  for (double omega : {0.5, 2.5, -1.0}) {
    const auto sys = instantiate_system("lagrange_top", {{"omega", omega}, {"I3", 1.5}});
    const Point z = known_equilibria("lagrange_top", {{"omega", omega}, {"I3", 1.5}})[0].point;
    EXPECT_EQ(z, pt({0, 0, 1.5 * omega, 0, 0, 1}));
    for (double xi : {-2.0, 0.0, 3.0}) {
      EXPECT_EQ(relative_equilibrium_residual(sys, z, AlgebraElement(VectorXd::Constant(1, xi))), 0.0);
    }
    EXPECT_EQ(point_isotropy_algebra(sys, z).size(), 1u);
  }
}

TEST(LagrangeTop, ActionRotatesBothVectors) {
  const auto sys = systems::lagrange_top(1, 1, 1, 2.5);
  const GroupElement g = exponential(sys.group, AlgebraElement(VectorXd::Constant(1, M_PI / 2)));
  const Point gz = act(sys, g, pt({1, 0, 7, 0, 1, 5}));
  EXPECT_LE((gz - pt({0, 1, 7, -1, 0, 5})).norm(), 1e-15);
}

TEST(Oscillator, CircularOrbit) {
  const auto sys = instantiate_system("symmetric_oscillator");
  const Point z = pt({1, 0, 0, 0, 1, 0});
  const AlgebraElement xi(VectorXd(Eigen::Vector3d(0, 0, 1)));
  EXPECT_LE(relative_equilibrium_residual(sys, z, xi), 1e-12);
  const DualElement mu = momentum(sys, z);
  EXPECT_EQ(mu.coeffs, VectorXd(Eigen::Vector3d(0, 0, 1)));
  const auto g_mu = momentum_isotropy_algebra(sys.group, mu);
  ASSERT_EQ(g_mu.size(), 1u);
  const MatrixXd orbit = orbit_tangent_basis(sys, z, g_mu);
  EXPECT_EQ(orbit.cols(), 1);
  const MatrixXd k = constraint_space(sys, z);
  EXPECT_LE((orbit - k * (k.transpose() * orbit)).norm(), 1e-12);
  EXPECT_EQ(sys.dim_v, 0);
}

TEST(Oscillator, MomentumIsAngularMomentum) {
  const auto sys = systems::symmetric_oscillator();
  const Eigen::Vector3d q(0.3, -1.0, 2.0), p(1.5, 0.2, -0.7);
  Point z(6);
  z << q, p;
  EXPECT_LE((momentum(sys, z).coeffs - VectorXd(q.cross(p))).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(hamiltonian(sys, z), 0.5 * (q.squaredNorm() + p.squaredNorm()));
}

TEST(HarmonicS1, EveryPointIsARelativeEquilibrium) {
  const auto sys = instantiate_system("harmonic_s1");
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n;
  for (int s = 0; s < 20; ++s) {
    const Point z = pt({n(rng), n(rng)});
    EXPECT_LE(relative_equilibrium_residual(sys, z, AlgebraElement(VectorXd::Ones(1))), 1e-14);
    EXPECT_DOUBLE_EQ(hamiltonian(sys, z), momentum(sys, z).coeffs(0));
  }
}
