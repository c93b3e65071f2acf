#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "emcert/dynamics.hpp"
#include "emcert/systems.hpp"

using namespace emcert;

namespace {

Point pt(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p(i++) = x;
  return p;
}

PhaseSpaceSystem canonical_plane(std::function<double(const Point&)> h) {
  PhaseSpaceSystem s;
  s.name = "plane";
  s.n = 2;
  s.poisson_tensor = [](const Point&) -> MatrixXd { return systems::canonical_tensor(1); };
  s.hamiltonian = std::move(h);
  return s;
}

/// Exact harmonic flow for X = (p, -q).
Point harmonic_exact(const Point& z0, double t) {
  return pt({z0(0) * std::cos(t) + z0(1) * std::sin(t), -z0(0) * std::sin(t) + z0(1) * std::cos(t)});
}

}  // namespace

TEST(Integrate, HarmonicFullPeriod) {
  const auto traj = integrate(systems::harmonic_s1(), pt({1, 0}), 2 * M_PI, 1e-3);
  EXPECT_LE((traj.states.back() - pt({1, 0})).norm(), 1e-9);
  EXPECT_DOUBLE_EQ(traj.times.back(), 2 * M_PI);
}

TEST(Integrate, HarmonicMatchesClosedFormThroughout) {
  const Point z0 = pt({0.3, -1.2});
  const auto traj = integrate(systems::harmonic_s1(), z0, 5.0, 1e-2, Method::rk4, 7);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_LE((traj.states[k] - harmonic_exact(z0, traj.times[k])).norm(), 1e-8) << traj.times[k];
  }
}

TEST(Integrate, ZeroFieldIsConstant) {
  const auto sys = canonical_plane([](const Point&) { return 4.0; });
  for (Method m : {Method::rk4, Method::implicit_midpoint}) {
    const auto traj = integrate(sys, pt({0.7, -0.2}), 3.0, 0.1, m);
    for (const auto& z : traj.states) EXPECT_EQ(z, pt({0.7, -0.2}));
    const auto d = conservation_drift(sys, traj);
    EXPECT_EQ(d.hamiltonian, 0.0);
    EXPECT_EQ(d.max(), 0.0);
  }
}

TEST(Integrate, RigidBodyEquilibriumStaysPut) {
  const auto traj = integrate(systems::rigid_body(1, 2, 3), pt({0, 0, 1}), 10.0, 1e-3);
  for (const auto& z : traj.states) EXPECT_LE((z - pt({0, 0, 1})).norm(), 1e-12);
}

TEST(Integrate, TimesAndStates) {
  const auto traj = integrate(systems::harmonic_s1(), pt({1, 0}), 1.0, 0.1, Method::rk4, 3);
  ASSERT_EQ(traj.times.size(), traj.states.size());
  const std::vector<double> expected{0.0, 0.3, 0.6, 0.9, 1.0};
  ASSERT_EQ(traj.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(traj.times[k], expected[k], 1e-15);
  EXPECT_EQ(traj.times.back(), 1.0);
  for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
}

TEST(Integrate, StepIsShrunkToDivideHorizon) {
  const auto traj = integrate(systems::harmonic_s1(), pt({1, 0}), 1.0, 0.3);
  EXPECT_DOUBLE_EQ(traj.step, 0.25);
  EXPECT_EQ(traj.size(), 5u);
}

TEST(Integrate, Rk4SelfConvergence) {
  const Point z0 = pt({1, 0.5});
  const double T = 2.0;
  const Point exact = harmonic_exact(z0, T);
  double prev = 0;
  for (double h : {0.2, 0.1, 0.05}) {
    const double err = (integrate(systems::harmonic_s1(), z0, T, h).states.back() - exact).norm();
    if (prev > 0) {
      EXPECT_GE(prev / err, 8.0) << h;
      EXPECT_LE(prev / err, 32.0) << h;
    }
    prev = err;
  }
}

TEST(Integrate, Rk4SelfConvergenceWithoutClosedForm) {
  // Richardson-style: differences of successive refinements shrink 16x.
  const auto sys = systems::rigid_body(1, 2, 3);
  const Point z0 = pt({0.6, 0.7, 0.3});
  const double T = 3.0;
  auto run = [&](double h) { return integrate(sys, z0, T, h).states.back(); };
  const double d1 = (run(0.1) - run(0.05)).norm();
  const double d2 = (run(0.05) - run(0.025)).norm();
  EXPECT_GE(d1 / d2, 8.0);
  EXPECT_LE(d1 / d2, 32.0);
}

TEST(Integrate, MidpointSecondOrder) {
  const Point z0 = pt({1, 0.5});
  const double T = 2.0;
  const Point exact = harmonic_exact(z0, T);
  auto err = [&](double h) {
    return (integrate(systems::harmonic_s1(), z0, T, h, Method::implicit_midpoint).states.back() - exact).norm();
  };
  const double ratio = err(0.1) / err(0.05);
  EXPECT_GE(ratio, 2.0);
  EXPECT_LE(ratio, 8.0);
  EXPECT_LE(err(1e-3), 1e-5);
}

TEST(Integrate, MidpointPreservesQuadraticInvariants) {
  const auto hs = systems::harmonic_s1();
  const auto a = integrate(hs, pt({1, 0.5}), 20.0, 0.05, Method::implicit_midpoint);
  EXPECT_LE(conservation_drift(hs, a).hamiltonian, 1e-10);
  const auto rb = systems::rigid_body(1, 2, 3);
  const auto b = integrate(rb, pt({0.6, 0.7, 0.3}), 20.0, 0.05, Method::implicit_midpoint);
  const auto d = conservation_drift(rb, b);
  EXPECT_LE(d.casimirs, 1e-10);
  EXPECT_LE(d.hamiltonian, 1e-10);
}

TEST(Integrate, FlowEquivariance) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n;
  const auto osc = systems::symmetric_oscillator();
  const auto top = systems::lagrange_top(1, 1, 1, 2.5);
  for (const auto* sys : {&osc, &top}) {
    for (int s = 0; s < 3; ++s) {
      Point z0(6);
      for (int i = 0; i < 6; ++i) z0(i) = 0.5 * n(rng);
      VectorXd eta(sys->dim_g());
      for (int i = 0; i < sys->dim_g(); ++i) eta(i) = n(rng);
      const GroupElement g = exponential(sys->group, AlgebraElement(eta));
      const Point a = integrate(*sys, act(*sys, g, z0), 5.0, 1e-3).states.back();
      const Point b = act(*sys, g, integrate(*sys, z0, 5.0, 1e-3).states.back());
      EXPECT_LE((a - b).norm(), 1e-7) << sys->name;
    }
  }
}

TEST(Drift, RigidBodyRk4) {
  const auto sys = systems::rigid_body(1, 2, 3);
  const auto traj = integrate(sys, pt({0.6, 0.7, 0.3}), 10.0, 1e-3);
  const auto d = conservation_drift(sys, traj);
  EXPECT_LE(d.hamiltonian, 1e-8);
  EXPECT_LE(d.casimirs, 1e-8);
  EXPECT_EQ(d.momentum, 0.0);
}

TEST(Drift, TopMomentumRk4) {
  const auto sys = systems::lagrange_top(1, 1, 1, 2.5);
  const auto traj = integrate(sys, pt({0.3, -0.2, 2.4, 0.1, 0.2, 0.97}), 10.0, 1e-3);
  const auto d = conservation_drift(sys, traj);
  EXPECT_LE(d.momentum, 1e-8);
  EXPECT_LE(d.hamiltonian, 1e-8);
  EXPECT_LE(d.casimirs, 1e-8);
}

TEST(Drift, MatchesHandComputation) {
  const auto sys = systems::harmonic_s1();
  Trajectory t;
  t.times = {0, 1, 2};
  t.states = {pt({1, 0}), pt({1.1, 0}), pt({0.9, 0})};
  const auto d = conservation_drift(sys, t);
  EXPECT_NEAR(d.hamiltonian, 0.5 * (1.21 - 1.0), 1e-15);
  EXPECT_NEAR(d.momentum, 0.5 * (1.21 - 1.0), 1e-15);
  EXPECT_THROW(conservation_drift(sys, Trajectory{}), Error);
}

TEST(Errors, BlowUpCarriesTime) {
  // q' = q^2 from q = 1 leaves every bounded set at t = 1.
  const auto sys = canonical_plane([](const Point& z) { return z(1) * z(0) * z(0); });
  try {
    integrate(sys, pt({1, 0}), 3.0, 1e-3);
    FAIL() << "expected blow-up";
  } catch (const BlowUpError& e) {
    EXPECT_GT(e.time(), 0.9);
    EXPECT_LT(e.time(), 1.5);
    EXPECT_EQ(e.code(), ErrorCode::BlowUp);
  }
}

TEST(Errors, NonFiniteStart) {
  EXPECT_THROW(integrate(systems::harmonic_s1(), pt({std::nan(""), 0}), 1.0, 0.1), BlowUpError);
}

TEST(Errors, BadArguments) {
  const auto sys = systems::harmonic_s1();
  EXPECT_THROW(integrate(sys, pt({1, 0}), 0.0, 0.1), Error);
  EXPECT_THROW(integrate(sys, pt({1, 0}), 1.0, 0.0), Error);
  EXPECT_THROW(integrate(sys, pt({1, 0}), 1.0, 2.0), Error);
  EXPECT_THROW(integrate(sys, pt({1, 0}), 1.0, 0.1, Method::rk4, 0), Error);
  EXPECT_THROW(integrate(sys, pt({1, 0, 0}), 1.0, 0.1), Error);
}

TEST(Method, Names) {
  for (Method m : {Method::rk4, Method::implicit_midpoint}) EXPECT_EQ(parse_method(to_string(m)), m);
  try {
    parse_method("euler");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Usage);
  }
}

TEST(Csv, HeaderAndRoundTrip) {
  const auto traj = integrate(systems::lagrange_top(1, 1, 1, 2.5), pt({0.1, 0.2, 2.5, 0.0, 0.1, 0.99}), 0.5, 0.1);
  std::ostringstream os;
  write_csv(os, traj);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "t,z1,z2,z3,z4,z5,z6");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 7u);
    EXPECT_EQ(v[0], traj.times[rows]);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(v[i + 1], traj.states[rows](i));
    ++rows;
  }
  EXPECT_EQ(rows, traj.size());
}
