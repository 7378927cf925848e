#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "pspin/complexity.hpp"
#include "pspin/errors.hpp"
#include "pspin/optimizers.hpp"
#include "pspin/parisi.hpp"
#include "pspin/rng.hpp"

using namespace pspin;

namespace {

// max over the sphere of H/N for a quadratic instance: half the top eigenvalue of the (constant) Hessian.
double quadratic_optimum(const Hamiltonian& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.hessian(Vector::Zero(h.n())), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().maxCoeff();
}

}  // namespace

TEST(HessianAscent, RadiusAndOrthogonalIncrements) {
  const auto h = Hamiltonian::sample(Mixture::pure(3), 60, 4, SpinDomain::Sphere);
  const auto rep = hessian_ascent(h, 0.05, 11);
  ASSERT_EQ(rep.trajectory.diagnostics.size(), 19u);
  for (const auto& d : rep.trajectory.diagnostics) {
    EXPECT_NEAR(d.radius_sq_per_n, d.t, 1e-6);
    EXPECT_LE(std::abs(d.step_overlap), 1e-6);
    EXPECT_NEAR(d.step_norm_sq_per_n, 0.05, 1e-9);
  }
  EXPECT_EQ(rep.trajectory.times.size(), 20u);
  EXPECT_NEAR(rep.trajectory.times.back(), 1.0, 1e-12);
  EXPECT_NO_THROW(rep.final_config.validate());
  EXPECT_EQ(rep.energy_per_n, h.energy_per_n(rep.final_config.values));
}

TEST(HessianAscent, QuadraticStaysBelowInstanceOptimum) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 200, 9, SpinDomain::Sphere);
  const double opt = quadratic_optimum(h);
  const auto rep = hessian_ascent(h, 0.05, 1);
  EXPECT_LE(rep.energy_per_n, opt + 1e-9);
  EXPECT_GE(rep.energy_per_n, 0.85 * opt);
}

TEST(HessianAscent, Reproducible) {
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:1"), 40, 2, SpinDomain::Sphere);
  const auto a = hessian_ascent(h, 0.1, 5);
  const auto b = hessian_ascent(h, 0.1, 5);
  const auto c = hessian_ascent(h, 0.1, 6);
  EXPECT_EQ(a.final_config.values, b.final_config.values);
  EXPECT_NE(a.final_config.values, c.final_config.values);
}

TEST(HessianAscent, Preconditions) {
  const auto cube = Hamiltonian::sample(Mixture::pure(2), 20, 1, SpinDomain::Hypercube);
  EXPECT_THROW(hessian_ascent(cube, 0.1, 1), DomainError);
  const auto h = Hamiltonian::sample(Mixture::pure(2), 20, 1, SpinDomain::Sphere);
  EXPECT_THROW(hessian_ascent(h, 0.3, 1), DomainError);
  EXPECT_THROW(hessian_ascent(h, 0.02, 1), DomainError);  // N delta < 1
}

TEST(HessianAscent, TargetsFromTheory) {
  const auto h = Hamiltonian::sample(Mixture::pure(3), 20, 1, SpinDomain::Sphere);
  const auto rep = hessian_ascent(h, 0.1, 1);
  EXPECT_NEAR(rep.target_alg, 2 * std::sqrt(2.0 / 3.0), 1e-9);
  EXPECT_NEAR(rep.target_opt_upper, ComplexityModel(3).e0(), 1e-12);
}

TEST(Targets, ByDomain) {
  const auto sk = theoretical_targets(Mixture::pure(2), SpinDomain::Sphere);
  EXPECT_NEAR(sk.alg, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(sk.opt_upper, std::sqrt(2.0), 1e-12);
  const auto mixed = theoretical_targets(Mixture::parse("2:1,3:1"), SpinDomain::Sphere);
  EXPECT_GE(mixed.opt_upper, mixed.alg - 1e-9);
  const auto cube = theoretical_targets(Mixture::pure(2), SpinDomain::Hypercube);
  EXPECT_TRUE(std::isnan(cube.alg));
  EXPECT_TRUE(std::isnan(cube.opt_upper));
}

TEST(Branching, IdenticalSeedsDoNotBranch) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 100, 3, SpinDomain::Sphere);
  const auto r = branching_hessian_ascent(h, 0.1, 0.9, 0.3, 7, 7);
  EXPECT_EQ(r.first.values, r.second.values);
  EXPECT_NEAR(r.overlap, 1.0, 1e-12);
}

TEST(Branching, OverlapTracksBranchTime) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 200, 5, SpinDomain::Sphere);
  double sum = 0.0;
  const int pairs = 8;
  for (int p = 0; p < pairs; ++p) sum += branching_hessian_ascent(h, 0.05, 0.5, 0.4, 100 + p, 900 + p).overlap;
  EXPECT_NEAR(sum / pairs, 0.5, 0.15);
}

TEST(Branching, Preconditions) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 40, 3, SpinDomain::Sphere);
  EXPECT_THROW(branching_hessian_ascent(h, 0.1, 0.55, 0.2, 1, 2), DomainError);
  EXPECT_THROW(branching_hessian_ascent(h, 0.1, 0.5, 0.0, 1, 2), DomainError);
  EXPECT_THROW(branching_hessian_ascent(h, 0.1, 0.5, 0.7, 1, 2), DomainError);
}

TEST(Iamp, EmpiricalNormalizationKeepsRadius) {
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:1"), 150, 6, SpinDomain::Sphere);
  const auto rep = iamp(h, 0.02, 3);
  // m_0 is Gaussian, so |m_0|^2/N only approximates t0; later increments add exactly delta
  const auto& diag = rep.trajectory.diagnostics;
  ASSERT_FALSE(diag.empty());
  const double offset = diag.front().radius_sq_per_n - diag.front().t;
  EXPECT_LT(std::abs(offset), 0.01);
  for (const auto& d : diag) {
    EXPECT_NEAR(d.radius_sq_per_n - d.t, offset, 1e-9);
    EXPECT_NEAR(d.step_norm_sq_per_n, 0.02, 1e-9);
    EXPECT_LE(std::abs(d.step_overlap), 1e-9);
  }
  ASSERT_TRUE(rep.state_evolution.has_value());
  EXPECT_NO_THROW(rep.final_config.validate());
  EXPECT_GT(rep.energy_per_n, 0.85 * alg_spherical(h.mixture()));
}

TEST(Iamp, StateEvolutionNormalizationDriftsAtSmallN) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 300, 8, SpinDomain::Sphere);
  IampOptions se;
  se.normalization = IampNormalization::StateEvolution;
  double drift = 0.0;
  try {
    const auto rep = iamp(h, 0.02, 3, se);
    for (const auto& d : rep.trajectory.diagnostics) drift = std::max(drift, std::abs(d.radius_sq_per_n - d.t));
  } catch (const NumericalError&) {
    drift = 0.1;  // divergence detector fired
  }
  EXPECT_GT(drift, 0.02);
}

TEST(Iamp, Preconditions) {
  const auto p3 = Hamiltonian::sample(Mixture::pure(3), 30, 1, SpinDomain::Sphere);
  EXPECT_THROW(iamp(p3, 0.05, 1), DomainError);
  IampOptions o;
  o.t0 = 0.1;
  EXPECT_NO_THROW(iamp(p3, 0.05, 1, o));
  o.t0 = 0.12;
  EXPECT_THROW(iamp(p3, 0.05, 1, o), DomainError);

  const auto cube = Hamiltonian::sample(Mixture::pure(2), 30, 1, SpinDomain::Hypercube);
  EXPECT_THROW(iamp(cube, 0.05, 1), DomainError);
  IampOptions heuristic;
  heuristic.allow_heuristic_hypercube = true;
  const auto rep = iamp(cube, 0.05, 1, heuristic);
  EXPECT_TRUE(rep.heuristic);
  EXPECT_TRUE(std::isnan(rep.target_alg));
  EXPECT_NO_THROW(rep.final_config.validate());
}

TEST(Round, Examples) {
  Vector c(3);
  c << 0.9, -0.2, 0.0;
  const auto s = round(Magnetization{c, SpinDomain::Hypercube});
  EXPECT_EQ(s.values, Vector::Map(std::vector<double>{1, -1, 1}.data(), 3));

  Vector on = Vector::Constant(4, 1.0);
  EXPECT_EQ(round(Magnetization{on, SpinDomain::Sphere}).values, on);
}

TEST(Round, SphericalRoundingIsHomogeneous) {
  const int n = 30;
  const auto h = Hamiltonian::sample(Mixture::pure(3), n, 2, SpinDomain::Sphere);
  RandomStream rng(4);
  Vector m(n);
  for (int i = 0; i < n; ++i) m[i] = rng.normal();
  m *= std::sqrt(0.99 * n) / m.norm();
  const auto r = round(Magnetization{m, SpinDomain::Sphere});
  EXPECT_NEAR(h.energy(r.values), h.energy(m) * std::pow(1.0 / 0.99, 1.5), 1e-12 * std::abs(h.energy(m)) + 1e-14);
}

TEST(Baselines, ZeroIterationsReturnsStart) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 50, 3, SpinDomain::Sphere);
  GradientAscentOptions o;
  o.iters = 0;
  const auto rep = gradient_ascent(h, 2, o);
  EXPECT_NO_THROW(rep.final_config.validate());
  EXPECT_LT(std::abs(rep.energy_per_n), 0.6);
}

TEST(Baselines, BestSeenIsMonotoneInIterations) {
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:1"), 60, 3, SpinDomain::Sphere);
  double prev = -1e9;
  for (int iters : {0, 5, 20, 80}) {
    GradientAscentOptions o;
    o.iters = iters;
    const double e = gradient_ascent(h, 2, o).energy_per_n;
    EXPECT_GE(e, prev);
    prev = e;
  }
  const auto rep = simulated_annealing(h, 4);
  for (std::size_t i = 1; i < rep.trajectory.energies.size(); ++i)
    EXPECT_GE(rep.trajectory.energies[i], rep.trajectory.energies[i - 1]);
}

TEST(Baselines, AnnealingReachesNinetyPercentOnSk) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 500, 12, SpinDomain::Sphere);
  EXPECT_GE(simulated_annealing(h, 1).energy_per_n, 0.9 * std::sqrt(2.0));
}

TEST(Baselines, HypercubeOutputsSpins) {
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:0.5"), 40, 3, SpinDomain::Hypercube);
  EXPECT_NO_THROW(simulated_annealing(h, 1).final_config.validate());
  EXPECT_NO_THROW(gradient_ascent(h, 1).final_config.validate());
}

TEST(Baselines, Budget) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 50, 3, SpinDomain::Sphere);
  GradientAscentOptions o;
  o.iters = 100;
  o.budget = 1000;
  EXPECT_THROW(gradient_ascent(h, 1, o), ResourceError);
  AnnealingOptions a;
  a.iters = -1;
  EXPECT_THROW(simulated_annealing(h, 1, a), DomainError);
}
