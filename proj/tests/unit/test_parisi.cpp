#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "pspin/errors.hpp"
#include "pspin/parisi.hpp"

using namespace pspin;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// (1/c) log E exp(c |sqrt(v) Z|) by trapezoid quadrature on a wide grid.
double cole_hopf_abs_quadrature(double c, double v) {
  const double s = std::sqrt(v);
  const int points = 200001;
  const double lo = -14.0, hi = 14.0, h = (hi - lo) / (points - 1);
  if (c == 0.0) {
    double sum = 0.0;
    for (int i = 0; i < points; ++i) {
      const double z = lo + i * h;
      const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
      sum += w * std::abs(s * z) * std::exp(-0.5 * z * z);
    }
    return sum * h / std::sqrt(2 * M_PI);
  }
  double sum = 0.0;
  for (int i = 0; i < points; ++i) {
    const double z = lo + i * h;
    const double w = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    sum += w * std::exp(c * std::abs(s * z) - 0.5 * z * z);
  }
  return std::log(sum * h / std::sqrt(2 * M_PI)) / c;
}

// Same quantity in closed form: c v / 2 + log(2 Phi(c sqrt v)) / c.
double cole_hopf_abs_closed(double c, double v) {
  if (c == 0.0) return std::sqrt(2 * v / M_PI);
  return 0.5 * c * v + std::log(2 * normal_cdf(c * std::sqrt(v))) / c;
}

}  // namespace

TEST(ColeHopfOracle, RoutesAgree) {
  for (double c : {0.0, 0.5, 1.0, 2.0}) {
    for (double v : {2.0, 6.0}) EXPECT_NEAR(cole_hopf_abs_quadrature(c, v), cole_hopf_abs_closed(c, v), 1e-7);
  }
}

TEST(PdeGrid, Validation) {
  PdeGrid g;
  g.x_max = 5;
  EXPECT_NO_THROW(g.validate());
  g.x_steps = 201;
  EXPECT_THROW(g.validate(), DomainError);
  g.x_steps = 400;
  g.t_steps = 50;
  EXPECT_THROW(g.validate(), DomainError);
  g.t_steps = 100;
  g.safety = 0.6;
  EXPECT_THROW(g.validate(), DomainError);
}

TEST(ParisiPde, SkHeatEquationValue) {
  const auto m = Mixture::pure(2);
  const auto sol = solve_parisi_pde(m, StepFunction::constant(0.0), PdeGrid::defaults(m), Terminal::abs());
  EXPECT_NEAR(sol.at_origin(), 2.0 / std::sqrt(M_PI), 1e-3);
  EXPECT_NEAR(parisi_value(m, StepFunction::constant(0.0), sol), 1.128379, 1e-3);
}

TEST(ParisiPde, ColeHopfOnCoarseGrid) {
  // The coarse grid is what minimization uses; it should still be within a few 1e-3.
  for (const char* text : {"2:1", "2:1,4:1"}) {
    const auto m = Mixture::parse(text);
    for (double c : {0.5, 2.0}) {
      const auto g = StepFunction::constant(c);
      const auto sol = solve_parisi_pde(m, g, PdeGrid::coarse(m), Terminal::abs());
      EXPECT_NEAR(sol.at_origin(), cole_hopf_abs_closed(c, m.xi(1.0, 1)), 5e-3) << text << " c=" << c;
    }
  }
}

TEST(ParisiPde, ColeHopfDefaultGrid) {
  const auto m = Mixture::parse("2:1,4:1");
  const auto g = StepFunction::constant(1.0);
  const auto sol = solve_parisi_pde(m, g, PdeGrid::defaults(m), Terminal::abs());
  EXPECT_NEAR(sol.at_origin(), cole_hopf_abs_quadrature(1.0, 6.0), 1e-3);
  // P = Phi(0,0) - (1/2) int t xi'' gamma = Phi - (xi'(1) - xi(1)) / 2
  EXPECT_NEAR(parisi_value(m, g, sol), sol.at_origin() - 0.5 * (6.0 - 2.0), 1e-12);
}

TEST(ParisiPde, HalfSquareIsExactOnGrid) {
  const auto m = Mixture::parse("2:1,3:1");
  PdeGrid grid = PdeGrid::coarse(m);
  const auto sol = solve_parisi_pde(m, StepFunction::constant(0.0), grid, Terminal::half_square());
  double worst = 0.0;
  for (int i = 0; i < sol.time_slices(); i += 10) {
    const double t = sol.time(i);
    for (int j = 0; j < sol.x_points(); j += 7) {
      const double x = sol.x(j);
      worst = std::max(worst, std::abs(sol.at_node(i, j) - (0.5 * x * x + 0.5 * (m.xi(1.0, 1) - m.xi(t, 1)))));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(ParisiPde, SolutionIsConvexAndLipschitz) {
  const auto m = Mixture::parse("2:1,3:0.5");
  const StepFunction g({0.0, 0.4, 0.8}, {0.2, 1.0, 3.0}, true);
  const auto sol = solve_parisi_pde(m, g, PdeGrid::coarse(m), Terminal::abs());
  EXPECT_GE(sol.min_second_difference(), -1e-10);
  EXPECT_LE(sol.max_abs_slope(), 1.0 + 1e-9);
  EXPECT_NEAR(sol.value(1.0, 0.7), 0.7, 1e-12);
  EXPECT_NEAR(sol.dx_value(0.5, 0.0), 0.0, 1e-9);  // even in x
}

TEST(ParisiPde, UpwindSchemeAgreesLoosely) {
  const auto m = Mixture::pure(2);
  const auto g = StepFunction::constant(1.0);
  const auto sol = solve_parisi_pde(m, g, PdeGrid::coarse(m), Terminal::abs(), 0.0, GradientScheme::Upwind);
  EXPECT_NEAR(sol.at_origin(), cole_hopf_abs_closed(1.0, 2.0), 1e-2);
}

TEST(ParisiPde, RejectsTooNarrowDomain) {
  const auto m = Mixture::pure(2);
  PdeGrid grid = PdeGrid::coarse(m);
  grid.x_max = 0.5;
  EXPECT_THROW(solve_parisi_pde(m, StepFunction::constant(0.0), grid, Terminal::abs()), NumericalError);
}

TEST(ParisiPde, EnforcesSubstepLimit) {
  const auto m = Mixture::pure(2);
  PdeGrid grid = PdeGrid::defaults(m);
  grid.t_steps = 100;
  grid.max_substeps = 1;
  EXPECT_THROW(solve_parisi_pde(m, StepFunction::constant(0.0), grid, Terminal::abs()), NumericalError);
}

TEST(ParisiPde, CsvExport) {
  const auto m = Mixture::pure(2);
  const auto sol = solve_parisi_pde(m, StepFunction::constant(0.0), PdeGrid::coarse(m), Terminal::abs());
  std::ostringstream os;
  sol.write_csv(os, 50, 100);
  std::string first;
  std::istringstream in(os.str());
  std::getline(in, first);
  EXPECT_EQ(first, "t,x,phi");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 3 * 5);
}

TEST(ParisiValue, RejectsMismatchedInputs) {
  const auto m = Mixture::pure(2);
  const auto sol = solve_parisi_pde(m, StepFunction::constant(0.0), PdeGrid::coarse(m), Terminal::abs());
  EXPECT_THROW(parisi_value(m, StepFunction::constant(1.0), sol), DomainError);
  EXPECT_THROW(parisi_value(Mixture::pure(3), StepFunction::constant(0.0), sol), DomainError);
}

TEST(SphericalFunctional, ConstantZeroOnSk) {
  const auto v = spherical_functional(Mixture::pure(2), StepFunction::constant(0.0));
  EXPECT_NEAR(v.value, std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(v.level, 1.0 / std::sqrt(2.0), 1e-6);
}

TEST(SphericalFunctional, GammaStarReachesAlg) {
  const auto m = Mixture::parse("2:1,3:1");
  const auto gs = gamma_star_L_spherical(m, 512);
  ASSERT_TRUE(gs.discretized.has_value());
  const double v = spherical_functional(m, *gs.discretized).value;
  EXPECT_GE(v, alg_spherical(m) - 1e-9);
  EXPECT_NEAR(v, 2.199890, 1e-3);
}

TEST(SphericalFunctional, NeverBelowAlg) {
  const auto m = Mixture::parse("2:0.5,3:1,4:0.7");
  const double alg = alg_spherical(m);
  for (double c : {0.0, 0.1, 1.0, 5.0}) EXPECT_GE(spherical_functional(m, StepFunction::constant(c)).value, alg - 1e-12);
  const StepFunction g({0.0, 0.3, 0.6}, {2.0, 0.5, 0.0});
  EXPECT_GE(spherical_functional(m, g).value, alg - 1e-12);
}

TEST(Alg, PureClosedForms) {
  for (int p = 2; p <= 6; ++p) EXPECT_NEAR(alg_spherical(Mixture::pure(p)), 2 * std::sqrt((p - 1.0) / p), 1e-9);
}

TEST(Alg, MixedAntiderivative) {
  // int_0^1 sqrt(2 + 6t) dt = [(2 + 6t)^{3/2} / 9]_0^1
  const double exact = (std::pow(8.0, 1.5) - std::pow(2.0, 1.5)) / 9.0;
  EXPECT_NEAR(alg_spherical(Mixture::parse("2:1,3:1")), exact, 1e-12);
  EXPECT_NEAR(exact, 2.199890, 3e-6);
}

TEST(GammaStar, Flags) {
  const auto sk = gamma_star_L_spherical(Mixture::pure(2));
  EXPECT_TRUE(sk.monotone);
  EXPECT_FALSE(sk.singular);
  EXPECT_EQ(sk.fn(0.5), 0.0);

  const auto mixed = gamma_star_L_spherical(Mixture::parse("2:1,3:1"));
  EXPECT_FALSE(mixed.monotone);
  EXPECT_NEAR(mixed.fn(0.0), 6.0 / (2 * std::pow(2.0, 1.5)), 1e-12);
  EXPECT_NEAR(mixed.fn(1.0), 6.0 / (2 * std::pow(8.0, 1.5)), 1e-12);
  EXPECT_GT(mixed.fn(0.0), mixed.fn(1.0));

  const auto p3 = gamma_star_L_spherical(Mixture::pure(3));
  EXPECT_TRUE(p3.singular);
  EXPECT_FALSE(p3.discretized.has_value());
  EXPECT_NEAR(p3.fn(0.25), 6.0 / (2 * std::pow(1.5, 1.5)), 1e-12);
}

TEST(MinimizeParisi, SphereLMatchesAlg) {
  for (const char* text : {"2:1", "3:1", "2:1,3:1", "2:1,4:1"}) {
    const auto m = Mixture::parse(text);
    const auto r = minimize_parisi(m, SpinDomain::Sphere, OrderSpace::L);
    EXPECT_NEAR(r.value, alg_spherical(m), 1e-4) << text;
  }
}

TEST(MinimizeParisi, SphereUOnSk) {
  const auto r = minimize_parisi(Mixture::pure(2), SpinDomain::Sphere, OrderSpace::U);
  EXPECT_NEAR(r.value, std::sqrt(2.0), 1e-3);
}

TEST(MinimizeParisi, HypercubeSkConstantGamma) {
  // one-dimensional scan oracle over gamma = c, Cole-Hopf value minus the correction c/2
  double best = 1e9;
  for (int i = 0; i <= 5000; ++i) {
    const double c = 5.0 * i / 5000.0;
    best = std::min(best, cole_hopf_abs_closed(c, 2.0) - 0.5 * c);
  }
  ASSERT_LT(best, 2.0 / std::sqrt(M_PI) - 1e-3);
  MinimizeOptions opts;
  opts.atoms = 0;
  opts.budget = 60;
  const auto r = minimize_parisi(Mixture::pure(2), SpinDomain::Hypercube, OrderSpace::U, opts);
  EXPECT_LE(r.value, 2.0 / std::sqrt(M_PI));
  EXPECT_NEAR(r.value, best, 5e-3);
}

TEST(MinimizeParisi, Validation) {
  MinimizeOptions opts;
  opts.atoms = 9;
  EXPECT_THROW(minimize_parisi(Mixture::pure(2), SpinDomain::Hypercube, OrderSpace::U, opts), DomainError);
  opts.atoms = 1;
  opts.budget = 0;
  EXPECT_THROW(minimize_parisi(Mixture::pure(2), SpinDomain::Sphere, OrderSpace::U, opts), DomainError);
}

TEST(NelderMead, Rosenbrock) {
  auto f = [](const std::vector<double>& x) {
    return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2);
  };
  const auto r = nelder_mead(f, {-1.2, 1.0}, 0.5, 2000, 1e-14);
  EXPECT_NEAR(r.x[0], 1.0, 1e-3);
  EXPECT_NEAR(r.x[1], 1.0, 2e-3);
  EXPECT_LE(r.evaluations, 2000);
}

TEST(StepFunction, Basics) {
  const StepFunction g({0.0, 0.5}, {1.0, 0.0});
  EXPECT_EQ(g(0.25), 1.0);
  EXPECT_EQ(g(0.5), 0.0);
  EXPECT_DOUBLE_EQ(g.total_integral(), 0.5);
  EXPECT_DOUBLE_EQ(g.integral(0.25, 0.75), 0.25);
  EXPECT_FALSE(g.is_nondecreasing());
  EXPECT_THROW(StepFunction({0.0, 0.5}, {1.0, 0.0}, true), DomainError);
  EXPECT_THROW(StepFunction({0.1}, {1.0}), DomainError);
  EXPECT_THROW(StepFunction({0.0, 0.5, 0.4}, {1.0, 1.0, 1.0}), DomainError);
  EXPECT_THROW(StepFunction({0.0}, {-1.0}), DomainError);
  EXPECT_THROW(StepFunction({0.0}, {10.0}, true, 5.0), DomainError);
}

TEST(StepFunction, WeightedDistance) {
  const auto zero = StepFunction::constant(0.0);
  const auto one = StepFunction::constant(1.0);
  EXPECT_EQ(norm_weighted_l1(Mixture::pure(2), one, one), 0.0);
  EXPECT_NEAR(norm_weighted_l1(Mixture::pure(2), one, zero), 2.0, 1e-14);
  const StepFunction half({0.0, 0.5}, {1.0, 0.0});
  EXPECT_NEAR(norm_weighted_l1(Mixture::pure(3), half, zero), 0.75, 1e-14);
}

TEST(StepFunction, CorrectionIntegral) {
  EXPECT_NEAR(0.5 * correction_integral(Mixture::pure(2), StepFunction::constant(1.0)), 0.5, 1e-14);
  const auto m = Mixture::parse("2:1,3:1");
  // int_0^1 t xi''(t) dt = xi'(1) - xi(1)
  EXPECT_NEAR(correction_integral(m, StepFunction::constant(1.0)), 5.0 - 2.0, 1e-13);
}
