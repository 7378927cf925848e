#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "pspin/complexity.hpp"
#include "pspin/errors.hpp"

using namespace pspin;

namespace {

// Sigma from its integral form: beyond THR the correction is
// (2/THR^2) int_THR^eta sqrt(x^2 - THR^2) dx. With x = THR cosh(u) the
// integrand is THR^2 sinh^2(u), smooth enough for Simpson's rule.
double sigma_oracle(int p, double eta) {
  const double thr = 2 * std::sqrt((p - 1.0) / p);
  double s = 0.5 * std::log(p - 1.0);
  if (eta <= 0) return s;
  s -= (p - 2.0) / (4.0 * (p - 1.0)) * eta * eta;
  if (eta <= thr) return s;
  const int k = 20000;
  const double h = std::acosh(eta / thr) / k;
  double acc = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double w = (i == 0 || i == k) ? 1 : (i % 2 ? 4 : 2);
    acc += w * std::pow(std::sinh(i * h), 2);
  }
  return s - 2.0 * acc * h / 3.0;
}

// E0(p), frozen from a 30-digit bisection of the integral form.
constexpr double kGroundState[] = {1.65699836352747, 1.79408502817925, 1.88798882636892, 1.95866599895273,
                                   2.01495258123982, 2.06150406466926, 2.10106039314937, 2.13536380045015};

}  // namespace

TEST(Complexity, ValueAtZero) {
  EXPECT_NEAR(ComplexityModel(3).sigma(0.0), 0.346574, 1e-6);
  for (int p = 3; p <= 10; ++p) EXPECT_DOUBLE_EQ(ComplexityModel(p).sigma(-1.0), 0.5 * std::log(p - 1.0));
}

TEST(Complexity, ValueAtThreshold) {
  const ComplexityModel cm(3);
  EXPECT_NEAR(cm.sigma(cm.thr()), 0.5 * std::log(2.0) - 1.0 / 3.0, 1e-12);
  EXPECT_EQ(cm.j(cm.thr()), 0.0);
}

TEST(Complexity, MatchesIntegralForm) {
  for (int p : {3, 5, 8}) {
    const ComplexityModel cm(p);
    for (double eta : {0.5, 1.0, cm.thr() + 0.01, cm.thr() + 0.3, 2.5})
      EXPECT_NEAR(cm.sigma(eta), sigma_oracle(p, eta), 1e-9) << "p=" << p << " eta=" << eta;
  }
}

TEST(Complexity, ContinuousAndNonIncreasing) {
  for (int p = 3; p <= 10; ++p) {
    const ComplexityModel cm(p);
    const double thr = cm.thr();
    EXPECT_LE(std::abs(cm.sigma(thr + 1e-13) - cm.sigma(thr - 1e-13)), 1e-10);
    EXPECT_LE(std::abs(cm.sigma(1e-300) - cm.sigma(0.0)), 1e-10);
    double prev = cm.sigma(-0.5);
    for (int i = 0; i <= 10000; ++i) {
      const double s = cm.sigma(-0.5 + 4.0 * i / 10000.0);
      EXPECT_LE(s, prev + 1e-15);
      prev = s;
    }
  }
}

TEST(Complexity, GroundStateEnergy) {
  for (int p = 3; p <= 10; ++p) {
    const ComplexityModel cm(p);
    const double e0 = cm.e0();
    EXPECT_NEAR(e0, kGroundState[p - 3], 1e-10) << p;
    EXPECT_GT(e0, cm.thr());
    EXPECT_LT(std::abs(cm.sigma(e0)), 1e-10);
    EXPECT_GT(cm.sigma(0.5 * (cm.thr() + e0)), 0.0);
    EXPECT_LT(cm.sigma(e0 + 0.05), 0.0);
  }
  const double e3 = ComplexityModel(3).e0();
  EXPECT_GT(e3, 1.632994);
  EXPECT_LT(e3, 1.75);
}

TEST(Complexity, RejectsQuadratic) { EXPECT_THROW(ComplexityModel(2), DomainError); }

TEST(Complexity, CurveCsv) {
  std::ostringstream os;
  write_curve_csv(os, ComplexityModel(3).curve(0.0, 2.0, 3));
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "eta,sigma");
  EXPECT_NE(os.str().find("\n0,0.34657359028"), std::string::npos) << os.str();
  EXPECT_THROW(ComplexityModel(3).curve(1.0, 0.0, 5), DomainError);
}

TEST(Plateau, Examples) {
  EXPECT_NEAR(plateau_value(Mixture::pure(3)), 0.5 * std::log(2.0) - 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(plateau_value(Mixture::pure(3)), 0.013241, 1e-6);
  EXPECT_NEAR(plateau_value(Mixture::pure(2)), 0.0, 1e-15);
  EXPECT_NEAR(plateau_value(Mixture::parse("2:1,4:1")), 0.5 * std::log(7.0 / 3.0) - 0.4, 1e-12);
  EXPECT_NEAR(plateau_value(Mixture::parse("2:1,4:1")), 0.023649, 1e-6);
  EXPECT_GT(plateau_value(Mixture::parse("2:1,3:0.5")), 0.0);
}
