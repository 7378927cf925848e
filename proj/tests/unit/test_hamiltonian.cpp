#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "pspin/errors.hpp"
#include "pspin/hamiltonian.hpp"
#include "pspin/rng.hpp"

using namespace pspin;

namespace {

Vector sphere_point(int n, std::uint64_t key) {
  RandomStream rng(key);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  return x * (std::sqrt(double(n)) / x.norm());
}

// Energy summed over every ordered index tuple of the raw i.i.d. tensors.
double raw_energy(const Mixture& m, int n, std::uint64_t seed, const Vector& x) {
  double total = 0.0;
  for (int k : m.active_degrees()) {
    std::uint64_t count = 1;
    for (int j = 0; j < k; ++j) count *= n;
    double sum = 0.0;
    for (std::uint64_t flat = 0; flat < count; ++flat) {
      std::uint64_t rest = flat;
      double prod = 1.0;
      for (int j = 0; j < k; ++j) {
        prod *= x[static_cast<int>(rest % n)];
        rest /= n;
      }
      sum += Hamiltonian::raw_entry(seed, k, flat) * prod;
    }
    total += m.coeff(k) * std::pow(double(n), -(k - 1) / 2.0) * sum;
  }
  return total;
}

Matrix raw_matrix(int n, std::uint64_t seed) {
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Hamiltonian::raw_entry(seed, 2, static_cast<std::uint64_t>(i) * n + j);
  return g;
}

struct Moments {
  double cov = 0.0;
  double se = 0.0;
};

Moments covariance(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  std::vector<double> prod(a.size());
  double mp = 0;
  for (std::size_t i = 0; i < a.size(); ++i) mp += prod[i] = (a[i] - ma) * (b[i] - mb);
  mp /= n;
  double var = 0;
  for (double p : prod) var += (p - mp) * (p - mp);
  return {mp * n / (n - 1), std::sqrt(var / (n - 1) / n)};
}

}  // namespace

TEST(Hamiltonian, ZeroAtOrigin) {
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:1,4:0.5"), 10, 1, SpinDomain::Sphere);
  EXPECT_EQ(h.energy(Vector::Zero(10)), 0.0);
  EXPECT_EQ(h.gradient(Vector::Zero(10)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Hamiltonian, MatchesRawTensorSum) {
  const Mixture m = Mixture::parse("2:0.7,3:1,4:0.4");
  const int n = 6;
  const auto h = Hamiltonian::sample(m, n, 99, SpinDomain::Sphere);
  for (std::uint64_t key : {1u, 2u, 3u}) {
    const Vector x = sphere_point(n, key);
    EXPECT_NEAR(h.energy(x), raw_energy(m, n, 99, x), 1e-10);
  }
}

TEST(Hamiltonian, QuadraticMatchesDoubleLoop) {
  const int n = 50;
  const auto h = Hamiltonian::sample(Mixture::pure(2), n, 4, SpinDomain::Sphere);
  const Matrix g = raw_matrix(n, 4);
  const Vector x = sphere_point(n, 8);
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sum += g(i, j) * x[i] * x[j];
  sum /= std::sqrt(double(n));
  EXPECT_NEAR(h.energy(x), sum, 1e-9 * std::abs(sum));
}

TEST(Hamiltonian, Homogeneity) {
  const auto h = Hamiltonian::sample(Mixture::pure(3), 15, 2, SpinDomain::Sphere);
  const Vector x = sphere_point(15, 3);
  EXPECT_NEAR(h.energy(2.0 * x), 8.0 * h.degree_energy(3, x), 1e-10);
}

TEST(Hamiltonian, ReproducibleFromSeed) {
  const Mixture m = Mixture::parse("2:1,3:1");
  const auto a = Hamiltonian::sample(m, 12, 5, SpinDomain::Sphere);
  const auto b = Hamiltonian::sample(m, 12, 5, SpinDomain::Sphere);
  const auto c = Hamiltonian::sample(m, 12, 6, SpinDomain::Sphere);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
}

TEST(Hamiltonian, GradientMatchesFiniteDifferences) {
  const int n = 30;
  const auto h = Hamiltonian::sample(Mixture::pure(3), n, 12, SpinDomain::Sphere);
  const Vector x = sphere_point(n, 1);
  const Vector g = h.gradient(x);
  const double step = 1e-5;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    Vector a = x, b = x;
    a[i] += step;
    b[i] -= step;
    worst = std::max(worst, std::abs((h.energy(a) - h.energy(b)) / (2 * step) - g[i]));
  }
  EXPECT_LE(worst, 1e-4 * (1 + g.cwiseAbs().maxCoeff()));
}

TEST(Hamiltonian, HessianMatchesGradientDifferences) {
  const int n = 20;
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:1,4:0.5"), n, 13, SpinDomain::Sphere);
  const Vector x = sphere_point(n, 2);
  const Matrix hs = h.hessian(x);
  const double step = 1e-5;
  for (int j = 0; j < n; ++j) {
    Vector a = x, b = x;
    a[j] += step;
    b[j] -= step;
    const Vector fd = (h.gradient(a) - h.gradient(b)) / (2 * step);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(hs(i, j), fd[i], 1e-4 * std::max(1.0, std::abs(fd[i])));
  }
}

TEST(Hamiltonian, GenericAndSpecializedPathsAgree) {
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:0.5,5:0.2"), 9, 21, SpinDomain::Sphere);
  const Vector x = sphere_point(9, 4);
  EXPECT_NEAR(h.energy(x), detail::energy_generic(h, x), 1e-11);
  EXPECT_LE((h.gradient(x) - detail::gradient_generic(h, x)).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_LE((h.hessian(x) - detail::hessian_generic(h, x)).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Hamiltonian, ProjectedHessianAnnihilatesM) {
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:1"), 25, 3, SpinDomain::Sphere);
  const Vector m = sphere_point(25, 5) * 0.6;
  EXPECT_LE((h.projected_hessian(m) * m).norm(), 1e-10 * m.norm());
}

TEST(Hamiltonian, ProjectedHessianAlongAxisZeroesRowAndColumn) {
  const int n = 10;
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,3:1"), n, 7, SpinDomain::Sphere);
  Vector m = Vector::Zero(n);
  m[3] = 2.0;
  Matrix expected = h.hessian(m);
  expected.row(3).setZero();
  expected.col(3).setZero();
  EXPECT_LE((h.projected_hessian(m) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Hamiltonian, ProjectedHessianEdgeAtScaleOfGoe) {
  const int n = 1000;
  const auto h = Hamiltonian::sample(Mixture::pure(2), n, 31, SpinDomain::Sphere);
  const Vector m = sphere_point(n, 6) * std::sqrt(0.5);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.projected_hessian(m), Eigen::EigenvaluesOnly);
  const double predicted = 2.0 * std::sqrt(2.0) * std::sqrt((n - 1.0) / n);
  EXPECT_NEAR(es.eigenvalues().maxCoeff() / predicted, 1.0, 0.1);
}

TEST(Hamiltonian, ContractIsSymmetrizedMatrixProductForQuadratic) {
  const int n = 15;
  const auto h = Hamiltonian::sample(Mixture::pure(2), n, 8, SpinDomain::Sphere);
  const Matrix g = raw_matrix(n, 8);
  const Vector u = sphere_point(n, 9);
  const Vector expected = (g + g.transpose()) * u / std::sqrt(double(n));
  EXPECT_LE((h.contract(u) - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(h.contract(Vector::Zero(n)).norm(), 0.0);
}

TEST(Hamiltonian, CovarianceLaw) {
  const int n = 20, seeds = 2000;
  const Vector s = sphere_point(n, 40);
  // sigma' with <s, s'>/N = 1/2
  Vector w = sphere_point(n, 41);
  w -= (w.dot(s) / s.squaredNorm()) * s;
  const Vector s2 = 0.5 * s + std::sqrt(0.75) * w * (std::sqrt(double(n)) / w.norm());
  ASSERT_NEAR(s.dot(s2) / n, 0.5, 1e-12);

  std::vector<double> e1, e2, v2a, v2b;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto h3 = Hamiltonian::sample(Mixture::pure(3), n, 1000 + seed, SpinDomain::Sphere);
    e1.push_back(h3.energy(s));
    e2.push_back(h3.energy(s2));
    const auto h2 = Hamiltonian::sample(Mixture::pure(2), n, 5000 + seed, SpinDomain::Sphere);
    v2a.push_back(h2.energy(s));
  }
  const auto c3 = covariance(e1, e2);
  EXPECT_NEAR(c3.cov, 2.5, 5 * c3.se);
  const auto v2 = covariance(v2a, v2a);
  EXPECT_NEAR(v2.cov, 20.0, 5 * v2.se);
}

TEST(Hamiltonian, ContractCovarianceIsXiPrime) {
  const int n = 20, seeds = 2000;
  const Mixture m = Mixture::parse("2:1,3:1");
  Vector u = Vector::Zero(n), v = Vector::Zero(n);
  for (int i = 0; i < n; ++i) {
    u[i] = 1.0;
    v[i] = i < 15 ? 1.0 : -1.0;  // <u,v>/N = 0.5
  }
  std::vector<double> a, b;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto h = Hamiltonian::sample(m, n, 9000 + seed, SpinDomain::Sphere);
    a.push_back(h.contract(u)[0]);
    b.push_back(h.contract(v)[0]);
  }
  const auto c = covariance(a, b);
  EXPECT_NEAR(c.cov, m.xi(0.5, 1), 5 * c.se);
}

TEST(SampleCorrelated, Endpoints) {
  const Mixture m = Mixture::parse("2:1,3:1");
  const auto [a, b] = Hamiltonian::sample_correlated(m, 12, 3, SpinDomain::Sphere, 1.0);
  EXPECT_TRUE(a.degrees()[0].weights == b.degrees()[0].weights);
  EXPECT_TRUE(a.degrees()[1].weights == b.degrees()[1].weights);
  EXPECT_TRUE(a == Hamiltonian::sample(m, 12, 3, SpinDomain::Sphere));
  EXPECT_THROW(Hamiltonian::sample_correlated(m, 12, 3, SpinDomain::Sphere, 1.5), DomainError);
}

TEST(SampleCorrelated, IndependentAtZero) {
  const int n = 20;
  const auto [a, b] = Hamiltonian::sample_correlated(Mixture::pure(2), n, 4, SpinDomain::Sphere, 0.0);
  const auto& wa = a.degrees()[0].weights;
  const auto& wb = b.degrees()[0].weights;
  const auto c = covariance(wa, wb);
  EXPECT_NEAR(c.cov, 0.0, 5 * c.se);
}

TEST(SampleCorrelated, CrossCovarianceScalesWithRho) {
  const int n = 20, seeds = 2000;
  const Vector s = sphere_point(n, 77);
  std::vector<double> a, b;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto [h1, h2] = Hamiltonian::sample_correlated(Mixture::pure(2), n, 300 + seed, SpinDomain::Sphere, 0.5);
    a.push_back(h1.energy(s));
    b.push_back(h2.energy(s));
  }
  const auto c = covariance(a, b);
  EXPECT_NEAR(c.cov, 0.5 * n, 5 * c.se);
}

TEST(Hamiltonian, MemoryCapNamesDegreeAndBytes) {
  try {
    Hamiltonian::sample(Mixture::parse("2:1,3:1"), 100, 1, SpinDomain::Sphere, 100000);
    FAIL() << "expected ResourceError";
  } catch (const ResourceError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("degree 3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("bytes"), std::string::npos) << msg;
  }
  EXPECT_THROW(Hamiltonian::sample(Mixture::pure(2), 1, 1, SpinDomain::Sphere), DomainError);
}

TEST(Hamiltonian, BinaryRoundTrip) {
  const auto h = Hamiltonian::sample(Mixture::parse("2:1,4:0.3"), 9, 17, SpinDomain::Hypercube);
  std::stringstream buf;
  h.write_binary(buf);
  const auto back = Hamiltonian::read_binary(buf);
  EXPECT_TRUE(back == h);
  std::stringstream junk("not an instance");
  EXPECT_THROW(Hamiltonian::read_binary(junk), DomainError);
}

TEST(Configuration, DomainInvariants) {
  Configuration c{Vector::Constant(4, 1.0), SpinDomain::Hypercube};
  EXPECT_NO_THROW(c.validate());
  c.values[1] = 0.5;
  EXPECT_THROW(c.validate(), DomainError);
  Configuration s{Vector::Constant(4, 1.0), SpinDomain::Sphere};
  EXPECT_NO_THROW(s.validate());
  s.values *= 1.01;
  EXPECT_THROW(s.validate(), DomainError);
  Magnetization m{Vector::Constant(4, 0.5), SpinDomain::Hypercube};
  EXPECT_NO_THROW(m.validate());
  m.values[0] = -1.2;
  EXPECT_THROW(m.validate(), DomainError);
}

TEST(Hamiltonian, DimensionMismatchThrows) {
  const auto h = Hamiltonian::sample(Mixture::pure(2), 5, 1, SpinDomain::Sphere);
  EXPECT_THROW(h.energy(Vector::Zero(4)), DomainError);
}
