#include <cmath>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "pspin/spectral.hpp"

using namespace pspin;

namespace {

Matrix random_symmetric(int n, std::uint64_t key) {
  RandomStream rng(key);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = a(j, i) = rng.normal();
  return a / std::sqrt(double(n));
}

}  // namespace

TEST(Lanczos, MatchesDenseSolver) {
  for (int n : {5, 60, 400}) {
    const Matrix a = random_symmetric(n, n);
    RandomStream rng(1);
    const auto top = top_eigenpair(a, rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    EXPECT_NEAR(top.value, es.eigenvalues()(n - 1), 1e-8 * es.eigenvalues().cwiseAbs().maxCoeff()) << n;
    EXPECT_NEAR(top.vector.norm(), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(top.vector.dot(es.eigenvectors().col(n - 1))), 1.0, 1e-6);
    EXPECT_LE((a * top.vector - top.value * top.vector).norm(), 1e-6);
  }
}

TEST(Lanczos, DegenerateTopIsResolvedReproducibly) {
  Matrix a = Matrix::Zero(6, 6);
  a.diagonal() << 3, 3, 1, 0, -1, -2;
  RandomStream r1(7), r2(7);
  const auto x = top_eigenpair(a, r1);
  const auto y = top_eigenpair(a, r2);
  EXPECT_NEAR(x.value, 3.0, 1e-10);
  EXPECT_EQ(x.vector, y.vector);
  EXPECT_NEAR(x.vector.head(2).norm(), 1.0, 1e-8);
}

TEST(Lanczos, ZeroMatrix) {
  RandomStream rng(2);
  const auto top = top_eigenpair(Matrix::Zero(4, 4), rng);
  EXPECT_EQ(top.value, 0.0);
  EXPECT_NEAR(top.vector.norm(), 1.0, 1e-12);
}

TEST(NearTop, SelectsBand) {
  Matrix a = Matrix::Zero(5, 5);
  a.diagonal() << 1.0, 0.95, 0.7, 0.2, -3.0;
  const auto space = near_top_eigenspace(a, 0.1);
  ASSERT_EQ(space.values.size(), 2);
  EXPECT_NEAR(space.values[0], 1.0, 1e-12);
  EXPECT_NEAR(space.values[1], 0.95, 1e-12);
  EXPECT_EQ(space.vectors.cols(), 2);
}
