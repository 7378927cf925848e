#include "pspin/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "pspin/errors.hpp"

namespace pspin {

namespace {

TopEigenpair dense_top(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolve failed");
  const Eigen::Index n = a.rows();
  TopEigenpair out;
  out.value = solver.eigenvalues()[n - 1];
  out.vector = solver.eigenvectors().col(n - 1);
  out.norm_estimate = std::max(std::fabs(solver.eigenvalues()[0]), std::fabs(out.value));
  out.residual = (a * out.vector - out.value * out.vector).norm();
  out.used_dense = true;
  return out;
}

}  // namespace

TopEigenpair top_eigenpair(const Matrix& a, RandomStream& rng, const EigenOptions& options) {
  const Eigen::Index n = a.rows();
  if (n == 0 || a.cols() != n) throw DomainError("top_eigenpair needs a nonempty square matrix");

  Vector start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = rng.normal();

  const int m = static_cast<int>(std::min<Eigen::Index>(options.max_krylov, n));
  TopEigenpair best;
  int total_iters = 0;

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    Matrix basis(n, m);
    Vector alpha = Vector::Zero(m);
    Vector beta = Vector::Zero(m);
    basis.col(0) = start.normalized();
    int dim = 0;
    for (int j = 0; j < m; ++j) {
      Vector w = a * basis.col(j);
      alpha[j] = basis.col(j).dot(w);
      w -= alpha[j] * basis.col(j);
      if (j > 0) w -= beta[j - 1] * basis.col(j - 1);
      // two passes of classical Gram-Schmidt against the whole basis
      for (int pass = 0; pass < 2; ++pass) {
        w -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * w);
      }
      dim = j + 1;
      ++total_iters;
      if (j + 1 == m) break;
      beta[j] = w.norm();
      if (beta[j] < 1e-14 * std::max(1.0, std::fabs(alpha[j]))) break;  // invariant subspace
      if ((j + 1) % 25 == 0 && j + 1 >= 50) {
        // residual of the top Ritz pair is beta_j * |last component|
        Matrix tri = Matrix::Zero(j + 1, j + 1);
        for (int i = 0; i <= j; ++i) {
          tri(i, i) = alpha[i];
          if (i < j) tri(i, i + 1) = tri(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Matrix> small(tri);
        const double scale = std::max(std::fabs(small.eigenvalues()[0]), std::fabs(small.eigenvalues()[j]));
        const double est = beta[j] * std::fabs(small.eigenvectors()(j, j));
        if (est <= 0.1 * options.rel_tol * scale) break;
      }
      basis.col(j + 1) = w / beta[j];
    }

    Matrix tri = Matrix::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) {
      tri(j, j) = alpha[j];
      if (j + 1 < dim) tri(j, j + 1) = tri(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Matrix> small(tri);
    const double theta = small.eigenvalues()[dim - 1];
    Vector ritz = basis.leftCols(dim) * small.eigenvectors().col(dim - 1);
    ritz.normalize();

    TopEigenpair cand;
    cand.value = theta;
    cand.vector = ritz;
    cand.norm_estimate = std::max(std::fabs(small.eigenvalues()[0]), std::fabs(theta));
    cand.residual = (a * ritz - theta * ritz).norm();
    cand.iterations = total_iters;
    if (restart == 0 || cand.residual < best.residual) best = cand;

    const double target = options.rel_tol * std::max(best.norm_estimate, 1e-300);
    if (best.residual <= target) return best;
    start = best.vector;
  }

  if (!options.allow_dense_fallback) {
    throw NumericalError("Lanczos did not converge: residual " + std::to_string(best.residual) + " after " +
                         std::to_string(total_iters) + " iterations");
  }
  TopEigenpair dense = dense_top(a);
  dense.iterations = total_iters;
  if (dense.residual > 1e3 * options.rel_tol * std::max(dense.norm_estimate, 1e-300)) {
    throw NumericalError("dense eigensolve residual " + std::to_string(dense.residual) + " above tolerance");
  }
  return dense;
}

Eigenspace near_top_eigenspace(const Matrix& a, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eigenspace width eps must lie in (0,1)");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
  if (solver.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolve failed");
  const Eigen::Index n = a.rows();
  const double top = solver.eigenvalues()[n - 1];
  const double cut = top - eps * std::fabs(top);
  Eigen::Index count = 0;
  while (count < n && solver.eigenvalues()[n - 1 - count] >= cut) ++count;
  Eigenspace out;
  out.values.resize(count);
  out.vectors.resize(n, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    out.values[i] = solver.eigenvalues()[n - 1 - i];
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

}  // namespace pspin
