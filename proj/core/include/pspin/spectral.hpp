#pragma once

#include "pspin/hamiltonian.hpp"
#include "pspin/rng.hpp"

namespace pspin {

struct EigenOptions {
  int max_krylov = 300;     // Lanczos basis size per restart (capped at N)
  int max_restarts = 6;
  double rel_tol = 1e-8;    // |A v - lambda v| <= rel_tol * |A|
  bool allow_dense_fallback = true;
};

struct TopEigenpair {
  double value = 0.0;
  Vector vector;            // unit norm
  double residual = 0.0;    // |A v - lambda v|
  double norm_estimate = 0.0;
  int iterations = 0;
  bool used_dense = false;
};

/// Largest eigenpair of a dense symmetric matrix. Lanczos with full
/// reorthogonalization and explicit restarts from the best Ritz vector; the
/// start vector is drawn from `rng`, which breaks degeneracies reproducibly.
/// Falls back to a dense eigensolve when the residual target is missed.
TopEigenpair top_eigenpair(const Matrix& a, RandomStream& rng, const EigenOptions& options = {});

struct Eigenspace {
  Vector values;   // descending
  Matrix vectors;  // columns, unit norm
};

/// Eigenvectors whose eigenvalue exceeds (1 - eps) * lambda_max (dense solve).
Eigenspace near_top_eigenspace(const Matrix& a, double eps);

}  // namespace pspin
