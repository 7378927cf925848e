#pragma once

#include <optional>

#include "pspin/hamiltonian.hpp"
#include "pspin/parisi.hpp"

namespace pspin {

/// Inverse temperature, band location q and, on the hypercube, the
/// magnetization whose empirical measure defines the query.
struct TapQuery {
  double beta = 1.0;
  double q = 0.0;
  std::optional<Vector> magnetization;

  static TapQuery sphere(double beta, double q);
  static TapQuery hypercube(double beta, Vector m);
  /// Throws DomainError on q outside [0,1) (sphere) or [0,1] (cube), entries
  /// outside [-1,1], or a stored q that disagrees with the magnetization.
  void validate() const;
};

/// (1/2) log(1 - q) + f_of_q.
double tap_spherical(double q, double f_of_q);

/// Onsager term (1/2) beta^2 xi_q(1).
double onsager_f(const Mixture& m, double beta, double q);

/// Binary entropy in the +-1 parametrization; I(+-1) = 0, I(0) = -log 2.
double entropy_I(double x);

/// -(1/N) sum_i I(m_i) + (1/2) beta^2 xi_q(1), q = |m|^2 / N.
double onsager_ising(const Mixture& m, double beta, const VectorRef& mvec);

struct TapParisiValue {
  double value = 0.0;
  double q = 0.0;
  double correction = 0.0;  // (1/2) beta^2 int_q^1 s xi''(s) zeta(s) ds
  bool boundary = false;    // some |a| = 1 or a minimizer sat on the grid edge
};

/// int Lambda_zeta(q, a) mu(da) - (1/2) beta^2 int_q^1 s xi'' zeta, where
/// Lambda_zeta(q, a) = inf_x (Phi_zeta(q, x) - a x) and Phi_zeta solves the
/// positive-temperature PDE with log 2cosh terminal. `zeta` holds the CDF
/// t -> zeta([0,t]) of a probability measure on [0,1].
TapParisiValue tap_parisi_ising(const Mixture& m, double beta, const VectorRef& mu, const StepFunction& zeta,
                                std::optional<PdeGrid> grid = std::nullopt);

/// Entries drawn uniform on [-1,1] and rescaled so that |m|^2/N = q; redrawn
/// until every entry stays inside [-1,1]. Needs q in (0,1).
Vector random_magnetization(int n, double q, std::uint64_t seed);

/// Largest N accepted by the exact enumerations.
constexpr int kMaxEnumerationN = 22;

/// (1/N) log sum_{sigma} exp(beta H(sigma)) over {+1,-1}^N.
double free_energy_exact(const Hamiltonian& h, double beta);

/// Same sum restricted to |<sigma - m, m>| < N delta. Returns -inf on an
/// empty band.
double band_free_energy_exact(const Hamiltonian& h, const VectorRef& m, double delta, double beta);

/// F_{N,beta} - [beta H(m)/N + onsager_ising(m)].
double tap_gap_check(const Hamiltonian& h, const VectorRef& m, double beta);

}  // namespace pspin
