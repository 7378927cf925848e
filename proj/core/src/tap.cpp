#include "pspin/tap.hpp"

#include <algorithm>
#include <bit>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

#include "pspin/errors.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

// xi(1) - xi(q) - xi'(q)(1 - q); equals xi_q(1) and extends continuously to q = 1.
double shifted_at_one(const Mixture& m, double q) {
  if (q < 1.0) return ShiftedMixture(m, q).scaled(1.0);
  return 0.0;
}

void require_hypercube(const Hamiltonian& h) {
  if (h.domain() != SpinDomain::Hypercube) throw DomainError("exact enumeration needs a hypercube instance");
  if (h.n() > kMaxEnumerationN) {
    throw DomainError("exact enumeration supports N <= " + std::to_string(kMaxEnumerationN) + ", got " +
                      std::to_string(h.n()));
  }
}

// Visits every sigma in {+1,-1}^N in Gray-code order with its energy. The
// quadratic case updates the energy per flip from local fields.
template <typename F>
void enumerate(const Hamiltonian& h, F&& visit) {
  const int n = h.n();
  Vector s = Vector::Ones(n);
  const bool quadratic = h.degrees().size() == 1 && h.degrees()[0].k == 2;
  Matrix coupling;
  Vector field;
  double energy = h.energy(s);
  if (quadratic) {
    coupling = 0.5 * h.hessian(Vector::Zero(n));
    coupling.diagonal().setZero();
    field = coupling * s;
  }
  visit(s, energy);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t g = 1; g < total; ++g) {
    const int i = std::countr_zero(g);
    if (quadratic) {
      energy -= 4.0 * s[i] * field[i];
      s[i] = -s[i];
      field += (2.0 * s[i]) * coupling.col(i);
    } else {
      s[i] = -s[i];
      energy = h.energy(s);
    }
    visit(s, energy);
  }
}

struct LogSumExp {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  void add(double x) {
    if (x <= max) {
      sum += std::exp(x - max);
    } else {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    }
  }
  double value() const { return sum > 0.0 ? max + std::log(sum) : -std::numeric_limits<double>::infinity(); }
};

}  // namespace

TapQuery TapQuery::sphere(double beta, double q) {
  TapQuery t{beta, q, std::nullopt};
  t.validate();
  return t;
}

TapQuery TapQuery::hypercube(double beta, Vector m) {
  TapQuery t{beta, m.squaredNorm() / static_cast<double>(m.size()), std::move(m)};
  t.validate();
  return t;
}

void TapQuery::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
  if (!magnetization) {
    if (!(q >= 0.0 && q < 1.0)) throw DomainError("q must lie in [0,1)");
    return;
  }
  const Vector& m = *magnetization;
  if (m.size() == 0) throw DomainError("empty magnetization");
  if (m.cwiseAbs().maxCoeff() > 1.0) throw DomainError("magnetization entries must lie in [-1,1]");
  const double recomputed = m.squaredNorm() / static_cast<double>(m.size());
  if (std::fabs(recomputed - q) > 1e-10) throw DomainError("stored q does not match the magnetization");
}

double tap_spherical(double q, double f_of_q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("q must lie in [0,1)");
  return 0.5 * std::log1p(-q) + f_of_q;
}

double onsager_f(const Mixture& m, double beta, double q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("q must lie in [0,1)");
  return 0.5 * beta * beta * ShiftedMixture(m, q).scaled(1.0);
}

double entropy_I(double x) {
  if (!(std::fabs(x) <= 1.0)) throw DomainError("entropy_I needs x in [-1,1]");
  auto term = [](double p) { return p > 0.0 ? p * std::log(p) : 0.0; };
  return term(0.5 * (1.0 + x)) + term(0.5 * (1.0 - x));
}

double onsager_ising(const Mixture& m, double beta, const VectorRef& mvec) {
  const auto n = static_cast<double>(mvec.size());
  if (mvec.size() == 0) throw DomainError("empty magnetization");
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < mvec.size(); ++i) entropy += entropy_I(mvec[i]);
  const double q = std::min(1.0, mvec.squaredNorm() / n);
  return -entropy / n + 0.5 * beta * beta * shifted_at_one(m, q);
}

TapParisiValue tap_parisi_ising(const Mixture& m, double beta, const VectorRef& mu, const StepFunction& zeta,
                                std::optional<PdeGrid> grid_opt) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (mu.size() == 0) throw DomainError("empty magnetization");
  if (mu.cwiseAbs().maxCoeff() > 1.0) throw DomainError("magnetization entries must lie in [-1,1]");
  if (!zeta.is_nondecreasing() || zeta.max_value() > 1.0) throw DomainError("zeta must be a CDF with values in [0,1]");
  const auto n = static_cast<double>(mu.size());
  const double q = mu.squaredNorm() / n;
  if (q >= 1.0) throw DomainError("tap_parisi_ising needs q < 1");

  const Terminal term = Terminal::log_two_cosh(beta);
  PdeGrid grid = grid_opt ? *grid_opt : PdeGrid{};
  const auto sol = solve_parisi_pde(m, zeta, grid, term, q);
  const int nodes = sol.x_points();
  const double x_max = sol.x(nodes - 1);

  // the far field is Phi(q, x) ~ |x| + drift(q); the infimum at |a| = 1 is that limit
  double drift = 0.0;
  for (std::size_t j = 0; j < zeta.pieces(); ++j) {
    const double lo = std::max(q, zeta.piece_start(j));
    const double hi = zeta.piece_end(j);
    if (hi > lo) drift += zeta.value(j) * (m.xi(hi, 1) - m.xi(lo, 1));
  }
  drift *= 0.5 * beta * beta;

  TapParisiValue out;
  out.q = q;
  auto phi = [&](double x) { return sol.value(q, x); };
  double total = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double a = mu[i];
    if (std::fabs(a) >= 1.0) {
      total += drift;
      out.boundary = true;
      continue;
    }
    const auto [x, v] = boost::math::tools::brent_find_minima([&](double x) { return phi(x) - a * x; }, -x_max,
                                                              x_max, 40);
    if (x_max - std::fabs(x) < 2.0 * sol.dx()) out.boundary = true;
    total += v;
  }
  out.correction = 0.5 * beta * beta * correction_integral(m, zeta, q, 1.0);
  out.value = total / n - out.correction;
  return out;
}

Vector random_magnetization(int n, double q, std::uint64_t seed) {
  if (n < 1) throw DomainError("n must be >= 1");
  if (!(q > 0.0 && q < 1.0)) throw DomainError("q must lie in (0,1)");
  RandomStream rng(derive_key(seed, {0x6d61ULL}));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Vector u(n);
    for (int i = 0; i < n; ++i) u[i] = 2.0 * rng.uniform() - 1.0;
    u *= std::sqrt(q * n) / u.norm();
    if (u.cwiseAbs().maxCoeff() <= 1.0) return u;
  }
  throw NumericalError("could not draw a magnetization inside the cube at q = " + std::to_string(q));
}

double free_energy_exact(const Hamiltonian& h, double beta) {
  require_hypercube(h);
  LogSumExp acc;
  enumerate(h, [&](const Vector&, double e) { acc.add(beta * e); });
  return acc.value() / h.n();
}

double band_free_energy_exact(const Hamiltonian& h, const VectorRef& m, double delta, double beta) {
  require_hypercube(h);
  if (m.size() != h.n()) throw DomainError("magnetization has the wrong dimension");
  if (!(delta > 0.0)) throw DomainError("band width must be positive");
  const double n = h.n();
  const double mm = m.squaredNorm();
  LogSumExp acc;
  enumerate(h, [&](const Vector& s, double e) {
    if (std::fabs(s.dot(m) - mm) < n * delta) acc.add(beta * e);
  });
  return acc.value() / n;
}

double tap_gap_check(const Hamiltonian& h, const VectorRef& m, double beta) {
  require_hypercube(h);
  if (m.size() != h.n()) throw DomainError("magnetization has the wrong dimension");
  const double f = free_energy_exact(h, beta);
  return f - (beta * h.energy(m) / h.n() + onsager_ising(h.mixture(), beta, m));
}

}  // namespace pspin
