#include <chrono>
#include <cmath>
#include <limits>

#include "optim_internal.hpp"
#include "pspin/errors.hpp"
#include "pspin/optimizers.hpp"

namespace pspin {

namespace {
constexpr std::uint64_t kInitTag = 0x4941;
}

// Iterates, with tau_j = t0 + j delta and j = 0..K (tau_K = 1):
//   m_0 = independent Gaussian with |m_0|^2/N ~ t0
//   y_{j+1} = W{m_j} - sum_{i=1..j} d_{j,i} m_{i-1},
//   m_1 = m_0 + a_0 y_1,  m_{j+1} = m_j + a_j (y_{j+1} - y_j),
// where a_j normalizes each increment to |.|^2 = N delta (predicted or
// realized, see IampNormalization; the discrete form of u = 1/sqrt(xi''))
// and d_{j,i} = xi''(tau_{i-1}) dm_j/dy_i.
OptimizerReport iamp(const Hamiltonian& h, double delta, std::uint64_t seed, const IampOptions& options) {
  const Mixture& mix = h.mixture();
  if (h.domain() == SpinDomain::Hypercube && !options.allow_heuristic_hypercube) {
    throw DomainError("IAMP is only available on the sphere (hypercube runs need the explicit heuristic flag)");
  }
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0,1)");
  double t0;
  if (options.t0) {
    t0 = *options.t0;
  } else {
    if (mix.coeff(2) <= 0.0) {
      throw DomainError("IAMP needs an explicit t0 > 0 when c_2 = 0; use Hessian ascent for pure p >= 3 models");
    }
    t0 = delta;
  }
  if (!(t0 > 0.0 && t0 < 1.0)) throw DomainError("IAMP start t0 must lie in (0,1); the control is singular at 0");
  const double k_real = (1.0 - t0) / delta;
  const long steps = std::lround(k_real);
  if (steps < 1 || std::fabs(k_real - steps) > 1e-9 * std::max(1.0, k_real)) {
    throw DomainError("(1 - t0)/delta must be a positive integer");
  }
  for (long j = 0; j <= steps; ++j) {
    if (!(mix.xi(std::min(1.0, t0 + j * delta), 2) > 0.0)) throw DomainError("IAMP needs xi'' > 0 on [t0, 1]");
  }

  const auto start = std::chrono::steady_clock::now();
  const int n = h.n();
  auto tau = [&](long j) { return j == steps ? 1.0 : t0 + j * delta; };
  auto xi1 = [&](double t) { return mix.xi(t, 1); };
  auto xi2 = [&](double t) { return mix.xi(t, 2); };

  std::vector<double> a(steps);
  a[0] = std::sqrt(delta / xi1(tau(0)));
  for (long j = 1; j < steps; ++j) a[j] = std::sqrt(delta / (xi1(tau(j)) - xi1(tau(j - 1))));

  OptimizerReport rep;
  rep.algorithm = "iamp";
  rep.instance_seed = h.seed();
  rep.seed = seed;
  rep.delta = delta;
  rep.heuristic = h.domain() == SpinDomain::Hypercube;
  const auto targets = theoretical_targets(mix, SpinDomain::Sphere);
  rep.target_alg = rep.heuristic ? std::numeric_limits<double>::quiet_NaN() : targets.alg;
  rep.target_opt_upper = rep.heuristic ? std::numeric_limits<double>::quiet_NaN() : targets.opt_upper;
  if (rep.heuristic) rep.warnings.push_back("heuristic: spherical IAMP schedule with sign rounding on the hypercube");

  RandomStream rng(derive_key(seed, {kInitTag}));
  Vector z0(n);
  for (int i = 0; i < n; ++i) z0[i] = rng.normal() * std::sqrt(xi1(t0));
  std::vector<Vector> ms{z0 * std::sqrt(t0 / xi1(t0))};
  std::vector<Vector> ys;  // ys[j] = y_{j+1}

  auto& traj = rep.trajectory;
  auto record = [&](long j) {
    traj.times.push_back(tau(j));
    traj.energies.push_back(h.energy(ms.back()) / n);
    if (options.keep_points) traj.points.push_back(ms.back());
  };
  record(0);

  for (long j = 0; j < steps; ++j) {
    Vector y = h.contract(ms[j]);
    // Onsager correction, derivative of m_j in y_i for i = 1..j
    for (long i = 1; i <= j; ++i) {
      const double dm = i < j ? a[i - 1] - a[i] : a[j - 1];
      y -= xi2(tau(i - 1)) * dm * ms[i - 1];
    }
    Vector inc = j == 0 ? Vector(y) : Vector(y - ys[j - 1]);
    if (options.normalization == IampNormalization::Empirical) {
      inc -= (inc.dot(ms[j]) / ms[j].squaredNorm()) * ms[j];
      const double norm = inc.norm();
      if (!(norm > 0.0)) throw NumericalError("IAMP increment vanished at step " + std::to_string(j + 1));
      a[j] = std::sqrt(n * delta) / norm;
    }
    Vector next = ms[j] + a[j] * inc;
    ys.push_back(std::move(y));
    const double r = next.squaredNorm() / n;
    StepDiagnostics d;
    d.t = tau(j + 1);
    d.radius_sq_per_n = r;
    d.step_overlap = (next - ms[j]).dot(ms[j]) / n;
    d.step_norm_sq_per_n = (next - ms[j]).squaredNorm() / n;
    ms.push_back(std::move(next));
    d.gain = (h.energy(ms.back()) - h.energy(ms[j]));
    traj.diagnostics.push_back(d);
    record(j + 1);
    if (std::fabs(r - tau(j + 1)) > 0.1) {
      throw NumericalError("IAMP diverged at step " + std::to_string(j + 1) + ": |m|^2/N = " + std::to_string(r) +
                           " at t = " + std::to_string(tau(j + 1)));
    }
  }

  if (options.record_state_evolution) {
    StateEvolutionCheck se;
    const auto k = static_cast<Eigen::Index>(steps);
    se.z_gram.resize(k, k);
    se.z_theory.resize(k, k);
    se.m_gram.resize(k + 1, k + 1);
    se.m_theory.resize(k + 1, k + 1);
    for (long j = 0; j <= steps; ++j) se.times.push_back(tau(j));
    for (long j = 0; j < steps; ++j) {
      for (long l = 0; l < steps; ++l) {
        se.z_gram(j, l) = ys[j].dot(ys[l]) / n;
        se.z_theory(j, l) = xi1(tau(std::min(j, l)));
      }
    }
    for (long j = 0; j <= steps; ++j) {
      for (long l = 0; l <= steps; ++l) {
        se.m_gram(j, l) = ms[j].dot(ms[l]) / n;
        se.m_theory(j, l) = tau(std::min(j, l));
      }
    }
    se.max_z_deviation = (se.z_gram - se.z_theory).cwiseAbs().maxCoeff();
    se.max_m_deviation = (se.m_gram - se.m_theory).cwiseAbs().maxCoeff();
    rep.state_evolution = std::move(se);
  }

  rep.final_config = round(Magnetization{ms.back(), h.domain()});
  rep.energy_per_n = h.energy_per_n(rep.final_config.values);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace pspin
