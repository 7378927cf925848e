#include <chrono>
#include <cmath>

#include "optim_internal.hpp"
#include "pspin/errors.hpp"
#include "pspin/optimizers.hpp"

namespace pspin {

namespace {

constexpr std::uint64_t kBaselineStart = 0x4253;
constexpr std::uint64_t kBaselineNoise = 0x424e;

Vector random_start(const Hamiltonian& h, RandomStream& rng) {
  const int n = h.n();
  if (h.domain() == SpinDomain::Sphere) return detail::uniform_on_sphere(n, std::sqrt(static_cast<double>(n)), rng);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
  return x;
}

void check_budget(long long iters, int n, long long budget) {
  if (iters < 0) throw DomainError("iteration count must be >= 0");
  if (iters * static_cast<long long>(n) > budget) {
    throw ResourceError("iters * N = " + std::to_string(iters * n) + " exceeds the budget " + std::to_string(budget));
  }
}

OptimizerReport new_report(const Hamiltonian& h, const char* name, std::uint64_t seed) {
  OptimizerReport rep;
  rep.algorithm = name;
  rep.instance_seed = h.seed();
  rep.seed = seed;
  const auto t = theoretical_targets(h.mixture(), h.domain());
  rep.target_alg = t.alg;
  rep.target_opt_upper = t.opt_upper;
  return rep;
}

// Best-seen bookkeeping: the reported configuration is the best one visited.
struct Best {
  Vector x;
  double energy = -std::numeric_limits<double>::infinity();
  void offer(const Vector& c, double e) {
    if (e > energy) {
      energy = e;
      x = c;
    }
  }
};

void finish(OptimizerReport& rep, const Hamiltonian& h, const Best& best,
            std::chrono::steady_clock::time_point start) {
  rep.final_config = Configuration{best.x, h.domain()};
  rep.energy_per_n = h.energy_per_n(best.x);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Vector to_config(const Hamiltonian& h, const Vector& x) {
  return round(Magnetization{x, h.domain()}).values;
}

}  // namespace

OptimizerReport gradient_ascent(const Hamiltonian& h, std::uint64_t seed, const GradientAscentOptions& o) {
  check_budget(o.iters, h.n(), o.budget);
  if (!(o.step > 0.0)) throw DomainError("step must be positive");
  const auto start = std::chrono::steady_clock::now();
  auto rep = new_report(h, "gradient-ascent", seed);
  RandomStream rng(derive_key(seed, {kBaselineStart}));
  Vector x = random_start(h, rng);
  Best best;
  best.offer(x, h.energy(x));
  rep.trajectory.times.push_back(0.0);
  rep.trajectory.energies.push_back(best.energy / h.n());
  for (int it = 1; it <= o.iters; ++it) {
    x += o.step * h.gradient(x);
    if (h.domain() == SpinDomain::Sphere) {
      x = to_config(h, x);
    } else {
      x = x.cwiseMax(-1.0).cwiseMin(1.0);
    }
    const Vector c = to_config(h, x);
    best.offer(c, h.energy(c));
    rep.trajectory.times.push_back(it);
    rep.trajectory.energies.push_back(best.energy / h.n());
  }
  finish(rep, h, best, start);
  return rep;
}

OptimizerReport simulated_annealing(const Hamiltonian& h, std::uint64_t seed, const AnnealingOptions& o) {
  check_budget(o.iters, h.n(), o.budget);
  const auto& s = o.schedule;
  if (!(s.beta_start > 0.0 && s.beta_end > 0.0)) throw DomainError("inverse temperatures must be positive");
  const auto start = std::chrono::steady_clock::now();
  auto rep = new_report(h, "simulated-annealing", seed);
  RandomStream rng(derive_key(seed, {kBaselineStart}));
  RandomStream noise(derive_key(seed, {kBaselineNoise}));
  const int n = h.n();
  Vector x = random_start(h, rng);
  double energy = h.energy(x);
  Best best;
  best.offer(x, energy);
  rep.trajectory.times.push_back(0.0);
  rep.trajectory.energies.push_back(best.energy / n);
  auto beta_at = [&](int it) {
    if (o.iters <= 1) return s.beta_end;
    return s.beta_start * std::pow(s.beta_end / s.beta_start, (it - 1.0) / (o.iters - 1.0));
  };

  const bool quadratic = h.degrees().size() == 1 && h.degrees()[0].k == 2;
  Matrix coupling;   // symmetric W with zero diagonal so that flips read local fields
  Vector field;
  if (h.domain() == SpinDomain::Hypercube && quadratic) {
    // H = x^T A x with A_ii irrelevant on the cube; store off-diagonal only
    coupling = 0.5 * h.hessian(Vector::Zero(n));
    coupling.diagonal().setZero();
    field = coupling * x;
  }

  for (int it = 1; it <= o.iters; ++it) {
    const double beta = beta_at(it);
    if (h.domain() == SpinDomain::Hypercube) {
      for (int step = 0; step < n; ++step) {
        const auto i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        double diff;
        if (quadratic) {
          diff = -4.0 * x[i] * field[i];
        } else {
          x[i] = -x[i];
          diff = h.energy(x) - energy;
          x[i] = -x[i];
        }
        if (diff >= 0.0 || noise.uniform() < std::exp(beta * diff)) {
          x[i] = -x[i];
          energy += diff;
          if (quadratic) field += (2.0 * x[i]) * coupling.col(i);
          if (energy > best.energy) best.offer(x, energy);
        }
      }
      if (quadratic) energy = h.energy(x);  // wash out drift from incremental updates
    } else {
      Vector xi(n);
      for (int i = 0; i < n; ++i) xi[i] = noise.normal();
      x += s.langevin_step * beta * h.gradient(x) + std::sqrt(2.0 * s.langevin_step) * xi;
      x = to_config(h, x);
      energy = h.energy(x);
      best.offer(x, energy);
    }
    rep.trajectory.times.push_back(it);
    rep.trajectory.energies.push_back(best.energy / n);
  }
  finish(rep, h, best, start);
  return rep;
}

}  // namespace pspin
