#include "pspin/optimizers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "pspin/complexity.hpp"
#include "optim_internal.hpp"
#include "pspin/errors.hpp"
#include "pspin/parisi.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {
constexpr std::uint64_t kStartTag = 0x5354;
constexpr std::uint64_t kEigenTag = 0x4549;
}  // namespace

Targets theoretical_targets(const Mixture& m, SpinDomain domain) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (domain == SpinDomain::Hypercube) return {nan, nan};
  Targets out{alg_spherical(m), nan};
  if (m.is_pure()) {
    const int p = m.max_degree();
    const double c = m.coeff(p);
    out.opt_upper = p == 2 ? std::sqrt(2.0) * c : c * ComplexityModel(p).e0();
  } else {
    MinimizeOptions opts;
    opts.atoms = 2;
    out.opt_upper = minimize_parisi(m, SpinDomain::Sphere, OrderSpace::U, opts).value;
  }
  return out;
}

Configuration round(const Magnetization& m) {
  Configuration c;
  c.domain = m.domain;
  const auto n = static_cast<double>(m.values.size());
  if (m.domain == SpinDomain::Sphere) {
    const double norm = m.values.norm();
    if (norm == 0.0) throw DomainError("cannot round the zero vector onto the sphere");
    c.values = m.values * (std::sqrt(n) / norm);
  } else {
    c.values = m.values.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  }
  return c;
}

namespace detail {

Vector uniform_on_sphere(int n, double radius, RandomStream& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v * (radius / v.norm());
}

// Removes the component along m and renormalizes.
Vector orthogonal_unit(const Vector& v, const Vector& m) {
  Vector w = v - (v.dot(m) / m.squaredNorm()) * m;
  const double norm = w.norm();
  if (!(norm > 0.0)) throw NumericalError("step direction collapsed onto the current point");
  return w / norm;
}

int step_count(double delta) {
  if (!(delta > 0.0 && delta <= 0.5)) throw DomainError("delta must lie in (0, 0.5]");
  const double k = 1.0 / delta;
  const long rounded = std::lround(k);
  if (std::fabs(k - rounded) > 1e-9 * k) throw DomainError("1/delta must be an integer");
  return static_cast<int>(rounded);
}

}  // namespace detail

OptimizerReport hessian_ascent(const Hamiltonian& h, double delta, std::uint64_t seed,
                               const HessianAscentOptions& options) {
  if (h.domain() != SpinDomain::Sphere) throw DomainError("Hessian ascent runs on the sphere");
  const int steps = detail::step_count(delta);
  const int n = h.n();
  if (n * delta < 1.0) throw DomainError("Hessian ascent needs N * delta >= 1");
  const auto start = std::chrono::steady_clock::now();

  OptimizerReport rep;
  rep.algorithm = "hessian-ascent";
  rep.instance_seed = h.seed();
  rep.seed = seed;
  rep.delta = delta;
  const auto targets = theoretical_targets(h.mixture(), h.domain());
  rep.target_alg = targets.alg;
  rep.target_opt_upper = targets.opt_upper;

  RandomStream start_rng(derive_key(seed, {kStartTag}));
  RandomStream eigen_rng(derive_key(seed, {kEigenTag}));
  const double step_len = std::sqrt(n * delta);
  Vector m = detail::uniform_on_sphere(n, step_len, start_rng);
  double energy = h.energy(m);
  auto& traj = rep.trajectory;
  traj.times.push_back(delta);
  traj.energies.push_back(energy / n);
  if (options.keep_points) traj.points.push_back(m);

  for (int s = 1; s < steps; ++s) {
    const Matrix hp = h.projected_hessian(m);
    const TopEigenpair top = top_eigenpair(hp, eigen_rng, options.eigen);
    if (!(top.residual <= options.eigen.rel_tol * std::max(top.norm_estimate, 1e-300) * 10.0)) {
      throw NumericalError("eigensolver did not converge at step " + std::to_string(s) +
                           ": residual " + std::to_string(top.residual) + ", norm " +
                           std::to_string(top.norm_estimate));
    }
    Vector v = detail::orthogonal_unit(top.vector, m);
    const double align = v.dot(h.gradient(m));
    if (align < 0.0 || (align == 0.0 && eigen_rng.uniform() < 0.5)) v = -v;
    const Vector next = m + step_len * v;
    const double next_energy = h.energy(next);

    StepDiagnostics d;
    d.t = (s + 1) * delta;
    d.top_eigenvalue = top.value;
    d.radius_sq_per_n = next.squaredNorm() / n;
    d.step_overlap = (next - m).dot(m) / n;
    d.step_norm_sq_per_n = (next - m).squaredNorm() / n;
    d.gain = next_energy - energy;
    d.used_dense = top.used_dense;
    traj.diagnostics.push_back(d);

    m = next;
    energy = next_energy;
    traj.times.push_back(d.t);
    traj.energies.push_back(energy / n);
    if (options.keep_points) traj.points.push_back(m);
  }

  rep.final_config = round(Magnetization{m, SpinDomain::Sphere});
  rep.energy_per_n = h.energy_per_n(rep.final_config.values);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace pspin
