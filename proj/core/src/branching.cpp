#include <cmath>

#include "optim_internal.hpp"
#include "pspin/errors.hpp"
#include "pspin/optimizers.hpp"

namespace pspin {

namespace {

constexpr std::uint64_t kShared = 0x5348;
constexpr std::uint64_t kBranch = 0x4252;

// A uniformly random unit vector in the near-top eigenspace of P H P,
// orthogonal to m. Falls back to the top eigenvector if the space is empty.
Vector random_near_top(const Hamiltonian& h, const Vector& m, double eps, RandomStream& rng, int& fallbacks) {
  const Matrix hp = h.projected_hessian(m);
  const Eigenspace space = near_top_eigenspace(hp, eps);
  Vector mix = Vector::Zero(m.size());
  const Vector mu = m / m.norm();
  for (int c = 0; c < space.vectors.cols(); ++c) {
    // the projected Hessian annihilates m; skip that eigenvector if it sneaks in
    if (std::fabs(space.vectors.col(c).dot(mu)) > 0.5) continue;
    mix += rng.normal() * space.vectors.col(c);
  }
  if (!(mix.norm() > 0.0)) {
    ++fallbacks;
    Eigen::SelfAdjointEigenSolver<Matrix> es(hp);
    mix = es.eigenvectors().col(es.eigenvectors().cols() - 1);
  }
  return detail::orthogonal_unit(mix, m);
}

}  // namespace

BranchingResult branching_hessian_ascent(const Hamiltonian& h, double delta, double t_star, double eps_eigen,
                                         std::uint64_t seed_first, std::uint64_t seed_second) {
  if (h.domain() != SpinDomain::Sphere) throw DomainError("branching Hessian ascent runs on the sphere");
  const int steps = detail::step_count(delta);
  const int n = h.n();
  if (!(eps_eigen > 0.0 && eps_eigen < 0.5)) throw DomainError("eps_eigen must lie in (0, 0.5)");
  const double shared_steps_real = t_star / delta;
  const long shared_steps = std::lround(shared_steps_real);
  if (std::fabs(shared_steps_real - shared_steps) > 1e-9 * steps || shared_steps < 1 || shared_steps > steps) {
    throw DomainError("t_star must be a multiple of delta in [delta, 1]");
  }

  BranchingResult out;
  const double step_len = std::sqrt(n * delta);
  RandomStream shared(derive_key(seed_first, {kShared}));
  Vector m = detail::uniform_on_sphere(n, step_len, shared);
  // m^t for t <= t_star is common to both copies
  for (long s = 1; s < shared_steps; ++s) m += step_len * random_near_top(h, m, eps_eigen, shared, out.fallbacks);

  auto finish = [&](std::uint64_t seed) {
    RandomStream own(derive_key(seed, {kBranch}));
    Vector x = m;
    for (long s = shared_steps; s < steps; ++s) x += step_len * random_near_top(h, x, eps_eigen, own, out.fallbacks);
    return round(Magnetization{x, SpinDomain::Sphere});
  };
  out.first = finish(seed_first);
  out.second = finish(seed_second);
  out.overlap = out.first.values.dot(out.second.values) / n;
  return out;
}

}  // namespace pspin
