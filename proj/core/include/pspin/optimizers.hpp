#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pspin/hamiltonian.hpp"
#include "pspin/spectral.hpp"

namespace pspin {

struct StepDiagnostics {
  double t = 0.0;                  // time after the step
  double top_eigenvalue = 0.0;     // of the projected Hessian used for the step
  double radius_sq_per_n = 0.0;    // |m^t|^2 / N
  double step_overlap = 0.0;       // <m^{t+d} - m^t, m^t> / N
  double step_norm_sq_per_n = 0.0; // |m^{t+d} - m^t|^2 / N
  double gain = 0.0;               // H(m^{t+d}) - H(m^t)
  bool used_dense = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> points;  // empty unless requested
  std::vector<double> energies;  // H(m^t) / N
  std::vector<StepDiagnostics> diagnostics;
};

/// Gram matrices of message-passing iterates against their state-evolution
/// predictions; entry (j,k) refers to the j-th and k-th recorded time.
struct StateEvolutionCheck {
  std::vector<double> times;
  Matrix z_gram, z_theory;  // <z^s, z^t>/N vs xi'(s ^ t)
  Matrix m_gram, m_theory;  // <m^s, m^t>/N vs s ^ t
  double max_z_deviation = 0.0;
  double max_m_deviation = 0.0;
};

struct OptimizerReport {
  std::string algorithm;
  Configuration final_config;
  double energy_per_n = 0.0;
  double target_alg = 0.0;         // NaN when unknown for the domain
  double target_opt_upper = 0.0;   // E0 for pure spherical models, else a Parisi upper bound; NaN if unknown
  Trajectory trajectory;
  std::uint64_t instance_seed = 0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  double wall_time = 0.0;
  bool heuristic = false;  // e.g. spherical IAMP sign-rounded on the hypercube
  std::vector<std::string> warnings;
  std::optional<StateEvolutionCheck> state_evolution;
};

struct Targets {
  double alg;
  double opt_upper;
};

/// Theoretical energy targets used in reports. Sphere: ALG = int sqrt(xi''),
/// OPT bounded by E0 (pure p >= 3), sqrt 2 c_2 (pure p = 2) or the monotone
/// Parisi minimum. Hypercube targets need PDE minimization and are NaN.
Targets theoretical_targets(const Mixture& m, SpinDomain domain);

/// Sphere: radial projection to radius sqrt(N); hypercube: sign, ties to +1.
Configuration round(const Magnetization& m);

struct HessianAscentOptions {
  EigenOptions eigen;
  bool keep_points = false;
};

OptimizerReport hessian_ascent(const Hamiltonian& h, double delta, std::uint64_t seed,
                               const HessianAscentOptions& options = {});

struct BranchingResult {
  Configuration first;
  Configuration second;
  double overlap = 0.0;
  int fallbacks = 0;  // steps where the near-top space was empty and v1 was used
};

/// Randomized Hessian ascent run twice: the copies share randomness while
/// t <= t_star and then draw independent directions, each uniform on the unit
/// sphere of the eigenspace with eigenvalues >= (1 - eps) lambda_1.
BranchingResult branching_hessian_ascent(const Hamiltonian& h, double delta, double t_star, double eps_eigen,
                                         std::uint64_t seed_first, std::uint64_t seed_second);

/// How IAMP sizes its increments.
///  StateEvolution: a_j from the predicted increment variance, exactly the
///    deterministic schedule. Finite-N errors are amplified along edge
///    eigendirections, so long schedules drift at desk-scale N.
///  Empirical: each increment is projected orthogonally to m^t and rescaled
///    to |.|^2 = N delta; the Onsager terms use the realized coefficients.
enum class IampNormalization { StateEvolution, Empirical };

struct IampOptions {
  std::optional<double> t0;  // defaults to delta when c_2 > 0
  IampNormalization normalization = IampNormalization::Empirical;
  bool record_state_evolution = true;
  /// Run the spherical iteration on a hypercube instance and sign-round.
  bool allow_heuristic_hypercube = false;
  bool keep_points = false;
};

/// Incremental AMP with the spherical control u_s = 1/sqrt(xi''(s)).
OptimizerReport iamp(const Hamiltonian& h, double delta, std::uint64_t seed, const IampOptions& options = {});

struct GradientAscentOptions {
  double step = 0.1;
  int iters = 200;
  long long budget = 500'000'000;  // iters * N
};
OptimizerReport gradient_ascent(const Hamiltonian& h, std::uint64_t seed, const GradientAscentOptions& options = {});

struct AnnealingSchedule {
  double beta_start = 0.1;
  double beta_end = 10.0;  // geometric interpolation over the sweeps
  double langevin_step = 0.05;  // sphere only
};
struct AnnealingOptions {
  AnnealingSchedule schedule;
  int iters = 200;  // sweeps (N proposals each) or Langevin steps
  long long budget = 500'000'000;
};
OptimizerReport simulated_annealing(const Hamiltonian& h, std::uint64_t seed, const AnnealingOptions& options = {});

}  // namespace pspin
