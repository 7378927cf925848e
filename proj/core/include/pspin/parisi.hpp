#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pspin/hamiltonian.hpp"
#include "pspin/mixture.hpp"
#include "pspin/step_function.hpp"

namespace pspin {

/// Finite-difference grid for Parisi-type PDEs on [t_start,1] x [-x_max, x_max].
///
/// `t_steps` is the number of stored time slices. The explicit scheme needs
///   dt <= safety * dx^2 / max_t w(t),
/// so each stored interval is split into as many substeps as the condition
/// requires; the chosen substep is recorded on the solution.
struct PdeGrid {
  int t_steps = 2000;
  double x_max = 0.0;  // 0 selects 6 sqrt(scale * xi'(1))
  int x_steps = 4000;  // must be even so x = 0 is a node
  double safety = 0.4;
  long max_substeps = 200000;  // per stored interval

  static PdeGrid defaults(const Mixture& m, double scale = 1.0);
  /// Coarse grid for inner loops of minimization.
  static PdeGrid coarse(const Mixture& m, double scale = 1.0);
  void validate() const;
};

enum class TerminalKind { Abs, HalfSquare, LogTwoCosh };

struct Terminal {
  TerminalKind kind = TerminalKind::Abs;
  double beta = 1.0;  // only used by LogTwoCosh: the PDE weight becomes beta^2 xi''

  static Terminal abs() { return {TerminalKind::Abs, 1.0}; }
  static Terminal half_square() { return {TerminalKind::HalfSquare, 1.0}; }
  static Terminal log_two_cosh(double beta) { return {TerminalKind::LogTwoCosh, beta}; }
  double weight_scale() const { return kind == TerminalKind::LogTwoCosh ? beta * beta : 1.0; }
  double operator()(double x) const;
};

enum class GradientScheme { Central, Upwind };

/// Grid solution of
///   d_t Phi + (w(t)/2) (d_xx Phi + gamma(t) (d_x Phi)^2) = 0,  w = scale * xi'',
/// backward from Phi(1, x) = terminal(x).
class PdeSolution {
 public:
  double t_start() const { return t_start_; }
  double time(int i) const;  // i = 0 is t_start, i = t_steps is 1
  double x(int j) const { return -grid_.x_max + j * dx_; }
  int time_slices() const { return grid_.t_steps + 1; }
  int x_points() const { return grid_.x_steps + 1; }
  double dx() const { return dx_; }
  double substep() const { return substep_; }
  long substeps_per_slice() const { return substeps_; }
  const PdeGrid& grid() const { return grid_; }
  const Mixture& mixture() const { return mixture_; }
  const StepFunction& gamma() const { return gamma_; }
  const Terminal& terminal() const { return terminal_; }

  double at_node(int i, int j) const { return phi_[static_cast<std::size_t>(i) * x_points() + j]; }
  /// Phi(t,x) with linear interpolation in both t and x.
  double value(double t, double x) const;
  /// Central-difference first and second x-derivatives, interpolated in t and x.
  double dx_value(double t, double x) const;
  double dxx_value(double t, double x) const;
  double at_origin() const { return at_node(0, grid_.x_steps / 2); }

  /// Slice i as (x, Phi) samples.
  std::vector<double> slice(int i) const;

  /// CSV with columns t,x,phi; every `t_stride`-th slice and `x_stride`-th node.
  void write_csv(std::ostream& out, int t_stride = 1, int x_stride = 1) const;

  /// Largest violation of convexity in x over all slices (>= 0 means convex).
  double min_second_difference() const;
  double max_abs_slope() const;

 private:
  friend PdeSolution solve_parisi_pde(const Mixture&, const StepFunction&, const PdeGrid&, const Terminal&, double,
                                      GradientScheme);
  PdeSolution(Mixture m, StepFunction g, PdeGrid grid, Terminal term)
      : mixture_(std::move(m)), gamma_(std::move(g)), grid_(grid), terminal_(term) {}

  double derivative_at(int i, double x, int order) const;

  Mixture mixture_;
  StepFunction gamma_;
  PdeGrid grid_;
  Terminal terminal_;
  double t_start_ = 0.0;
  double dx_ = 0.0;
  double substep_ = 0.0;
  long substeps_ = 1;
  std::vector<double> phi_;
};

/// Explicit backward solve. For LogTwoCosh, `gamma` carries the CDF values
/// zeta([0,t]) and the weight is beta^2 xi''(t). The lateral boundary is
/// Dirichlet with the known far-field continuation of the terminal datum.
PdeSolution solve_parisi_pde(const Mixture& m, const StepFunction& gamma, const PdeGrid& grid,
                             const Terminal& terminal, double t_start = 0.0,
                             GradientScheme scheme = GradientScheme::Central);

/// P(gamma) = Phi_gamma(0,0) - (1/2) int_0^1 t xi''(t) gamma(t) dt.
double parisi_value(const Mixture& m, const StepFunction& gamma, const PdeSolution& sol);

struct SphericalValue {
  double value = 0.0;
  double level = 0.0;  // optimal L
};

/// Closed-form spherical functional
///   inf_{L > int gamma} (1/2) int_0^1 (xi''(t) Gamma(t) + 1/Gamma(t)) dt,
///   Gamma(t) = L - int_0^t gamma.
SphericalValue spherical_functional(const Mixture& m, const StepFunction& gamma);

/// ALG on the sphere: int_0^1 sqrt(xi''(t)) dt.
double alg_spherical(const Mixture& m);

struct GammaStarL {
  std::function<double(double)> fn;        // xi'''(t) / (2 xi''(t)^{3/2})
  std::optional<StepFunction> discretized;  // exact cell averages; empty when singular
  bool monotone = false;  // t -> xi'''/xi''^{3/2} non-decreasing on (0,1]
  bool singular = false;  // xi''(0) = 0: fn is only defined on (0,1]
};

GammaStarL gamma_star_L_spherical(const Mixture& m, int cells = 256);

enum class OrderSpace { U, L };

struct MinimizeResult {
  StepFunction gamma;
  double value = 0.0;
  int evaluations = 0;
  bool budget_exhausted = false;
  /// The best point sits on the boundary of the search region (breakpoints
  /// collapsed onto 1 or values at the cap), so attainment of the infimum is
  /// not established.
  bool boundary_mass = false;
};

struct MinimizeOptions {
  int atoms = 1;         // breakpoints beyond t = 0 (hypercube: <= 8; sphere/L: graded mesh cells - 1)
  int budget = 400;      // objective evaluations
  double value_cap = 1e3;
  std::optional<PdeGrid> grid;  // hypercube only; coarse grid by default
};

/// Derivative-free minimization of P over step functions in the chosen space.
/// The returned value is an upper bound on the infimum.
MinimizeResult minimize_parisi(const Mixture& m, SpinDomain domain, OrderSpace space,
                               const MinimizeOptions& options = {});

/// Nelder-Mead on R^d. Returns the best point; `evaluations` counts calls.
struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool budget_exhausted = false;
};
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             double step, int budget, double ftol = 1e-10);

}  // namespace pspin
