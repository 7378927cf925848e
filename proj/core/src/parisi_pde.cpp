#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "pspin/errors.hpp"
#include "pspin/parisi.hpp"

namespace pspin {

namespace {

double log2cosh(double x) {
  const double ax = std::fabs(x);
  return ax + std::log1p(std::exp(-2.0 * ax));
}

// Far-field continuation of the terminal datum: Phi(t, x) = a(t) x^2 / 2 + b(t)
// for HalfSquare, Phi(t, x) = terminal(x) + drift(t) for the linear cases.
struct FarField {
  const Mixture& m;
  const StepFunction& gamma;
  Terminal terminal;
  double scale;

  // Solves the Riccati pair a' = -w gamma a^2, b' = -w a / 2 backward from (1, 0).
  std::pair<double, double> quadratic(double t) const {
    double a = 1.0;
    double b = 0.0;
    for (std::size_t jj = gamma.pieces(); jj-- > 0;) {
      const double lo = gamma.piece_start(jj);
      const double hi = gamma.piece_end(jj);
      if (hi <= t) break;
      const double from = std::max(lo, t);
      const double v = gamma.value(jj);
      const double u = scale * (m.xi(hi, 1) - m.xi(from, 1));
      const double denom = 1.0 / a - v * u;
      if (!(denom > 0.0)) throw NumericalError("quadratic terminal datum blows up for this gamma");
      const double integral = v > 0.0 ? -std::log1p(-v * a * u) / v : a * u;
      b += 0.5 * integral;
      a = 1.0 / denom;
    }
    return {a, b};
  }

  double drift(double t) const {
    double total = 0.0;
    for (std::size_t jj = 0; jj < gamma.pieces(); ++jj) {
      const double lo = std::max(t, gamma.piece_start(jj));
      const double hi = gamma.piece_end(jj);
      if (hi > lo) total += gamma.value(jj) * (m.xi(hi, 1) - m.xi(lo, 1));
    }
    return 0.5 * scale * total;
  }

  double value(double t, double x) const {
    if (terminal.kind == TerminalKind::HalfSquare) {
      auto [a, b] = quadratic(t);
      return 0.5 * a * x * x + b;
    }
    return terminal(x) + drift(t);
  }

  double slope(double t, double x) const {
    if (terminal.kind == TerminalKind::HalfSquare) return quadratic(t).first * x;
    return x >= 0.0 ? 1.0 : -1.0;
  }
};

}  // namespace

PdeGrid PdeGrid::defaults(const Mixture& m, double scale) {
  PdeGrid g;
  g.x_max = 6.0 * std::sqrt(scale * m.xi(1.0, 1));
  return g;
}

PdeGrid PdeGrid::coarse(const Mixture& m, double scale) {
  PdeGrid g;
  g.t_steps = 100;
  g.x_steps = 400;
  g.x_max = 6.0 * std::sqrt(scale * m.xi(1.0, 1));
  return g;
}

void PdeGrid::validate() const {
  if (t_steps < 100) throw DomainError("PDE grid needs t_steps >= 100");
  if (x_steps < 200) throw DomainError("PDE grid needs x_steps >= 200");
  if (x_steps % 2 != 0) throw DomainError("PDE grid needs an even x_steps so that x = 0 is a node");
  if (!(x_max > 0.0)) throw DomainError("PDE grid needs x_max > 0");
  if (!(safety > 0.0 && safety <= 0.5)) throw DomainError("PDE grid safety factor must lie in (0, 0.5]");
}

double Terminal::operator()(double x) const {
  switch (kind) {
    case TerminalKind::Abs:
      return std::fabs(x);
    case TerminalKind::HalfSquare:
      return 0.5 * x * x;
    case TerminalKind::LogTwoCosh:
      return log2cosh(x);
  }
  return 0.0;
}

double PdeSolution::time(int i) const {
  return t_start_ + (1.0 - t_start_) * static_cast<double>(i) / static_cast<double>(grid_.t_steps);
}

double PdeSolution::derivative_at(int i, double xv, int order) const {
  const int n = grid_.x_steps;
  double pos = (xv + grid_.x_max) / dx_;
  pos = std::clamp(pos, 1.0, static_cast<double>(n - 1));
  int j = static_cast<int>(std::floor(pos));
  j = std::clamp(j, 1, n - 2);
  const double frac = pos - j;
  auto node = [&](int jj) {
    if (order == 1) return (at_node(i, jj + 1) - at_node(i, jj - 1)) / (2.0 * dx_);
    return (at_node(i, jj + 1) - 2.0 * at_node(i, jj) + at_node(i, jj - 1)) / (dx_ * dx_);
  };
  return (1.0 - frac) * node(j) + frac * node(j + 1);
}

namespace {

template <typename F>
double interpolate_in_time(const PdeSolution& s, double t, F&& at_slice) {
  if (t < s.t_start() - 1e-12 || t > 1.0 + 1e-12) throw DomainError("time outside the solved range");
  const double pos = (t - s.t_start()) / (1.0 - s.t_start()) * s.grid().t_steps;
  int i = static_cast<int>(std::floor(pos));
  i = std::clamp(i, 0, s.grid().t_steps - 1);
  const double frac = std::clamp(pos - i, 0.0, 1.0);
  return (1.0 - frac) * at_slice(i) + frac * at_slice(i + 1);
}

}  // namespace

double PdeSolution::value(double t, double xv) const {
  if (std::fabs(xv) > grid_.x_max) throw DomainError("x outside the solved range");
  return interpolate_in_time(*this, t, [&](int i) {
    const double pos = (xv + grid_.x_max) / dx_;
    int j = std::clamp(static_cast<int>(std::floor(pos)), 0, grid_.x_steps - 1);
    const double frac = pos - j;
    return (1.0 - frac) * at_node(i, j) + frac * at_node(i, j + 1);
  });
}

double PdeSolution::dx_value(double t, double xv) const {
  return interpolate_in_time(*this, t, [&](int i) { return derivative_at(i, xv, 1); });
}

double PdeSolution::dxx_value(double t, double xv) const {
  return interpolate_in_time(*this, t, [&](int i) { return derivative_at(i, xv, 2); });
}

std::vector<double> PdeSolution::slice(int i) const {
  if (i < 0 || i > grid_.t_steps) throw DomainError("slice index out of range");
  const auto begin = phi_.begin() + static_cast<std::ptrdiff_t>(i) * x_points();
  return std::vector<double>(begin, begin + x_points());
}

void PdeSolution::write_csv(std::ostream& out, int t_stride, int x_stride) const {
  t_stride = std::max(1, t_stride);
  x_stride = std::max(1, x_stride);
  out << "t,x,phi\n";
  out.precision(12);
  for (int i = 0; i <= grid_.t_steps; i += t_stride) {
    for (int j = 0; j <= grid_.x_steps; j += x_stride) out << time(i) << ',' << x(j) << ',' << at_node(i, j) << '\n';
  }
}

double PdeSolution::min_second_difference() const {
  double worst = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid_.t_steps; ++i) {
    for (int j = 1; j < grid_.x_steps; ++j) {
      const double d2 = (at_node(i, j + 1) - 2.0 * at_node(i, j) + at_node(i, j - 1)) / (dx_ * dx_);
      worst = std::min(worst, d2);
    }
  }
  return worst;
}

double PdeSolution::max_abs_slope() const {
  double worst = 0.0;
  for (int i = 0; i <= grid_.t_steps; ++i) {
    for (int j = 0; j < grid_.x_steps; ++j) {
      worst = std::max(worst, std::fabs(at_node(i, j + 1) - at_node(i, j)) / dx_);
    }
  }
  return worst;
}

PdeSolution solve_parisi_pde(const Mixture& m, const StepFunction& gamma, const PdeGrid& grid_in,
                             const Terminal& terminal, double t_start, GradientScheme scheme) {
  PdeGrid grid = grid_in;
  const double scale = terminal.weight_scale();
  if (grid.x_max == 0.0) {
    grid.x_max = 6.0 * std::sqrt(scale * m.xi(1.0, 1));
    if (terminal.kind == TerminalKind::LogTwoCosh) grid.x_max = std::max(grid.x_max, 10.0);
  }
  grid.validate();
  if (!(t_start >= 0.0 && t_start < 1.0)) throw DomainError("PDE start time must lie in [0,1)");
  if (terminal.kind == TerminalKind::LogTwoCosh && !(terminal.beta > 0.0)) throw DomainError("beta must be positive");

  PdeSolution sol(m, gamma, grid, terminal);
  sol.t_start_ = t_start;
  const int n = grid.x_steps;
  const double dx = 2.0 * grid.x_max / n;
  sol.dx_ = dx;

  FarField far{m, gamma, terminal, scale};
  const double w_max = scale * m.xi(1.0, 2);  // xi'' is non-decreasing on [0,1]
  const double gamma_max = gamma.max_value();
  double slope_max = 1.0;
  if (terminal.kind == TerminalKind::HalfSquare) slope_max = far.quadratic(t_start).first * grid.x_max;

  const double dt_slice = (1.0 - t_start) / grid.t_steps;
  double dt_limit = grid.safety * dx * dx / w_max;
  if (gamma_max > 0.0) dt_limit = std::min(dt_limit, grid.safety * dx / (w_max * gamma_max * slope_max));
  const double needed = std::ceil(dt_slice / dt_limit - 1e-9);
  if (needed > static_cast<double>(grid.max_substeps)) {
    throw NumericalError("PDE grid violates the explicit stability condition: " + std::to_string(needed) +
                         " substeps per slice needed, limit " + std::to_string(grid.max_substeps));
  }
  const long substeps = std::max(1L, static_cast<long>(needed));
  const double h = dt_slice / static_cast<double>(substeps);
  sol.substeps_ = substeps;
  sol.substep_ = h;

  const std::size_t width = static_cast<std::size_t>(n) + 1;
  sol.phi_.assign(width * (static_cast<std::size_t>(grid.t_steps) + 1), 0.0);
  std::vector<double> cur(width), next(width);
  for (int j = 0; j <= n; ++j) cur[j] = terminal(-grid.x_max + j * dx);
  std::copy(cur.begin(), cur.end(), sol.phi_.begin() + static_cast<std::ptrdiff_t>(grid.t_steps * width));

  const double inv_dx = 1.0 / dx;
  const double inv_dx2 = inv_dx * inv_dx;
  double t = 1.0;
  for (int i = grid.t_steps; i > 0; --i) {
    const double t_slice_lo = sol.time(i - 1);
    for (long s = 0; s < substeps; ++s) {
      const double t_next = (s + 1 == substeps) ? t_slice_lo : t - h;
      const double t_mid = 0.5 * (t + t_next);
      const double half_w = 0.5 * scale * m.xi(t_mid, 2);
      const double g = gamma(t_mid);
      const double step = (t - t_next) * half_w;
      if (scheme == GradientScheme::Central) {
        for (int j = 1; j < n; ++j) {
          const double p = 0.5 * (cur[j + 1] - cur[j - 1]) * inv_dx;
          const double lap = (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) * inv_dx2;
          next[j] = cur[j] + step * (lap + g * p * p);
        }
      } else {
        for (int j = 1; j < n; ++j) {
          const double pm = (cur[j] - cur[j - 1]) * inv_dx;
          const double pp = (cur[j + 1] - cur[j]) * inv_dx;
          double sq;
          if (pm <= pp) {
            sq = std::max(pm * pm, pp * pp);
          } else {
            sq = (pp <= 0.0 && pm >= 0.0) ? 0.0 : std::min(pm * pm, pp * pp);
          }
          const double lap = (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) * inv_dx2;
          next[j] = cur[j] + step * (lap + g * sq);
        }
      }
      next[0] = far.value(t_next, -grid.x_max);
      next[n] = far.value(t_next, grid.x_max);
      std::swap(cur, next);
      t = t_next;
    }
    std::copy(cur.begin(), cur.end(), sol.phi_.begin() + static_cast<std::ptrdiff_t>((i - 1) * width));
  }

  // the far-field Dirichlet data are only valid if the solution has reached
  // its asymptote at the lateral boundary
  double worst = 0.0;
  const double x_in = grid.x_max - 0.5 * dx;
  for (int i = 0; i <= grid.t_steps; ++i) {
    const double right = (sol.at_node(i, n) - sol.at_node(i, n - 1)) / dx;
    const double left = (sol.at_node(i, 1) - sol.at_node(i, 0)) / dx;
    const double ti = sol.time(i);
    worst = std::max(worst, std::fabs(right - far.slope(ti, x_in)));
    worst = std::max(worst, std::fabs(left - far.slope(ti, -x_in)));
  }
  if (terminal.kind != TerminalKind::HalfSquare && worst > 1e-3) {
    throw NumericalError("x_max too small: boundary slope deviates from its asymptote by " + std::to_string(worst));
  }
  if (terminal.kind == TerminalKind::HalfSquare && worst > 1e-3 * std::max(1.0, slope_max)) {
    throw NumericalError("x_max too small: boundary slope deviates from its asymptote by " + std::to_string(worst));
  }
  return sol;
}

}  // namespace pspin
