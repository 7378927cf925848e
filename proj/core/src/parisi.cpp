#include "pspin/parisi.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "pspin/errors.hpp"

namespace pspin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// t xi'(t) - xi(t), the antiderivative of t xi''(t)
double moment(const Mixture& m, double t) { return t * m.xi(t, 1) - m.xi(t, 0); }

// (1/2) int_a^b (xi'' Gamma + 1/Gamma) for Gamma linear from ga (at a) to gb (at b)
double cell_energy(const Mixture& m, double a, double b, double ga, double gb) {
  const double h = b - a;
  const double slope = (ga - gb) / h;  // gamma on the cell
  const double d1 = m.xi(b, 1) - m.xi(a, 1);
  const double linear = ga * d1 - slope * (moment(m, b) - moment(m, a) - a * d1);
  // h log(ga/gb) / (ga - gb), written to survive ga ~ gb
  const double r = (ga - gb) / gb;
  const double ratio = std::fabs(r) < 1e-4 ? 1.0 - r / 2.0 + r * r / 3.0 - r * r * r / 4.0 : std::log1p(r) / r;
  const double inverse = h * ratio / gb;
  return 0.5 * (linear + inverse);
}

}  // namespace

double parisi_value(const Mixture& m, const StepFunction& gamma, const PdeSolution& sol) {
  if (sol.mixture().coefficients() != m.coefficients()) throw DomainError("PDE solution was computed for another mixture");
  if (!(sol.gamma() == gamma)) throw DomainError("PDE solution was computed for another gamma");
  if (sol.t_start() != 0.0) throw DomainError("PDE solution does not reach t = 0");
  if (sol.terminal().kind == TerminalKind::LogTwoCosh) throw DomainError("parisi_value needs a zero-temperature terminal");
  return sol.at_origin() - 0.5 * correction_integral(m, gamma);
}

SphericalValue spherical_functional(const Mixture& m, const StepFunction& gamma) {
  const double total = gamma.total_integral();
  auto energy = [&](double level) {
    double sum = 0.0;
    double g = level;
    for (std::size_t j = 0; j < gamma.pieces(); ++j) {
      const double a = gamma.piece_start(j);
      const double b = gamma.piece_end(j);
      const double next = g - gamma.value(j) * (b - a);
      sum += cell_energy(m, a, b, g, next);
      g = next;
    }
    return sum;
  };
  // convex in L on (total, inf); search over log(L - total)
  auto objective = [&](double s) {
    const double v = energy(total + std::exp(s));
    return std::isfinite(v) ? v : kInf;
  };
  const auto [s_best, v_best] = boost::math::tools::brent_find_minima(objective, -40.0, 40.0, 52);
  if (!std::isfinite(v_best)) throw NumericalError("spherical functional is infeasible for this gamma");
  return {v_best, total + std::exp(s_best)};
}

double alg_spherical(const Mixture& m) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate([&](double t) { return std::sqrt(m.xi(t, 2)); }, 0.0, 1.0, 1e-13);
}

GammaStarL gamma_star_L_spherical(const Mixture& m, int cells) {
  if (cells < 1) throw DomainError("gamma_star_L needs at least one cell");
  GammaStarL out;
  out.fn = [m](double t) { return m.xi(t, 3) / (2.0 * std::pow(m.xi(t, 2), 1.5)); };
  out.singular = m.xi(0.0, 2) == 0.0;
  auto ratio = [&](double t) { return m.xi(t, 3) / std::pow(m.xi(t, 2), 1.5); };
  out.monotone = true;
  constexpr int kProbe = 2000;
  double prev = ratio(1.0 / kProbe);
  for (int i = 2; i <= kProbe; ++i) {
    const double cur = ratio(static_cast<double>(i) / kProbe);
    if (cur < prev - 1e-12 * std::max(1.0, std::fabs(prev))) {
      out.monotone = false;
      break;
    }
    prev = cur;
  }
  if (!out.singular) {
    // cell averages from the antiderivative -1/sqrt(xi'')
    std::vector<double> edges(cells + 1), values(cells);
    for (int i = 0; i <= cells; ++i) edges[i] = static_cast<double>(i) / cells;
    for (int i = 0; i < cells; ++i) {
      const double a = edges[i], b = edges[i + 1];
      values[i] = std::max(0.0, (1.0 / std::sqrt(m.xi(a, 2)) - 1.0 / std::sqrt(m.xi(b, 2))) / (b - a));
    }
    out.discretized = StepFunction::from_cells(edges, std::move(values), false);
  }
  return out;
}

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             double step, int budget, double ftol) {
  const std::size_t d = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isnan(v) ? kInf : v;
  };
  std::vector<std::vector<double>> simplex(d + 1, x0);
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += step;
  for (std::size_t i = 0; i <= d; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(d + 1);
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (auto i : order) {
      s2.push_back(simplex[i]);
      f2.push_back(fv[i]);
    }
    simplex.swap(s2);
    fv.swap(f2);
  };
  auto affine = [&](const std::vector<double>& c, const std::vector<double>& x, double coef) {
    std::vector<double> y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = c[i] + coef * (x[i] - c[i]);
    return y;
  };

  sort_simplex();
  while (true) {
    if (std::isfinite(fv[d]) && std::fabs(fv[d] - fv[0]) <= ftol * (std::fabs(fv[0]) + ftol)) break;
    if (res.evaluations >= budget) {
      res.budget_exhausted = true;
      break;
    }
    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / static_cast<double>(d);
    const auto xr = affine(centroid, simplex[d], -1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const auto xe = affine(centroid, simplex[d], -2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[d] = xe;
        fv[d] = fe;
      } else {
        simplex[d] = xr;
        fv[d] = fr;
      }
    } else if (fr < fv[d - 1]) {
      simplex[d] = xr;
      fv[d] = fr;
    } else {
      const bool outside = fr < fv[d];
      const auto xc = outside ? affine(centroid, xr, 0.5) : affine(centroid, simplex[d], 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, fv[d])) {
        simplex[d] = xc;
        fv[d] = fc;
      } else {
        for (std::size_t i = 1; i <= d; ++i) {
          simplex[i] = affine(simplex[0], simplex[i], 0.5);
          fv[i] = eval(simplex[i]);
        }
      }
    }
    sort_simplex();
  }
  res.x = simplex[0];
  res.value = fv[0];
  return res;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

constexpr double kMinGap = 1e-3;

// Unconstrained parameters -> step function. Breakpoints pass through a
// sigmoid and are sorted; values are squares (cumulative for U).
struct StepParam {
  int atoms;
  bool monotone;
  double cap;

  std::size_t size() const { return static_cast<std::size_t>(2 * atoms + 1); }

  StepFunction decode(const std::vector<double>& p, bool* at_boundary = nullptr) const {
    std::vector<double> bps;
    for (int i = 0; i < atoms; ++i) bps.push_back(sigmoid(p[i]));
    std::sort(bps.begin(), bps.end());
    std::vector<double> breakpoints{0.0};
    std::vector<int> keep;
    for (int i = 0; i < atoms; ++i) {
      if (bps[i] - breakpoints.back() >= kMinGap && bps[i] <= 1.0 - kMinGap) {
        breakpoints.push_back(bps[i]);
        keep.push_back(i + 1);
      }
    }
    std::vector<double> raw(atoms + 1);
    double acc = 0.0;
    bool boundary = static_cast<int>(keep.size()) < atoms;
    for (int j = 0; j <= atoms; ++j) {
      const double u = p[atoms + j] * p[atoms + j];
      acc = monotone ? acc + u : u;
      raw[j] = std::min(acc, cap);
      if (acc >= cap) boundary = true;
    }
    // merged pieces take the value of the later atom so monotonicity survives
    std::vector<double> values{raw[0]};
    std::size_t next = 0;
    for (int j = 1; j <= atoms; ++j) {
      if (next < keep.size() && keep[next] == j) {
        values.push_back(raw[j]);
        ++next;
      } else {
        values.back() = monotone ? std::max(values.back(), raw[j]) : values.back();
      }
    }
    if (at_boundary) *at_boundary = boundary;
    return StepFunction(std::move(breakpoints), std::move(values), monotone);
  }

  std::vector<double> initial(double level) const {
    std::vector<double> p(size());
    for (int i = 0; i < atoms; ++i) p[i] = logit((i + 1.0) / (atoms + 1.0));
    for (int j = 0; j <= atoms; ++j) p[atoms + j] = std::sqrt(monotone ? level / (atoms + 1.0) : level);
    return p;
  }
};

MinimizeResult minimize_by_nelder_mead(const std::function<double(const StepFunction&)>& objective,
                                       const StepParam& param, int budget) {
  double best_value = kInf;
  auto f = [&](const std::vector<double>& p) {
    try {
      const double v = objective(param.decode(p));
      best_value = std::min(best_value, v);
      return v;
    } catch (const NumericalError&) {
      return kInf;
    } catch (const DomainError&) {
      return kInf;
    }
  };
  // two starts: near gamma = 0 and a moderately large level
  NelderMeadResult best;
  best.value = kInf;
  int used = 0;
  for (double level : {0.05, 1.0}) {
    const int remaining = budget - used;
    if (remaining <= static_cast<int>(param.size()) + 1) break;
    auto r = nelder_mead(f, param.initial(level), 0.5, level == 0.05 ? remaining / 2 : remaining, 1e-12);
    used += r.evaluations;
    if (r.value < best.value || best.x.empty()) {
      const bool exhausted = best.budget_exhausted || r.budget_exhausted;
      best = r;
      best.budget_exhausted = exhausted;
    } else {
      best.budget_exhausted = best.budget_exhausted || r.budget_exhausted;
    }
  }
  MinimizeResult out;
  bool boundary = false;
  out.gamma = param.decode(best.x, &boundary);
  out.value = best.value;
  out.evaluations = used;
  out.budget_exhausted = best.budget_exhausted;
  out.boundary_mass = boundary;
  return out;
}

// Sphere over the extended space: Gamma = L - int gamma is piecewise linear
// on a mesh graded towards t = 0 and optimized node by node. Each node only
// couples to its two cells, so one sweep costs O(cells).
MinimizeResult minimize_sphere_L(const Mixture& m, const MinimizeOptions& opts) {
  const int cells = std::max(opts.atoms + 1, 64);
  std::vector<double> t(cells + 1);
  for (int j = 0; j <= cells; ++j) t[j] = std::pow(static_cast<double>(j) / cells, 2.0);
  std::vector<double> g(cells + 1, 1.0 / std::sqrt(m.xi(1.0, 1)));
  auto local = [&](int j, double v) {
    double s = 0.0;
    if (j > 0) s += cell_energy(m, t[j - 1], t[j], g[j - 1], v);
    if (j < cells) s += cell_energy(m, t[j], t[j + 1], v, g[j + 1]);
    return s;
  };
  auto total = [&] {
    double s = 0.0;
    for (int j = 0; j < cells; ++j) s += cell_energy(m, t[j], t[j + 1], g[j], g[j + 1]);
    return s;
  };
  constexpr double kWindow = 12.0;  // log-range for the free end nodes
  MinimizeResult out;
  double prev = total();
  bool top_at_boundary = false;
  int sweeps = 0;
  const int max_sweeps = std::max(opts.budget, 1);
  while (true) {
    for (int j = 0; j <= cells; ++j) {
      // Gamma must stay positive and non-increasing
      const double hi_log = j > 0 ? std::log(g[j - 1]) : std::log(g[1]) + kWindow;
      const double lo_log = j < cells ? std::log(g[j + 1]) : std::log(g[cells - 1]) - kWindow;
      if (hi_log - lo_log <= 0.0) continue;
      auto [s, v] = boost::math::tools::brent_find_minima([&](double z) { return local(j, std::exp(z)); }, lo_log,
                                                          hi_log, 52);
      if (v <= local(j, g[j])) g[j] = std::exp(s);
      if (j == 0) top_at_boundary = hi_log - s < 1e-6;
    }
    ++sweeps;
    const double now = total();
    if (prev - now <= 1e-14 * std::fabs(now)) break;
    prev = now;
    if (sweeps >= max_sweeps) {
      out.budget_exhausted = true;
      break;
    }
  }
  std::vector<double> values(cells);
  for (int j = 0; j < cells; ++j) values[j] = std::max(0.0, (g[j] - g[j + 1]) / (t[j + 1] - t[j]));
  out.gamma = StepFunction::from_cells(t, std::move(values), false);
  out.value = spherical_functional(m, out.gamma).value;
  out.evaluations = sweeps;
  out.boundary_mass = top_at_boundary;
  return out;
}

}  // namespace

MinimizeResult minimize_parisi(const Mixture& m, SpinDomain domain, OrderSpace space, const MinimizeOptions& opts) {
  if (opts.atoms < 0) throw DomainError("atoms must be >= 0");
  if (opts.budget < 1) throw DomainError("budget must be positive");
  if (domain == SpinDomain::Sphere) {
    if (space == OrderSpace::L) return minimize_sphere_L(m, opts);
    StepParam param{opts.atoms, true, opts.value_cap};
    return minimize_by_nelder_mead([&](const StepFunction& g) { return spherical_functional(m, g).value; }, param,
                                   opts.budget);
  }
  if (opts.atoms > 8) throw DomainError("hypercube minimization supports at most 8 atoms");
  const PdeGrid grid = opts.grid ? *opts.grid : PdeGrid::coarse(m);
  StepParam param{opts.atoms, space == OrderSpace::U, opts.value_cap};
  return minimize_by_nelder_mead(
      [&](const StepFunction& g) {
        const auto sol = solve_parisi_pde(m, g, grid, Terminal::abs());
        return parisi_value(m, g, sol);
      },
      param, opts.budget);
}

}  // namespace pspin
