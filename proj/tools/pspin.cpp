// pspin: command line front end for the p-spin workbench.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pspin/complexity.hpp"
#include "pspin/errors.hpp"
#include "pspin/harness.hpp"
#include "pspin/parisi.hpp"
#include "pspin/tap.hpp"

using nlohmann::json;
using namespace pspin;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kFailure = 2;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DomainError("not a number: '" + item + "'");
    }
  }
  return out;
}

// Output sink: a file when a path is given, stdout otherwise.
struct Sink {
  std::unique_ptr<std::ofstream> file;
  std::ostream* out = &std::cout;

  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file = std::make_unique<std::ofstream>(path, std::ios::app);
    if (!*file) throw DomainError("cannot open output '" + path + "'");
    out = file.get();
  }
  std::ostream& operator*() { return *out; }
};

// Experiment flags shared by optimize / sweep / overlap-*; anything given on
// the command line overrides the config file.
struct ExperimentFlags {
  std::string config_path;
  std::string mixture, domain, alg, seed_mode, out, rho_grid;
  std::vector<int> n;
  std::vector<std::string> params;
  double delta = 0, std_bound = 0, bin = 0;
  std::uint64_t seed = 0, alg_seed = 0;
  int reps = 0, threads = 0;
  std::size_t memory_cap = 0;

  void attach(CLI::App* app, bool needs_config) {
    auto* c = app->add_option("--config", config_path, "experiment JSON file");
    if (needs_config) c->required();
    app->add_option("--mixture", mixture, "degree:coefficient list, e.g. 2:1,3:0.5");
    app->add_option("--domain", domain, "sphere | hypercube");
    app->add_option("--n", n, "system sizes")->delimiter(',');
    app->add_option("--delta", delta, "step size");
    app->add_option("--alg", alg, "hessian-ascent | iamp | gradient-ascent | simulated-annealing");
    app->add_option("--param", params, "algorithm parameter key=value (repeatable)");
    app->add_option("--seed", seed, "instance seed base");
    app->add_option("--alg-seed", alg_seed, "algorithm seed base");
    app->add_option("--reps", reps, "replicates");
    app->add_option("--seed-mode", seed_mode, "iid | same-instance");
    app->add_option("--out", out, "output path (appends); stdout when omitted");
    app->add_option("--threads", threads, "worker threads");
    app->add_option("--memory-cap", memory_cap, "tensor storage cap in bytes");
    app->add_option("--rho-grid", rho_grid, "comma separated correlations");
    app->add_option("--std-bound", std_bound, "largest accepted overlap standard deviation");
    app->add_option("--bin", bin, "census bin width");
  }

  ExperimentConfig build(const CLI::App& app) const {
    ExperimentConfig c;
    if (!config_path.empty()) {
      c = ExperimentConfig::from_file(config_path);
    } else if (mixture.empty()) {
      throw DomainError("either --config or --mixture is required");
    }
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--mixture")) c.mixture = Mixture::parse(mixture).coefficients();
    if (given("--domain")) c.domain = parse_domain(domain);
    if (given("--n")) c.n_values = n;
    if (given("--delta")) c.delta = delta;
    if (given("--alg")) {
      if (c.algorithm.id != alg) c.algorithm.params.clear();
      c.algorithm.id = alg;
    }
    for (const auto& kv : params) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw DomainError("--param expects key=value, got '" + kv + "'");
      const auto v = parse_list(kv.substr(eq + 1));
      if (v.size() != 1) throw DomainError("--param value must be a single number: '" + kv + "'");
      c.algorithm.params[kv.substr(0, eq)] = v[0];
    }
    if (given("--seed")) c.instance_seed = seed;
    if (given("--alg-seed")) c.algorithm_seed = alg_seed;
    if (given("--reps")) c.replicates = reps;
    if (given("--seed-mode")) c.seed_mode = parse_seed_mode(seed_mode);
    if (given("--out")) c.output = out;
    if (given("--threads")) c.threads = threads;
    if (given("--memory-cap")) c.memory_cap = memory_cap;
    if (given("--rho-grid")) c.rho_grid = parse_list(rho_grid);
    if (given("--std-bound")) c.overlap_std_bound = std_bound;
    if (given("--bin")) c.census_bin = bin;
    c.validate();
    return c;
  }
};

int run_experiment(const ExperimentConfig& cfg) {
  Sink sink(cfg.output);
  RecordAppender append(*sink);
  const auto results = run_sweep(cfg, [&](const RunOutput& r) { append(r); });
  double sum = 0.0;
  for (const auto& r : results) sum += r.record.energy_per_n;
  json summary = {{"config_hash", cfg.hash()},
                  {"records", append.count()},
                  {"mean_energy_per_n", number(sum / static_cast<double>(results.size()))}};
  if (!results.empty()) {
    summary["target_alg"] = number(results.front().record.target_alg);
    summary["target_opt"] = number(results.front().record.target_opt);
  }
  std::cerr << json{{"summary", summary}}.dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-spin glass workbench: sampling, optimization, Parisi and TAP functionals"};
  app.require_subcommand(1);

  // sample
  auto* sample = app.add_subcommand("sample", "sample a Hamiltonian and report a summary");
  std::string s_mix, s_domain = "sphere", s_out;
  int s_n = 0;
  std::uint64_t s_seed = 0;
  double s_rho = -1.0;
  sample->add_option("--mixture", s_mix, "degree:coefficient list")->required();
  sample->add_option("--n", s_n, "system size")->required();
  sample->add_option("--seed", s_seed, "instance seed");
  sample->add_option("--domain", s_domain, "sphere | hypercube");
  sample->add_option("--rho", s_rho, "also sample a copy with this correlation");
  sample->add_option("--out", s_out, "write the instance in binary form");

  // optimize / sweep
  auto* optimize = app.add_subcommand("optimize", "run an optimizer over replicates; JSON lines out");
  ExperimentFlags opt_flags;
  opt_flags.attach(optimize, false);
  auto* sweep = app.add_subcommand("sweep", "run the experiment described by a config file");
  ExperimentFlags sweep_flags;
  sweep_flags.attach(sweep, true);

  // parisi
  auto* parisi = app.add_subcommand("parisi", "minimize the Parisi functional or evaluate a given order parameter");
  std::string p_mix, p_domain = "sphere", p_space = "U", p_bps, p_vals, p_csv;
  int p_atoms = 0, p_budget = 0;
  parisi->add_option("--mixture", p_mix, "degree:coefficient list")->required();
  parisi->add_option("--domain", p_domain, "sphere | hypercube");
  parisi->add_option("--space", p_space, "U | L");
  parisi->add_option("--atoms", p_atoms, "breakpoints of the step function");
  parisi->add_option("--budget", p_budget, "objective evaluations");
  parisi->add_option("--breakpoints", p_bps, "evaluate this step function: breakpoints");
  parisi->add_option("--values", p_vals, "evaluate this step function: values");
  parisi->add_option("--pde-csv", p_csv, "hypercube: write the PDE grid of the result as CSV");

  // complexity
  auto* complexity = app.add_subcommand("complexity", "annealed complexity of the pure spherical model");
  int c_p = 3, c_points = 201;
  bool c_curve = false;
  double c_lo = 0.0, c_hi = std::numeric_limits<double>::quiet_NaN();
  complexity->add_option("--p", c_p, "degree, >= 3");
  complexity->add_flag("--emit-curve", c_curve, "print eta,sigma as CSV");
  complexity->add_option("--lo", c_lo, "curve start");
  complexity->add_option("--hi", c_hi, "curve end (default E0 + 0.25)");
  complexity->add_option("--points", c_points, "curve samples");

  // tap
  auto* tap = app.add_subcommand("tap", "TAP functionals and the finite-N gap check");
  std::string t_mix, t_domain = "sphere";
  double t_beta = 1.0, t_q = 0.0;
  int t_n = 16, t_count = 1;
  std::uint64_t t_seed = 0;
  tap->add_option("--mixture", t_mix, "degree:coefficient list")->required();
  tap->add_option("--domain", t_domain, "sphere | hypercube");
  tap->add_option("--beta", t_beta, "inverse temperature");
  tap->add_option("--q", t_q, "self overlap |m|^2/N");
  tap->add_option("--n", t_n, "hypercube: size for exact enumeration");
  tap->add_option("--seed", t_seed, "hypercube: instance seed; magnetizations use seed + 1 + i");
  tap->add_option("--count", t_count, "hypercube: number of random magnetizations");

  auto* verify = app.add_subcommand("verify", "run the invariant suite");

  auto* census = app.add_subcommand("overlap-census", "histogram of pairwise overlaps of optimizer outputs (CSV)");
  ExperimentFlags census_flags;
  census_flags.attach(census, false);

  auto* conc = app.add_subcommand("overlap-concentration", "output overlap on correlated instances vs rho (CSV)");
  ExperimentFlags conc_flags;
  conc_flags.attach(conc, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code == 0) return kOk;
    std::cerr << '\n' << app.help();
    return kInvalid;
  }

  try {
    std::cout << std::setprecision(10);

    if (*sample) {
      const Mixture m = Mixture::parse(s_mix);
      const SpinDomain d = parse_domain(s_domain);
      json j;
      auto describe = [&](const Hamiltonian& h) {
        return json{{"n", h.n()},
                    {"seed", h.seed()},
                    {"domain", to_string(h.domain())},
                    {"mixture", h.mixture().to_string()},
                    {"storage_bytes", h.storage_bytes()},
                    {"energy_per_n_at_ones", h.energy_per_n(Vector::Ones(h.n()))}};
      };
      if (s_rho >= 0.0) {
        const auto [a, b] = Hamiltonian::sample_correlated(m, s_n, s_seed, d, s_rho);
        j = {{"first", describe(a)}, {"second", describe(b)}, {"rho", s_rho}};
        if (!s_out.empty()) {
          std::ofstream f(s_out, std::ios::binary);
          a.write_binary(f);
          b.write_binary(f);
        }
      } else {
        const auto h = Hamiltonian::sample(m, s_n, s_seed, d);
        j = describe(h);
        if (!s_out.empty()) {
          std::ofstream f(s_out, std::ios::binary);
          h.write_binary(f);
        }
      }
      std::cout << j.dump() << '\n';
      return kOk;
    }

    if (*optimize) return run_experiment(opt_flags.build(*optimize));
    if (*sweep) return run_experiment(sweep_flags.build(*sweep));

    if (*parisi) {
      const Mixture m = Mixture::parse(p_mix);
      const SpinDomain d = parse_domain(p_domain);
      OrderSpace space;
      if (p_space == "U" || p_space == "u")
        space = OrderSpace::U;
      else if (p_space == "L" || p_space == "l")
        space = OrderSpace::L;
      else
        throw DomainError("--space must be U or L");
      json j = {{"mixture", m.to_string()}, {"domain", to_string(d)}, {"space", p_space}};
      if (d == SpinDomain::Sphere) j["alg"] = alg_spherical(m);

      std::optional<StepFunction> gamma;
      if (!p_bps.empty() || !p_vals.empty()) {
        gamma = StepFunction(parse_list(p_bps), parse_list(p_vals), space == OrderSpace::U);
        if (d == SpinDomain::Sphere) {
          j["value"] = spherical_functional(m, *gamma).value;
        } else {
          const auto sol = solve_parisi_pde(m, *gamma, PdeGrid::defaults(m), Terminal::abs());
          j["value"] = parisi_value(m, *gamma, sol);
        }
      } else {
        MinimizeOptions o;
        if (p_atoms > 0) o.atoms = p_atoms;
        if (p_budget > 0) o.budget = p_budget;
        const auto r = minimize_parisi(m, d, space, o);
        gamma = r.gamma;
        j["value"] = r.value;
        j["evaluations"] = r.evaluations;
        j["budget_exhausted"] = r.budget_exhausted;
        j["boundary_mass"] = r.boundary_mass;
      }
      j["gamma"] = {{"breakpoints", gamma->breakpoints()}, {"values", gamma->values()}};
      if (!p_csv.empty()) {
        if (d != SpinDomain::Hypercube) throw DomainError("--pde-csv applies to the hypercube only");
        const auto sol = solve_parisi_pde(m, *gamma, PdeGrid::defaults(m), Terminal::abs());
        std::ofstream f(p_csv);
        sol.write_csv(f, 20, 20);
      }
      std::cout << j.dump() << '\n';
      if (d == SpinDomain::Sphere) std::cout << "ALG " << alg_spherical(m) << '\n';
      return kOk;
    }

    if (*complexity) {
      const ComplexityModel cm(c_p);
      const double e0 = cm.e0();
      if (c_curve) {
        const double hi = std::isnan(c_hi) ? e0 + 0.25 : c_hi;
        write_curve_csv(std::cout, cm.curve(c_lo, hi, c_points));
      } else {
        std::cout << json{{"p", c_p}, {"thr", cm.thr()}, {"e0", e0}, {"sigma_at_0", cm.sigma(0.0)}}.dump() << '\n';
      }
      return kOk;
    }

    if (*tap) {
      const Mixture m = Mixture::parse(t_mix);
      const SpinDomain d = parse_domain(t_domain);
      if (d == SpinDomain::Sphere) {
        TapQuery::sphere(t_beta, t_q).validate();
        const double f = onsager_f(m, t_beta, t_q);
        std::cout << json{{"beta", t_beta}, {"q", t_q}, {"onsager", f}, {"tap", tap_spherical(t_q, f)}}.dump()
                  << '\n';
        return kOk;
      }
      if (t_count < 1) throw DomainError("--count must be >= 1");
      const auto h = Hamiltonian::sample(m, t_n, t_seed, SpinDomain::Hypercube);
      const double full = free_energy_exact(h, t_beta);
      std::cout << "index,energy_per_n,onsager,gap\n";
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i < t_count; ++i) {
        const Vector mv = random_magnetization(t_n, t_q, t_seed + 1 + static_cast<std::uint64_t>(i));
        TapQuery::hypercube(t_beta, mv).validate();
        const double e = h.energy_per_n(mv);
        const double ons = onsager_ising(m, t_beta, mv);
        const double gap = full - (t_beta * e + ons);
        worst = std::min(worst, gap);
        std::cout << i << ',' << e << ',' << ons << ',' << gap << '\n';
      }
      std::cerr << json{{"free_energy", full}, {"min_gap", worst}}.dump() << '\n';
      return kOk;
    }

    if (*verify) {
      int failed = 0;
      for (const auto& r : run_invariant_suite()) {
        std::cout << (r.ok ? "ok    " : "FAIL  ") << r.name;
        if (!r.ok) {
          std::cout << ": " << r.detail;
          ++failed;
        }
        std::cout << '\n';
      }
      return failed == 0 ? kOk : kFailure;
    }

    if (*census) {
      const auto cfg = census_flags.build(*census);
      const auto hist = overlap_census(cfg);
      Sink sink(cfg.output);
      hist.write_csv(*sink);
      return kOk;
    }

    if (*conc) {
      const auto cfg = conc_flags.build(*conc);
      const auto table = overlap_concentration(cfg);
      Sink sink(cfg.output);
      table.write_csv(*sink);
      if (!table.monotone) std::cerr << "mean overlap is not monotone in rho within one standard error\n";
      if (!table.std_within_bound) std::cerr << "overlap standard deviation exceeds " << cfg.overlap_std_bound << '\n';
      return table.monotone && table.std_within_bound ? kOk : kFailure;
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return kFailure;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
