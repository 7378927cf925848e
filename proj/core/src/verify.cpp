#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "pspin/complexity.hpp"
#include "pspin/errors.hpp"
#include "pspin/harness.hpp"
#include "pspin/parisi.hpp"
#include "pspin/rng.hpp"
#include "pspin/tap.hpp"

namespace pspin {

namespace {

struct Suite {
  std::vector<InvariantResult> results;

  void check(const std::string& name, const std::function<std::string()>& body) {
    InvariantResult r{name, false, ""};
    try {
      r.detail = body();
      r.ok = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("threw: ") + e.what();
    }
    results.push_back(std::move(r));
  }
};

std::string expect_close(const char* what, double got, double want, double tol) {
  if (std::abs(got - want) <= tol) return {};
  std::ostringstream os;
  os.precision(12);
  os << what << ": got " << got << ", expected " << want << " (tol " << tol << ")";
  return os.str();
}

Vector random_point(int n, double radius, std::uint64_t key) {
  RandomStream rng(key);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  return x * (radius / x.norm());
}

}  // namespace

std::vector<InvariantResult> run_invariant_suite() {
  Suite s;
  const Mixture mixed = Mixture::parse("2:1,3:0.5,4:0.3");

  // mixture
  s.check("mixture.derivatives_match_differences", [&]() -> std::string {
    const double h = 1e-5;
    for (double x : {-0.7, 0.1, 0.5, 0.9}) {
      for (int order = 0; order < 3; ++order) {
        const double fd = (mixed.xi(x + h, order) - mixed.xi(x - h, order)) / (2 * h);
        if (auto e = expect_close("xi derivative", mixed.xi(x, order + 1), fd, 1e-6); !e.empty()) return e;
      }
    }
    return {};
  });
  s.check("mixture.shifted_vanishes_to_first_order", [&]() -> std::string {
    for (double q : {0.0, 0.3, 0.99}) {
      const ShiftedMixture sm(mixed, q);
      if (auto e = expect_close("tilde(0)", sm.tilde(0.0), 0.0, 1e-15); !e.empty()) return e;
      if (auto e = expect_close("tilde'(0)", sm.tilde_derivative(0.0), 0.0, 1e-15); !e.empty()) return e;
      if (auto e = expect_close("xi_q(1)", sm.scaled(1.0),
                                mixed(1.0) - mixed(q) - mixed.xi(q, 1) * (1.0 - q), 1e-12);
          !e.empty())
        return e;
    }
    return {};
  });

  // hamiltonian
  const int n = 12;
  const Hamiltonian h = Hamiltonian::sample(mixed, n, 7, SpinDomain::Sphere);
  const Vector x = random_point(n, std::sqrt(double(n)), 11);
  s.check("hamiltonian.zero_at_origin", [&]() -> std::string {
    return expect_close("H(0)", h.energy(Vector::Zero(n)), 0.0, 0.0);
  });
  s.check("hamiltonian.reproducible_from_seed", [&]() -> std::string {
    const Hamiltonian again = Hamiltonian::sample(mixed, n, 7, SpinDomain::Sphere);
    if (!(again == h)) return "resampled instance differs";
    return {};
  });
  s.check("hamiltonian.euler_identity", [&]() -> std::string {
    double want = 0.0;
    for (int k : mixed.active_degrees()) want += k * h.degree_energy(k, x);
    return expect_close("<x, grad H>", x.dot(h.gradient(x)), want, 1e-9 * (1 + std::abs(want)));
  });
  s.check("hamiltonian.gradient_matches_differences", [&]() -> std::string {
    const Vector g = h.gradient(x);
    const double eps = 1e-6;
    for (int i = 0; i < n; ++i) {
      Vector a = x, b = x;
      a[i] += eps;
      b[i] -= eps;
      if (auto e = expect_close("dH/dx_i", g[i], (h.energy(a) - h.energy(b)) / (2 * eps), 1e-5); !e.empty())
        return e;
    }
    return {};
  });
  s.check("hamiltonian.hessian_matches_gradient_differences", [&]() -> std::string {
    const Matrix hs = h.hessian(x);
    const double eps = 1e-6;
    for (int j = 0; j < n; ++j) {
      Vector a = x, b = x;
      a[j] += eps;
      b[j] -= eps;
      const Vector col = (h.gradient(a) - h.gradient(b)) / (2 * eps);
      if ((hs.col(j) - col).cwiseAbs().maxCoeff() > 1e-5) return "Hessian column " + std::to_string(j) + " mismatch";
    }
    if ((hs - hs.transpose()).cwiseAbs().maxCoeff() > 1e-12) return "Hessian not symmetric";
    return {};
  });
  s.check("hamiltonian.specialized_paths_match_generic", [&]() -> std::string {
    if (auto e = expect_close("energy", h.energy(x), detail::energy_generic(h, x), 1e-10); !e.empty()) return e;
    if ((h.gradient(x) - detail::gradient_generic(h, x)).cwiseAbs().maxCoeff() > 1e-10) return "gradient differs";
    if ((h.hessian(x) - detail::hessian_generic(h, x)).cwiseAbs().maxCoeff() > 1e-10) return "hessian differs";
    return {};
  });
  s.check("hamiltonian.projected_hessian_annihilates_m", [&]() -> std::string {
    const Vector v = h.projected_hessian(x) * x;
    if (v.norm() > 1e-9 * x.norm()) return "P Hess P m != 0";
    return {};
  });
  s.check("hamiltonian.round_lands_in_domain", [&]() -> std::string {
    round(Magnetization{x * 0.5, SpinDomain::Sphere}).validate();
    round(Magnetization{x.cwiseMin(1.0).cwiseMax(-1.0), SpinDomain::Hypercube}).validate();
    return {};
  });

  // parisi
  s.check("parisi.pde_convex_and_lipschitz", [&]() -> std::string {
    const Mixture sk = Mixture::pure(2);
    const auto sol = solve_parisi_pde(sk, StepFunction::constant(0.5), PdeGrid::coarse(sk), Terminal::abs());
    if (sol.min_second_difference() < -1e-9) return "Phi(t, .) not convex";
    if (sol.max_abs_slope() > 1.0 + 1e-9) return "|d_x Phi| exceeds 1";
    return {};
  });
  s.check("parisi.alg_closed_forms", [&]() -> std::string {
    for (int p = 2; p <= 6; ++p) {
      if (auto e = expect_close("ALG pure p", alg_spherical(Mixture::pure(p)), 2 * std::sqrt((p - 1.0) / p), 1e-9);
          !e.empty())
        return e;
    }
    return {};
  });
  s.check("parisi.spherical_functional_bounds_alg", [&]() -> std::string {
    const Mixture m = Mixture::parse("2:1,3:1");
    const double alg = alg_spherical(m);
    for (double c : {0.0, 0.5, 2.0}) {
      const double v = spherical_functional(m, StepFunction::constant(c)).value;
      if (v < alg - 1e-9) return "functional below ALG for gamma = " + std::to_string(c);
    }
    return {};
  });

  // complexity
  s.check("complexity.golden_values", [&]() -> std::string {
    for (int p = 3; p <= 6; ++p) {
      const ComplexityModel cm(p);
      if (auto e = expect_close("Sigma(0)", cm.sigma(0.0), 0.5 * std::log(p - 1.0), 1e-12); !e.empty()) return e;
      const double e0 = cm.e0();
      if (!(e0 > cm.thr())) return "E0 <= THR";
      if (auto e = expect_close("Sigma(E0)", cm.sigma(e0), 0.0, 1e-10); !e.empty()) return e;
    }
    return {};
  });

  // optimizers
  s.check("optimizers.hessian_ascent_radius", [&]() -> std::string {
    const Hamiltonian h2 = Hamiltonian::sample(Mixture::pure(2), 40, 3, SpinDomain::Sphere);
    const auto rep = hessian_ascent(h2, 0.1, 5);
    const auto& tr = rep.trajectory;
    for (const auto& d : tr.diagnostics) {
      if (auto e = expect_close("|m|^2/N", d.radius_sq_per_n, d.t, 1e-6); !e.empty()) return e;
    }
    rep.final_config.validate();
    return expect_close("energy_per_n", rep.energy_per_n, h2.energy_per_n(rep.final_config.values), 0.0);
  });
  s.check("optimizers.iamp_output_on_sphere", [&]() -> std::string {
    const Hamiltonian h3 = Hamiltonian::sample(Mixture::parse("2:1,3:1"), 40, 3, SpinDomain::Sphere);
    const auto rep = iamp(h3, 0.05, 9);
    rep.final_config.validate();
    return {};
  });

  // tap
  s.check("tap.entropy_and_onsager_endpoints", [&]() -> std::string {
    if (auto e = expect_close("I(0)", entropy_I(0.0), -std::log(2.0), 1e-15); !e.empty()) return e;
    if (auto e = expect_close("I(1)", entropy_I(1.0), 0.0, 0.0); !e.empty()) return e;
    const Vector corner = Vector::Constant(8, -1.0);
    return expect_close("onsager at a corner", onsager_ising(mixed, 1.3, corner), 0.0, 1e-15);
  });
  s.check("tap.band_below_full_free_energy", [&]() -> std::string {
    const Hamiltonian hc = Hamiltonian::sample(Mixture::pure(2), 10, 4, SpinDomain::Hypercube);
    const double full = free_energy_exact(hc, 1.0);
    const Vector m = Vector::Constant(10, 0.3);
    double prev = -std::numeric_limits<double>::infinity();
    for (double d : {0.05, 0.2, 0.5, 2.0}) {
      const double band = band_free_energy_exact(hc, m, d, 1.0);
      if (band < prev - 1e-12) return "band free energy decreased as the band widened";
      if (band > full + 1e-12) return "band free energy above the full one";
      prev = band;
    }
    return {};
  });

  // harness
  s.check("harness.config_hash_stable", [&]() -> std::string {
    const auto a = ExperimentConfig::from_json(R"({"mixture": {"3": 1.0, "2": 0.5}, "n": [30]})");
    const auto b = ExperimentConfig::from_json(R"({"n": 30, "mixture": "2:0.5,3:1"})");
    if (a.hash() != b.hash()) return "equivalent configs hash differently";
    return {};
  });
  s.check("harness.rerun_identical", [&]() -> std::string {
    auto cfg = ExperimentConfig::from_json(R"({"mixture": {"2": 1.0}, "n": [30], "delta": 0.1, "replicates": 2})");
    const auto r1 = run_sweep(cfg);
    const auto r2 = run_sweep(cfg);
    for (std::size_t i = 0; i < r1.size(); ++i) {
      if (!r1[i].record.same_result(r2[i].record)) return "records differ between reruns";
      if (r1[i].config.values != r2[i].config.values) return "configurations differ between reruns";
      const auto back = RunRecord::from_json_line(r1[i].record.to_json_line());
      if (!back.same_result(r1[i].record)) return "record does not survive a JSON round trip";
    }
    return {};
  });

  return s.results;
}

}  // namespace pspin
