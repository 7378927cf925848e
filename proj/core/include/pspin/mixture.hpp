#pragma once

#include <map>
#include <string>
#include <vector>

namespace pspin {

/// Mixture function xi(x) = sum_k c_k^2 x^k over degrees k >= 2.
///
/// Coefficients are stored as c_k (the Hamiltonian's sampling weights); the
/// squares enter xi. Immutable after construction.
class Mixture {
 public:
  static constexpr int kDefaultDegreeLimit = 8;

  explicit Mixture(std::map<int, double> coeffs, int degree_limit = kDefaultDegreeLimit);

  /// Parses "2:1.0,3:0.5" (also accepts ';' or whitespace separators).
  static Mixture parse(const std::string& text, int degree_limit = kDefaultDegreeLimit);
  static Mixture pure(int p, double c = 1.0);

  /// d^order/dx^order xi at x, for |x| <= 1 and order in {0,1,2,3}.
  double xi(double x, int order = 0) const;
  double operator()(double x) const { return xi(x, 0); }

  /// Polynomial evaluation with no domain check; used by shifted mixtures
  /// whose arguments are in range by construction.
  double eval_unchecked(double x, int order) const;

  double coeff(int k) const;
  const std::map<int, double>& coefficients() const { return coeffs_; }
  std::vector<int> active_degrees() const;
  int max_degree() const { return max_degree_; }

  bool is_pure() const;
  bool is_even() const;

  std::string to_string() const;

 private:
  std::map<int, double> coeffs_;
  int max_degree_ = 2;
};

struct MixtureFlags {
  bool is_pure = false;
  bool is_even = false;
};

MixtureFlags predicates(const Mixture& m);

/// tilde_xi_q(x) = xi(x+q) - xi(q) - xi'(q) x and xi_q(x) = tilde_xi_q((1-q) x).
/// Both are evaluated through the binomial expansion around q, so no
/// cancellation occurs as q -> 1.
class ShiftedMixture {
 public:
  ShiftedMixture(const Mixture& m, double q);

  double tilde(double x) const;
  double tilde_derivative(double x) const;
  double scaled(double x) const { return tilde((1.0 - q_) * x); }
  double q() const { return q_; }

 private:
  Mixture mixture_;
  double q_;
};

ShiftedMixture shifted_mixture(const Mixture& m, double q);

struct Thresholds {
  double thr_prime = 0.0;
  double thr = 0.0;
};

/// Model-level energy thresholds THR' and THR built from xi(1), xi'(1), xi''(1).
Thresholds thresholds(const Mixture& m);

}  // namespace pspin
