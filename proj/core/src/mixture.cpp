#include "pspin/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pspin/errors.hpp"

namespace pspin {

namespace {

// k! / (k - order)!
double falling_factorial(int k, int order) {
  double f = 1.0;
  for (int j = 0; j < order; ++j) f *= static_cast<double>(k - j);
  return f;
}

double binomial(int n, int k) {
  double b = 1.0;
  for (int j = 1; j <= k; ++j) b = b * static_cast<double>(n - k + j) / static_cast<double>(j);
  return b;
}

}  // namespace

Mixture::Mixture(std::map<int, double> coeffs, int degree_limit) {
  if (degree_limit < 2) throw DomainError("mixture degree limit must be >= 2");
  bool any_positive = false;
  for (const auto& [k, c] : coeffs) {
    if (k < 2) throw DomainError("mixture degree " + std::to_string(k) + " < 2 (no field terms)");
    if (k > degree_limit) {
      throw DomainError("mixture degree " + std::to_string(k) + " exceeds limit " +
                        std::to_string(degree_limit));
    }
    if (!std::isfinite(c) || c < 0.0) {
      throw DomainError("mixture coefficient for degree " + std::to_string(k) +
                        " must be finite and nonnegative");
    }
    if (c > 0.0) {
      coeffs_[k] = c;
      any_positive = true;
    }
  }
  if (!any_positive) throw DomainError("mixture needs at least one positive coefficient");
  max_degree_ = coeffs_.rbegin()->first;
}

Mixture Mixture::parse(const std::string& text, int degree_limit) {
  std::string normalized = text;
  for (char& ch : normalized) {
    if (ch == ',' || ch == ';' || ch == '{' || ch == '}') ch = ' ';
  }
  std::istringstream in(normalized);
  std::map<int, double> coeffs;
  std::string token;
  while (in >> token) {
    auto colon = token.find(':');
    if (colon == std::string::npos) throw DomainError("bad mixture term '" + token + "'");
    try {
      std::size_t used = 0;
      int k = std::stoi(token.substr(0, colon), &used);
      if (used != colon) throw DomainError("bad mixture degree in '" + token + "'");
      std::string rest = token.substr(colon + 1);
      double c = std::stod(rest, &used);
      if (used != rest.size()) throw DomainError("bad mixture coefficient in '" + token + "'");
      if (coeffs.count(k)) throw DomainError("duplicate mixture degree " + std::to_string(k));
      coeffs[k] = c;
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const DomainError*>(&e)) throw;
      throw DomainError("bad mixture term '" + token + "'");
    }
  }
  return Mixture(std::move(coeffs), degree_limit);
}

Mixture Mixture::pure(int p, double c) { return Mixture({{p, c}}, std::max(p, kDefaultDegreeLimit)); }

double Mixture::eval_unchecked(double x, int order) const {
  double total = 0.0;
  for (const auto& [k, c] : coeffs_) {
    if (order > k) continue;
    total += c * c * falling_factorial(k, order) * std::pow(x, k - order);
  }
  return total;
}

double Mixture::xi(double x, int order) const {
  if (!(std::fabs(x) <= 1.0)) throw DomainError("xi evaluated outside [-1,1]");
  if (order < 0 || order > 3) throw DomainError("xi derivative order must be in {0,1,2,3}");
  return eval_unchecked(x, order);
}

double Mixture::coeff(int k) const {
  auto it = coeffs_.find(k);
  return it == coeffs_.end() ? 0.0 : it->second;
}

std::vector<int> Mixture::active_degrees() const {
  std::vector<int> out;
  for (const auto& [k, c] : coeffs_) out.push_back(k);
  return out;
}

bool Mixture::is_pure() const { return coeffs_.size() == 1; }

bool Mixture::is_even() const {
  for (const auto& [k, c] : coeffs_) {
    if (k % 2 != 0) return false;
  }
  return true;
}

std::string Mixture::to_string() const {
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& [k, c] : coeffs_) {
    if (!first) out << ',';
    out << k << ':' << c;
    first = false;
  }
  return out.str();
}

MixtureFlags predicates(const Mixture& m) { return {m.is_pure(), m.is_even()}; }

ShiftedMixture::ShiftedMixture(const Mixture& m, double q) : mixture_(m), q_(q) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("shift q must lie in [0,1)");
}

double ShiftedMixture::tilde(double x) const {
  if (!(std::fabs(x + q_) <= 1.0 + 1e-12)) throw DomainError("shifted mixture argument out of range");
  // c^2 [(x+q)^k - q^k - k q^{k-1} x] = c^2 sum_{j>=2} C(k,j) q^{k-j} x^j
  double total = 0.0;
  for (const auto& [k, c] : mixture_.coefficients()) {
    double s = 0.0;
    for (int j = 2; j <= k; ++j) s += binomial(k, j) * std::pow(q_, k - j) * std::pow(x, j);
    total += c * c * s;
  }
  return total;
}

double ShiftedMixture::tilde_derivative(double x) const {
  if (!(std::fabs(x + q_) <= 1.0 + 1e-12)) throw DomainError("shifted mixture argument out of range");
  double total = 0.0;
  for (const auto& [k, c] : mixture_.coefficients()) {
    double s = 0.0;
    for (int j = 2; j <= k; ++j) s += binomial(k, j) * std::pow(q_, k - j) * j * std::pow(x, j - 1);
    total += c * c * s;
  }
  return total;
}

ShiftedMixture shifted_mixture(const Mixture& m, double q) { return ShiftedMixture(m, q); }

Thresholds thresholds(const Mixture& m) {
  const double x0 = m.xi(1.0, 0);
  const double x1 = m.xi(1.0, 1);
  const double x2 = m.xi(1.0, 2);
  if (!(x0 > 0.0 && x1 > 0.0 && x2 > 0.0)) throw DomainError("thresholds need xi, xi', xi'' > 0 at 1");
  Thresholds t;
  t.thr_prime = 2.0 * x1 * std::sqrt(x2) / ((x1 + x2) * x0);
  t.thr = ((x2 - x1) * x0 + x1 * x1) / (x1 * std::sqrt(x0 * x2));
  return t;
}

}  // namespace pspin
