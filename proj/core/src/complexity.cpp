#include "pspin/complexity.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "pspin/errors.hpp"

namespace pspin {

ComplexityModel::ComplexityModel(int p) : p_(p), thr_(0.0) {
  if (p < 3) throw DomainError("complexity formulas need p >= 3");
  thr_ = 2.0 * std::sqrt((p - 1.0) / p);
}

double ComplexityModel::j(double eta) const {
  if (eta <= thr_) return 0.0;
  const double root = std::sqrt(eta * eta - thr_ * thr_);
  return eta / (thr_ * thr_) * root - std::log(eta + root) + std::log(thr_);
}

double ComplexityModel::sigma(double eta) const {
  const double base = 0.5 * std::log(p_ - 1.0);
  if (eta <= 0.0) return base;
  const double quad = base - (p_ - 2.0) / (4.0 * (p_ - 1.0)) * eta * eta;
  if (eta <= thr_) return quad;
  return quad - j(eta);
}

double ComplexityModel::e0(double tol) const {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  double lo = thr_, hi = thr_ + 5.0;
  if (!(sigma(lo) > 0.0) || !(sigma(hi) < 0.0)) {
    throw NumericalError("sigma does not change sign on (THR, THR + 5) for p = " + std::to_string(p_));
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = sigma(mid);
    if (std::fabs(s) < tol && hi - lo < 1e-15 * hi) return mid;
    (s > 0.0 ? lo : hi) = mid;
    if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) break;
  }
  const double mid = 0.5 * (lo + hi);
  if (!(std::fabs(sigma(mid)) < tol)) throw NumericalError("bisection did not reach the requested tolerance");
  return mid;
}

std::vector<ComplexityModel::Point> ComplexityModel::curve(double lo, double hi, int points) const {
  if (points < 2 || !(hi > lo)) throw DomainError("curve needs hi > lo and at least two points");
  std::vector<Point> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double eta = lo + (hi - lo) * i / (points - 1.0);
    out.push_back({eta, sigma(eta)});
  }
  return out;
}

double plateau_value(const Mixture& m) {
  const double d1 = m.xi(1.0, 1);
  const double d2 = m.xi(1.0, 2);
  return 0.5 * std::log(d2 / d1) - (d2 - d1) / (d2 + d1);
}

void write_curve_csv(std::ostream& out, const std::vector<ComplexityModel::Point>& curve) {
  out << "eta,sigma\n";
  out.precision(12);
  for (const auto& pt : curve) out << pt.eta << ',' << pt.sigma << '\n';
}

}  // namespace pspin
