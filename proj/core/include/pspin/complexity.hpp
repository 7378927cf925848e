#pragma once

#include <iosfwd>
#include <vector>

#include "pspin/mixture.hpp"

namespace pspin {

/// Annealed complexity of the pure spherical p-spin model, p >= 3.
class ComplexityModel {
 public:
  explicit ComplexityModel(int p);

  int p() const { return p_; }
  double thr() const { return thr_; }

  /// Sigma(eta); continuous and non-increasing, -inf in the limit eta -> inf.
  double sigma(double eta) const;
  /// The J correction used beyond THR; J(THR) = 0.
  double j(double eta) const;
  /// Zero of sigma on (THR, THR + 5) by bisection; |sigma(E0)| < tol.
  double e0(double tol = 1e-12) const;

  struct Point {
    double eta;
    double sigma;
  };
  std::vector<Point> curve(double lo, double hi, int points) const;

 private:
  int p_;
  double thr_;
};

/// (1/2) log(xi''/xi') - (xi'' - xi')/(xi'' + xi') at x = 1.
double plateau_value(const Mixture& m);

void write_curve_csv(std::ostream& out, const std::vector<ComplexityModel::Point>& curve);

}  // namespace pspin
