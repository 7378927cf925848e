#pragma once

#include <cstddef>
#include <vector>

#include "pspin/mixture.hpp"

namespace pspin {

/// Piecewise-constant order parameter on [0,1):
///   gamma(t) = values[j]  for t in [breakpoints[j], breakpoints[j+1]),
/// with breakpoints[0] = 0 and the last piece running up to 1.
///
/// `monotone` marks membership in the non-decreasing class; the constructor
/// rejects decreasing values when it is set.
class StepFunction {
 public:
  StepFunction() : StepFunction({0.0}, {0.0}) {}
  StepFunction(std::vector<double> breakpoints, std::vector<double> values, bool monotone = false,
               double integral_bound = 1e6);

  static StepFunction constant(double value, bool monotone = true);
  /// Cells [edges[j], edges[j+1]) with edges spanning [0,1].
  static StepFunction from_cells(const std::vector<double>& edges, std::vector<double> values,
                                 bool monotone = false);

  double operator()(double t) const;

  /// Integral of gamma over [a,b], 0 <= a <= b <= 1.
  double integral(double a, double b) const;
  double total_integral() const { return integral(0.0, 1.0); }

  std::size_t pieces() const { return values_.size(); }
  double piece_start(std::size_t j) const { return breakpoints_[j]; }
  double piece_end(std::size_t j) const { return j + 1 < breakpoints_.size() ? breakpoints_[j + 1] : 1.0; }
  double value(std::size_t j) const { return values_[j]; }
  double max_value() const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  bool monotone() const { return monotone_; }
  bool is_nondecreasing() const;

  bool operator==(const StepFunction& other) const = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
  bool monotone_ = false;
};

/// Weighted distance int_0^1 xi''(t) |g1(t) - g2(t)| dt, exact on pieces.
double norm_weighted_l1(const Mixture& m, const StepFunction& g1, const StepFunction& g2);

/// int_a^b t xi''(t) gamma(t) dt, exact on pieces (antiderivative t xi' - xi).
double correction_integral(const Mixture& m, const StepFunction& gamma, double a = 0.0, double b = 1.0);

}  // namespace pspin
