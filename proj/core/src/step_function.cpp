#include "pspin/step_function.hpp"

#include <algorithm>
#include <cmath>

#include "pspin/errors.hpp"

namespace pspin {

StepFunction::StepFunction(std::vector<double> breakpoints, std::vector<double> values, bool monotone,
                           double integral_bound)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), monotone_(monotone) {
  if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
    throw DomainError("step function needs matching nonempty breakpoints and values");
  }
  if (breakpoints_[0] != 0.0) throw DomainError("step function must start at t = 0");
  for (std::size_t j = 1; j < breakpoints_.size(); ++j) {
    if (!(breakpoints_[j] > breakpoints_[j - 1]) || !(breakpoints_[j] < 1.0)) {
      throw DomainError("step function breakpoints must increase strictly inside [0,1)");
    }
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("step function values must be finite and >= 0");
  }
  if (monotone_ && !is_nondecreasing()) throw DomainError("monotone step function has decreasing values");
  if (total_integral() > integral_bound) throw DomainError("step function integral exceeds the configured bound");
}

StepFunction StepFunction::constant(double value, bool monotone) { return StepFunction({0.0}, {value}, monotone); }

StepFunction StepFunction::from_cells(const std::vector<double>& edges, std::vector<double> values, bool monotone) {
  if (edges.size() != values.size() + 1) throw DomainError("cell edges must have one more entry than values");
  return StepFunction(std::vector<double>(edges.begin(), edges.end() - 1), std::move(values), monotone);
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  if (it == breakpoints_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double StepFunction::integral(double a, double b) const {
  double total = 0.0;
  for (std::size_t j = 0; j < values_.size(); ++j) {
    const double lo = std::max(a, piece_start(j));
    const double hi = std::min(b, piece_end(j));
    if (hi > lo) total += values_[j] * (hi - lo);
  }
  return total;
}

double StepFunction::max_value() const { return *std::max_element(values_.begin(), values_.end()); }

bool StepFunction::is_nondecreasing() const { return std::is_sorted(values_.begin(), values_.end()); }

double norm_weighted_l1(const Mixture& m, const StepFunction& g1, const StepFunction& g2) {
  std::vector<double> cuts = g1.breakpoints();
  cuts.insert(cuts.end(), g2.breakpoints().begin(), g2.breakpoints().end());
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double mid = 0.5 * (cuts[j] + cuts[j + 1]);
    const double diff = std::fabs(g1(mid) - g2(mid));
    // xi'' >= 0 on [0,1], so the weight integrates to the xi' increment
    total += diff * (m.xi(cuts[j + 1], 1) - m.xi(cuts[j], 1));
  }
  return total;
}

double correction_integral(const Mixture& m, const StepFunction& gamma, double a, double b) {
  auto anti = [&](double t) { return t * m.xi(t, 1) - m.xi(t, 0); };
  double total = 0.0;
  for (std::size_t j = 0; j < gamma.pieces(); ++j) {
    const double lo = std::max(a, gamma.piece_start(j));
    const double hi = std::min(b, gamma.piece_end(j));
    if (hi > lo) total += gamma.value(j) * (anti(hi) - anti(lo));
  }
  return total;
}

}  // namespace pspin
