#include "svgd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "svgd/error.hpp"

namespace svgd {

QuadratureResult adaptive_trapezoid(const std::function<double(double)>& f, double lo, double hi,
                                    std::size_t min_nodes, double tolerance, std::size_t max_nodes) {
  if (!(hi > lo)) throw InvalidArgument("quadrature: empty interval");
  if (min_nodes < 2) min_nodes = 2;
  const auto eval = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw NumericalFailure("quadrature: non-finite integrand at x = " + std::to_string(x));
    return v;
  };

  std::size_t intervals = min_nodes;
  double width = (hi - lo) / static_cast<double>(intervals);
  double sum = 0.5 * (eval(lo) + eval(hi));
  for (std::size_t k = 1; k < intervals; ++k) sum += eval(lo + static_cast<double>(k) * width);
  double estimate = sum * width;

  while (intervals * 2 <= max_nodes) {
    // New nodes are the midpoints of the current intervals.
    double mid_sum = 0.0;
    for (std::size_t k = 0; k < intervals; ++k) mid_sum += eval(lo + (static_cast<double>(k) + 0.5) * width);
    sum += mid_sum;
    intervals *= 2;
    width *= 0.5;
    const double refined = sum * width;
    const double change = std::abs(refined - estimate);
    estimate = refined;
    if (change <= tolerance * std::max(1.0, std::abs(refined))) return {refined, intervals + 1, change};
  }
  throw NumericalFailure("quadrature: no convergence within " + std::to_string(max_nodes) + " intervals");
}

QuadratureResult gaussian_expectation(const std::function<double(double)>& g, double mean, double variance,
                                      double range_sd, std::size_t min_nodes, double tolerance) {
  if (!(variance > 0.0)) throw InvalidArgument("gaussian_expectation: variance must be positive");
  const double sd = std::sqrt(variance);
  const double inv_root = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  // Standardized variable z keeps the grid independent of the scale of q.
  const auto integrand = [&](double z) { return inv_root * std::exp(-0.5 * z * z) * g(mean + sd * z); };
  return adaptive_trapezoid(integrand, -range_sd, range_sd, min_nodes, tolerance);
}

}  // namespace svgd
