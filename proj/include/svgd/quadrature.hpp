#pragma once

#include <cstddef>
#include <functional>

namespace svgd {

struct QuadratureResult {
  double value = 0.0;
  std::size_t nodes = 0;  // function evaluations in the final rule
  double last_change = 0.0;
};

/// Composite trapezoid rule on [lo, hi], doubling the interval count (and
/// reusing previous nodes) until successive estimates differ by at most
/// tolerance * max(1, |value|). Starts at `min_nodes` intervals. Throws
/// NumericalFailure if `max_nodes` is reached first or a value is non-finite.
///
/// For smooth integrands that decay to ~0 at both ends the trapezoid rule
/// converges geometrically, which is the intended use (Gaussian-weighted
/// expectations over +-10 standard deviations).
QuadratureResult adaptive_trapezoid(const std::function<double(double)>& f, double lo, double hi,
                                    std::size_t min_nodes = 200, double tolerance = 1e-8,
                                    std::size_t max_nodes = std::size_t{1} << 22);

/// E[g(X)] for X ~ N(mean, variance), integrated on mean +- range_sd standard deviations.
QuadratureResult gaussian_expectation(const std::function<double(double)>& g, double mean, double variance,
                                      double range_sd = 10.0, std::size_t min_nodes = 200,
                                      double tolerance = 1e-8);

}  // namespace svgd
