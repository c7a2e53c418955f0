#pragma once

#include <span>
#include <vector>

#include "svgd/core.hpp"
#include "svgd/targets.hpp"

namespace svgd {

/// (1/n) sum_i h(x_i). The cosine family is only defined for d = 1.
double estimate_expectation(const ParticleEnsemble& ensemble, const TestFunction& h);

/// Mean of (estimate - truth)^2 over trials.
double mse_over_trials(std::span<const double> estimates, double truth);

struct KdeBandwidth {
  enum class Kind { silverman, fixed };
  Kind kind = Kind::silverman;
  double value = 1.0;

  static KdeBandwidth silverman() { return {Kind::silverman, 0.0}; }
  static KdeBandwidth fixed(double h) { return {Kind::fixed, h}; }
};

/// Silverman's rule 1.06 * sd * n^(-1/5), with sample sd (n - 1 denominator).
/// Degenerate ensembles (n = 1 or zero spread) get bandwidth 1.
double silverman_bandwidth(const ParticleEnsemble& ensemble);

/// Gaussian kernel density estimate of a 1D ensemble evaluated on `grid`.
std::vector<double> kde_1d(const ParticleEnsemble& ensemble, std::span<const double> grid,
                           KdeBandwidth bandwidth = KdeBandwidth::silverman());

struct ClassificationMetrics {
  double accuracy = 0.0;
  double avg_log_likelihood = 0.0;
};

inline constexpr double kProbabilityClip = 1e-12;

/// Accuracy at threshold 0.5 (p = 0.5 predicts +1) and mean log P(y_k),
/// with probabilities clipped to [1e-12, 1 - 1e-12].
ClassificationMetrics classification_metrics(std::span<const double> probabilities, std::span<const int> labels);

}  // namespace svgd
