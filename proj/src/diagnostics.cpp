#include "svgd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace svgd {

double estimate_expectation(const ParticleEnsemble& ensemble, const TestFunction& h) {
  if (h.kind == TestFunction::Kind::cosine && ensemble.d() != 1) {
    throw InvalidArgument("estimate_expectation: cosine test functions need d = 1");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < ensemble.n(); ++i) acc += h(ensemble.particle(i));
  return acc / static_cast<double>(ensemble.n());
}

double mse_over_trials(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw InvalidArgument("mse_over_trials: no trials");
  double acc = 0.0;
  for (double e : estimates) acc += (e - truth) * (e - truth);
  return acc / static_cast<double>(estimates.size());
}

double silverman_bandwidth(const ParticleEnsemble& ensemble) {
  const std::size_t n = ensemble.n();
  if (n < 2) return 1.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += ensemble.particle(i)[0];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = ensemble.particle(i)[0] - mean;
    ss += diff * diff;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) return 1.0;
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kde_1d(const ParticleEnsemble& ensemble, std::span<const double> grid, KdeBandwidth bandwidth) {
  if (ensemble.d() != 1) throw InvalidArgument("kde_1d: ensemble must be one-dimensional");
  const double bw = bandwidth.kind == KdeBandwidth::Kind::fixed ? bandwidth.value : silverman_bandwidth(ensemble);
  if (!(bw > 0.0)) throw InvalidArgument("kde_1d: bandwidth must be positive");
  const double norm = 1.0 / (static_cast<double>(ensemble.n()) * bw * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ensemble.n(); ++i) {
      const double z = (grid[g] - ensemble.particle(i)[0]) / bw;
      acc += std::exp(-0.5 * z * z);
    }
    out[g] = acc * norm;
  }
  return out;
}

ClassificationMetrics classification_metrics(std::span<const double> probabilities, std::span<const int> labels) {
  if (probabilities.size() != labels.size()) throw InvalidArgument("classification_metrics: length mismatch");
  if (labels.empty()) throw InvalidArgument("classification_metrics: no test points");
  double correct = 0.0;
  double ll = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const int y = labels[k];
    if (y != 1 && y != -1) throw InvalidArgument("classification_metrics: labels must be -1 or +1");
    const double p = std::clamp(probabilities[k], kProbabilityClip, 1.0 - kProbabilityClip);
    const int predicted = probabilities[k] >= 0.5 ? 1 : -1;
    if (predicted == y) correct += 1.0;
    ll += std::log(y == 1 ? p : 1.0 - p);
  }
  const double n = static_cast<double>(labels.size());
  return {correct / n, ll / n};
}

}  // namespace svgd
