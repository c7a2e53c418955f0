#pragma once

#include <span>
#include <vector>

#include "svgd/core.hpp"
#include "svgd/parallel.hpp"

namespace svgd {

// RBF kernel k(x, y) = exp(-||x - y||^2 / h). The bandwidth h divides the
// squared distance directly; there is no factor of 2 or square on h.

double rbf_eval(std::span<const double> x, std::span<const double> y, double h);

/// Gradient in the first argument: -(2/h)(x - y) k(x, y). Written into `out`.
void rbf_grad_first(std::span<const double> x, std::span<const double> y, double h, std::span<double> out);
std::vector<double> rbf_grad_first(std::span<const double> x, std::span<const double> y, double h);

/// trace(grad_x grad_y k(x, y)) = k(x, y) [2d/h - (4/h^2) ||x - y||^2].
double rbf_mixed_trace(std::span<const double> x, std::span<const double> y, double h);

/// Value semantics wrapper over a fixed bandwidth.
class RbfKernel {
 public:
  explicit RbfKernel(double bandwidth);
  double bandwidth() const noexcept { return h_; }
  double operator()(std::span<const double> x, std::span<const double> y) const { return rbf_eval(x, y, h_); }

 private:
  double h_;
};

/// Pairwise Euclidean distances ||x_i - x_j|| for i < j, in row-major
/// upper-triangle order (0,1), (0,2), ..., (n-2,n-1).
std::vector<double> pairwise_distances(const ParticleEnsemble& ensemble, Execution exec = Execution::parallel);

/// Median of a list; for even length the mean of the two middle order statistics.
double median_of(std::vector<double> values);

/// h = med^2 / max(log n, 1e-8) where med is the median pairwise distance.
/// Falls back to h = 1 when n = 1 or med = 0.
double median_bandwidth(const ParticleEnsemble& ensemble, Execution exec = Execution::parallel);

/// h = mean(||x_i - x_j||^2) / log(n + 1); falls back to 1 when n = 1 or the mean is 0.
double mean_distance_bandwidth(const ParticleEnsemble& ensemble, Execution exec = Execution::parallel);

struct BandwidthPolicy {
  enum class Kind {
    fixed,              // always `fixed_h`
    median,             // median heuristic, computed once on the initial ensemble
    median_recomputed,  // median heuristic on every iteration (default)
    mean_distance,      // mean squared distance / log(n + 1), every iteration
  };
  Kind kind = Kind::median_recomputed;
  double fixed_h = 1.0;

  static BandwidthPolicy fixed(double h);
  static BandwidthPolicy median_once() { return {Kind::median, 1.0}; }
  static BandwidthPolicy median_each_iteration() { return {Kind::median_recomputed, 1.0}; }
  static BandwidthPolicy mean_distance() { return {Kind::mean_distance, 1.0}; }
};

/// Evaluates the policy on `ensemble`. For `median` the caller caches the first result.
double evaluate_bandwidth(const BandwidthPolicy& policy, const ParticleEnsemble& ensemble,
                          Execution exec = Execution::parallel);

/// Applies a BandwidthPolicy across iterations, caching the first value for
/// the compute-once median policy.
class AdaptiveBandwidth {
 public:
  explicit AdaptiveBandwidth(BandwidthPolicy policy) : policy_(policy) {}
  double resolve(const ParticleEnsemble& ensemble, Execution exec = Execution::parallel);
  const BandwidthPolicy& policy() const noexcept { return policy_; }

 private:
  BandwidthPolicy policy_;
  double cached_ = 0.0;
};

}  // namespace svgd
