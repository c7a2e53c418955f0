#include "svgd/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace svgd {
namespace {

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("rbf kernel: bandwidth must be positive and finite");
}

void check_same_dim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("rbf kernel: dimension mismatch");
}

constexpr double kLogFloor = 1e-8;

}  // namespace

double rbf_eval(std::span<const double> x, std::span<const double> y, double h) {
  check_bandwidth(h);
  check_same_dim(x, y);
  return std::exp(-squared_distance(x, y) / h);
}

void rbf_grad_first(std::span<const double> x, std::span<const double> y, double h, std::span<double> out) {
  check_bandwidth(h);
  check_same_dim(x, y);
  if (out.size() != x.size()) throw InvalidArgument("rbf_grad_first: output size mismatch");
  const double k = std::exp(-squared_distance(x, y) / h);
  const double scale = -2.0 / h;
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = scale * (x[c] - y[c]) * k;
}

std::vector<double> rbf_grad_first(std::span<const double> x, std::span<const double> y, double h) {
  std::vector<double> out(x.size());
  rbf_grad_first(x, y, h, out);
  return out;
}

double rbf_mixed_trace(std::span<const double> x, std::span<const double> y, double h) {
  check_bandwidth(h);
  check_same_dim(x, y);
  const double r2 = squared_distance(x, y);
  const double d = static_cast<double>(x.size());
  return std::exp(-r2 / h) * (2.0 * d / h - 4.0 / (h * h) * r2);
}

RbfKernel::RbfKernel(double bandwidth) : h_(bandwidth) { check_bandwidth(bandwidth); }

namespace {

// Packed upper triangle of squared distances; row i starts at i*n - i*(i+1)/2.
std::vector<double> pairwise_squared(const ParticleEnsemble& ensemble, Execution exec) {
  const std::size_t n = ensemble.n();
  std::vector<double> out(n * (n - 1) / 2);
  const auto& m = ensemble.matrix();
  const std::size_t d = ensemble.d();
  const double* x = m.values().data();
  const auto fill_row = [&](std::size_t i) {
    std::size_t offset = i * n - i * (i + 1) / 2;
    const double* xi = x + i * d;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double* xj = x + j * d;
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = xi[c] - xj[c];
        acc += diff * diff;
      }
      out[offset++] = acc;
    }
  };
  for_each_index(n, exec, fill_row);
  return out;
}

}  // namespace

std::vector<double> pairwise_distances(const ParticleEnsemble& ensemble, Execution exec) {
  auto out = pairwise_squared(ensemble, exec);
  for (double& v : out) v = std::sqrt(v);
  return out;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median_of: empty input");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double median_bandwidth(const ParticleEnsemble& ensemble, Execution exec) {
  const std::size_t n = ensemble.n();
  if (n == 1) return 1.0;
  // sqrt is monotone and correctly rounded, so selecting on squared distances
  // and rooting the one or two order statistics gives the same median.
  auto sq = pairwise_squared(ensemble, exec);
  const std::size_t mid = sq.size() / 2;
  std::nth_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(mid), sq.end());
  double med = std::sqrt(sq[mid]);
  if (sq.size() % 2 == 0) {
    const double lower = std::sqrt(*std::max_element(sq.begin(), sq.begin() + static_cast<std::ptrdiff_t>(mid)));
    med = 0.5 * (lower + med);
  }
  if (med == 0.0) return 1.0;
  return med * med / std::max(std::log(static_cast<double>(n)), kLogFloor);
}

double mean_distance_bandwidth(const ParticleEnsemble& ensemble, Execution exec) {
  const std::size_t n = ensemble.n();
  if (n == 1) return 1.0;
  const auto dists = pairwise_squared(ensemble, exec);
  double acc = 0.0;
  for (double r2 : dists) acc += r2;
  const double mean_sq = acc / static_cast<double>(dists.size());
  if (mean_sq == 0.0) return 1.0;
  return mean_sq / std::log(static_cast<double>(n) + 1.0);
}

BandwidthPolicy BandwidthPolicy::fixed(double h) {
  check_bandwidth(h);
  return {Kind::fixed, h};
}

double evaluate_bandwidth(const BandwidthPolicy& policy, const ParticleEnsemble& ensemble, Execution exec) {
  switch (policy.kind) {
    case BandwidthPolicy::Kind::fixed:
      return policy.fixed_h;
    case BandwidthPolicy::Kind::median:
    case BandwidthPolicy::Kind::median_recomputed:
      return median_bandwidth(ensemble, exec);
    case BandwidthPolicy::Kind::mean_distance:
      return mean_distance_bandwidth(ensemble, exec);
  }
  throw InvalidArgument("unknown bandwidth policy");
}

double AdaptiveBandwidth::resolve(const ParticleEnsemble& ensemble, Execution exec) {
  if (policy_.kind != BandwidthPolicy::Kind::median) return evaluate_bandwidth(policy_, ensemble, exec);
  if (cached_ == 0.0) cached_ = median_bandwidth(ensemble, exec);
  return cached_;
}

}  // namespace svgd
