#include "svgd/target.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace svgd {

double TargetDensity::log_unnorm_density(std::span<const double>) const {
  throw UnsupportedCapability("target does not provide a log density");
}

void TargetDensity::sample(RngStream&, std::span<double>) const {
  throw UnsupportedCapability("target does not provide exact sampling");
}

MinibatchSampler::MinibatchSampler(std::size_t data_size, std::size_t batch_size, RngStream rng)
    : order_(data_size), batch_(batch_size), cursor_(data_size), rng_(rng) {
  if (data_size == 0) throw InvalidArgument("minibatch sampler: empty dataset");
  if (batch_size == 0 || batch_size > data_size) {
    throw InvalidArgument("minibatch sampler: batch size must be in [1, N]");
  }
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

void MinibatchSampler::reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  rng_.shuffle(std::span<std::size_t>(order_));
  cursor_ = 0;
}

std::span<const std::size_t> MinibatchSampler::next() {
  if (cursor_ + batch_ > order_.size()) reshuffle();
  std::span<const std::size_t> out(order_.data() + cursor_, batch_);
  cursor_ += batch_;
  drawn_ += batch_;
  return out;
}

double MinibatchSampler::epochs() const noexcept {
  return static_cast<double>(drawn_) / static_cast<double>(order_.size());
}

Matrix evaluate_scores(const TargetDensity& target, const ParticleEnsemble& ensemble, MinibatchSampler* sampler,
                       const ScoreOptions& options) {
  const std::size_t n = ensemble.n();
  const std::size_t d = ensemble.d();
  if (target.dim() != d) {
    throw InvalidArgument("score evaluation: target dimension " + std::to_string(target.dim()) +
                          " != ensemble dimension " + std::to_string(d));
  }

  // Batches are materialized up front: one shared, or one per particle.
  std::vector<std::vector<std::size_t>> batches;
  if (sampler != nullptr && target.stochastic()) {
    const std::size_t count = options.batch_per_particle ? n : 1;
    batches.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      auto b = sampler->next();
      batches.emplace_back(b.begin(), b.end());
    }
  }
  const auto batch_for = [&](std::size_t i) -> std::span<const std::size_t> {
    if (batches.empty()) return {};
    return batches.size() == 1 ? batches[0] : batches[i];
  };

  Matrix scores(n, d);
  const auto eval_row = [&](std::size_t i) { target.grad_log_density(ensemble.particle(i), batch_for(i), scores.row(i)); };
  for_each_index(n, options.exec, eval_row);

  for (std::size_t i = 0; i < n; ++i) {
    for (double v : scores.row(i)) {
      if (!std::isfinite(v)) throw NumericalFailure(std::string("non-finite score at ") + options.row_name + " " + std::to_string(i));
    }
  }
  return scores;
}

}  // namespace svgd
