#include "svgd/baselines.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace svgd {

void validate(const SgldConfig& config) {
  if (!(config.a > 0.0) || !std::isfinite(config.a)) throw InvalidArgument("sgld: a must be positive");
  if (config.chains == 0) throw InvalidArgument("sgld: need at least one chain");
  if (!std::isfinite(config.exponent)) throw InvalidArgument("sgld: exponent must be finite");
  if (!std::isfinite(config.gradient_scale)) throw InvalidArgument("sgld: gradient scale must be finite");
}

double sgld_step_size(const SgldConfig& config, std::size_t t) {
  return config.a / std::pow(static_cast<double>(t) + 1.0, config.exponent);
}

std::vector<RngStream> sgld_chain_streams(std::uint64_t seed, std::size_t chains) {
  std::vector<RngStream> out;
  out.reserve(chains);
  for (std::size_t c = 0; c < chains; ++c) out.emplace_back(seed, kSgldStreamBase + c);
  return out;
}

ParticleEnsemble sgld_step(const ParticleEnsemble& chains, const TargetDensity& target, std::size_t t,
                           const SgldConfig& config, std::span<RngStream> noise, MinibatchSampler* sampler,
                           Execution exec) {
  if (noise.size() != chains.n()) throw InvalidArgument("sgld_step: need one noise stream per chain");
  Matrix grads;
  try {
    grads = evaluate_scores(target, chains, sampler, {false, exec, "chain"});
  } catch (const NumericalFailure& e) {
    throw NumericalFailure("sgld iteration " + std::to_string(t) + ": " + e.what());
  }
  const double eps = sgld_step_size(config, t);
  const double drift = 0.5 * eps * config.gradient_scale;
  const double noise_sd = std::sqrt(eps);
  Matrix next = chains.matrix();
  for_each_index(chains.n(), exec, [&](std::size_t c) {
    auto x = next.row(c);
    const auto g = grads.row(c);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += drift * g[k] + noise_sd * noise[c].normal();
  });
  if (!next.all_finite()) throw NumericalFailure("sgld iteration " + std::to_string(t) + ": non-finite chain state");
  return ParticleEnsemble(std::move(next));
}

SgldResult run_sgld(const SgldConfig& config, const TargetDensity& target, const ParticleEnsemble& initial,
                    std::size_t iterations, std::size_t record_every, const SnapshotObserver& observer) {
  validate(config);
  if (initial.n() != config.chains) throw InvalidArgument("run_sgld: initial rows must equal the chain count");
  std::optional<MinibatchSampler> sampler;
  if (target.stochastic()) {
    sampler.emplace(target.data_size(), target.batch_size(), RngStream(config.seed, kMinibatchStream));
  }
  MinibatchSampler* batches = sampler ? &*sampler : nullptr;
  auto noise = sgld_chain_streams(config.seed, config.chains);

  SgldResult result{initial, {}, 0.0};
  const auto record = [&](std::size_t iter, const ParticleEnsemble& e) {
    result.snapshots.push_back({iter, e});
    if (observer) observer(result.snapshots.back(), batches);
  };
  if (record_every > 0) record(0, initial);
  ParticleEnsemble current = initial;
  for (std::size_t t = 0; t < iterations; ++t) {
    current = sgld_step(current, target, t, config, noise, batches);
    const std::size_t done = t + 1;
    if ((record_every > 0 && done % record_every == 0) || done == iterations) record(done, current);
  }
  result.final_chains = std::move(current);
  result.epochs = batches ? batches->epochs() : static_cast<double>(iterations);
  return result;
}

std::vector<std::vector<double>> map_gradient_ascent(std::span<const double> x0, const TargetDensity& target,
                                                     StepSchedule schedule, std::size_t iterations,
                                                     std::uint64_t seed, const MapObserver& observer) {
  const std::size_t d = x0.size();
  if (target.dim() != d) throw InvalidArgument("map_gradient_ascent: dimension mismatch");
  validate(schedule);
  std::optional<MinibatchSampler> sampler;
  if (target.stochastic()) {
    sampler.emplace(target.data_size(), target.batch_size(), RngStream(seed, kMinibatchStream));
  }

  std::vector<std::vector<double>> trajectory;
  trajectory.reserve(iterations + 1);
  trajectory.emplace_back(x0.begin(), x0.end());
  std::vector<double> x(x0.begin(), x0.end());
  if (observer) observer(0, x);
  Matrix grad(1, d);
  for (std::size_t t = 0; t < iterations; ++t) {
    std::span<const std::size_t> batch;
    if (sampler) batch = sampler->next();
    target.grad_log_density(x, batch, grad.row(0));
    if (!grad.all_finite()) throw NumericalFailure("map iteration " + std::to_string(t) + ": non-finite gradient");
    const Matrix step = schedule_step(schedule, grad, t);
    for (std::size_t c = 0; c < d; ++c) x[c] += step(0, c);
    trajectory.push_back(x);
    if (observer) observer(t + 1, x);
  }
  return trajectory;
}

}  // namespace svgd
