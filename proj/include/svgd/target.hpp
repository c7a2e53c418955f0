#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "svgd/core.hpp"
#include "svgd/parallel.hpp"
#include "svgd/rng.hpp"

namespace svgd {

/// A (possibly unnormalized) target density p(x) on R^d, accessed through its
/// score grad log p(x). Implementations never need the normalizing constant.
///
/// Data-driven targets (a posterior over N observations) report `data_size()`
/// and accept a batch of observation indices; the score then uses the
/// rescaled minibatch estimate. An empty batch means "use all the data".
class TargetDensity {
 public:
  virtual ~TargetDensity() = default;

  virtual std::size_t dim() const = 0;

  virtual void grad_log_density(std::span<const double> x, std::span<const std::size_t> batch,
                                std::span<double> out) const = 0;

  std::vector<double> grad_log_density(std::span<const double> x) const {
    std::vector<double> out(dim());
    grad_log_density(x, {}, out);
    return out;
  }

  virtual bool has_log_density() const { return false; }
  /// log p̄(x) up to an additive constant, full data.
  virtual double log_unnorm_density(std::span<const double> x) const;

  virtual bool has_sampler() const { return false; }
  /// One exact draw from p.
  virtual void sample(RngStream& rng, std::span<double> out) const;

  /// Number of observations N; 0 for targets without data.
  virtual std::size_t data_size() const { return 0; }
  /// Minibatch size |Omega|; equal to data_size() (or 0) for full-batch targets.
  virtual std::size_t batch_size() const { return data_size(); }

  bool stochastic() const { return data_size() > 0 && batch_size() < data_size(); }
};

/// Stream id reserved for minibatch index draws, so every driver that shares
/// a seed (SVGD, the MAP reference, SGLD) sees the same batch sequence.
inline constexpr std::uint64_t kMinibatchStream = 0x6d62;

/// Draws minibatches of observation indices without replacement within an
/// epoch; the index order is reshuffled at the start of every epoch and a
/// trailing partial batch is dropped.
class MinibatchSampler {
 public:
  MinibatchSampler(std::size_t data_size, std::size_t batch_size, RngStream rng);

  std::span<const std::size_t> next();

  std::size_t data_size() const noexcept { return order_.size(); }
  std::size_t batch_size() const noexcept { return batch_; }
  /// Total observations handed out so far divided by N.
  double epochs() const noexcept;

 private:
  void reshuffle();

  std::vector<std::size_t> order_;
  std::size_t batch_;
  std::size_t cursor_;
  std::size_t drawn_ = 0;
  RngStream rng_;
};

struct ScoreOptions {
  /// When false every particle shares one minibatch per call; when true each
  /// particle draws its own batch (drawn serially, in particle order).
  bool batch_per_particle = false;
  Execution exec = Execution::parallel;
  /// Noun used for the row index in error messages ("particle", "chain").
  const char* row_name = "particle";
};

/// Scores of every particle as an n x d matrix. Minibatch indices are drawn
/// from `sampler` before evaluation fans out, so the result does not depend
/// on the worker count. `sampler` may be null for full-data evaluation.
/// Throws NumericalFailure naming the first particle with a non-finite score.
Matrix evaluate_scores(const TargetDensity& target, const ParticleEnsemble& ensemble, MinibatchSampler* sampler,
                       const ScoreOptions& options = {});

}  // namespace svgd
