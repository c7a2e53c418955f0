#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "svgd/core.hpp"
#include "svgd/target.hpp"

namespace svgd {

/// Scalar test function h used for expectation estimates: x, x^2 or
/// cos(omega x + phase). The polynomial forms act on the first coordinate.
struct TestFunction {
  enum class Kind { identity, square, cosine };
  Kind kind = Kind::identity;
  double omega = 0.0;
  double phase = 0.0;

  static TestFunction identity() { return {Kind::identity, 0.0, 0.0}; }
  static TestFunction square() { return {Kind::square, 0.0, 0.0}; }
  static TestFunction cosine(double omega, double phase) { return {Kind::cosine, omega, phase}; }
  /// Parses "x", "x2" (or "x^2"), "cos" or "cos:omega,phase".
  static TestFunction parse(const std::string& spec);

  double operator()(std::span<const double> x) const;
  /// Short label: "x", "x2" or "cos".
  std::string name() const;
};

/// Mixture of axis-aligned Gaussians, sum_i w_i N(x; mu_i, diag(var_i)).
/// Weights are normalized on construction.
class GaussianMixture final : public TargetDensity {
 public:
  /// `means` and `variances` are K x d.
  GaussianMixture(std::vector<double> weights, Matrix means, Matrix variances);

  /// One-dimensional mixture from per-component scalars.
  static GaussianMixture one_dimensional(std::vector<double> weights, std::vector<double> means,
                                         std::vector<double> variances);
  /// Single isotropic Gaussian N(mean, variance I) in d dimensions.
  static GaussianMixture isotropic(std::size_t d, double mean, double variance);
  /// The 1D toy target (1/3) N(-2, 1) + (2/3) N(2, 1).
  static GaussianMixture toy_bimodal();

  std::size_t dim() const override { return means_.cols(); }
  std::size_t components() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  const Matrix& means() const noexcept { return means_; }
  const Matrix& variances() const noexcept { return variances_; }

  void grad_log_density(std::span<const double> x, std::span<const std::size_t> batch,
                        std::span<double> out) const override;
  using TargetDensity::grad_log_density;

  bool has_log_density() const override { return true; }
  /// Normalized log density (log-sum-exp over components).
  double log_unnorm_density(std::span<const double> x) const override;

  bool has_sampler() const override { return true; }
  void sample(RngStream& rng, std::span<double> out) const override;

 private:
  std::vector<double> weights_;
  Matrix means_;
  Matrix variances_;
  std::vector<double> log_norm_;  // log w_i - 0.5 sum_c log(2 pi var_ic)
};

double gmm_log_density(std::span<const double> x, const GaussianMixture& mixture);
std::vector<double> gmm_grad_log_density(std::span<const double> x, const GaussianMixture& mixture);

/// Exact E_p[h] for a one-dimensional mixture.
double gmm_moments(const GaussianMixture& mixture, const TestFunction& h);

/// Gamma prior on the weight precision, shape/rate parameterization (mean a/b).
struct GammaPrior {
  double shape = 1.0;
  double rate = 0.01;
};

/// Appends a constant-1 column so the bias is absorbed into the weights.
Matrix append_intercept(const Matrix& features);

/// Posterior of Bayesian logistic regression over x = [w, log alpha] with
/// w | alpha ~ N(0, alpha^-1 I) and alpha ~ Gamma(a, b):
///   log p(x | D) = sum_k log sigma(y_k w.x_k) + (D/2) beta - (e^beta / 2) ||w||^2
///                  + a beta - b e^beta + const,           beta = log alpha,
/// where D counts the weights (intercept included) and the a*beta term merges
/// the Gamma density's (a-1) beta with the +beta Jacobian of alpha = e^beta.
class BlrPosterior final : public TargetDensity {
 public:
  /// `design` already carries the intercept column if one is wanted.
  BlrPosterior(Matrix design, std::vector<int> labels, GammaPrior prior = {}, std::size_t batch_size = 0);

  std::size_t dim() const override { return design_.cols() + 1; }
  std::size_t weight_dim() const noexcept { return design_.cols(); }
  std::size_t data_size() const override { return design_.rows(); }
  std::size_t batch_size() const override { return batch_; }
  const GammaPrior& prior() const noexcept { return prior_; }
  const Matrix& design() const noexcept { return design_; }
  std::span<const int> labels() const noexcept { return labels_; }

  /// Gradient with the minibatch estimate (N/|Omega|) sum_{k in Omega} for the
  /// likelihood; empty `batch` uses all N observations.
  void grad_log_density(std::span<const double> x, std::span<const std::size_t> batch,
                        std::span<double> out) const override;
  using TargetDensity::grad_log_density;

  bool has_log_density() const override { return true; }
  double log_unnorm_density(std::span<const double> x) const override;

  /// Draw [w, log alpha] from the prior.
  void sample_prior(RngStream& rng, std::span<double> out) const;

 private:
  Matrix design_;
  std::vector<int> labels_;
  GammaPrior prior_;
  std::size_t batch_;
};

std::vector<double> blr_grad_log_posterior(std::span<const double> state, const BlrPosterior& posterior,
                                           std::span<const std::size_t> batch);

/// Posterior predictive P(y = +1 | x) = (1/n) sum_i sigma(w_i . x) for every
/// row of `design`. Particles are [w, beta]; the beta column is ignored.
std::vector<double> blr_predictive(const ParticleEnsemble& particles, const Matrix& design);

double sigmoid(double t) noexcept;
/// log sigma(t), stable for large |t|.
double log_sigmoid(double t) noexcept;

}  // namespace svgd
