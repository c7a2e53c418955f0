#include "svgd/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace svgd {

// ---- test functions ---------------------------------------------------------

TestFunction TestFunction::parse(const std::string& spec) {
  if (spec == "x") return identity();
  if (spec == "x2" || spec == "x^2") return square();
  if (spec == "cos") return cosine(1.0, 0.0);
  if (spec.rfind("cos:", 0) == 0) {
    const auto body = spec.substr(4);
    const auto comma = body.find(',');
    if (comma == std::string::npos) throw InvalidArgument("test function: expected cos:omega,phase");
    try {
      return cosine(std::stod(body.substr(0, comma)), std::stod(body.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw InvalidArgument("test function: bad numbers in '" + spec + "'");
    }
  }
  throw InvalidArgument("unsupported test function '" + spec + "'");
}

double TestFunction::operator()(std::span<const double> x) const {
  const double v = x[0];
  switch (kind) {
    case Kind::identity:
      return v;
    case Kind::square:
      return v * v;
    case Kind::cosine:
      return std::cos(omega * v + phase);
  }
  return 0.0;
}

std::string TestFunction::name() const {
  switch (kind) {
    case Kind::identity:
      return "x";
    case Kind::square:
      return "x2";
    case Kind::cosine:
      return "cos";
  }
  return "?";
}

// ---- Gaussian mixture -------------------------------------------------------

GaussianMixture::GaussianMixture(std::vector<double> weights, Matrix means, Matrix variances)
    : weights_(std::move(weights)), means_(std::move(means)), variances_(std::move(variances)) {
  const std::size_t k = weights_.size();
  if (k == 0) throw InvalidArgument("gaussian mixture: no components");
  if (means_.rows() != k || variances_.rows() != k || means_.cols() != variances_.cols() || means_.cols() == 0) {
    throw InvalidArgument("gaussian mixture: shape mismatch between weights, means and variances");
  }
  if (!means_.all_finite()) throw InvalidArgument("gaussian mixture: non-finite mean");
  for (double w : weights_) {
    if (!(w > 0.0) || !std::isfinite(w)) throw InvalidArgument("gaussian mixture: weights must be positive");
  }
  for (double v : variances_.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("gaussian mixture: variances must be positive");
  }
  const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
  for (double& w : weights_) w /= total;

  log_norm_.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    double acc = std::log(weights_[i]);
    for (double v : variances_.row(i)) acc -= 0.5 * std::log(2.0 * std::numbers::pi * v);
    log_norm_[i] = acc;
  }
}

GaussianMixture GaussianMixture::one_dimensional(std::vector<double> weights, std::vector<double> means,
                                                 std::vector<double> variances) {
  const std::size_t k = means.size();
  const std::size_t kv = variances.size();
  return GaussianMixture(std::move(weights), Matrix(k, 1, std::move(means)), Matrix(kv, 1, std::move(variances)));
}

GaussianMixture GaussianMixture::isotropic(std::size_t d, double mean, double variance) {
  return GaussianMixture({1.0}, Matrix(1, d, mean), Matrix(1, d, variance));
}

GaussianMixture GaussianMixture::toy_bimodal() {
  return one_dimensional({1.0 / 3.0, 2.0 / 3.0}, {-2.0, 2.0}, {1.0, 1.0});
}

namespace {

// Per-component log weight + log density at x, written into `terms`.
void component_log_terms(const GaussianMixture& g, std::span<const double> log_norm, std::span<const double> x,
                         std::span<double> terms) {
  for (std::size_t i = 0; i < g.components(); ++i) {
    const auto mu = g.means().row(i);
    const auto var = g.variances().row(i);
    double quad = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) {
      const double diff = x[c] - mu[c];
      quad += diff * diff / var[c];
    }
    terms[i] = log_norm[i] - 0.5 * quad;
  }
}

double log_sum_exp(std::span<const double> terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  return top + std::log(acc);
}

}  // namespace

void GaussianMixture::grad_log_density(std::span<const double> x, std::span<const std::size_t>,
                                       std::span<double> out) const {
  const std::size_t k = components();
  std::vector<double> terms(k);
  component_log_terms(*this, log_norm_, x, terms);
  const double total = log_sum_exp(terms);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    const double resp = std::exp(terms[i] - total);
    const auto mu = means_.row(i);
    const auto var = variances_.row(i);
    for (std::size_t c = 0; c < out.size(); ++c) out[c] -= resp * (x[c] - mu[c]) / var[c];
  }
}

double GaussianMixture::log_unnorm_density(std::span<const double> x) const {
  std::vector<double> terms(components());
  component_log_terms(*this, log_norm_, x, terms);
  return log_sum_exp(terms);
}

void GaussianMixture::sample(RngStream& rng, std::span<double> out) const {
  const double u = rng.uniform();
  std::size_t pick = components() - 1;
  double cumulative = 0.0;
  for (std::size_t i = 0; i < components(); ++i) {
    cumulative += weights_[i];
    if (u < cumulative) {
      pick = i;
      break;
    }
  }
  const auto mu = means_.row(pick);
  const auto var = variances_.row(pick);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = rng.normal(mu[c], std::sqrt(var[c]));
}

double gmm_log_density(std::span<const double> x, const GaussianMixture& mixture) {
  if (x.size() != mixture.dim()) throw InvalidArgument("gmm_log_density: dimension mismatch");
  return mixture.log_unnorm_density(x);
}

std::vector<double> gmm_grad_log_density(std::span<const double> x, const GaussianMixture& mixture) {
  if (x.size() != mixture.dim()) throw InvalidArgument("gmm_grad_log_density: dimension mismatch");
  return mixture.grad_log_density(x);
}

double gmm_moments(const GaussianMixture& mixture, const TestFunction& h) {
  double acc = 0.0;
  for (std::size_t i = 0; i < mixture.components(); ++i) {
    const double w = mixture.weights()[i];
    const double mu = mixture.means()(i, 0);
    const double var = mixture.variances()(i, 0);
    switch (h.kind) {
      case TestFunction::Kind::identity:
        acc += w * mu;
        break;
      case TestFunction::Kind::square:
        acc += w * (mu * mu + var);
        break;
      case TestFunction::Kind::cosine:
        acc += w * std::exp(-0.5 * h.omega * h.omega * var) * std::cos(h.omega * mu + h.phase);
        break;
    }
  }
  return acc;
}

// ---- Bayesian logistic regression -------------------------------------------

double sigmoid(double t) noexcept {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log_sigmoid(double t) noexcept {
  if (t >= 0.0) return -std::log1p(std::exp(-t));
  return t - std::log1p(std::exp(t));
}

Matrix append_intercept(const Matrix& features) {
  Matrix out(features.rows(), features.cols() + 1);
  for (std::size_t k = 0; k < features.rows(); ++k) {
    auto dst = out.row(k);
    std::copy(features.row(k).begin(), features.row(k).end(), dst.begin());
    dst[features.cols()] = 1.0;
  }
  return out;
}

BlrPosterior::BlrPosterior(Matrix design, std::vector<int> labels, GammaPrior prior, std::size_t batch_size)
    : design_(std::move(design)), labels_(std::move(labels)), prior_(prior), batch_(batch_size) {
  if (design_.rows() == 0 || design_.cols() == 0) throw InvalidArgument("blr: empty design matrix");
  if (labels_.size() != design_.rows()) throw InvalidArgument("blr: label count != row count");
  for (int y : labels_) {
    if (y != 1 && y != -1) throw InvalidArgument("blr: labels must be -1 or +1");
  }
  if (!(prior_.shape > 0.0) || !(prior_.rate > 0.0)) throw InvalidArgument("blr: gamma prior needs a, b > 0");
  if (!design_.all_finite()) throw InvalidArgument("blr: non-finite feature");
  if (batch_ == 0) batch_ = design_.rows();
  if (batch_ > design_.rows()) throw InvalidArgument("blr: batch size must be in [1, N]");
}

void BlrPosterior::grad_log_density(std::span<const double> x, std::span<const std::size_t> batch,
                                    std::span<double> out) const {
  const std::size_t dw = weight_dim();
  const std::size_t n_data = design_.rows();
  if (x.size() != dw + 1 || out.size() != dw + 1) throw InvalidArgument("blr: state dimension mismatch");
  const auto w = x.first(dw);
  const double alpha = std::exp(x[dw]);

  std::fill(out.begin(), out.end(), 0.0);
  const auto add_term = [&](std::size_t k) {
    const auto xk = design_.row(k);
    const double y = labels_[k];
    const double coef = y * sigmoid(-y * dot(w, xk));
    for (std::size_t c = 0; c < dw; ++c) out[c] += coef * xk[c];
  };
  double scale = 1.0;
  if (batch.empty()) {
    for (std::size_t k = 0; k < n_data; ++k) add_term(k);
  } else {
    for (std::size_t k : batch) {
      if (k >= n_data) throw InvalidArgument("blr: batch index " + std::to_string(k) + " out of range");
      add_term(k);
    }
    scale = static_cast<double>(n_data) / static_cast<double>(batch.size());
  }
  double w_sq = 0.0;
  for (std::size_t c = 0; c < dw; ++c) {
    out[c] = scale * out[c] - alpha * w[c];
    w_sq += w[c] * w[c];
  }
  out[dw] = 0.5 * static_cast<double>(dw) - 0.5 * alpha * w_sq + prior_.shape - prior_.rate * alpha;
}

double BlrPosterior::log_unnorm_density(std::span<const double> x) const {
  const std::size_t dw = weight_dim();
  if (x.size() != dw + 1) throw InvalidArgument("blr: state dimension mismatch");
  const auto w = x.first(dw);
  const double beta = x[dw];
  const double alpha = std::exp(beta);
  double acc = 0.0;
  for (std::size_t k = 0; k < design_.rows(); ++k) acc += log_sigmoid(labels_[k] * dot(w, design_.row(k)));
  acc += 0.5 * static_cast<double>(dw) * beta - 0.5 * alpha * dot(w, w);
  acc += prior_.shape * beta - prior_.rate * alpha;
  return acc;
}

void BlrPosterior::sample_prior(RngStream& rng, std::span<double> out) const {
  const std::size_t dw = weight_dim();
  const double alpha = rng.gamma(prior_.shape, prior_.rate);
  const double sd = 1.0 / std::sqrt(alpha);
  for (std::size_t c = 0; c < dw; ++c) out[c] = rng.normal(0.0, sd);
  out[dw] = std::log(alpha);
}

std::vector<double> blr_grad_log_posterior(std::span<const double> state, const BlrPosterior& posterior,
                                           std::span<const std::size_t> batch) {
  std::vector<double> out(posterior.dim());
  posterior.grad_log_density(state, batch, out);
  return out;
}

std::vector<double> blr_predictive(const ParticleEnsemble& particles, const Matrix& design) {
  const std::size_t dw = design.cols();
  if (particles.d() != dw + 1) {
    throw InvalidArgument("blr_predictive: particle dimension " + std::to_string(particles.d()) +
                          " != feature dimension + 1 (" + std::to_string(dw + 1) + ")");
  }
  std::vector<double> out(design.rows(), 0.0);
  const double n = static_cast<double>(particles.n());
  for (std::size_t t = 0; t < design.rows(); ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < particles.n(); ++i) acc += sigmoid(dot(particles.particle(i).first(dw), design.row(t)));
    out[t] = acc / n;
  }
  return out;
}

}  // namespace svgd
