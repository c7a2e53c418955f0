#include "svgd/schedule.hpp"

#include <cmath>

namespace svgd {

double PolynomialDecay::epsilon(std::size_t t) const {
  return a / std::pow(offset + static_cast<double>(t), exponent);
}

void validate(const StepSchedule& schedule) {
  if (const auto* ada = std::get_if<AdaGrad>(&schedule)) {
    if (!(ada->master > 0.0)) throw InvalidArgument("adagrad: master step must be positive");
    if (!(ada->rho >= 0.0 && ada->rho < 1.0)) throw InvalidArgument("adagrad: momentum must lie in [0, 1)");
    if (!(ada->fudge > 0.0)) throw InvalidArgument("adagrad: fudge factor must be positive");
    return;
  }
  const auto& poly = std::get<PolynomialDecay>(schedule);
  if (!(poly.a >= 0.0) || !std::isfinite(poly.a)) throw InvalidArgument("polynomial decay: a must be non-negative");
  if (!(poly.offset > 0.0)) throw InvalidArgument("polynomial decay: offset must be positive");
  if (!std::isfinite(poly.exponent)) throw InvalidArgument("polynomial decay: exponent must be finite");
}

Matrix adagrad_step(AdaGrad& state, const Matrix& direction) {
  const auto g = direction.values();
  if (state.history.size() == 0) {
    state.history = Matrix(direction.rows(), direction.cols());
    auto hist = state.history.values();
    for (std::size_t k = 0; k < g.size(); ++k) hist[k] = g[k] * g[k];
  } else {
    if (state.history.rows() != direction.rows() || state.history.cols() != direction.cols()) {
      throw InvalidArgument("adagrad: direction shape changed between steps");
    }
    auto hist = state.history.values();
    for (std::size_t k = 0; k < g.size(); ++k) hist[k] = state.rho * hist[k] + (1.0 - state.rho) * g[k] * g[k];
  }
  Matrix step(direction.rows(), direction.cols());
  auto out = step.values();
  const auto hist = state.history.values();
  for (std::size_t k = 0; k < g.size(); ++k) out[k] = state.master * g[k] / (state.fudge + std::sqrt(hist[k]));
  return step;
}

Matrix schedule_step(StepSchedule& schedule, const Matrix& direction, std::size_t t) {
  if (auto* ada = std::get_if<AdaGrad>(&schedule)) return adagrad_step(*ada, direction);
  const double eps = std::get<PolynomialDecay>(schedule).epsilon(t);
  Matrix step(direction.rows(), direction.cols());
  auto out = step.values();
  const auto g = direction.values();
  for (std::size_t k = 0; k < g.size(); ++k) out[k] = eps * g[k];
  return step;
}

}  // namespace svgd
