#pragma once

#include <cstddef>
#include <variant>

#include "svgd/core.hpp"

namespace svgd {

/// AdaGrad with an exponentially decaying squared-gradient history:
///   hist <- rho * hist + (1 - rho) * g^2     (hist <- g^2 on the first call)
///   step  = master * g / (fudge + sqrt(hist))
struct AdaGrad {
  double master = 1e-3;
  double rho = 0.9;
  double fudge = 1e-6;
  Matrix history;  // empty until the first step
};

/// eps_t = a / (offset + t)^exponent, step = eps_t * direction.
/// exponent = 0 gives a constant step size a.
struct PolynomialDecay {
  double a = 1e-2;
  double exponent = 0.55;
  double offset = 1.0;

  double epsilon(std::size_t t) const;
};

using StepSchedule = std::variant<AdaGrad, PolynomialDecay>;

/// Validates parameters; throws InvalidArgument.
void validate(const StepSchedule& schedule);

Matrix adagrad_step(AdaGrad& state, const Matrix& direction);

/// Step matrix for iteration `t` (0-based); advances any schedule state.
Matrix schedule_step(StepSchedule& schedule, const Matrix& direction, std::size_t t);

}  // namespace svgd
