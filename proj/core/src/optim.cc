// Copyright 2026 The aurec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aurec/optim.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "aurec/errors.h"

namespace aurec {

void AdamOptions::Validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("Adam learning rate must be a positive finite number");
  }
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
}

AdamState::AdamState(std::size_t size, AdamOptions options)
    : options_(options), first_moment_(size, 0.0), second_moment_(size, 0.0) {
  options_.Validate();
}

void AdamState::Step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != first_moment_.size() ||
      grads.size() != first_moment_.size()) {
    throw ConfigError("Adam: parameter/gradient size " +
                      std::to_string(params.size()) + "/" +
                      std::to_string(grads.size()) + " does not match state " +
                      std::to_string(first_moment_.size()));
  }
  for (std::size_t k = 0; k < grads.size(); ++k) {
    if (!std::isfinite(grads[k])) {
      throw NumericError("Adam: non-finite gradient at index " +
                         std::to_string(k));
    }
  }
  ++step_count_;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double t = static_cast<double>(step_count_);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  const double lr = options_.learning_rate;
  const double eps = options_.epsilon;
  for (std::size_t k = 0; k < grads.size(); ++k) {
    const double g = grads[k];
    first_moment_[k] = b1 * first_moment_[k] + (1.0 - b1) * g;
    second_moment_[k] = b2 * second_moment_[k] + (1.0 - b2) * g * g;
    const double m_hat = first_moment_[k] / correction1;
    const double v_hat = second_moment_[k] / correction2;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

GradientCheckReport FiniteDiffCheck(const LossFunction& loss,
                                    std::span<const double> params,
                                    std::span<const double> analytic_grad,
                                    const GradientCheckOptions& options) {
  if (params.size() != analytic_grad.size()) {
    throw ConfigError("gradient check: gradient size does not match params");
  }
  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (coords.size() > options.max_coordinates) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(options.max_coordinates);
    std::sort(coords.begin(), coords.end());
  }

  std::vector<double> x(params.begin(), params.end());
  auto eval = [&](std::size_t k) {
    const double value = loss(x);
    if (!std::isfinite(value)) {
      throw NumericError("gradient check: loss is non-finite when " +
                         std::string("perturbing coordinate ") +
                         std::to_string(k));
    }
    return value;
  };

  GradientCheckReport report;
  report.coordinates_checked = coords.size();
  for (std::size_t k : coords) {
    const double saved = x[k];
    x[k] = saved + options.step;
    const double plus = eval(k);
    x[k] = saved - options.step;
    const double minus = eval(k);
    x[k] = saved;
    const double numeric = (plus - minus) / (2.0 * options.step);
    const double analytic = analytic_grad[k];
    const double err = std::abs(analytic - numeric) /
                       std::max(1e-8, std::abs(analytic) + std::abs(numeric));
    if (err > report.max_relative_error) {
      report.max_relative_error = err;
      report.worst_index = k;
    }
  }
  report.passed = report.max_relative_error < options.tolerance;
  return report;
}

}  // namespace aurec
