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

#ifndef AUREC_OPTIM_H_
#define AUREC_OPTIM_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace aurec {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Throws ConfigError.
  void Validate() const;
};

// Bias-corrected Adam over one flat parameter block.
class AdamState {
 public:
  AdamState(std::size_t size, AdamOptions options);

  // params -= lr * m_hat / (sqrt(v_hat) + eps). Throws NumericError naming
  // the first non-finite gradient entry; the state is left untouched then.
  void Step(std::span<double> params, std::span<const double> grads);

  std::int64_t step_count() const { return step_count_; }
  const AdamOptions& options() const { return options_; }
  std::span<const double> first_moment() const { return first_moment_; }
  std::span<const double> second_moment() const { return second_moment_; }

 private:
  AdamOptions options_;
  std::vector<double> first_moment_;
  std::vector<double> second_moment_;
  std::int64_t step_count_ = 0;
};

struct GradientCheckOptions {
  double step = 1e-4;
  // Coordinates are sampled without replacement; all are used when the
  // parameter vector is smaller.
  std::size_t max_coordinates = 64;
  double tolerance = 1e-4;
  std::uint64_t seed = 0;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t coordinates_checked = 0;
  bool passed = true;
};

using LossFunction = std::function<double(std::span<const double>)>;

// Compares an analytic gradient with central differences on a seeded subset
// of coordinates. The per-coordinate error is
// |g_a - g_n| / max(1e-8, |g_a| + |g_n|). Throws NumericError if the loss
// is non-finite at any evaluated point.
GradientCheckReport FiniteDiffCheck(const LossFunction& loss,
                                    std::span<const double> params,
                                    std::span<const double> analytic_grad,
                                    const GradientCheckOptions& options = {});

}  // namespace aurec

#endif  // AUREC_OPTIM_H_
