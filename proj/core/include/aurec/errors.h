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

#ifndef AUREC_ERRORS_H_
#define AUREC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace aurec {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Malformed, inconsistent or out-of-range input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message) : Error(message) {}
};

// Invalid hyperparameters or arguments.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(message) {}
};

// A loss, gradient or prediction became non-finite.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error(message) {}
};

// Training diverged; carries the epoch index at which it was detected.
class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& stage, int epoch)
      : NumericError(stage + ": loss became non-finite at epoch " +
                     std::to_string(epoch)),
        epoch_(epoch) {}

  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

// A checkpoint could not be read or does not match its dataset/backbone.
class CheckpointError : public Error {
 public:
  explicit CheckpointError(const std::string& message) : Error(message) {}
};

}  // namespace aurec

#endif  // AUREC_ERRORS_H_
