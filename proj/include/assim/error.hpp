// Copyright 2026 The assim Authors
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

#ifndef ASSIM_ERROR_HPP_
#define ASSIM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace assim {

// Two objects live on different discretizations.
class IncompatibleGridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A basis handed to a routine that requires orthonormality is not orthonormal.
class NotOrthonormalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Sensor functionals are linearly dependent on the grid.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The reconstruction problem is not well posed (inf-sup constant too small,
// more background modes than sensors, infeasible box).
class IllPosedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration problems; carries the offending line when known (0 otherwise).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace assim

#endif  // ASSIM_ERROR_HPP_
