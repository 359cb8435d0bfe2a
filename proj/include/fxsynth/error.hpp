// Copyright 2026 The fxsynth Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace fxsynth {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class SingularError : public Error {
 public:
  using Error::Error;
};

class NoSolutionError : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by eval_fx when an intermediate leaves its format.
class OverflowFault : public Error {
 public:
  OverflowFault(std::string node, long long value)
      : Error("fixed-point overflow at node '" + node + "' (value " +
              std::to_string(value) + ")"),
        node_(std::move(node)),
        value_(value) {}

  const std::string& node() const { return node_; }
  long long value() const { return value_; }

 private:
  std::string node_;
  long long value_;
};

}  // namespace fxsynth
