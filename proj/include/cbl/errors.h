// Copyright 2026 The cbl Authors.
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

#ifndef CBL_ERRORS_H_
#define CBL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace cbl {

// Base of every error raised by the library. Callers that only need to
// distinguish configuration problems from runtime failures can catch
// ConfigError separately and treat everything else as a runtime failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition on a numeric argument failed (zero vector, size mismatch).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or unknown kind.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A phrase mentions a word the model has no parameters for.
class VocabularyError : public Error {
 public:
  using Error::Error;
};

// A caller broke an API contract (wrong candidate count, etc).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Rejection sampling gave up.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbl

#endif  // CBL_ERRORS_H_
