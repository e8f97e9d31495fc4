// Copyright 2026 The melbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MELBRIDGE_ERRORS_H_
#define MELBRIDGE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace melbridge {

// Caller supplied something unusable: a malformed document, a value outside
// its bounds, mismatched shapes. The command-line tool maps this to exit 2.
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// File could not be opened, read or written, or has a bad layout.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace melbridge

#endif  // MELBRIDGE_ERRORS_H_
