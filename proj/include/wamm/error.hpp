// Copyright (C) 2026 the wamm project authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WAMM_ERROR_HPP
#define WAMM_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace wamm {

/// Base error for everything thrown by this library. `code()` is a stable
/// machine-readable identifier (e.g. "UnknownClass", "CorruptFile"); the
/// what() string carries the human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

/// Bad inputs, contract violations, malformed data. CLI exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Filesystem and OS-level failures. CLI exit code 2.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace wamm

#endif // WAMM_ERROR_HPP
