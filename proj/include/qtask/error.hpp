// Copyright 2026 The qtask Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qtask {

enum class ErrorCode {
    InvalidArgument,
    ParseError,
    UnsupportedIntrinsic,
    UnsupportedControlFlow,
    LoweringError,
    NeedsTrajectory,
    ResourceLimit,
    DuplicateId,
    UnknownKernel,
    UnknownDependency,
    NoCapableDevice,
    CycleDetected,
    SchemaError,
    UseAfterFree,
    SizeMismatch,
    MissingInstance,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a stable error category. Parse errors also carry the
/// 1-based source line (0 when not applicable).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, int line = 0)
        : std::runtime_error(message), code_(code), line_(line) {}

    ErrorCode code() const noexcept { return code_; }
    int line() const noexcept { return line_; }

private:
    ErrorCode code_;
    int line_;
};

}  // namespace qtask
