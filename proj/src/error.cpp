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

#include "qtask/error.hpp"

namespace qtask {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::ParseError: return "parse-error";
        case ErrorCode::UnsupportedIntrinsic: return "unsupported-intrinsic";
        case ErrorCode::UnsupportedControlFlow: return "unsupported-control-flow";
        case ErrorCode::LoweringError: return "lowering-error";
        case ErrorCode::NeedsTrajectory: return "needs-trajectory";
        case ErrorCode::ResourceLimit: return "resource-limit";
        case ErrorCode::DuplicateId: return "duplicate-id";
        case ErrorCode::UnknownKernel: return "unknown-kernel";
        case ErrorCode::UnknownDependency: return "unknown-dependency";
        case ErrorCode::NoCapableDevice: return "no-capable-device";
        case ErrorCode::CycleDetected: return "cycle-detected";
        case ErrorCode::SchemaError: return "schema-error";
        case ErrorCode::UseAfterFree: return "use-after-free";
        case ErrorCode::SizeMismatch: return "size-mismatch";
        case ErrorCode::MissingInstance: return "missing-instance";
    }
    return "unknown";
}

}  // namespace qtask
