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

#include "qtask/runtime.hpp"

#include <cstdint>
#include <filesystem>
#include <string_view>

namespace qtask::rt {

/// Task graph document:
///
///   {"seed": 0, "policy": "default"|"roundrobin",
///    "devices": {"qpu": 4, "host": 1},
///    "tasks": [{"name": "t0",
///               "kernel": {"type": "qir", "path": "bell.ll"},
///               "shots": 1024, "depends": ["..."], "device": "any"|"qpu"|"host"|<id>}]}
///
/// A bare string kernel ("bell.ll", "echo") is bound when the task runs.
/// Kernel objects:
///   {"type": "qir", "path": <file> | "source": <text>, "accelerator": "statevector"|"trajectory"}
///   {"type": "host", "name": <registered kernel>, "params": [<string>...]}
///   {"type": "circuit", "qubits": N, "gates": [["H", 0], ["CNOT", 0, 1], ["RZ", 0, 0.5], ["MZ", 0, 0]],
///    "mode": "exact"|"sampled"}
///
/// Unknown fields anywhere are a SchemaError naming the field.
struct GraphSpec {
    std::uint64_t seed{0};
    Policy policy{Policy::Default};
    int qpu_devices{0};
    int host_devices{0};
    TaskGraph graph;
};

/// Relative qir paths resolve against `base_dir`.
GraphSpec parse_graph_json(std::string_view text, const std::filesystem::path& base_dir = {});

}  // namespace qtask::rt
