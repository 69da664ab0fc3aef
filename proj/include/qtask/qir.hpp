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

#include "qtask/circuit.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qtask::qir {

/// A single `call` to a quantum intrinsic, with operands decoded from the
/// static `null` / `inttoptr (i64 N to ...)` encoding.
struct IntrinsicCall {
    std::string name;
    std::vector<int> qubit_args;
    std::vector<int> result_args;
    std::vector<double> double_args;

    bool operator==(const IntrinsicCall&) const = default;
};

/// Straight-line entry function of a QIR module: the gate and measurement
/// calls in file order plus the order in which results are recorded.
struct QirProgram {
    std::string entry_name;
    int required_qubits{0};
    std::vector<IntrinsicCall> calls;
    std::vector<int> output_order;

    bool operator==(const QirProgram&) const = default;
};

/// Parses the textual base-profile subset. Lines that are not calls to a
/// `__quantum__` symbol are skipped.
QirProgram parse_qir(std::string_view text);
QirProgram load_qir_file(const std::filesystem::path& path);

struct LoweredKernel {
    Circuit circuit;
    /// Result slots in recording order; histogram keys follow this order.
    std::vector<int> output_order;
};

LoweredKernel lower_to_circuit(const QirProgram& program);

/// Writes `program` back out in the same subset grammar, with an
/// `entry_point` attribute group carrying required_num_qubits.
std::string emit_qir(const QirProgram& program);

/// Convenience for building a program from a circuit (each MZ is recorded in
/// slot order).
QirProgram program_from_circuit(const Circuit& circuit, std::string entry_name = "main");

}  // namespace qtask::qir
