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

#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qtask {

enum class GateKind { H, X, Y, Z, S, Sdg, T, Tdg, RX, RY, RZ, CNOT, CZ, MZ };

std::string_view to_string(GateKind kind);
int arity(GateKind kind);
bool is_rotation(GateKind kind);

/// One operation of a circuit. `angle` is set only for rotations and
/// `result_slot` only for MZ.
struct Gate {
    GateKind kind{GateKind::H};
    std::vector<int> qubits;
    std::optional<double> angle;
    std::optional<int> result_slot;

    static Gate single(GateKind kind, int q);
    static Gate rotation(GateKind kind, int q, double theta);
    static Gate controlled(GateKind kind, int control, int target);
    static Gate measure(int q, int slot);

    bool operator==(const Gate&) const = default;
};

/// Throws Error(InvalidArgument) when `gate` is malformed or addresses a
/// qubit outside [0, num_qubits).
void validate_gate(const Gate& gate, int num_qubits);

std::string describe(const Gate& gate);

class Circuit {
public:
    explicit Circuit(int num_qubits);

    /// Validates and appends; throws on bad qubits or a reused result slot.
    Circuit& append(Gate gate);

    /// Appends every op of `other` with qubit i of `other` mapped to
    /// qubit_map[i] here. Result slots are kept as-is.
    Circuit& append_mapped(const Circuit& other, std::span<const int> qubit_map);

    int num_qubits() const noexcept { return num_qubits_; }
    const std::vector<Gate>& ops() const noexcept { return ops_; }
    int result_count() const noexcept { return static_cast<int>(slots_.size()); }
    /// Result slots in increasing order.
    std::vector<int> result_slots() const { return {slots_.begin(), slots_.end()}; }
    bool empty() const noexcept { return ops_.empty(); }

    bool operator==(const Circuit& other) const {
        return num_qubits_ == other.num_qubits_ && ops_ == other.ops_;
    }

private:
    int num_qubits_;
    std::vector<Gate> ops_;
    std::set<int> slots_;
};

/// Maps `front` into `back`'s qubit space through `qubit_map` and places it
/// ahead of `back`'s ops. Front result slots keep their numbers; back slots
/// are shifted past the largest front slot when both measure.
Circuit compose(const Circuit& front, const Circuit& back, std::span<const int> qubit_map);

/// Renumbers result slots 0..n-1 in order of first appearance.
Circuit canonicalize_slots(const Circuit& circuit);

enum class Pauli { I, X, Y, Z };
using PauliString = std::vector<Pauli>;

/// Parses "IXYZ"-style text; character i acts on qubit i.
PauliString parse_pauli_string(std::string_view text);
std::string to_string(const PauliString& paulis);
char to_char(Pauli p);
Pauli pauli_from_char(char c);

enum class PrepLabel { Zero, One, Plus, Minus, PlusI, MinusI };

std::string_view to_string(PrepLabel label);
/// Accepts "0", "1", "+", "-", "+i", "-i".
PrepLabel prep_label_from_string(std::string_view text);

/// One-qubit circuit preparing the labelled state from |0>.
Circuit prep_circuit(PrepLabel label);

struct BasisChange {
    Circuit circuit{1};
    /// False for the identity observable, whose outcome is fixed at +1.
    bool needs_measurement{true};
};

/// Rotation taking the observable's eigenbasis onto the Z basis, so that MZ
/// outcome 0 corresponds to eigenvalue +1.
BasisChange basis_change(Pauli obs);

Circuit bell_circuit();
/// H q0 followed by a CNOT chain and a terminal MZ of every qubit.
Circuit ghz_circuit(int num_qubits);

}  // namespace qtask
