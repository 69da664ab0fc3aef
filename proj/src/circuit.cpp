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

#include "qtask/circuit.hpp"

#include "qtask/error.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace qtask {

std::string_view to_string(GateKind kind) {
    switch (kind) {
        case GateKind::H: return "H";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::S: return "S";
        case GateKind::Sdg: return "Sdg";
        case GateKind::T: return "T";
        case GateKind::Tdg: return "Tdg";
        case GateKind::RX: return "RX";
        case GateKind::RY: return "RY";
        case GateKind::RZ: return "RZ";
        case GateKind::CNOT: return "CNOT";
        case GateKind::CZ: return "CZ";
        case GateKind::MZ: return "MZ";
    }
    return "?";
}

int arity(GateKind kind) {
    return (kind == GateKind::CNOT || kind == GateKind::CZ) ? 2 : 1;
}

bool is_rotation(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

Gate Gate::single(GateKind kind, int q) {
    if (arity(kind) != 1 || is_rotation(kind) || kind == GateKind::MZ) {
        throw Error(ErrorCode::InvalidArgument,
                    std::string(to_string(kind)) + " is not a fixed single-qubit gate");
    }
    return Gate{kind, {q}, std::nullopt, std::nullopt};
}

Gate Gate::rotation(GateKind kind, int q, double theta) {
    if (!is_rotation(kind)) {
        throw Error(ErrorCode::InvalidArgument, std::string(to_string(kind)) + " takes no angle");
    }
    return Gate{kind, {q}, theta, std::nullopt};
}

Gate Gate::controlled(GateKind kind, int control, int target) {
    if (arity(kind) != 2) {
        throw Error(ErrorCode::InvalidArgument, std::string(to_string(kind)) + " is not a two-qubit gate");
    }
    return Gate{kind, {control, target}, std::nullopt, std::nullopt};
}

Gate Gate::measure(int q, int slot) { return Gate{GateKind::MZ, {q}, std::nullopt, slot}; }

void validate_gate(const Gate& gate, int num_qubits) {
    const auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::InvalidArgument, describe(gate) + ": " + why);
    };
    if (static_cast<int>(gate.qubits.size()) != arity(gate.kind)) fail("wrong number of qubits");
    for (int q : gate.qubits) {
        if (q < 0 || q >= num_qubits) {
            fail("qubit " + std::to_string(q) + " out of range for " + std::to_string(num_qubits) +
                 "-qubit circuit");
        }
    }
    if (gate.qubits.size() == 2 && gate.qubits[0] == gate.qubits[1]) fail("duplicate qubit");
    if (gate.angle.has_value() != is_rotation(gate.kind)) fail("angle present iff rotation");
    if (gate.result_slot.has_value() != (gate.kind == GateKind::MZ)) fail("result slot present iff MZ");
    if (gate.result_slot && *gate.result_slot < 0) fail("negative result slot");
}

std::string describe(const Gate& gate) {
    std::ostringstream os;
    os << to_string(gate.kind);
    if (gate.angle) os << "(" << *gate.angle << ")";
    for (std::size_t i = 0; i < gate.qubits.size(); ++i) os << (i == 0 ? " q" : ",q") << gate.qubits[i];
    if (gate.result_slot) os << "->r" << *gate.result_slot;
    return os.str();
}

Circuit::Circuit(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 1) {
        throw Error(ErrorCode::InvalidArgument,
                    "circuit needs at least one qubit, got " + std::to_string(num_qubits));
    }
}

Circuit& Circuit::append(Gate gate) {
    validate_gate(gate, num_qubits_);
    if (gate.result_slot) {
        if (slots_.contains(*gate.result_slot)) {
            throw Error(ErrorCode::InvalidArgument,
                        "duplicate result slot " + std::to_string(*gate.result_slot));
        }
        slots_.insert(*gate.result_slot);
    }
    ops_.push_back(std::move(gate));
    return *this;
}

Circuit& Circuit::append_mapped(const Circuit& other, std::span<const int> qubit_map) {
    if (static_cast<int>(qubit_map.size()) != other.num_qubits()) {
        throw Error(ErrorCode::InvalidArgument,
                    "qubit map has " + std::to_string(qubit_map.size()) + " entries, expected " +
                        std::to_string(other.num_qubits()));
    }
    for (Gate g : other.ops()) {
        for (int& q : g.qubits) q = qubit_map[static_cast<std::size_t>(q)];
        append(std::move(g));
    }
    return *this;
}

Circuit compose(const Circuit& front, const Circuit& back, std::span<const int> qubit_map) {
    Circuit out(back.num_qubits());
    out.append_mapped(front, qubit_map);
    int shift = 0;
    if (front.result_count() > 0 && back.result_count() > 0) shift = front.result_slots().back() + 1;
    for (Gate g : back.ops()) {
        if (g.result_slot) *g.result_slot += shift;
        out.append(std::move(g));
    }
    return out;
}

Circuit canonicalize_slots(const Circuit& circuit) {
    Circuit out(circuit.num_qubits());
    std::map<int, int> renumber;
    for (Gate g : circuit.ops()) {
        if (g.result_slot) {
            auto [it, _] = renumber.emplace(*g.result_slot, static_cast<int>(renumber.size()));
            g.result_slot = it->second;
        }
        out.append(std::move(g));
    }
    return out;
}

char to_char(Pauli p) {
    switch (p) {
        case Pauli::I: return 'I';
        case Pauli::X: return 'X';
        case Pauli::Y: return 'Y';
        case Pauli::Z: return 'Z';
    }
    return '?';
}

Pauli pauli_from_char(char c) {
    switch (c) {
        case 'I': return Pauli::I;
        case 'X': return Pauli::X;
        case 'Y': return Pauli::Y;
        case 'Z': return Pauli::Z;
        default: break;
    }
    throw Error(ErrorCode::InvalidArgument, std::string("not a Pauli label: '") + c + "'");
}

PauliString parse_pauli_string(std::string_view text) {
    PauliString out;
    out.reserve(text.size());
    for (char c : text) out.push_back(pauli_from_char(c));
    return out;
}

std::string to_string(const PauliString& paulis) {
    std::string s;
    for (Pauli p : paulis) s.push_back(to_char(p));
    return s;
}

std::string_view to_string(PrepLabel label) {
    switch (label) {
        case PrepLabel::Zero: return "0";
        case PrepLabel::One: return "1";
        case PrepLabel::Plus: return "+";
        case PrepLabel::Minus: return "-";
        case PrepLabel::PlusI: return "+i";
        case PrepLabel::MinusI: return "-i";
    }
    return "?";
}

PrepLabel prep_label_from_string(std::string_view text) {
    for (auto label : {PrepLabel::Zero, PrepLabel::One, PrepLabel::Plus, PrepLabel::Minus,
                       PrepLabel::PlusI, PrepLabel::MinusI}) {
        if (to_string(label) == text) return label;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown preparation label \"" + std::string(text) + "\"");
}

Circuit prep_circuit(PrepLabel label) {
    Circuit c(1);
    switch (label) {
        case PrepLabel::Zero: break;
        case PrepLabel::One: c.append(Gate::single(GateKind::X, 0)); break;
        case PrepLabel::Plus: c.append(Gate::single(GateKind::H, 0)); break;
        case PrepLabel::Minus:
            c.append(Gate::single(GateKind::X, 0)).append(Gate::single(GateKind::H, 0));
            break;
        case PrepLabel::PlusI:
            c.append(Gate::single(GateKind::H, 0)).append(Gate::single(GateKind::S, 0));
            break;
        case PrepLabel::MinusI:
            c.append(Gate::single(GateKind::H, 0)).append(Gate::single(GateKind::Sdg, 0));
            break;
    }
    return c;
}

BasisChange basis_change(Pauli obs) {
    BasisChange out;
    switch (obs) {
        case Pauli::I: out.needs_measurement = false; break;
        case Pauli::Z: break;
        case Pauli::X: out.circuit.append(Gate::single(GateKind::H, 0)); break;
        case Pauli::Y:
            out.circuit.append(Gate::single(GateKind::Sdg, 0)).append(Gate::single(GateKind::H, 0));
            break;
    }
    return out;
}

Circuit bell_circuit() { return ghz_circuit(2); }

Circuit ghz_circuit(int num_qubits) {
    Circuit c(num_qubits);
    c.append(Gate::single(GateKind::H, 0));
    for (int q = 0; q + 1 < num_qubits; ++q) c.append(Gate::controlled(GateKind::CNOT, q, q + 1));
    for (int q = 0; q < num_qubits; ++q) c.append(Gate::measure(q, q));
    return c;
}

}  // namespace qtask
