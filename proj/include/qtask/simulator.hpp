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

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qtask::sim {

using Amplitude = std::complex<double>;

inline constexpr int kMaxQubits = 24;
/// Probabilities below this are dropped from distributions as structural zeros.
inline constexpr double kZeroProbability = 1e-15;

/// Dense state of `num_qubits` qubits. Basis index bit q holds qubit q
/// (qubit 0 is the least significant bit).
class StateVector {
public:
    /// |0...0>. Throws ResourceLimit above kMaxQubits.
    explicit StateVector(int num_qubits);
    StateVector(int num_qubits, std::vector<Amplitude> amplitudes);

    int num_qubits() const noexcept { return num_qubits_; }
    const std::vector<Amplitude>& amplitudes() const noexcept { return amps_; }
    std::size_t dimension() const noexcept { return amps_.size(); }

    /// Unitary gates only; MZ is a contract violation (InvalidArgument).
    void apply(const Gate& gate);

    double norm_squared() const;
    double probability_of_one(int qubit) const;
    /// Projects `qubit` onto `bit` and renormalizes.
    void collapse(int qubit, int bit);

private:
    int num_qubits_;
    std::vector<Amplitude> amps_;
};

StateVector apply_gate(StateVector state, const Gate& gate);

/// Outcome probabilities keyed by bitstring; character i is the outcome of
/// result_slots[i] (measured on measured_qubits[i]).
struct ProbDist {
    std::vector<int> measured_qubits;
    std::vector<int> result_slots;
    std::map<std::string, double> probabilities;

    double total() const;
    bool operator==(const ProbDist&) const = default;
};

struct ShotHistogram {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t shots{0};
    std::uint64_t seed{0};

    bool operator==(const ShotHistogram&) const = default;
};

struct Simulation {
    StateVector state;
    ProbDist dist;
};

/// Runs every non-MZ gate from |0...0> and returns the exact distribution of
/// the measured qubits in result-slot order. Throws NeedsTrajectory when a
/// measured qubit is touched again.
Simulation simulate(const Circuit& circuit);

/// Multinomial sample by inverse-CDF over the lexicographically ordered keys.
ShotHistogram sample_shots(const ProbDist& dist, std::uint64_t shots, std::uint64_t seed);

/// Per-shot stochastic evolution with collapse at each MZ.
ShotHistogram run_trajectory(const Circuit& circuit, std::uint64_t shots, std::uint64_t seed);

/// <psi|P|psi>; character i of the string acts on qubit i.
double expectation_pauli(const StateVector& state, const PauliString& paulis);

/// Re-keys a distribution or histogram so character i is result slot
/// order[i]; slots not listed are marginalized out.
ProbDist reorder(const ProbDist& dist, const std::vector<int>& order);
ShotHistogram reorder(const ShotHistogram& hist, const std::vector<int>& slots, const std::vector<int>& order);

/// `<bits> <count>` lines sorted by bitstring, then `shots <N>`.
std::string format_histogram(const ShotHistogram& hist);
/// `<bits> <probability>` lines sorted by bitstring, 12 significant digits.
std::string format_probabilities(const ProbDist& dist);

}  // namespace qtask::sim
