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

#include "qtask/simulator.hpp"

#include "qtask/error.hpp"
#include "qtask/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>
#include <set>

namespace qtask::sim {
namespace {

using Matrix2 = std::array<Amplitude, 4>;  // row-major

Matrix2 matrix_for(const Gate& gate) {
    constexpr Amplitude i{0.0, 1.0};
    const double r = 1.0 / std::numbers::sqrt2;
    const double half = gate.angle.value_or(0.0) / 2.0;
    const double c = std::cos(half);
    const double s = std::sin(half);
    switch (gate.kind) {
        case GateKind::H: return {r, r, r, -r};
        case GateKind::X: return {0.0, 1.0, 1.0, 0.0};
        case GateKind::Y: return {0.0, -i, i, 0.0};
        case GateKind::Z: return {1.0, 0.0, 0.0, -1.0};
        case GateKind::S: return {1.0, 0.0, 0.0, i};
        case GateKind::Sdg: return {1.0, 0.0, 0.0, -i};
        case GateKind::T: return {1.0, 0.0, 0.0, std::polar(1.0, std::numbers::pi / 4)};
        case GateKind::Tdg: return {1.0, 0.0, 0.0, std::polar(1.0, -std::numbers::pi / 4)};
        case GateKind::RX: return {c, -i * s, -i * s, c};
        case GateKind::RY: return {c, -s, s, c};
        case GateKind::RZ: return {std::polar(1.0, -half), 0.0, 0.0, std::polar(1.0, half)};
        default: break;
    }
    throw Error(ErrorCode::InvalidArgument, describe(gate) + " has no single-qubit matrix");
}

}  // namespace

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
    if (num_qubits < 0) throw Error(ErrorCode::InvalidArgument, "negative qubit count");
    if (num_qubits > kMaxQubits) {
        throw Error(ErrorCode::ResourceLimit, fmt::format("{} qubits exceeds the dense simulation cap of {}",
                                                          num_qubits, kMaxQubits));
    }
    amps_.assign(std::size_t{1} << num_qubits, Amplitude{0.0, 0.0});
    amps_[0] = 1.0;
}

StateVector::StateVector(int num_qubits, std::vector<Amplitude> amplitudes)
    : num_qubits_(num_qubits), amps_(std::move(amplitudes)) {
    if (num_qubits < 0 || num_qubits > kMaxQubits) {
        throw Error(ErrorCode::ResourceLimit, fmt::format("unsupported qubit count {}", num_qubits));
    }
    if (amps_.size() != (std::size_t{1} << num_qubits)) {
        throw Error(ErrorCode::SizeMismatch,
                    fmt::format("{} amplitudes for {} qubits", amps_.size(), num_qubits));
    }
}

void StateVector::apply(const Gate& gate) {
    if (gate.kind == GateKind::MZ) {
        throw Error(ErrorCode::InvalidArgument, "measurement is not a unitary; use simulate or run_trajectory");
    }
    validate_gate(gate, num_qubits_);
    const std::size_t dim = amps_.size();

    if (gate.kind == GateKind::CNOT || gate.kind == GateKind::CZ) {
        const std::size_t cmask = std::size_t{1} << gate.qubits[0];
        const std::size_t tmask = std::size_t{1} << gate.qubits[1];
        for (std::size_t idx = 0; idx < dim; ++idx) {
            if ((idx & cmask) == 0 || (idx & tmask) != 0) continue;
            if (gate.kind == GateKind::CNOT) {
                std::swap(amps_[idx], amps_[idx | tmask]);
            } else {
                amps_[idx | tmask] = -amps_[idx | tmask];
            }
        }
        return;
    }

    const Matrix2 m = matrix_for(gate);
    const std::size_t mask = std::size_t{1} << gate.qubits[0];
    for (std::size_t idx = 0; idx < dim; ++idx) {
        if (idx & mask) continue;
        const Amplitude a0 = amps_[idx];
        const Amplitude a1 = amps_[idx | mask];
        amps_[idx] = m[0] * a0 + m[1] * a1;
        amps_[idx | mask] = m[2] * a0 + m[3] * a1;
    }
}

double StateVector::norm_squared() const {
    double total = 0.0;
    for (const auto& a : amps_) total += std::norm(a);
    return total;
}

double StateVector::probability_of_one(int qubit) const {
    const std::size_t mask = std::size_t{1} << qubit;
    double p = 0.0;
    for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
        if (idx & mask) p += std::norm(amps_[idx]);
    }
    return p;
}

void StateVector::collapse(int qubit, int bit) {
    const std::size_t mask = std::size_t{1} << qubit;
    double kept = 0.0;
    for (std::size_t idx = 0; idx < amps_.size(); ++idx) {
        if (((idx & mask) != 0) == (bit != 0)) {
            kept += std::norm(amps_[idx]);
        } else {
            amps_[idx] = 0.0;
        }
    }
    if (kept <= 0.0) throw Error(ErrorCode::InvalidArgument, "collapse onto a zero-probability outcome");
    const double scale = 1.0 / std::sqrt(kept);
    for (auto& a : amps_) a *= scale;
}

StateVector apply_gate(StateVector state, const Gate& gate) {
    state.apply(gate);
    return state;
}

double ProbDist::total() const {
    double t = 0.0;
    for (const auto& [_, p] : probabilities) t += p;
    return t;
}

namespace {

struct Measurement {
    int qubit;
    int slot;
};

/// Terminal measurements sorted by slot; throws if any qubit is used after
/// it was measured.
std::vector<Measurement> terminal_measurements(const Circuit& circuit) {
    std::vector<Measurement> out;
    std::set<int> measured;
    for (const auto& g : circuit.ops()) {
        for (int q : g.qubits) {
            if (measured.contains(q)) {
                throw Error(ErrorCode::NeedsTrajectory,
                            fmt::format("qubit {} is used after measurement ({}); use run_trajectory", q,
                                        describe(g)));
            }
        }
        if (g.kind == GateKind::MZ) {
            measured.insert(g.qubits[0]);
            out.push_back({g.qubits[0], *g.result_slot});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.slot < b.slot; });
    return out;
}

}  // namespace

Simulation simulate(const Circuit& circuit) {
    const auto measurements = terminal_measurements(circuit);
    StateVector state(circuit.num_qubits());
    for (const auto& g : circuit.ops()) {
        if (g.kind != GateKind::MZ) state.apply(g);
    }

    const std::size_t m = measurements.size();
    std::vector<double> packed(std::size_t{1} << m, 0.0);
    const auto& amps = state.amplitudes();
    for (std::size_t idx = 0; idx < amps.size(); ++idx) {
        const double p = std::norm(amps[idx]);
        if (p == 0.0) continue;
        std::size_t key = 0;
        for (std::size_t j = 0; j < m; ++j) {
            if ((idx >> measurements[j].qubit) & 1U) key |= std::size_t{1} << j;
        }
        packed[key] += p;
    }

    ProbDist dist;
    for (const auto& meas : measurements) {
        dist.measured_qubits.push_back(meas.qubit);
        dist.result_slots.push_back(meas.slot);
    }
    for (std::size_t key = 0; key < packed.size(); ++key) {
        if (packed[key] < kZeroProbability) continue;
        std::string bits(m, '0');
        for (std::size_t j = 0; j < m; ++j) {
            if ((key >> j) & 1U) bits[j] = '1';
        }
        dist.probabilities.emplace(std::move(bits), packed[key]);
    }
    return {std::move(state), std::move(dist)};
}

ShotHistogram sample_shots(const ProbDist& dist, std::uint64_t shots, std::uint64_t seed) {
    ShotHistogram hist;
    hist.shots = shots;
    hist.seed = seed;
    if (shots == 0 || dist.probabilities.empty()) return hist;

    std::vector<const std::string*> keys;
    std::vector<double> cdf;
    double running = 0.0;
    for (const auto& [bits, p] : dist.probabilities) {
        running += p;
        keys.push_back(&bits);
        cdf.push_back(running);
    }
    // Normalize against the accumulated total so rounding never leaves u
    // past the last bucket.
    const double total = running;
    std::vector<std::uint64_t> counts(keys.size(), 0);
    Rng rng(seed);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        ++counts[static_cast<std::size_t>(it - cdf.begin())];
    }
    for (std::size_t k = 0; k < keys.size(); ++k) {
        if (counts[k] > 0) hist.counts.emplace(*keys[k], counts[k]);
    }
    return hist;
}

ShotHistogram run_trajectory(const Circuit& circuit, std::uint64_t shots, std::uint64_t seed) {
    ShotHistogram hist;
    hist.shots = shots;
    hist.seed = seed;
    if (shots == 0) return hist;

    const auto slots = circuit.result_slots();
    const auto& ops = circuit.ops();
    // Evolve the measurement-free prefix once and branch from there.
    StateVector prefix(circuit.num_qubits());
    std::size_t first_mz = 0;
    for (; first_mz < ops.size() && ops[first_mz].kind != GateKind::MZ; ++first_mz) prefix.apply(ops[first_mz]);

    Rng rng(seed);
    std::string bits(slots.size(), '0');
    for (std::uint64_t s = 0; s < shots; ++s) {
        StateVector state = prefix;
        for (std::size_t i = first_mz; i < ops.size(); ++i) {
            const Gate& g = ops[i];
            if (g.kind != GateKind::MZ) {
                state.apply(g);
                continue;
            }
            const int q = g.qubits[0];
            const double p1 = state.probability_of_one(q);
            const int bit = rng.uniform() < p1 ? 1 : 0;
            state.collapse(q, bit);
            const auto pos = std::lower_bound(slots.begin(), slots.end(), *g.result_slot) - slots.begin();
            bits[static_cast<std::size_t>(pos)] = bit ? '1' : '0';
        }
        ++hist.counts[bits];
    }
    return hist;
}

double expectation_pauli(const StateVector& state, const PauliString& paulis) {
    if (static_cast<int>(paulis.size()) != state.num_qubits()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("Pauli string of length {} on {}-qubit state",
                                                            paulis.size(), state.num_qubits()));
    }
    std::size_t flip = 0;
    std::size_t sign_mask = 0;
    int y_count = 0;
    for (std::size_t q = 0; q < paulis.size(); ++q) {
        const std::size_t bit = std::size_t{1} << q;
        switch (paulis[q]) {
            case Pauli::I: break;
            case Pauli::X: flip |= bit; break;
            case Pauli::Y: flip |= bit; sign_mask |= bit; ++y_count; break;
            case Pauli::Z: sign_mask |= bit; break;
        }
    }
    // P|i> = i^{#Y} (-1)^{popcount(i & sign_mask)} |i ^ flip>
    static constexpr std::array<Amplitude, 4> i_pow{Amplitude{1, 0}, Amplitude{0, 1}, Amplitude{-1, 0},
                                                     Amplitude{0, -1}};
    const auto& a = state.amplitudes();
    Amplitude acc{0.0, 0.0};
    for (std::size_t idx = 0; idx < a.size(); ++idx) {
        const Amplitude term = std::conj(a[idx ^ flip]) * a[idx];
        acc += (std::popcount(idx & sign_mask) & 1) ? -term : term;
    }
    return (i_pow[static_cast<std::size_t>(y_count % 4)] * acc).real();
}

namespace {

std::vector<std::size_t> positions_of(const std::vector<int>& slots, const std::vector<int>& order) {
    std::vector<std::size_t> pos;
    for (int r : order) {
        const auto it = std::find(slots.begin(), slots.end(), r);
        if (it == slots.end()) {
            throw Error(ErrorCode::InvalidArgument, fmt::format("result slot {} was not measured", r));
        }
        pos.push_back(static_cast<std::size_t>(it - slots.begin()));
    }
    return pos;
}

std::string pick(const std::string& bits, const std::vector<std::size_t>& pos) {
    std::string out;
    out.reserve(pos.size());
    for (auto p : pos) out.push_back(bits[p]);
    return out;
}

}  // namespace

ProbDist reorder(const ProbDist& dist, const std::vector<int>& order) {
    const auto pos = positions_of(dist.result_slots, order);
    ProbDist out;
    for (auto p : pos) {
        out.measured_qubits.push_back(dist.measured_qubits[p]);
        out.result_slots.push_back(dist.result_slots[p]);
    }
    for (const auto& [bits, prob] : dist.probabilities) out.probabilities[pick(bits, pos)] += prob;
    return out;
}

ShotHistogram reorder(const ShotHistogram& hist, const std::vector<int>& slots, const std::vector<int>& order) {
    const auto pos = positions_of(slots, order);
    ShotHistogram out;
    out.shots = hist.shots;
    out.seed = hist.seed;
    for (const auto& [bits, count] : hist.counts) out.counts[pick(bits, pos)] += count;
    return out;
}

std::string format_histogram(const ShotHistogram& hist) {
    std::string out;
    for (const auto& [bits, count] : hist.counts) out += fmt::format("{} {}\n", bits, count);
    out += fmt::format("shots {}\n", hist.shots);
    return out;
}

std::string format_probabilities(const ProbDist& dist) {
    std::string out;
    for (const auto& [bits, p] : dist.probabilities) out += fmt::format("{} {:.12g}\n", bits, p);
    return out;
}

}  // namespace qtask::sim
