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
#include "qtask/runtime.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qtask::qpd {

/// One measure-and-prepare channel of the identity decomposition: measure
/// `observable` on the incoming qubit, prepare `prep`, weight by
/// `coefficient`.
struct QpdTerm {
    int k{1};
    double coefficient{0.0};
    Pauli observable{Pauli::I};
    PrepLabel prep{PrepLabel::Zero};

    bool operator==(const QpdTerm&) const = default;
};

struct WireCutDecomposition {
    std::vector<QpdTerm> terms;

    /// Sampling overhead, sum of |c_k|.
    double gamma() const;
    const QpdTerm& term(int k) const;
};

/// The standard 8-term table: (I,|0>,+1/2) (I,|1>,+1/2) (X,|+>,+1/2)
/// (X,|->,-1/2) (Y,|+i>,+1/2) (Y,|-i>,-1/2) (Z,|0>,+1/2) (Z,|1>,-1/2).
WireCutDecomposition canonical_wire_cut();

/// Sum over ordered pairs of |c_k c_s|; equals gamma^2.
double pair_weight_sum(const WireCutDecomposition& decomp);

/// `[{"k":1,"c":0.5,"obs":"I","prep":"0"}, ...]`. The parsed table must
/// reproduce the identity channel (see check_identity_channel).
WireCutDecomposition decomposition_from_json(std::string_view text);
std::string decomposition_to_json(const WireCutDecomposition& decomp);

/// Row-major 2x2 complex matrix.
using Matrix2 = std::array<std::complex<double>, 4>;

Matrix2 density_of(PrepLabel label);

/// sum_k c_k Tr(O_k rho) |k><k|. Throws InvalidArgument unless rho is
/// Hermitian, unit-trace and positive semidefinite (tolerance 1e-10).
Matrix2 reconstruct_density(const WireCutDecomposition& decomp, const Matrix2& rho);

/// Max elementwise error of the reconstruction over the density matrices of
/// |0>, |1>, |+>, |+i>, which span all Hermitian 2x2 matrices.
double identity_channel_error(const WireCutDecomposition& decomp);

/// Throws InvalidArgument when identity_channel_error exceeds `tolerance`.
void check_identity_channel(const WireCutDecomposition& decomp, double tolerance = 1e-12);

enum class FragmentRole { First, Middle, Last };

/// Two-qubit fragment. Slot 0 holds the data-qubit outcome y; slot 1 the
/// second outcome (an observable bit for First/Middle, y for Last). An
/// identity observable leaves slot 1 unmeasured.
struct Fragment {
    FragmentRole role{FragmentRole::First};
    int k{0};  // 0 when the fragment does not depend on k
    int s{0};  // 0 when the fragment does not depend on s
    Circuit circuit{2};
    bool observable_measured{true};
};

/// H q0; CNOT(0,1); MZ q0; basis change for O_k on q1; MZ q1.
Fragment first_fragment(const QpdTerm& cut);
/// Prepare |k> on q0; CNOT(0,1); MZ q0; basis change for O_s on q1; MZ q1.
Fragment middle_fragment(const QpdTerm& incoming, const QpdTerm& outgoing);
/// Prepare |s> on q0; CNOT(0,1); MZ q0; MZ q1.
Fragment last_fragment(const QpdTerm& incoming);

struct QpdInstance {
    int k{1};
    int s{0};  // 0 for single-cut instances
    std::vector<Fragment> fragments;
};

/// n_cuts = 2: 8x8 instances of three fragments (4-qubit GHZ).
/// n_cuts = 1: 8 instances of two fragments (3-qubit GHZ).
std::vector<QpdInstance> build_ghz_qpd_instances(const WireCutDecomposition& decomp, int n_cuts = 2);

/// +1/-1 product of (2y_i - 1).
int sign_function(int y1, int y2, int y3, int y4);

/// Fragment outcome frequencies keyed as in Fragment ("y" or "yo"/"yy").
struct FragmentDist {
    std::map<std::string, double> probabilities;
    bool observable_measured{true};
};

/// Normalizes a runtime payload: exact distributions pass through,
/// histograms become frequencies. Throws InvalidArgument for an empty
/// histogram.
FragmentDist fragment_dist_from_payload(const rt::Payload& payload, bool observable_measured);

struct InstanceResult {
    FragmentDist first;
    FragmentDist middle;
    FragmentDist last;
};

using InstanceKey = std::pair<int, int>;
using ResultMap = std::map<InstanceKey, InstanceResult>;

struct QpdEstimate {
    double value{0.0};
    rt::SimMode mode{rt::SimMode::Exact};
    std::uint64_t shots{0};
    std::uint64_t seed{0};
    int reps{1};
    double mean{0.0};
    double stddev{0.0};
    std::vector<double> values;
};

/// sum_{k,s} c_k c_s sum_{y,o} o_k o_s f(y1..y4) P1[y1,o_k|k] P2[y2,o_s|k,s] P3[y3,y4|s].
/// Observable bit 0 decodes to +1 and bit 1 to -1; an identity observable
/// contributes +1. Throws MissingInstance when a (k,s) pair is absent.
QpdEstimate estimate_zzzz(const ResultMap& results, const WireCutDecomposition& decomp, rt::SimMode mode);

/// Single-cut analogue on the 3-qubit GHZ: reconstructs <ZZZ> from results
/// keyed (k, 0), using `last` for the second fragment (outcomes y2 y3).
QpdEstimate estimate_zzz_single_cut(const ResultMap& results, const WireCutDecomposition& decomp);

/// Exact fragment distributions for every instance, computed in-process.
ResultMap exact_results(const WireCutDecomposition& decomp, int n_cuts = 2);

/// Monte Carlo over the decomposition: draws (k,s) with probability
/// |c_k||c_s|/gamma^2 and averages gamma^2 sgn(c_k) sgn(c_s) o_k o_s f(y)
/// over `shots` single shots per draw. `values` holds the per-draw terms.
QpdEstimate importance_sampled_estimate(const WireCutDecomposition& decomp, std::uint64_t n_samples,
                                        std::uint64_t shots, std::uint64_t seed);

struct GraphOptions {
    /// Share fragments that depend only on k (first) or only on s (last).
    bool deduplicate{true};
};

inline constexpr std::string_view kReduceKernel = "qpd_estimator_reduce";

struct QpdGraph {
    rt::TaskGraph graph;
    rt::TaskId reduce{0};
    std::size_t circuit_tasks{0};
};

/// One CircuitKernel task per fragment (80 with deduplication, 192 without)
/// plus a host reduction task depending on all of them that runs
/// estimate_zzzz. Throws NoCapableDevice when `runtime` has no qpu device.
QpdGraph instances_to_graph(const rt::Runtime& runtime, const std::vector<QpdInstance>& instances,
                            const WireCutDecomposition& decomp, std::uint64_t shots, rt::SimMode mode,
                            std::uint64_t seed, GraphOptions options = {});

/// Registers the reduction kernel on `runtime` (idempotent).
void register_qpd_kernels(rt::Runtime& runtime);

struct ValidationConfig {
    int reps{1};
    std::uint64_t shots{1024};
    std::uint64_t seed{0};
    int devices{8};
    rt::SimMode mode{rt::SimMode::Sampled};
    rt::Policy policy{rt::Policy::RoundRobin};
    GraphOptions graph;
};

/// Runs the full two-cut GHZ experiment `reps` times through a fresh runtime
/// with `devices` qpu devices and one host device. Rep r uses graph seed
/// derive_seed(seed, r). mean/stddev are over reps (sample std, 0 for one rep).
QpdEstimate validate_run(const ValidationConfig& config, const WireCutDecomposition& decomp = canonical_wire_cut());

/// `rep,value` header and rows, then `mean,<m>` and `std,<s>`.
std::string validation_csv(const QpdEstimate& estimate);

}  // namespace qtask::qpd
