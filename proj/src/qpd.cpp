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

#include "qtask/qpd.hpp"

#include "qtask/error.hpp"
#include "qtask/rng.hpp"
#include "qtask/simulator.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace qtask::qpd {

double WireCutDecomposition::gamma() const {
    double g = 0.0;
    for (const auto& t : terms) g += std::abs(t.coefficient);
    return g;
}

const QpdTerm& WireCutDecomposition::term(int k) const {
    for (const auto& t : terms) {
        if (t.k == k) return t;
    }
    throw Error(ErrorCode::InvalidArgument, fmt::format("decomposition has no term k={}", k));
}

WireCutDecomposition canonical_wire_cut() {
    return {{
        {1, 0.5, Pauli::I, PrepLabel::Zero},
        {2, 0.5, Pauli::I, PrepLabel::One},
        {3, 0.5, Pauli::X, PrepLabel::Plus},
        {4, -0.5, Pauli::X, PrepLabel::Minus},
        {5, 0.5, Pauli::Y, PrepLabel::PlusI},
        {6, -0.5, Pauli::Y, PrepLabel::MinusI},
        {7, 0.5, Pauli::Z, PrepLabel::Zero},
        {8, -0.5, Pauli::Z, PrepLabel::One},
    }};
}

double pair_weight_sum(const WireCutDecomposition& decomp) {
    double total = 0.0;
    for (const auto& a : decomp.terms) {
        for (const auto& b : decomp.terms) total += std::abs(a.coefficient * b.coefficient);
    }
    return total;
}

WireCutDecomposition decomposition_from_json(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid decomposition JSON: ") + e.what());
    }
    if (!doc.is_array() || doc.empty()) {
        throw Error(ErrorCode::SchemaError, "decomposition must be a non-empty array of terms");
    }
    WireCutDecomposition out;
    std::set<int> seen;
    for (const auto& entry : doc) {
        if (!entry.is_object()) throw Error(ErrorCode::SchemaError, "decomposition term must be an object");
        for (const auto& [key, _] : entry.items()) {
            if (key != "k" && key != "c" && key != "obs" && key != "prep") {
                throw Error(ErrorCode::SchemaError, "unknown field \"" + key + "\" in decomposition term");
            }
        }
        QpdTerm t;
        try {
            t.k = entry.at("k").get<int>();
            t.coefficient = entry.at("c").get<double>();
            const auto obs = entry.at("obs").get<std::string>();
            if (obs.size() != 1) throw Error(ErrorCode::InvalidArgument, "observable must be one of I, X, Y, Z");
            t.observable = pauli_from_char(obs[0]);
            t.prep = prep_label_from_string(entry.at("prep").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::SchemaError, std::string("malformed decomposition term: ") + e.what());
        }
        if (t.coefficient == 0.0) throw Error(ErrorCode::SchemaError, fmt::format("term k={} has a zero coefficient", t.k));
        if (!seen.insert(t.k).second) throw Error(ErrorCode::SchemaError, fmt::format("duplicate term k={}", t.k));
        out.terms.push_back(t);
    }
    check_identity_channel(out);
    return out;
}

std::string decomposition_to_json(const WireCutDecomposition& decomp) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& t : decomp.terms) {
        doc.push_back({{"k", t.k},
                       {"c", t.coefficient},
                       {"obs", std::string(1, to_char(t.observable))},
                       {"prep", std::string(to_string(t.prep))}});
    }
    return doc.dump();
}

Matrix2 density_of(PrepLabel label) {
    const auto state = sim::simulate(prep_circuit(label)).state;
    const auto& a = state.amplitudes();
    return {a[0] * std::conj(a[0]), a[0] * std::conj(a[1]), a[1] * std::conj(a[0]), a[1] * std::conj(a[1])};
}

namespace {

using Complex = std::complex<double>;

Complex trace_with(Pauli p, const Matrix2& rho) {
    constexpr Complex i{0.0, 1.0};
    switch (p) {
        case Pauli::I: return rho[0] + rho[3];
        case Pauli::X: return rho[1] + rho[2];
        case Pauli::Y: return i * rho[1] - i * rho[2];
        case Pauli::Z: return rho[0] - rho[3];
    }
    return 0.0;
}

Matrix2 channel(const WireCutDecomposition& decomp, const Matrix2& rho) {
    Matrix2 out{};
    for (const auto& t : decomp.terms) {
        const Complex weight = t.coefficient * trace_with(t.observable, rho);
        const Matrix2 k = density_of(t.prep);
        for (std::size_t e = 0; e < 4; ++e) out[e] += weight * k[e];
    }
    return out;
}

double max_error(const Matrix2& a, const Matrix2& b) {
    double m = 0.0;
    for (std::size_t e = 0; e < 4; ++e) m = std::max(m, std::abs(a[e] - b[e]));
    return m;
}

}  // namespace

Matrix2 reconstruct_density(const WireCutDecomposition& decomp, const Matrix2& rho) {
    constexpr double tol = 1e-10;
    if (std::abs(rho[1] - std::conj(rho[2])) > tol || std::abs(rho[0].imag()) > tol || std::abs(rho[3].imag()) > tol) {
        throw Error(ErrorCode::InvalidArgument, "density matrix is not Hermitian");
    }
    if (std::abs(rho[0].real() + rho[3].real() - 1.0) > tol) {
        throw Error(ErrorCode::InvalidArgument, "density matrix trace is not 1");
    }
    const double det = rho[0].real() * rho[3].real() - std::norm(rho[1]);
    if (rho[0].real() < -tol || rho[3].real() < -tol || det < -tol) {
        throw Error(ErrorCode::InvalidArgument, "density matrix is not positive semidefinite");
    }
    return channel(decomp, rho);
}

double identity_channel_error(const WireCutDecomposition& decomp) {
    double worst = 0.0;
    for (auto label : {PrepLabel::Zero, PrepLabel::One, PrepLabel::Plus, PrepLabel::PlusI}) {
        const Matrix2 rho = density_of(label);
        worst = std::max(worst, max_error(channel(decomp, rho), rho));
    }
    return worst;
}

void check_identity_channel(const WireCutDecomposition& decomp, double tolerance) {
    const double err = identity_channel_error(decomp);
    if (!(err <= tolerance)) {
        throw Error(ErrorCode::InvalidArgument,
                    fmt::format("decomposition does not reproduce the identity channel (max error {:.3e})", err));
    }
}

namespace {

void append_one_qubit(Circuit& target, const Circuit& gates, int qubit) {
    const int map[] = {qubit};
    target.append_mapped(gates, map);
}

}  // namespace

Fragment first_fragment(const QpdTerm& cut) {
    Fragment f;
    f.role = FragmentRole::First;
    f.k = cut.k;
    f.circuit.append(Gate::single(GateKind::H, 0));
    f.circuit.append(Gate::controlled(GateKind::CNOT, 0, 1));
    f.circuit.append(Gate::measure(0, 0));
    const auto change = basis_change(cut.observable);
    append_one_qubit(f.circuit, change.circuit, 1);
    f.observable_measured = change.needs_measurement;
    if (change.needs_measurement) f.circuit.append(Gate::measure(1, 1));
    return f;
}

Fragment middle_fragment(const QpdTerm& incoming, const QpdTerm& outgoing) {
    Fragment f;
    f.role = FragmentRole::Middle;
    f.k = incoming.k;
    f.s = outgoing.k;
    append_one_qubit(f.circuit, prep_circuit(incoming.prep), 0);
    f.circuit.append(Gate::controlled(GateKind::CNOT, 0, 1));
    f.circuit.append(Gate::measure(0, 0));
    const auto change = basis_change(outgoing.observable);
    append_one_qubit(f.circuit, change.circuit, 1);
    f.observable_measured = change.needs_measurement;
    if (change.needs_measurement) f.circuit.append(Gate::measure(1, 1));
    return f;
}

Fragment last_fragment(const QpdTerm& incoming) {
    Fragment f;
    f.role = FragmentRole::Last;
    f.s = incoming.k;
    append_one_qubit(f.circuit, prep_circuit(incoming.prep), 0);
    f.circuit.append(Gate::controlled(GateKind::CNOT, 0, 1));
    f.circuit.append(Gate::measure(0, 0));
    f.circuit.append(Gate::measure(1, 1));
    return f;
}

std::vector<QpdInstance> build_ghz_qpd_instances(const WireCutDecomposition& decomp, int n_cuts) {
    std::vector<QpdInstance> out;
    if (n_cuts == 2) {
        for (const auto& tk : decomp.terms) {
            for (const auto& ts : decomp.terms) {
                out.push_back({tk.k, ts.k, {first_fragment(tk), middle_fragment(tk, ts), last_fragment(ts)}});
            }
        }
    } else if (n_cuts == 1) {
        for (const auto& tk : decomp.terms) {
            Fragment second = last_fragment(tk);
            second.k = tk.k;
            second.s = 0;
            out.push_back({tk.k, 0, {first_fragment(tk), std::move(second)}});
        }
    } else {
        throw Error(ErrorCode::InvalidArgument, fmt::format("unsupported cut count {} (expected 1 or 2)", n_cuts));
    }
    return out;
}

int sign_function(int y1, int y2, int y3, int y4) {
    return (2 * y1 - 1) * (2 * y2 - 1) * (2 * y3 - 1) * (2 * y4 - 1);
}

FragmentDist fragment_dist_from_payload(const rt::Payload& payload, bool observable_measured) {
    FragmentDist out;
    out.observable_measured = observable_measured;
    if (const auto* dist = std::get_if<sim::ProbDist>(&payload)) {
        out.probabilities = dist->probabilities;
    } else if (const auto* hist = std::get_if<sim::ShotHistogram>(&payload)) {
        if (hist->shots == 0) throw Error(ErrorCode::InvalidArgument, "fragment histogram has zero shots");
        for (const auto& [bits, count] : hist->counts) {
            out.probabilities[bits] = static_cast<double>(count) / static_cast<double>(hist->shots);
        }
    } else {
        throw Error(ErrorCode::InvalidArgument, "fragment payload is neither a distribution nor a histogram");
    }
    return out;
}

namespace {

int bit(const std::string& bits, std::size_t i) { return bits.at(i) == '1' ? 1 : 0; }

/// Eigenvalue of the cut observable: slot-1 bit 0 -> +1, 1 -> -1; +1 when
/// the identity observable was not measured.
int observable_value(const FragmentDist& d, const std::string& bits) {
    if (!d.observable_measured) return 1;
    return bit(bits, 1) == 0 ? 1 : -1;
}

const InstanceResult& lookup(const ResultMap& results, int k, int s) {
    const auto it = results.find({k, s});
    if (it == results.end()) {
        throw Error(ErrorCode::MissingInstance, fmt::format("no fragment results for instance (k={}, s={})", k, s));
    }
    return it->second;
}

void require_outcomes(const FragmentDist& d, std::size_t width, int k, int s) {
    if (d.probabilities.empty()) {
        throw Error(ErrorCode::InvalidArgument, fmt::format("empty fragment distribution in instance ({}, {})", k, s));
    }
    for (const auto& [bits, _] : d.probabilities) {
        if (bits.size() != width) {
            throw Error(ErrorCode::InvalidArgument,
                        fmt::format("fragment outcome \"{}\" in instance ({}, {}) should have {} bits", bits, k, s, width));
        }
    }
}

std::size_t width_of(const FragmentDist& d) { return d.observable_measured ? 2 : 1; }

}  // namespace

QpdEstimate estimate_zzzz(const ResultMap& results, const WireCutDecomposition& decomp, rt::SimMode mode) {
    double value = 0.0;
    for (const auto& tk : decomp.terms) {
        for (const auto& ts : decomp.terms) {
            const auto& r = lookup(results, tk.k, ts.k);
            require_outcomes(r.first, width_of(r.first), tk.k, ts.k);
            require_outcomes(r.middle, width_of(r.middle), tk.k, ts.k);
            require_outcomes(r.last, 2, tk.k, ts.k);
            double inner = 0.0;
            for (const auto& [b1, p1] : r.first.probabilities) {
                const int o_k = observable_value(r.first, b1);
                for (const auto& [b2, p2] : r.middle.probabilities) {
                    const int o_s = observable_value(r.middle, b2);
                    for (const auto& [b3, p3] : r.last.probabilities) {
                        const int f = sign_function(bit(b1, 0), bit(b2, 0), bit(b3, 0), bit(b3, 1));
                        inner += o_k * o_s * f * p1 * p2 * p3;
                    }
                }
            }
            // gamma^2 (|c_k|/gamma)(|c_s|/gamma) sgn(c_k) sgn(c_s) == c_k c_s
            value += tk.coefficient * ts.coefficient * inner;
        }
    }
    QpdEstimate est;
    est.value = value;
    est.mean = value;
    est.mode = mode;
    est.values = {value};
    return est;
}

QpdEstimate estimate_zzz_single_cut(const ResultMap& results, const WireCutDecomposition& decomp) {
    double value = 0.0;
    for (const auto& tk : decomp.terms) {
        const auto& r = lookup(results, tk.k, 0);
        require_outcomes(r.first, width_of(r.first), tk.k, 0);
        require_outcomes(r.last, 2, tk.k, 0);
        double inner = 0.0;
        for (const auto& [b1, p1] : r.first.probabilities) {
            const int o_k = observable_value(r.first, b1);
            for (const auto& [b2, p2] : r.last.probabilities) {
                // Z eigenvalues 1 - 2y; with three outcome bits this differs in
                // sign from the product of (2y - 1).
                const int z = (1 - 2 * bit(b1, 0)) * (1 - 2 * bit(b2, 0)) * (1 - 2 * bit(b2, 1));
                inner += o_k * z * p1 * p2;
            }
        }
        value += tk.coefficient * inner;
    }
    QpdEstimate est;
    est.value = value;
    est.mean = value;
    est.values = {value};
    return est;
}

namespace {

FragmentDist exact_dist(const Fragment& f) {
    return {sim::simulate(f.circuit).dist.probabilities, f.observable_measured};
}

}  // namespace

ResultMap exact_results(const WireCutDecomposition& decomp, int n_cuts) {
    ResultMap out;
    for (const auto& inst : build_ghz_qpd_instances(decomp, n_cuts)) {
        InstanceResult r;
        r.first = exact_dist(inst.fragments.at(0));
        if (n_cuts == 2) {
            r.middle = exact_dist(inst.fragments.at(1));
            r.last = exact_dist(inst.fragments.at(2));
        } else {
            r.last = exact_dist(inst.fragments.at(1));
        }
        out.emplace(InstanceKey{inst.k, inst.s}, std::move(r));
    }
    return out;
}

namespace {

/// Inverse-CDF draw over a fragment distribution.
class OutcomeSampler {
public:
    explicit OutcomeSampler(const FragmentDist& d) : observable_measured_(d.observable_measured) {
        double running = 0.0;
        for (const auto& [bits, p] : d.probabilities) {
            running += p;
            keys_.push_back(bits);
            cdf_.push_back(running);
        }
    }

    const std::string& draw(Rng& rng) const {
        const double u = rng.uniform() * cdf_.back();
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.end()) --it;
        return keys_[static_cast<std::size_t>(it - cdf_.begin())];
    }

    bool observable_measured() const { return observable_measured_; }

private:
    bool observable_measured_;
    std::vector<std::string> keys_;
    std::vector<double> cdf_;
};

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

QpdEstimate importance_sampled_estimate(const WireCutDecomposition& decomp, std::uint64_t n_samples,
                                        std::uint64_t shots, std::uint64_t seed) {
    if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "importance sampling needs at least one sample");
    if (shots < 1) throw Error(ErrorCode::InvalidArgument, "importance sampling needs at least one shot per sample");

    const auto results = exact_results(decomp, 2);
    std::map<InstanceKey, std::array<OutcomeSampler, 3>> samplers;
    for (const auto& [key, r] : results) {
        samplers.emplace(key, std::array<OutcomeSampler, 3>{OutcomeSampler(r.first), OutcomeSampler(r.middle),
                                                            OutcomeSampler(r.last)});
    }

    const double gamma = decomp.gamma();
    std::vector<double> term_cdf;
    double running = 0.0;
    for (const auto& t : decomp.terms) {
        running += std::abs(t.coefficient) / gamma;
        term_cdf.push_back(running);
    }
    Rng rng(seed);
    const auto draw_term = [&]() -> const QpdTerm& {
        auto it = std::upper_bound(term_cdf.begin(), term_cdf.end(), rng.uniform() * running);
        if (it == term_cdf.end()) --it;
        return decomp.terms[static_cast<std::size_t>(it - term_cdf.begin())];
    };

    QpdEstimate est;
    est.mode = rt::SimMode::Sampled;
    est.shots = shots;
    est.seed = seed;
    est.values.reserve(n_samples);
    for (std::uint64_t n = 0; n < n_samples; ++n) {
        const QpdTerm& tk = draw_term();
        const QpdTerm& ts = draw_term();
        const auto& [first, middle, last] = samplers.at({tk.k, ts.k});
        double acc = 0.0;
        for (std::uint64_t shot = 0; shot < shots; ++shot) {
            const auto& b1 = first.draw(rng);
            const auto& b2 = middle.draw(rng);
            const auto& b3 = last.draw(rng);
            const int o_k = first.observable_measured() && b1[1] == '1' ? -1 : 1;
            const int o_s = middle.observable_measured() && b2[1] == '1' ? -1 : 1;
            acc += o_k * o_s * sign_function(bit(b1, 0), bit(b2, 0), bit(b3, 0), bit(b3, 1));
        }
        const double sign = (tk.coefficient < 0 ? -1.0 : 1.0) * (ts.coefficient < 0 ? -1.0 : 1.0);
        est.values.push_back(gamma * gamma * sign * acc / static_cast<double>(shots));
    }
    est.value = est.mean = mean_of(est.values);
    est.stddev = sample_std(est.values, est.mean);
    return est;
}

namespace {

std::string fragment_task_name(const Fragment& f, const QpdInstance& inst, bool dedup) {
    const int role = f.role == FragmentRole::First ? 1 : f.role == FragmentRole::Middle ? 2 : 3;
    if (!dedup) return fmt::format("f{}_k{}_s{}", role, inst.k, inst.s);
    std::string name = fmt::format("f{}", role);
    if (f.k != 0) name += fmt::format("_k{}", f.k);
    if (f.s != 0) name += fmt::format("_s{}", f.s);
    return name;
}

std::string_view mode_name(rt::SimMode mode) { return mode == rt::SimMode::Exact ? "exact" : "sampled"; }

}  // namespace

QpdGraph instances_to_graph(const rt::Runtime& runtime, const std::vector<QpdInstance>& instances,
                            const WireCutDecomposition& decomp, std::uint64_t shots, rt::SimMode mode,
                            std::uint64_t seed, GraphOptions options) {
    const auto devs = runtime.devices();
    if (std::none_of(devs.begin(), devs.end(), [](const auto& d) { return d.device_class == rt::DeviceClass::Qpu; })) {
        throw Error(ErrorCode::NoCapableDevice, "QPD fragments need at least one qpu device");
    }
    if (instances.empty()) throw Error(ErrorCode::InvalidArgument, "no QPD instances to schedule");
    const int n_cuts = static_cast<int>(instances.front().fragments.size()) - 1;

    QpdGraph out{rt::TaskGraph(seed), 0, 0};
    std::map<std::string, rt::TaskId> created;
    for (const auto& inst : instances) {
        for (const auto& f : inst.fragments) {
            auto name = fragment_task_name(f, inst, options.deduplicate);
            if (created.contains(name)) continue;
            rt::CircuitKernel kernel{f.circuit, shots, std::nullopt, mode};
            const auto id = out.graph.create_task(name, std::move(kernel), {},
                                                  rt::DeviceRequirement::of(rt::DeviceClass::Qpu));
            created.emplace(std::move(name), id);
        }
    }
    out.circuit_tasks = created.size();
    std::set<rt::TaskId> deps;
    for (const auto& [_, id] : created) deps.insert(id);
    rt::HostKernel reduce{std::string(kReduceKernel),
                          {std::string(mode_name(mode)), std::to_string(n_cuts),
                           options.deduplicate ? "dedup" : "full", decomposition_to_json(decomp)}};
    out.reduce = out.graph.create_task("reduce", std::move(reduce), std::move(deps),
                                       rt::DeviceRequirement::of(rt::DeviceClass::Host));
    return out;
}

namespace {

rt::HostOutput reduce_kernel(const rt::HostContext& ctx) {
    if (ctx.params.size() != 4) throw Error(ErrorCode::InvalidArgument, "reduction expects 4 parameters");
    const rt::SimMode mode = ctx.params[0] == "exact" ? rt::SimMode::Exact : rt::SimMode::Sampled;
    const int n_cuts = std::stoi(ctx.params[1]);
    const bool dedup = ctx.params[2] == "dedup";
    const auto decomp = decomposition_from_json(ctx.params[3]);

    const auto payload_of = [&](const Fragment& f, const QpdInstance& inst) {
        const auto name = fragment_task_name(f, inst, dedup);
        const auto it = ctx.inputs.find(name);
        if (it == ctx.inputs.end()) throw Error(ErrorCode::MissingInstance, "missing fragment task " + name);
        return fragment_dist_from_payload(it->second.payload, f.observable_measured);
    };

    ResultMap results;
    for (const auto& inst : build_ghz_qpd_instances(decomp, n_cuts)) {
        InstanceResult r;
        r.first = payload_of(inst.fragments.at(0), inst);
        if (n_cuts == 2) {
            r.middle = payload_of(inst.fragments.at(1), inst);
            r.last = payload_of(inst.fragments.at(2), inst);
        } else {
            r.last = payload_of(inst.fragments.at(1), inst);
        }
        results.emplace(InstanceKey{inst.k, inst.s}, std::move(r));
    }
    const auto est = n_cuts == 2 ? estimate_zzzz(results, decomp, mode) : estimate_zzz_single_cut(results, decomp);
    return {{est.value}, fmt::format("{:.12f}", est.value)};
}

}  // namespace

void register_qpd_kernels(rt::Runtime& runtime) {
    if (!runtime.has_host_kernel(std::string(kReduceKernel))) {
        runtime.register_host_kernel(std::string(kReduceKernel), reduce_kernel);
    }
}

QpdEstimate validate_run(const ValidationConfig& config, const WireCutDecomposition& decomp) {
    if (config.reps < 1) throw Error(ErrorCode::InvalidArgument, "reps must be at least 1");
    if (config.devices < 1) throw Error(ErrorCode::InvalidArgument, "need at least one qpu device");

    rt::Runtime runtime;
    runtime.add_devices(rt::DeviceClass::Qpu, config.devices);
    runtime.add_devices(rt::DeviceClass::Host, 1);
    register_qpd_kernels(runtime);

    const auto instances = build_ghz_qpd_instances(decomp, 2);
    std::vector<std::pair<rt::GraphHandle, rt::TaskId>> submitted;
    submitted.reserve(static_cast<std::size_t>(config.reps));
    for (int r = 0; r < config.reps; ++r) {
        auto g = instances_to_graph(runtime, instances, decomp, config.shots, config.mode,
                                    derive_seed(config.seed, static_cast<std::uint64_t>(r)), config.graph);
        const auto reduce = g.reduce;
        submitted.emplace_back(runtime.submit(std::move(g.graph), config.policy, false), reduce);
    }

    QpdEstimate est;
    est.mode = config.mode;
    est.shots = config.shots;
    est.seed = config.seed;
    est.reps = config.reps;
    for (const auto& [handle, reduce] : submitted) {
        const auto results = runtime.wait(handle);
        const auto& r = results.at(reduce);
        const auto* out = std::get_if<rt::HostOutput>(&r.payload);
        if (r.state != rt::TaskState::Completed || out == nullptr || out->values.empty()) {
            throw Error(ErrorCode::InvalidArgument, "QPD reduction failed: " + r.error);
        }
        est.values.push_back(out->values.front());
    }
    est.mean = mean_of(est.values);
    est.value = est.mean;
    est.stddev = sample_std(est.values, est.mean);
    return est;
}

std::string validation_csv(const QpdEstimate& estimate) {
    std::string out = "rep,value\n";
    for (std::size_t i = 0; i < estimate.values.size(); ++i) out += fmt::format("{},{}\n", i, estimate.values[i]);
    out += fmt::format("mean,{}\nstd,{}\n", estimate.mean, estimate.stddev);
    return out;
}

}  // namespace qtask::qpd
