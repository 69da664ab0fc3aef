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

#include "cli.hpp"

#include "qtask/error.hpp"
#include "qtask/graph_json.hpp"
#include "qtask/qir.hpp"
#include "qtask/qpd.hpp"
#include "qtask/runtime.hpp"
#include "qtask/simulator.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

namespace qtask::cli {
namespace {

struct ExecOptions {
    std::string file;
    std::string accelerator{"statevector"};
    std::uint64_t shots{1024};
    std::uint64_t seed{0};
    bool probs{false};
};

struct GraphOptions {
    std::string file;
    std::optional<std::string> policy;
    std::optional<std::uint64_t> seed;
    std::string kernel_dir;
};

struct QpdOptions {
    std::uint64_t shots{1024};
    int reps{1};
    int devices{8};
    std::string mode{"sampled"};
    std::uint64_t seed{0};
    std::string csv;
    std::string decomposition;
    bool no_dedup{false};
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::ParseError:
        case ErrorCode::UnsupportedIntrinsic:
        case ErrorCode::UnsupportedControlFlow:
        case ErrorCode::LoweringError:
        case ErrorCode::SchemaError:
        case ErrorCode::CycleDetected:
        case ErrorCode::InvalidArgument:
            return kExitUsage;
        default:
            return kExitFailure;
    }
}

int cmd_exec(const ExecOptions& opt, std::ostream& out, std::ostream& err) {
    rt::Accelerator accel{};
    try {
        accel = rt::accelerator_from_string(opt.accelerator);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    const auto lowered = qir::lower_to_circuit(qir::load_qir_file(opt.file));
    if (opt.probs) {
        const auto dist = sim::reorder(sim::simulate(lowered.circuit).dist, lowered.output_order);
        out << sim::format_probabilities(dist);
        return kExitOk;
    }
    if (opt.shots == 0) err << "note: 0 shots requested; pass --probs for the exact distribution\n";
    const auto payload = rt::run_qir_kernel(lowered, accel, opt.shots, opt.seed);
    sim::ShotHistogram hist;
    if (const auto* h = std::get_if<sim::ShotHistogram>(&payload)) hist = *h;
    hist.shots = opt.shots;
    out << sim::format_histogram(hist);
    return kExitOk;
}

void print_payload(const rt::Payload& payload, std::ostream& out) {
    if (const auto* h = std::get_if<sim::ShotHistogram>(&payload)) {
        for (const auto& [bits, count] : h->counts) out << "  " << bits << " " << count << "\n";
        out << "  shots " << h->shots << "\n";
    } else if (const auto* d = std::get_if<sim::ProbDist>(&payload)) {
        for (const auto& [bits, p] : d->probabilities) out << fmt::format("  {} {:.12g}\n", bits, p);
    } else if (const auto* o = std::get_if<rt::HostOutput>(&payload)) {
        if (!o->text.empty()) out << "  " << o->text << "\n";
    }
}

void register_builtin_kernels(rt::Runtime& runtime) {
    runtime.register_host_kernel("echo", [](const rt::HostContext& ctx) {
        rt::HostOutput out;
        for (std::size_t i = 0; i < ctx.params.size(); ++i) out.text += (i ? " " : "") + ctx.params[i];
        return out;
    });
    runtime.register_host_kernel("sum_shots", [](const rt::HostContext& ctx) {
        double total = 0;
        for (const auto& [_, r] : ctx.inputs) {
            if (const auto* h = std::get_if<sim::ShotHistogram>(&r.payload)) total += static_cast<double>(h->shots);
        }
        return rt::HostOutput{{total}, fmt::format("total_shots {}", total)};
    });
    runtime.register_host_kernel("fail", [](const rt::HostContext& ctx) -> rt::HostOutput {
        throw std::runtime_error(ctx.params.empty() ? "requested failure" : ctx.params.front());
    });
    qpd::register_qpd_kernels(runtime);
}

int cmd_graph(const GraphOptions& opt, std::ostream& out, std::ostream& err) {
    const std::filesystem::path path(opt.file);
    auto spec = rt::parse_graph_json(read_file(opt.file), path.parent_path());
    if (opt.policy) spec.policy = rt::policy_from_string(*opt.policy);
    rt::TaskGraph graph = std::move(spec.graph);
    if (opt.seed) {
        rt::TaskGraph reseeded(*opt.seed);
        for (const auto& t : graph.tasks()) reseeded.create_task(t.name, t.kernel, t.deps, t.requirement);
        graph = std::move(reseeded);
    }

    rt::Runtime runtime;
    runtime.set_kernel_directory(opt.kernel_dir.empty() ? path.parent_path() : std::filesystem::path(opt.kernel_dir));
    runtime.add_devices(rt::DeviceClass::Qpu, spec.qpu_devices);
    runtime.add_devices(rt::DeviceClass::Host, spec.host_devices);
    register_builtin_kernels(runtime);

    const auto names = [&] {
        std::vector<std::string> n;
        for (const auto& t : graph.tasks()) n.push_back(t.name);
        return n;
    }();
    const auto handle = runtime.submit(std::move(graph), spec.policy, true);
    const auto results = runtime.wait(handle);

    bool failed = false;
    for (const auto& [id, r] : results) {
        out << names[id] << " " << (r.device ? std::to_string(*r.device) : std::string("-")) << " "
            << rt::to_string(r.state) << "\n";
        if (r.state == rt::TaskState::Failed) {
            failed = true;
            out << "  error " << r.error << "\n";
        } else {
            print_payload(r.payload, out);
        }
    }
    if (failed) err << "error: one or more tasks failed\n";
    return failed ? kExitFailure : kExitOk;
}

int cmd_ghz_qpd(const QpdOptions& opt, std::ostream& out, std::ostream& err) {
    if (opt.devices < 1) {
        err << "error: --devices must be at least 1\n";
        return kExitUsage;
    }
    if (opt.reps < 1) {
        err << "error: --reps must be at least 1\n";
        return kExitUsage;
    }
    if (opt.mode != "exact" && opt.mode != "sampled") {
        err << "error: --mode must be exact or sampled, got \"" << opt.mode << "\"\n";
        return kExitUsage;
    }
    const auto decomp = opt.decomposition.empty() ? qpd::canonical_wire_cut()
                                                  : qpd::decomposition_from_json(read_file(opt.decomposition));
    qpd::ValidationConfig config;
    config.reps = opt.reps;
    config.shots = opt.shots;
    config.seed = opt.seed;
    config.devices = opt.devices;
    config.mode = opt.mode == "exact" ? rt::SimMode::Exact : rt::SimMode::Sampled;
    config.graph.deduplicate = !opt.no_dedup;

    const auto est = qpd::validate_run(config, decomp);
    out << fmt::format("estimate {:.9f}\n", est.mean);
    out << fmt::format("std {}\n", est.stddev);
    if (!opt.csv.empty()) {
        std::ofstream csv(opt.csv);
        if (!csv) {
            err << "error: cannot write " << opt.csv << "\n";
            return kExitFailure;
        }
        csv << qpd::validation_csv(est);
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hybrid classical-quantum task runtime", "qtask"};
    app.require_subcommand(1);

    ExecOptions exec;
    auto* exec_cmd = app.add_subcommand("exec", "Run one QIR program and print its histogram");
    exec_cmd->add_option("file", exec.file, "QIR (.ll) file")->required();
    exec_cmd->add_option("-a,--accelerator", exec.accelerator, "statevector or trajectory");
    exec_cmd->add_option("-s,--shots", exec.shots, "Number of shots");
    exec_cmd->add_option("--seed", exec.seed, "RNG seed");
    exec_cmd->add_flag("--probs", exec.probs, "Print the exact outcome distribution");

    GraphOptions graph;
    auto* graph_cmd = app.add_subcommand("graph", "Run a task graph described in JSON");
    graph_cmd->add_option("file", graph.file, "Graph JSON file")->required();
    graph_cmd->add_option("--policy", graph.policy, "default, roundrobin or explicit");
    graph_cmd->add_option("--seed", graph.seed, "Override the graph seed");
    graph_cmd->add_option("--kernel-dir", graph.kernel_dir, "Directory for .ll kernel names");

    QpdOptions ghz;
    auto* ghz_cmd = app.add_subcommand("ghz-qpd", "Wire-cut GHZ-4 experiment estimating <ZZZZ>");
    ghz_cmd->add_option("--shots", ghz.shots, "Shots per fragment");
    ghz_cmd->add_option("--reps", ghz.reps, "Repetitions");
    ghz_cmd->add_option("--devices", ghz.devices, "Simulated qpu devices");
    ghz_cmd->add_option("--mode", ghz.mode, "exact or sampled");
    ghz_cmd->add_option("--seed", ghz.seed, "RNG seed");
    ghz_cmd->add_option("--csv", ghz.csv, "Write per-rep values to this CSV file");
    ghz_cmd->add_option("--decomposition", ghz.decomposition, "Decomposition table JSON");
    ghz_cmd->add_flag("--no-dedup", ghz.no_dedup, "Schedule three fragments per instance (192 tasks)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*exec_cmd) return cmd_exec(exec, out, err);
        if (*graph_cmd) return cmd_graph(graph, out, err);
        return cmd_ghz_qpd(ghz, out, err);
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace qtask::cli
