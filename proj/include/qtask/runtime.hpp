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
#include "qtask/qir.hpp"
#include "qtask/scheduler.hpp"
#include "qtask/simulator.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qtask::rt {

using MemId = int;

enum class TaskState { Created, Submitted, Ready, Running, Completed, Failed };
std::string_view to_string(TaskState state);

enum class SimMode { Exact, Sampled };
enum class Accelerator { Statevector, Trajectory };

std::string_view to_string(Accelerator accel);
/// Accepts "statevector" and "trajectory".
Accelerator accelerator_from_string(std::string_view text);

/// Callback kernel run on a host-class device. Parameters are strings in the
/// order the caller chose.
struct HostKernel {
    std::string name;
    std::vector<std::string> params;
};

/// A QIR module, given inline or as a path. With zero shots on the
/// statevector accelerator the payload is the exact distribution.
struct QirKernel {
    std::string source;
    std::filesystem::path path;
    std::uint64_t shots{1024};
    std::optional<std::uint64_t> seed;
    Accelerator accelerator{Accelerator::Statevector};
};

struct CircuitKernel {
    Circuit circuit{1};
    std::uint64_t shots{1024};
    std::optional<std::uint64_t> seed;
    SimMode mode{SimMode::Sampled};
};

/// Resolved when the task is dispatched: names ending in `.ll` become a
/// QirKernel loaded from the runtime's kernel directory, anything else a
/// HostKernel.
struct NamedKernel {
    std::string name;
    std::vector<std::string> params;
    std::uint64_t shots{1024};
};

using KernelSpec = std::variant<HostKernel, QirKernel, CircuitKernel, NamedKernel>;

enum class Access { Read, Write, ReadWrite };

struct MemUse {
    MemId id{0};
    Access access{Access::Read};
};

struct Task {
    TaskId id{0};
    std::string name;
    KernelSpec kernel;
    std::set<TaskId> deps;
    DeviceRequirement requirement;
    std::vector<MemUse> memory;
};

struct HostOutput {
    std::vector<double> values;
    std::string text;

    bool operator==(const HostOutput&) const = default;
};

using Payload = std::variant<std::monostate, sim::ShotHistogram, sim::ProbDist, HostOutput>;

/// Outcome of a terminal task. Sequence numbers come from one logical clock
/// per runtime, so they totally order state changes across devices.
struct TaskResult {
    TaskState state{TaskState::Created};
    std::string error;
    Payload payload;
    int transfer_count{0};
    std::optional<DeviceId> device;
    std::uint64_t seed{0};
    std::uint64_t ready_seq{0};
    std::uint64_t start_seq{0};
    std::uint64_t end_seq{0};
};

/// Execution step of a simulated QPU device for a lowered QIR program.
/// Histogram and distribution keys follow the program's output order.
Payload run_qir_kernel(const qir::LoweredKernel& kernel, Accelerator accelerator, std::uint64_t shots,
                       std::uint64_t seed);
Payload run_circuit_kernel(const CircuitKernel& kernel, std::uint64_t seed);

/// Builder for a task DAG. Ids are creation indices.
class TaskGraph {
public:
    explicit TaskGraph(std::uint64_t seed = 0) : seed_(seed) {}

    /// Throws UnknownDependency when a dep id was not created yet.
    TaskId create_task(std::string name, KernelSpec kernel, std::set<TaskId> deps = {},
                       DeviceRequirement requirement = DeviceRequirement::any());
    /// Adds an edge between existing tasks; may close a cycle, which submit
    /// rejects.
    void add_dependency(TaskId task, TaskId dep);
    void use_memory(TaskId task, MemId mem, Access access);

    const std::vector<Task>& tasks() const noexcept { return tasks_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t size() const noexcept { return tasks_.size(); }
    std::optional<TaskId> find(std::string_view name) const;

private:
    std::uint64_t seed_;
    std::vector<Task> tasks_;
};

/// Returns a cycle as a list of task ids if the graph has one.
std::optional<std::vector<TaskId>> find_cycle(const TaskGraph& graph);

struct HostContext {
    const std::vector<std::string>& params;
    DeviceId device;
    std::uint64_t seed;
    /// Results of the task's direct dependencies, keyed by task name.
    const std::map<std::string, TaskResult>& inputs;
    std::vector<std::span<const std::byte>> reads;
    std::vector<std::span<std::byte>> writes;
};

using HostFn = std::function<HostOutput(const HostContext&)>;

struct DeviceInfo {
    DeviceId id{0};
    DeviceClass device_class{DeviceClass::Host};
    std::set<KernelKind> kinds;
    std::string name;

    static DeviceInfo host(DeviceId id) { return {id, DeviceClass::Host, {KernelKind::Host}, "host"}; }
    static DeviceInfo qpu(DeviceId id) {
        return {id, DeviceClass::Qpu, {KernelKind::Qir, KernelKind::Circuit}, "statevector-qpu"};
    }
};

struct GraphHandle {
    std::uint64_t id{0};
};

struct WaitSnapshot {
    bool complete{false};
    std::map<TaskId, TaskState> states;
    /// Terminal tasks only.
    std::map<TaskId, TaskResult> results;
};

struct DeviceStats {
    std::uint64_t tasks_run{0};
    int max_concurrent{0};
};

/// In-process heterogeneous runtime: a registry of devices, each with its
/// own worker thread and FIFO queue, and a coordinator that promotes tasks to
/// Ready as dependencies complete and places them with the chosen policy.
class Runtime {
public:
    Runtime();
    ~Runtime();
    Runtime(const Runtime&) = delete;
    Runtime& operator=(const Runtime&) = delete;

    /// Throws DuplicateId.
    DeviceId register_device(DeviceInfo info);
    /// Registers `count` devices of a class with the next free ids.
    std::vector<DeviceId> add_devices(DeviceClass cls, int count);
    std::vector<DeviceInfo> devices() const;

    /// Throws DuplicateId for a name already registered.
    void register_host_kernel(const std::string& name, HostFn fn);
    bool has_host_kernel(const std::string& name) const;

    /// Directory that `.ll` kernel names are resolved against.
    void set_kernel_directory(std::filesystem::path dir);

    MemId dmem_create(std::size_t bytes);
    void dmem_write_host(MemId id, std::span<const std::byte> data);
    std::vector<std::byte> dmem_read_host(MemId id);
    void dmem_release(MemId id);
    /// Total transfers performed for this object so far.
    int dmem_transfers(MemId id) const;

    /// Rejects cyclic graphs (CycleDetected) and unknown memory objects
    /// before any state changes. With `sync` the call returns only after
    /// every task is terminal.
    GraphHandle submit(TaskGraph graph, Policy policy = Policy::Default, bool sync = false);

    /// Blocks until every task is terminal; failures are reported in the
    /// results. Repeated calls return the same map.
    std::map<TaskId, TaskResult> wait(GraphHandle handle);
    WaitSnapshot wait_for(GraphHandle handle, std::chrono::milliseconds timeout);

    const TaskGraph& graph(GraphHandle handle) const;
    std::map<DeviceId, DeviceStats> device_stats() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace qtask::rt
