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

#include "qtask/runtime.hpp"

#include "qtask/error.hpp"
#include "qtask/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace qtask::rt {

std::string_view to_string(TaskState state) {
    switch (state) {
        case TaskState::Created: return "Created";
        case TaskState::Submitted: return "Submitted";
        case TaskState::Ready: return "Ready";
        case TaskState::Running: return "Running";
        case TaskState::Completed: return "Completed";
        case TaskState::Failed: return "Failed";
    }
    return "?";
}

std::string_view to_string(Accelerator accel) {
    return accel == Accelerator::Statevector ? "statevector" : "trajectory";
}

Accelerator accelerator_from_string(std::string_view text) {
    if (text == "statevector") return Accelerator::Statevector;
    if (text == "trajectory") return Accelerator::Trajectory;
    throw Error(ErrorCode::InvalidArgument,
                "unknown accelerator \"" + std::string(text) + "\"; valid accelerators: statevector, trajectory");
}

Payload run_qir_kernel(const qir::LoweredKernel& kernel, Accelerator accelerator, std::uint64_t shots,
                       std::uint64_t seed) {
    if (accelerator == Accelerator::Trajectory) {
        const auto hist = sim::run_trajectory(kernel.circuit, shots, seed);
        return sim::reorder(hist, kernel.circuit.result_slots(), kernel.output_order);
    }
    const auto dist = sim::reorder(sim::simulate(kernel.circuit).dist, kernel.output_order);
    if (shots == 0) return dist;
    return sim::sample_shots(dist, shots, seed);
}

Payload run_circuit_kernel(const CircuitKernel& kernel, std::uint64_t seed) {
    if (kernel.mode == SimMode::Exact) return sim::simulate(kernel.circuit).dist;
    try {
        return sim::sample_shots(sim::simulate(kernel.circuit).dist, kernel.shots, seed);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NeedsTrajectory) throw;
    }
    return sim::run_trajectory(kernel.circuit, kernel.shots, seed);
}

TaskId TaskGraph::create_task(std::string name, KernelSpec kernel, std::set<TaskId> deps,
                              DeviceRequirement requirement) {
    const auto id = static_cast<TaskId>(tasks_.size());
    for (TaskId d : deps) {
        if (d >= id) {
            throw Error(ErrorCode::UnknownDependency,
                        fmt::format("task \"{}\" depends on unknown task id {}", name, d));
        }
    }
    tasks_.push_back(Task{id, std::move(name), std::move(kernel), std::move(deps), requirement, {}});
    return id;
}

void TaskGraph::add_dependency(TaskId task, TaskId dep) {
    if (task >= tasks_.size() || dep >= tasks_.size()) {
        throw Error(ErrorCode::UnknownDependency, fmt::format("edge {} -> {} names an unknown task", dep, task));
    }
    tasks_[task].deps.insert(dep);
}

void TaskGraph::use_memory(TaskId task, MemId mem, Access access) {
    if (task >= tasks_.size()) throw Error(ErrorCode::InvalidArgument, fmt::format("unknown task {}", task));
    tasks_[task].memory.push_back({mem, access});
}

std::optional<TaskId> TaskGraph::find(std::string_view name) const {
    for (const auto& t : tasks_) {
        if (t.name == name) return t.id;
    }
    return std::nullopt;
}

std::optional<std::vector<TaskId>> find_cycle(const TaskGraph& graph) {
    const auto& tasks = graph.tasks();
    enum class Mark { White, Grey, Black };
    std::vector<Mark> mark(tasks.size(), Mark::White);
    std::vector<TaskId> stack;

    // Iterative DFS over dependency edges; a grey hit closes a cycle.
    for (TaskId root = 0; root < tasks.size(); ++root) {
        if (mark[root] != Mark::White) continue;
        std::vector<std::pair<TaskId, std::set<TaskId>::const_iterator>> frames;
        frames.emplace_back(root, tasks[root].deps.begin());
        mark[root] = Mark::Grey;
        stack.push_back(root);
        while (!frames.empty()) {
            auto& [node, it] = frames.back();
            if (it == tasks[node].deps.end()) {
                mark[node] = Mark::Black;
                stack.pop_back();
                frames.pop_back();
                continue;
            }
            const TaskId next = *it++;
            if (mark[next] == Mark::Grey) {
                const auto start = std::find(stack.begin(), stack.end(), next);
                return std::vector<TaskId>(start, stack.end());
            }
            if (mark[next] == Mark::White) {
                mark[next] = Mark::Grey;
                stack.push_back(next);
                frames.emplace_back(next, tasks[next].deps.begin());
            }
        }
    }
    return std::nullopt;
}

struct Runtime::Impl {
    struct Job {
        std::uint64_t graph;
        TaskId task;
    };

    struct Device {
        DeviceInfo info;
        std::deque<Job> queue;
        bool busy{false};
        int running_now{0};
        DeviceStats stats;
        std::condition_variable cv;
        std::thread worker;
    };

    struct MemObject {
        std::size_t bytes{0};
        bool alive{true};
        std::vector<std::byte> host;
        bool host_clean{true};
        std::map<DeviceId, std::vector<std::byte>> copies;
        std::map<DeviceId, bool> clean;
        int transfers{0};
    };

    struct GraphState {
        TaskGraph graph;
        Policy policy{Policy::Default};
        std::vector<TaskState> states;
        std::vector<TaskResult> results;
        std::vector<std::size_t> remaining;
        std::vector<std::vector<TaskId>> dependents;
        std::set<TaskId> ready;  // Ready and not yet placed on a queue
        std::size_t terminal{0};
        std::condition_variable done;

        bool complete() const { return terminal == states.size(); }
    };

    mutable std::mutex mu;
    std::uint64_t clock{0};
    std::map<DeviceId, std::unique_ptr<Device>> devices;
    std::map<std::string, HostFn> host_kernels;
    std::filesystem::path kernel_dir{"."};
    std::map<MemId, MemObject> mems;
    MemId next_mem{0};
    std::map<std::uint64_t, std::unique_ptr<GraphState>> graphs;
    std::set<std::uint64_t> active;
    std::uint64_t next_graph{0};
    std::size_t rr_cursor{0};
    bool stopping{false};
    std::condition_variable all_done;

    // Everything below runs with `mu` held unless noted.

    GraphState& graph(std::uint64_t id) {
        const auto it = graphs.find(id);
        if (it == graphs.end()) throw Error(ErrorCode::InvalidArgument, fmt::format("unknown graph handle {}", id));
        return *it->second;
    }

    static KernelKind kind_of(const KernelSpec& kernel) {
        struct Visitor {
            KernelKind operator()(const HostKernel&) const { return KernelKind::Host; }
            KernelKind operator()(const QirKernel&) const { return KernelKind::Qir; }
            KernelKind operator()(const CircuitKernel&) const { return KernelKind::Circuit; }
            KernelKind operator()(const NamedKernel& k) const {
                return k.name.ends_with(".ll") ? KernelKind::Qir : KernelKind::Host;
            }
        };
        return std::visit(Visitor{}, kernel);
    }

    void make_ready(GraphState& g, TaskId t) {
        g.states[t] = TaskState::Ready;
        g.results[t].state = TaskState::Ready;
        g.results[t].ready_seq = ++clock;
        g.ready.insert(t);
    }

    void mark_terminal(std::uint64_t gid, GraphState& g) {
        ++g.terminal;
        if (g.complete()) {
            active.erase(gid);
            g.done.notify_all();
            if (active.empty()) all_done.notify_all();
        }
    }

    void fail(std::uint64_t gid, GraphState& g, TaskId t, std::string error) {
        g.states[t] = TaskState::Failed;
        auto& r = g.results[t];
        r.state = TaskState::Failed;
        r.error = std::move(error);
        r.end_seq = ++clock;
        g.ready.erase(t);
        mark_terminal(gid, g);

        std::vector<TaskId> frontier{t};
        while (!frontier.empty()) {
            const TaskId cur = frontier.back();
            frontier.pop_back();
            for (TaskId dep : g.dependents[cur]) {
                if (g.states[dep] != TaskState::Submitted) continue;
                g.states[dep] = TaskState::Failed;
                auto& dr = g.results[dep];
                dr.state = TaskState::Failed;
                dr.error = "dependency-failed: " + g.graph.tasks()[cur].name;
                dr.end_seq = ++clock;
                mark_terminal(gid, g);
                frontier.push_back(dep);
            }
        }
    }

    void complete(std::uint64_t gid, GraphState& g, TaskId t) {
        g.states[t] = TaskState::Completed;
        g.results[t].state = TaskState::Completed;
        g.results[t].end_seq = ++clock;
        for (TaskId dep : g.dependents[t]) {
            if (--g.remaining[dep] == 0 && g.states[dep] == TaskState::Submitted) make_ready(g, dep);
        }
        mark_terminal(gid, g);
    }

    std::vector<DeviceView> device_views() const {
        std::vector<DeviceView> views;
        views.reserve(devices.size());
        for (const auto& [id, d] : devices) {
            views.push_back({id, d->info.device_class, d->info.kinds, !d->busy && d->queue.empty()});
        }
        return views;
    }

    void dispatch() {
        if (active.empty()) return;
        auto views = device_views();
        // Copy: failing a task can complete a graph and erase it from `active`.
        const std::vector<std::uint64_t> order(active.begin(), active.end());
        for (std::uint64_t gid : order) {
            auto& g = *graphs.at(gid);
            if (g.ready.empty()) continue;
            std::vector<ReadyTask> ready;
            ready.reserve(g.ready.size());
            for (TaskId t : g.ready) {
                const auto& task = g.graph.tasks()[t];
                ready.push_back({t, kind_of(task.kernel), task.requirement});
            }
            const auto decision = schedule_next(ready, views, g.policy, rr_cursor);
            rr_cursor = decision.rr_cursor;
            for (const auto& a : decision.assigned) {
                g.ready.erase(a.task);
                auto& dev = *devices.at(a.device);
                dev.queue.push_back({gid, a.task});
                dev.cv.notify_one();
                for (auto& v : views) {
                    if (v.id == a.device) v.idle = false;
                }
            }
            for (const auto& r : decision.rejected) fail(gid, g, r.task, r.reason);
        }
    }

    struct Prepared {
        KernelSpec kernel;
        std::uint64_t seed{0};
        HostFn host_fn;
        std::map<std::string, TaskResult> inputs;
        std::vector<std::span<const std::byte>> reads;
        std::vector<std::span<std::byte>> writes;
        std::string error;
    };

    void fetch_to_device(MemObject& obj, DeviceId d, int& transfers) {
        auto& copy = obj.copies[d];
        copy.resize(obj.bytes);
        if (obj.clean[d]) return;
        if (obj.host_clean) {
            std::copy(obj.host.begin(), obj.host.end(), copy.begin());
        } else {
            const auto src = std::find_if(obj.clean.begin(), obj.clean.end(), [](const auto& kv) { return kv.second; });
            std::copy(obj.copies.at(src->first).begin(), obj.copies.at(src->first).end(), copy.begin());
        }
        obj.clean[d] = true;
        ++obj.transfers;
        ++transfers;
    }

    Prepared prepare(GraphState& g, TaskId t, DeviceId d) {
        const Task& task = g.graph.tasks()[t];
        Prepared p;
        p.seed = g.results[t].seed;
        p.kernel = task.kernel;
        if (const auto* named = std::get_if<NamedKernel>(&p.kernel)) {
            if (named->name.ends_with(".ll")) {
                QirKernel q;
                q.path = kernel_dir / named->name;
                q.shots = named->shots;
                p.kernel = std::move(q);
            } else {
                p.kernel = HostKernel{named->name, named->params};
            }
        }
        if (const auto* host = std::get_if<HostKernel>(&p.kernel)) {
            const auto it = host_kernels.find(host->name);
            if (it == host_kernels.end()) {
                p.error = "unknown-kernel: no host kernel named \"" + host->name + "\"";
                return p;
            }
            p.host_fn = it->second;
            for (TaskId dep : task.deps) p.inputs.emplace(g.graph.tasks()[dep].name, g.results[dep]);
        }
        int& transfers = g.results[t].transfer_count;
        for (const auto& use : task.memory) {
            const auto it = mems.find(use.id);
            if (it == mems.end() || !it->second.alive) {
                p.error = fmt::format("use-after-free: memory object {} is not alive", use.id);
                return p;
            }
            auto& obj = it->second;
            if (use.access != Access::Write) fetch_to_device(obj, d, transfers);
            auto& copy = obj.copies[d];
            copy.resize(obj.bytes);
            if (use.access == Access::Read) {
                p.reads.emplace_back(copy.data(), copy.size());
            } else {
                p.writes.emplace_back(copy.data(), copy.size());
            }
        }
        return p;
    }

    void publish_writes(const Task& task, DeviceId d) {
        for (const auto& use : task.memory) {
            if (use.access == Access::Read) continue;
            auto& obj = mems.at(use.id);
            obj.host_clean = false;
            for (auto& [dev, clean] : obj.clean) clean = false;
            obj.clean[d] = true;
        }
    }

    void worker_loop(Device& dev) {
        std::unique_lock lk(mu);
        for (;;) {
            dev.cv.wait(lk, [&] { return stopping || !dev.queue.empty(); });
            if (dev.queue.empty()) return;
            const Job job = dev.queue.front();
            dev.queue.pop_front();
            dev.busy = true;
            ++dev.running_now;
            dev.stats.max_concurrent = std::max(dev.stats.max_concurrent, dev.running_now);

            const std::uint64_t gid = job.graph;
            auto& g = *graphs.at(gid);
            const TaskId t = job.task;
            g.states[t] = TaskState::Running;
            g.results[t].state = TaskState::Running;
            g.results[t].start_seq = ++clock;
            g.results[t].device = dev.info.id;

            Prepared prep = prepare(g, t, dev.info.id);
            Payload payload;
            std::string error = prep.error;
            if (error.empty()) {
                lk.unlock();
                try {
                    payload = execute(prep, dev.info.id);
                } catch (const Error& e) {
                    error = fmt::format("{}: {}", to_string(e.code()), e.what());
                } catch (const std::exception& e) {
                    error = e.what();
                }
                lk.lock();
            }

            --dev.running_now;
            ++dev.stats.tasks_run;
            dev.busy = false;
            if (error.empty()) {
                publish_writes(g.graph.tasks()[t], dev.info.id);
                g.results[t].payload = std::move(payload);
                complete(gid, g, t);
            } else {
                fail(gid, g, t, std::move(error));
            }
            dispatch();
        }
    }

    // Runs without the lock.
    static Payload execute(Prepared& prep, DeviceId device) {
        struct Visitor {
            Prepared& prep;
            DeviceId device;

            Payload operator()(const HostKernel& k) const {
                HostContext ctx{k.params, device, prep.seed, prep.inputs, prep.reads, prep.writes};
                return prep.host_fn(ctx);
            }
            Payload operator()(const QirKernel& k) const {
                std::string text = k.source;
                if (text.empty()) {
                    std::ifstream in(k.path);
                    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open kernel " + k.path.string());
                    std::ostringstream buf;
                    buf << in.rdbuf();
                    text = buf.str();
                }
                const auto lowered = qir::lower_to_circuit(qir::parse_qir(text));
                return run_qir_kernel(lowered, k.accelerator, k.shots, prep.seed);
            }
            Payload operator()(const CircuitKernel& k) const { return run_circuit_kernel(k, prep.seed); }
            Payload operator()(const NamedKernel& k) const {
                throw Error(ErrorCode::UnknownKernel, "unresolved kernel " + k.name);
            }
        };
        return std::visit(Visitor{prep, device}, prep.kernel);
    }

    void start_device(DeviceInfo info) {
        auto dev = std::make_unique<Device>();
        dev->info = std::move(info);
        Device& ref = *dev;
        devices.emplace(ref.info.id, std::move(dev));
        ref.worker = std::thread([this, &ref] { worker_loop(ref); });
    }
};

Runtime::Runtime() : impl_(std::make_unique<Impl>()) {}

Runtime::~Runtime() {
    {
        std::unique_lock lk(impl_->mu);
        impl_->all_done.wait(lk, [&] { return impl_->active.empty(); });
        impl_->stopping = true;
        for (auto& [_, d] : impl_->devices) d->cv.notify_all();
    }
    for (auto& [_, d] : impl_->devices) {
        if (d->worker.joinable()) d->worker.join();
    }
}

DeviceId Runtime::register_device(DeviceInfo info) {
    std::lock_guard lk(impl_->mu);
    if (impl_->devices.contains(info.id)) {
        throw Error(ErrorCode::DuplicateId, fmt::format("device id {} is already registered", info.id));
    }
    const DeviceId id = info.id;
    impl_->start_device(std::move(info));
    impl_->dispatch();
    return id;
}

std::vector<DeviceId> Runtime::add_devices(DeviceClass cls, int count) {
    std::lock_guard lk(impl_->mu);
    std::vector<DeviceId> ids;
    DeviceId next = impl_->devices.empty() ? 0 : impl_->devices.rbegin()->first + 1;
    for (int i = 0; i < count; ++i) {
        const DeviceId id = next++;
        impl_->start_device(cls == DeviceClass::Host ? DeviceInfo::host(id) : DeviceInfo::qpu(id));
        ids.push_back(id);
    }
    impl_->dispatch();
    return ids;
}

std::vector<DeviceInfo> Runtime::devices() const {
    std::lock_guard lk(impl_->mu);
    std::vector<DeviceInfo> out;
    for (const auto& [_, d] : impl_->devices) out.push_back(d->info);
    return out;
}

void Runtime::register_host_kernel(const std::string& name, HostFn fn) {
    std::lock_guard lk(impl_->mu);
    if (!impl_->host_kernels.emplace(name, std::move(fn)).second) {
        throw Error(ErrorCode::DuplicateId, "host kernel \"" + name + "\" is already registered");
    }
}

bool Runtime::has_host_kernel(const std::string& name) const {
    std::lock_guard lk(impl_->mu);
    return impl_->host_kernels.contains(name);
}

void Runtime::set_kernel_directory(std::filesystem::path dir) {
    std::lock_guard lk(impl_->mu);
    impl_->kernel_dir = std::move(dir);
}

MemId Runtime::dmem_create(std::size_t bytes) {
    std::lock_guard lk(impl_->mu);
    const MemId id = impl_->next_mem++;
    auto& obj = impl_->mems[id];
    obj.bytes = bytes;
    obj.host.assign(bytes, std::byte{0});
    return id;
}

namespace {

template <typename Obj>
Obj& live_object(std::map<MemId, Obj>& mems, MemId id) {
    const auto it = mems.find(id);
    if (it == mems.end()) throw Error(ErrorCode::InvalidArgument, fmt::format("unknown memory object {}", id));
    if (!it->second.alive) throw Error(ErrorCode::UseAfterFree, fmt::format("memory object {} was released", id));
    return it->second;
}

}  // namespace

void Runtime::dmem_write_host(MemId id, std::span<const std::byte> data) {
    std::lock_guard lk(impl_->mu);
    auto& obj = live_object(impl_->mems, id);
    if (data.size() != obj.bytes) {
        throw Error(ErrorCode::SizeMismatch,
                    fmt::format("write of {} bytes to {}-byte memory object {}", data.size(), obj.bytes, id));
    }
    std::copy(data.begin(), data.end(), obj.host.begin());
    obj.host_clean = true;
    for (auto& [_, clean] : obj.clean) clean = false;
}

std::vector<std::byte> Runtime::dmem_read_host(MemId id) {
    std::lock_guard lk(impl_->mu);
    auto& obj = live_object(impl_->mems, id);
    if (!obj.host_clean) {
        const auto src = std::find_if(obj.clean.begin(), obj.clean.end(), [](const auto& kv) { return kv.second; });
        const auto& copy = obj.copies.at(src->first);
        std::copy(copy.begin(), copy.end(), obj.host.begin());
        obj.host_clean = true;
        ++obj.transfers;
    }
    return obj.host;
}

void Runtime::dmem_release(MemId id) {
    std::lock_guard lk(impl_->mu);
    auto& obj = live_object(impl_->mems, id);
    obj.alive = false;
    obj.host.clear();
    obj.copies.clear();
    obj.clean.clear();
}

int Runtime::dmem_transfers(MemId id) const {
    std::lock_guard lk(impl_->mu);
    const auto it = impl_->mems.find(id);
    if (it == impl_->mems.end()) throw Error(ErrorCode::InvalidArgument, fmt::format("unknown memory object {}", id));
    return it->second.transfers;
}

GraphHandle Runtime::submit(TaskGraph graph, Policy policy, bool sync) {
    if (const auto cycle = find_cycle(graph)) {
        std::string path;
        for (TaskId t : *cycle) path += graph.tasks()[t].name + " -> ";
        path += graph.tasks()[cycle->front()].name;
        throw Error(ErrorCode::CycleDetected, "task graph has a cycle: " + path);
    }

    GraphHandle handle;
    {
        std::lock_guard lk(impl_->mu);
        for (const auto& task : graph.tasks()) {
            for (const auto& use : task.memory) live_object(impl_->mems, use.id);
        }
        handle.id = impl_->next_graph++;
        auto state = std::make_unique<Impl::GraphState>();
        auto& g = *state;
        const std::size_t n = graph.size();
        g.policy = policy;
        g.states.assign(n, TaskState::Submitted);
        g.results.resize(n);
        g.remaining.resize(n);
        g.dependents.resize(n);
        for (const auto& task : graph.tasks()) {
            auto& r = g.results[task.id];
            r.state = TaskState::Submitted;
            r.seed = derive_seed(graph.seed(), task.id);
            if (const auto* q = std::get_if<QirKernel>(&task.kernel); q && q->seed) r.seed = *q->seed;
            if (const auto* c = std::get_if<CircuitKernel>(&task.kernel); c && c->seed) r.seed = *c->seed;
            g.remaining[task.id] = task.deps.size();
            for (TaskId d : task.deps) g.dependents[d].push_back(task.id);
        }
        g.graph = std::move(graph);
        impl_->graphs.emplace(handle.id, std::move(state));
        if (n > 0) {
            impl_->active.insert(handle.id);
            for (TaskId t = 0; t < n; ++t) {
                if (g.remaining[t] == 0) impl_->make_ready(g, t);
            }
            impl_->dispatch();
        }
    }
    if (sync) wait(handle);
    return handle;
}

std::map<TaskId, TaskResult> Runtime::wait(GraphHandle handle) {
    std::unique_lock lk(impl_->mu);
    auto& g = impl_->graph(handle.id);
    g.done.wait(lk, [&] { return g.complete(); });
    std::map<TaskId, TaskResult> out;
    for (TaskId t = 0; t < g.results.size(); ++t) out.emplace(t, g.results[t]);
    return out;
}

WaitSnapshot Runtime::wait_for(GraphHandle handle, std::chrono::milliseconds timeout) {
    std::unique_lock lk(impl_->mu);
    auto& g = impl_->graph(handle.id);
    WaitSnapshot snap;
    snap.complete = g.done.wait_for(lk, timeout, [&] { return g.complete(); });
    for (TaskId t = 0; t < g.results.size(); ++t) {
        snap.states.emplace(t, g.states[t]);
        if (g.states[t] == TaskState::Completed || g.states[t] == TaskState::Failed) {
            snap.results.emplace(t, g.results[t]);
        }
    }
    return snap;
}

const TaskGraph& Runtime::graph(GraphHandle handle) const {
    std::lock_guard lk(impl_->mu);
    return impl_->graph(handle.id).graph;
}

std::map<DeviceId, DeviceStats> Runtime::device_stats() const {
    std::lock_guard lk(impl_->mu);
    std::map<DeviceId, DeviceStats> out;
    for (const auto& [id, d] : impl_->devices) out.emplace(id, d->stats);
    return out;
}

}  // namespace qtask::rt
