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

#include "qtask/error.hpp"
#include "qtask/rng.hpp"
#include "qtask/runtime.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <cstring>
#include <future>
#include <random>
#include <thread>

namespace qtask::rt {
namespace {

const std::filesystem::path kKernels{QTASK_KERNEL_DIR};

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::InvalidArgument;
}

QirKernel bell(std::uint64_t shots = 256) {
    QirKernel k;
    k.path = kKernels / "bell.ll";
    k.shots = shots;
    return k;
}

HostOutput noop(const HostContext&) { return {}; }

TEST(Registry, QpuDevicesGetSequentialIds) {
    Runtime rt;
    EXPECT_EQ(rt.add_devices(DeviceClass::Qpu, 4), (std::vector<DeviceId>{0, 1, 2, 3}));
    for (const auto& d : rt.devices()) EXPECT_EQ(d.device_class, DeviceClass::Qpu);
}

TEST(Registry, DuplicateDeviceId) {
    Runtime rt;
    rt.register_device(DeviceInfo::host(3));
    EXPECT_EQ(code_of([&] { rt.register_device(DeviceInfo::qpu(3)); }), ErrorCode::DuplicateId);
    EXPECT_EQ(rt.devices().size(), 1u);
}

TEST(Registry, HostDeviceOnlyRunsHostKernels) {
    Runtime rt;
    rt.register_device(DeviceInfo::host(0));
    rt.register_host_kernel("noop", noop);
    TaskGraph g;
    const TaskId h = g.create_task("h", HostKernel{"noop", {}});
    const TaskId q = g.create_task("q", bell());
    const auto res = rt.wait(rt.submit(std::move(g)));
    EXPECT_EQ(res.at(h).state, TaskState::Completed);
    EXPECT_EQ(res.at(q).state, TaskState::Failed);
    EXPECT_EQ(res.at(q).error.rfind("no-capable-device", 0), 0u) << res.at(q).error;
}

TEST(HostKernels, CallbackInvokedOnceWithParams) {
    Runtime rt;
    rt.add_devices(DeviceClass::Host, 2);
    std::atomic<int> calls{0};
    std::vector<std::string> seen;
    rt.register_host_kernel("estimator_reduce", [&](const HostContext& ctx) {
        ++calls;
        seen = ctx.params;
        return HostOutput{{1.5}, "ok"};
    });
    TaskGraph g;
    const TaskId t = g.create_task("r", HostKernel{"estimator_reduce", {"a", "b"}});
    const auto res = rt.wait(rt.submit(std::move(g), Policy::Default, true));
    EXPECT_EQ(calls.load(), 1);
    EXPECT_EQ(seen, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(std::get<HostOutput>(res.at(t).payload), (HostOutput{{1.5}, "ok"}));
}

TEST(HostKernels, UnknownNameFailsTask) {
    Runtime rt;
    rt.add_devices(DeviceClass::Host, 1);
    TaskGraph g;
    const TaskId t = g.create_task("x", HostKernel{"missing", {}});
    const auto res = rt.wait(rt.submit(std::move(g)));
    EXPECT_EQ(res.at(t).state, TaskState::Failed);
    EXPECT_EQ(res.at(t).error.rfind("unknown-kernel", 0), 0u) << res.at(t).error;
}

TEST(HostKernels, DuplicateName) {
    Runtime rt;
    rt.register_host_kernel("k", noop);
    EXPECT_EQ(code_of([&] { rt.register_host_kernel("k", noop); }), ErrorCode::DuplicateId);
}

TEST(TaskGraphTest, CreateAndDependencies) {
    TaskGraph g;
    const TaskId a = g.create_task("t0", bell(1024));
    EXPECT_EQ(g.tasks()[a].name, "t0");
    EXPECT_EQ(code_of([&] { g.create_task("t1", bell(), {42}); }), ErrorCode::UnknownDependency);
    EXPECT_EQ(g.size(), 1u);
    EXPECT_EQ(g.find("t0"), a);
    EXPECT_FALSE(g.find("nope"));
}

TEST(TaskGraphTest, SixteenIndependentTasks) {
    TaskGraph g;
    for (int i = 0; i < 16; ++i) g.create_task("t" + std::to_string(i), bell());
    EXPECT_EQ(g.size(), 16u);
    for (const auto& t : g.tasks()) EXPECT_TRUE(t.deps.empty());
    EXPECT_FALSE(find_cycle(g));
}

TEST(Submit, EmptyGraphIsImmediatelyTerminal) {
    Runtime rt;
    const GraphHandle h = rt.submit(TaskGraph{});
    EXPECT_TRUE(rt.wait_for(h, std::chrono::milliseconds(0)).complete);
    EXPECT_TRUE(rt.wait(h).empty());
}

TEST(Submit, CycleRejectedBeforeAnythingRuns) {
    Runtime rt;
    rt.add_devices(DeviceClass::Host, 1);
    std::atomic<int> calls{0};
    rt.register_host_kernel("count", [&](const HostContext&) {
        ++calls;
        return HostOutput{};
    });
    TaskGraph g;
    const TaskId a = g.create_task("a", HostKernel{"count", {}});
    const TaskId b = g.create_task("b", HostKernel{"count", {}}, {a});
    g.create_task("free", HostKernel{"count", {}});
    g.add_dependency(a, b);
    ASSERT_TRUE(find_cycle(g));
    EXPECT_EQ(code_of([&] { rt.submit(g, Policy::Default, true); }), ErrorCode::CycleDetected);
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    EXPECT_EQ(calls.load(), 0);
    EXPECT_EQ(rt.device_stats().at(0).tasks_run, 0u);
}

TEST(Wait, ChainCompletesInOrder) {
    Runtime rt;
    rt.add_devices(DeviceClass::Host, 3);
    rt.register_host_kernel("noop", noop);
    TaskGraph g;
    const TaskId a = g.create_task("a", HostKernel{"noop", {}});
    const TaskId b = g.create_task("b", HostKernel{"noop", {}}, {a});
    const TaskId c = g.create_task("c", HostKernel{"noop", {}}, {b});
    const auto res = rt.wait(rt.submit(std::move(g), Policy::RoundRobin));
    EXPECT_LT(res.at(a).end_seq, res.at(b).start_seq);
    EXPECT_LT(res.at(b).end_seq, res.at(c).start_seq);
    for (const auto& [id, r] : res) EXPECT_EQ(r.state, TaskState::Completed);
}

TEST(Wait, FailurePropagatesToDependentsOnly) {
    Runtime rt;
    rt.add_devices(DeviceClass::Host, 2);
    rt.register_host_kernel("noop", noop);
    rt.register_host_kernel("boom", [](const HostContext&) -> HostOutput { throw std::runtime_error("kaboom"); });
    TaskGraph g;
    const TaskId a = g.create_task("a", HostKernel{"noop", {}});
    const TaskId b = g.create_task("b", HostKernel{"boom", {}}, {a});
    const TaskId c = g.create_task("c", HostKernel{"noop", {}}, {b});
    const TaskId d = g.create_task("d", HostKernel{"noop", {}}, {c});
    const TaskId e = g.create_task("e", HostKernel{"noop", {}});
    const auto res = rt.wait(rt.submit(std::move(g)));
    EXPECT_EQ(res.at(a).state, TaskState::Completed);
    EXPECT_EQ(res.at(b).state, TaskState::Failed);
    EXPECT_NE(res.at(b).error.find("kaboom"), std::string::npos);
    for (TaskId t : {c, d}) {
        EXPECT_EQ(res.at(t).state, TaskState::Failed);
        EXPECT_EQ(res.at(t).error.rfind("dependency-failed", 0), 0u) << res.at(t).error;
        EXPECT_FALSE(res.at(t).device.has_value());
    }
    EXPECT_EQ(res.at(e).state, TaskState::Completed);
    EXPECT_EQ(rt.device_stats().at(0).tasks_run + rt.device_stats().at(1).tasks_run, 3u);
}

TEST(Wait, Idempotent) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, 2);
    TaskGraph g(5);
    for (int i = 0; i < 4; ++i) g.create_task("t" + std::to_string(i), bell());
    const GraphHandle h = rt.submit(std::move(g));
    const auto first = rt.wait(h);
    const auto second = rt.wait(h);
    ASSERT_EQ(first.size(), second.size());
    for (const auto& [id, r] : first) {
        EXPECT_EQ(r.payload, second.at(id).payload);
        EXPECT_EQ(r.end_seq, second.at(id).end_seq);
    }
}

TEST(Wait, TimeoutReturnsPartialSnapshot) {
    Runtime rt;
    rt.add_devices(DeviceClass::Host, 1);
    std::promise<void> release;
    std::shared_future<void> gate = release.get_future().share();
    rt.register_host_kernel("block", [gate](const HostContext&) {
        gate.wait();
        return HostOutput{};
    });
    rt.register_host_kernel("noop", noop);
    TaskGraph g;
    const TaskId a = g.create_task("a", HostKernel{"block", {}});
    const TaskId b = g.create_task("b", HostKernel{"noop", {}}, {a});
    const GraphHandle h = rt.submit(std::move(g));
    const WaitSnapshot snap = rt.wait_for(h, std::chrono::milliseconds(30));
    EXPECT_FALSE(snap.complete);
    EXPECT_TRUE(snap.results.empty());
    EXPECT_EQ(snap.states.at(b), TaskState::Submitted);
    release.set_value();
    const WaitSnapshot done = rt.wait_for(h, std::chrono::seconds(10));
    EXPECT_TRUE(done.complete);
    EXPECT_EQ(done.results.at(b).state, TaskState::Completed);
}

TEST(Placement, ExplicitMissingDevice) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, 4);
    TaskGraph g;
    const TaskId t = g.create_task("t", bell(), {}, DeviceRequirement::on(7));
    const auto res = rt.wait(rt.submit(std::move(g), Policy::Explicit));
    EXPECT_EQ(res.at(t).state, TaskState::Failed);
    EXPECT_EQ(res.at(t).error.rfind("no-capable-device", 0), 0u);
}

TEST(Placement, ExplicitDeviceIsHonored) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, 4);
    TaskGraph g;
    for (int i = 0; i < 6; ++i) g.create_task("t" + std::to_string(i), bell(), {}, DeviceRequirement::on(2));
    for (const auto& [id, r] : rt.wait(rt.submit(std::move(g), Policy::Explicit))) EXPECT_EQ(r.device, 2);
}

TEST(Placement, LateBoundLlNeedsQpu) {
    Runtime rt;
    rt.add_devices(DeviceClass::Host, 1);
    rt.set_kernel_directory(kKernels);
    TaskGraph g;
    const TaskId t = g.create_task("t", NamedKernel{"bell.ll", {}, 64});
    const auto res = rt.wait(rt.submit(std::move(g)));
    EXPECT_EQ(res.at(t).state, TaskState::Failed);
    EXPECT_EQ(res.at(t).error.rfind("no-capable-device", 0), 0u) << res.at(t).error;
}

TEST(Placement, LateBoundLlRunsOnQpu) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, 1);
    rt.set_kernel_directory(kKernels);
    TaskGraph g(9);
    const TaskId t = g.create_task("t", NamedKernel{"bell.ll", {}, 1024});
    const auto res = rt.wait(rt.submit(std::move(g), Policy::Default, true));
    ASSERT_EQ(res.at(t).state, TaskState::Completed) << res.at(t).error;
    const auto& h = std::get<sim::ShotHistogram>(res.at(t).payload);
    EXPECT_EQ(h.shots, 1024u);
    for (const auto& [k, c] : h.counts) EXPECT_TRUE(k == "00" || k == "11");
}

std::map<TaskId, TaskResult> fan_out(int devices, Policy policy, std::uint64_t seed) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, devices);
    TaskGraph g(seed);
    for (int i = 0; i < 16; ++i) g.create_task("t" + std::to_string(i), bell(1024));
    return rt.wait(rt.submit(std::move(g), policy));
}

TEST(FanOut, SixteenTasksFourDevicesRoundRobin) {
    const auto four = fan_out(4, Policy::RoundRobin, 123);
    const auto one = fan_out(1, Policy::RoundRobin, 123);
    std::map<DeviceId, int> per_device;
    for (const auto& [id, r] : four) {
        ASSERT_EQ(r.state, TaskState::Completed) << r.error;
        ++per_device[*r.device];
        EXPECT_EQ(r.payload, one.at(id).payload);
        EXPECT_EQ(r.seed, derive_seed(123, id));
    }
    EXPECT_EQ(per_device, (std::map<DeviceId, int>{{0, 4}, {1, 4}, {2, 4}, {3, 4}}));
}

TEST(FanOut, PayloadsIndependentOfPolicyAndDeviceCount) {
    const auto ref = fan_out(1, Policy::Default, 77);
    for (int d : {2, 3, 8})
        for (Policy p : {Policy::Default, Policy::RoundRobin}) {
            const auto other = fan_out(d, p, 77);
            for (const auto& [id, r] : ref) EXPECT_EQ(r.payload, other.at(id).payload);
        }
}

TEST(Kernels, ExplicitSeedOverridesDerived) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, 2);
    TaskGraph g(1);
    QirKernel k = bell(500);
    k.seed = 99;
    const TaskId a = g.create_task("a", k);
    const TaskId b = g.create_task("b", k);
    const auto res = rt.wait(rt.submit(std::move(g)));
    EXPECT_EQ(res.at(a).seed, 99u);
    EXPECT_EQ(res.at(a).payload, res.at(b).payload);
}

TEST(Kernels, QirZeroShotsGivesExactDistribution) {
    const auto lowered = qir::lower_to_circuit(qir::load_qir_file(kKernels / "ghz4.ll"));
    const Payload p = run_qir_kernel(lowered, Accelerator::Statevector, 0, 1);
    const auto& d = std::get<sim::ProbDist>(p);
    EXPECT_NEAR(d.probabilities.at("0000"), 0.5, 1e-12);
    EXPECT_NEAR(d.probabilities.at("1111"), 0.5, 1e-12);
}

TEST(Kernels, TrajectoryAcceleratorAgreesOnSupport) {
    const auto lowered = qir::lower_to_circuit(qir::load_qir_file(kKernels / "bell.ll"));
    const auto h = std::get<sim::ShotHistogram>(run_qir_kernel(lowered, Accelerator::Trajectory, 2000, 3));
    EXPECT_EQ(h.shots, 2000u);
    for (const auto& [k, c] : h.counts) EXPECT_TRUE(k == "00" || k == "11");
}

TEST(Kernels, AcceleratorNames) {
    EXPECT_EQ(accelerator_from_string("trajectory"), Accelerator::Trajectory);
    try {
        accelerator_from_string("qpp");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("statevector"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("trajectory"), std::string::npos);
    }
}

TEST(Kernels, CircuitExactMode) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, 1);
    TaskGraph g;
    CircuitKernel k{bell_circuit(), 0, std::nullopt, SimMode::Exact};
    const TaskId t = g.create_task("c", k);
    const auto res = rt.wait(rt.submit(std::move(g)));
    const auto& d = std::get<sim::ProbDist>(res.at(t).payload);
    EXPECT_DOUBLE_EQ(d.probabilities.at("00"), 0.5);
}

TEST(Kernels, HostSeesDependencyResults) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, 1);
    rt.add_devices(DeviceClass::Host, 1);
    rt.register_host_kernel("total", [](const HostContext& ctx) {
        const auto& h = std::get<sim::ShotHistogram>(ctx.inputs.at("q").payload);
        return HostOutput{{static_cast<double>(h.shots)}, {}};
    });
    TaskGraph g;
    const TaskId q = g.create_task("q", bell(300));
    const TaskId t = g.create_task("t", HostKernel{"total", {}}, {q});
    const auto res = rt.wait(rt.submit(std::move(g)));
    EXPECT_EQ(std::get<HostOutput>(res.at(t).payload).values, std::vector<double>{300.0});
}

std::vector<std::byte> bytes(std::string_view s) {
    std::vector<std::byte> out(s.size());
    std::memcpy(out.data(), s.data(), s.size());
    return out;
}

class Dmem : public ::testing::Test {
protected:
    void SetUp() override {
        rt.add_devices(DeviceClass::Host, 2);
        rt.register_host_kernel("read", [](const HostContext& ctx) {
            std::string s(ctx.reads.at(0).size(), '\0');
            std::memcpy(s.data(), ctx.reads.at(0).data(), s.size());
            return HostOutput{{}, s};
        });
        rt.register_host_kernel("upper", [](const HostContext& ctx) {
            for (auto& b : ctx.writes.at(0)) b = static_cast<std::byte>(std::toupper(static_cast<int>(b)));
            return HostOutput{};
        });
        mem = rt.dmem_create(4);
        rt.dmem_write_host(mem, bytes("abcd"));
    }

    std::map<TaskId, TaskResult> run(TaskGraph g) { return rt.wait(rt.submit(std::move(g), Policy::Explicit)); }

    Runtime rt;
    MemId mem{0};
};

TEST_F(Dmem, FirstDeviceReadTransfersOnce) {
    TaskGraph g;
    const TaskId t = g.create_task("r", HostKernel{"read", {}}, {}, DeviceRequirement::on(0));
    g.use_memory(t, mem, Access::Read);
    const auto res = run(std::move(g));
    EXPECT_EQ(res.at(t).transfer_count, 1);
    EXPECT_EQ(std::get<HostOutput>(res.at(t).payload).text, "abcd");
    EXPECT_EQ(rt.dmem_transfers(mem), 1);
}

TEST_F(Dmem, SecondReadOnSameDeviceHitsCleanCopy) {
    TaskGraph g;
    const TaskId a = g.create_task("a", HostKernel{"read", {}}, {}, DeviceRequirement::on(0));
    const TaskId b = g.create_task("b", HostKernel{"read", {}}, {a}, DeviceRequirement::on(0));
    g.use_memory(a, mem, Access::Read);
    g.use_memory(b, mem, Access::Read);
    const auto res = run(std::move(g));
    EXPECT_EQ(res.at(a).transfer_count, 1);
    EXPECT_EQ(res.at(b).transfer_count, 0);
    EXPECT_EQ(rt.dmem_transfers(mem), 1);
}

TEST_F(Dmem, HostReadWhenCleanCostsNothing) {
    EXPECT_EQ(rt.dmem_read_host(mem), bytes("abcd"));
    EXPECT_EQ(rt.dmem_transfers(mem), 0);
}

TEST_F(Dmem, DeviceWriteFlushesOnHostReadAndDirtiesOtherDevice) {
    TaskGraph g;
    const TaskId r1 = g.create_task("r1", HostKernel{"read", {}}, {}, DeviceRequirement::on(1));
    const TaskId w = g.create_task("w", HostKernel{"upper", {}}, {r1}, DeviceRequirement::on(0));
    const TaskId r2 = g.create_task("r2", HostKernel{"read", {}}, {w}, DeviceRequirement::on(1));
    g.use_memory(r1, mem, Access::Read);
    g.use_memory(w, mem, Access::ReadWrite);
    g.use_memory(r2, mem, Access::Read);
    const auto res = run(std::move(g));
    EXPECT_EQ(res.at(r1).transfer_count, 1);
    EXPECT_EQ(res.at(w).transfer_count, 1);
    EXPECT_EQ(res.at(r2).transfer_count, 1);
    EXPECT_EQ(std::get<HostOutput>(res.at(r2).payload).text, "ABCD");
    EXPECT_EQ(rt.dmem_transfers(mem), 3);
    EXPECT_EQ(rt.dmem_read_host(mem), bytes("ABCD"));
    EXPECT_EQ(rt.dmem_transfers(mem), 4);
    EXPECT_EQ(rt.dmem_read_host(mem), bytes("ABCD"));
    EXPECT_EQ(rt.dmem_transfers(mem), 4);
}

TEST_F(Dmem, SizeMismatchAndUseAfterFree) {
    EXPECT_EQ(code_of([&] { rt.dmem_write_host(mem, bytes("abc")); }), ErrorCode::SizeMismatch);
    rt.dmem_release(mem);
    EXPECT_EQ(code_of([&] { rt.dmem_read_host(mem); }), ErrorCode::UseAfterFree);
    EXPECT_EQ(code_of([&] { rt.dmem_write_host(mem, bytes("abcd")); }), ErrorCode::UseAfterFree);
}

TEST_F(Dmem, SubmitRejectsReleasedObject) {
    rt.dmem_release(mem);
    TaskGraph g;
    const TaskId t = g.create_task("r", HostKernel{"read", {}}, {}, DeviceRequirement::on(0));
    g.use_memory(t, mem, Access::Read);
    EXPECT_EQ(code_of([&] { rt.submit(std::move(g)); }), ErrorCode::UseAfterFree);
    EXPECT_EQ(rt.device_stats().at(0).tasks_run, 0u);
}

// Random acyclic graphs: edges only from lower to higher ids.
TEST(RuntimeProperty, RandomDagsRespectOrderAndOccupancy) {
    std::mt19937_64 gen(20261018);
    for (int trial = 0; trial < 200; ++trial) {
        const int devices = 1 + static_cast<int>(gen() % 8);
        const int tasks = 1 + static_cast<int>(gen() % 50);
        const Policy policy = trial % 2 ? Policy::RoundRobin : Policy::Default;
        Runtime rt;
        rt.add_devices(DeviceClass::Qpu, devices);
        TaskGraph g(static_cast<std::uint64_t>(trial));
        for (int t = 0; t < tasks; ++t) {
            std::set<TaskId> deps;
            for (int d = 0; d < t; ++d)
                if (gen() % 8 == 0) deps.insert(static_cast<TaskId>(d));
            CircuitKernel k{ghz_circuit(1 + static_cast<int>(gen() % 3)), 16, std::nullopt, SimMode::Sampled};
            g.create_task("t" + std::to_string(t), k, deps);
        }
        const TaskGraph copy = g;
        const auto res = rt.wait(rt.submit(std::move(g), policy));
        ASSERT_EQ(res.size(), static_cast<std::size_t>(tasks));
        std::map<DeviceId, std::vector<std::pair<std::uint64_t, std::uint64_t>>> intervals;
        for (const auto& task : copy.tasks()) {
            const TaskResult& r = res.at(task.id);
            ASSERT_EQ(r.state, TaskState::Completed) << r.error;
            EXPECT_LT(r.ready_seq, r.start_seq);
            EXPECT_LT(r.start_seq, r.end_seq);
            for (TaskId dep : task.deps) EXPECT_LT(res.at(dep).end_seq, r.start_seq) << "trial " << trial;
            intervals[*r.device].emplace_back(r.start_seq, r.end_seq);
        }
        for (auto& [dev, iv] : intervals) {
            std::sort(iv.begin(), iv.end());
            for (std::size_t i = 1; i < iv.size(); ++i) EXPECT_LT(iv[i - 1].second, iv[i].first) << "device " << dev;
        }
        for (const auto& [dev, stats] : rt.device_stats()) EXPECT_LE(stats.max_concurrent, 1);
    }
}

TEST(RuntimeProperty, ConcurrentSubmitsFromManyThreads) {
    Runtime rt;
    rt.add_devices(DeviceClass::Qpu, 3);
    std::vector<std::future<std::map<TaskId, TaskResult>>> futures;
    for (int i = 0; i < 6; ++i) {
        futures.push_back(std::async(std::launch::async, [&rt, i] {
            TaskGraph g(static_cast<std::uint64_t>(i));
            TaskId prev = g.create_task("a", CircuitKernel{bell_circuit(), 32, std::nullopt, SimMode::Sampled});
            for (int k = 0; k < 5; ++k)
                prev = g.create_task("n" + std::to_string(k),
                                     CircuitKernel{bell_circuit(), 32, std::nullopt, SimMode::Sampled}, {prev});
            return rt.wait(rt.submit(std::move(g), Policy::RoundRobin));
        }));
    }
    for (auto& f : futures)
        for (const auto& [id, r] : f.get()) EXPECT_EQ(r.state, TaskState::Completed);
    for (const auto& [dev, stats] : rt.device_stats()) EXPECT_LE(stats.max_concurrent, 1);
}

}  // namespace
}  // namespace qtask::rt
