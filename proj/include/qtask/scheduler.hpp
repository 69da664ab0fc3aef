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

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qtask::rt {

using TaskId = std::uint32_t;
using DeviceId = int;

enum class DeviceClass { Host, Qpu };
enum class KernelKind { Host, Qir, Circuit };
enum class Policy { Default, RoundRobin, Explicit };

std::string_view to_string(DeviceClass cls);
std::string_view to_string(KernelKind kind);
std::string_view to_string(Policy policy);
Policy policy_from_string(std::string_view text);

/// Where a task may run: anywhere capable, on a device class, or on one
/// specific device.
struct DeviceRequirement {
    enum class Kind { Any, Class, Explicit };
    Kind kind{Kind::Any};
    DeviceClass device_class{DeviceClass::Host};
    DeviceId device{-1};

    static DeviceRequirement any() { return {}; }
    static DeviceRequirement of(DeviceClass cls) { return {Kind::Class, cls, -1}; }
    static DeviceRequirement on(DeviceId id) { return {Kind::Explicit, DeviceClass::Host, id}; }

    bool operator==(const DeviceRequirement&) const = default;
};

/// Scheduler's view of one registered device.
struct DeviceView {
    DeviceId id{0};
    DeviceClass device_class{DeviceClass::Host};
    std::set<KernelKind> kinds;
    bool idle{true};
};

struct ReadyTask {
    TaskId id{0};
    KernelKind kind{KernelKind::Host};
    DeviceRequirement requirement;
};

struct Assignment {
    TaskId task{0};
    DeviceId device{0};

    bool operator==(const Assignment&) const = default;
};

struct Rejection {
    TaskId task{0};
    std::string reason;
};

struct ScheduleDecision {
    std::vector<Assignment> assigned;
    std::vector<Rejection> rejected;
    std::size_t rr_cursor{0};
};

bool is_capable(const DeviceView& device, const ReadyTask& task);

/// Pure placement step. Tasks are considered in the given order.
///   default    - lowest-id capable idle device; otherwise the task waits.
///   roundrobin - next capable device at or after the cursor (cyclic over the
///                device list); the task joins that device's queue even if it
///                is busy, and the cursor moves past it.
///   explicit   - Explicit(device) tasks join that device's queue; all other
///                tasks are placed as under default.
/// Explicit requirements are honored by every policy. A task no registered
/// device can run is rejected with "no-capable-device".
ScheduleDecision schedule_next(std::span<const ReadyTask> ready, std::span<const DeviceView> devices,
                               Policy policy, std::size_t rr_cursor);

}  // namespace qtask::rt
