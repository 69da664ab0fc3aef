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

#include "qtask/scheduler.hpp"

#include "qtask/error.hpp"

#include <algorithm>

namespace qtask::rt {

std::string_view to_string(DeviceClass cls) { return cls == DeviceClass::Host ? "host" : "qpu"; }

std::string_view to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Host: return "host";
        case KernelKind::Qir: return "qir";
        case KernelKind::Circuit: return "circuit";
    }
    return "?";
}

std::string_view to_string(Policy policy) {
    switch (policy) {
        case Policy::Default: return "default";
        case Policy::RoundRobin: return "roundrobin";
        case Policy::Explicit: return "explicit";
    }
    return "?";
}

Policy policy_from_string(std::string_view text) {
    for (auto p : {Policy::Default, Policy::RoundRobin, Policy::Explicit}) {
        if (to_string(p) == text) return p;
    }
    throw Error(ErrorCode::InvalidArgument,
                "unknown policy \"" + std::string(text) + "\" (expected default, roundrobin or explicit)");
}

bool is_capable(const DeviceView& device, const ReadyTask& task) {
    if (!device.kinds.contains(task.kind)) return false;
    switch (task.requirement.kind) {
        case DeviceRequirement::Kind::Any: return true;
        case DeviceRequirement::Kind::Class: return device.device_class == task.requirement.device_class;
        case DeviceRequirement::Kind::Explicit: return device.id == task.requirement.device;
    }
    return false;
}

ScheduleDecision schedule_next(std::span<const ReadyTask> ready, std::span<const DeviceView> devices,
                               Policy policy, std::size_t rr_cursor) {
    ScheduleDecision out;
    out.rr_cursor = devices.empty() ? 0 : rr_cursor % devices.size();
    std::vector<bool> idle;
    idle.reserve(devices.size());
    for (const auto& d : devices) idle.push_back(d.idle);

    const auto lowest_idle = [&](const ReadyTask& task) -> std::ptrdiff_t {
        std::ptrdiff_t best = -1;
        for (std::size_t i = 0; i < devices.size(); ++i) {
            if (!idle[i] || !is_capable(devices[i], task)) continue;
            if (best < 0 || devices[i].id < devices[static_cast<std::size_t>(best)].id) {
                best = static_cast<std::ptrdiff_t>(i);
            }
        }
        return best;
    };

    for (const auto& task : ready) {
        const bool any_capable = std::any_of(devices.begin(), devices.end(),
                                             [&](const DeviceView& d) { return is_capable(d, task); });
        if (!any_capable) {
            std::string why = "no-capable-device: no registered device runs " + std::string(to_string(task.kind)) +
                              " kernels";
            if (task.requirement.kind == DeviceRequirement::Kind::Explicit) {
                why += " as device " + std::to_string(task.requirement.device);
            } else if (task.requirement.kind == DeviceRequirement::Kind::Class) {
                why += " in class " + std::string(to_string(task.requirement.device_class));
            }
            out.rejected.push_back({task.id, std::move(why)});
            continue;
        }

        const bool is_explicit = task.requirement.kind == DeviceRequirement::Kind::Explicit;
        std::ptrdiff_t chosen = -1;
        if (policy == Policy::RoundRobin) {
            for (std::size_t step = 0; step < devices.size(); ++step) {
                const std::size_t i = (out.rr_cursor + step) % devices.size();
                if (is_capable(devices[i], task)) {
                    chosen = static_cast<std::ptrdiff_t>(i);
                    out.rr_cursor = (i + 1) % devices.size();
                    break;
                }
            }
        } else if (policy == Policy::Explicit && is_explicit) {
            for (std::size_t i = 0; i < devices.size(); ++i) {
                if (is_capable(devices[i], task)) chosen = static_cast<std::ptrdiff_t>(i);
            }
        } else {
            chosen = lowest_idle(task);
        }
        if (chosen < 0) continue;
        idle[static_cast<std::size_t>(chosen)] = false;
        out.assigned.push_back({task.id, devices[static_cast<std::size_t>(chosen)].id});
    }
    return out;
}

}  // namespace qtask::rt
