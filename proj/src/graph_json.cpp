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

#include "qtask/graph_json.hpp"

#include "qtask/error.hpp"

#include <nlohmann/json.hpp>

#include <map>

namespace qtask::rt {
namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& what) { throw Error(ErrorCode::SchemaError, what); }

void allow_only(const json& obj, std::initializer_list<std::string_view> fields, const std::string& where) {
    if (!obj.is_object()) schema_fail(where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        if (std::find(fields.begin(), fields.end(), key) == fields.end()) {
            schema_fail("unknown field \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
T get_as(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        schema_fail("field \"" + std::string(key) + "\" in " + where + " is missing or has the wrong type");
    }
}

std::uint64_t get_count(const json& obj, const char* key, const std::string& where) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        schema_fail("field \"" + std::string(key) + "\" in " + where + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

Gate gate_from_json(const json& g, int index, const std::string& where) {
    const std::string at = where + " gate " + std::to_string(index);
    if (!g.is_array() || g.empty() || !g[0].is_string()) schema_fail(at + " must be [name, operands...]");
    static const std::map<std::string, GateKind, std::less<>> kinds{
        {"H", GateKind::H},     {"X", GateKind::X},     {"Y", GateKind::Y},       {"Z", GateKind::Z},
        {"S", GateKind::S},     {"Sdg", GateKind::Sdg}, {"T", GateKind::T},       {"Tdg", GateKind::Tdg},
        {"RX", GateKind::RX},   {"RY", GateKind::RY},   {"RZ", GateKind::RZ},     {"CNOT", GateKind::CNOT},
        {"CX", GateKind::CNOT}, {"CZ", GateKind::CZ},   {"MZ", GateKind::MZ}};
    const auto it = kinds.find(g[0].get<std::string>());
    if (it == kinds.end()) schema_fail(at + ": unknown gate \"" + g[0].get<std::string>() + "\"");
    const GateKind kind = it->second;
    const std::size_t expected = 1 + static_cast<std::size_t>(arity(kind)) +
                                 ((is_rotation(kind) || kind == GateKind::MZ) ? 1 : 0);
    if (g.size() != expected) schema_fail(at + ": expected " + std::to_string(expected - 1) + " operands");
    for (std::size_t i = 1; i < g.size(); ++i) {
        if (!g[i].is_number()) schema_fail(at + ": operands must be numbers");
    }
    if (kind == GateKind::MZ) return Gate::measure(g[1].get<int>(), g[2].get<int>());
    if (is_rotation(kind)) return Gate::rotation(kind, g[1].get<int>(), g[2].get<double>());
    if (arity(kind) == 2) return Gate::controlled(kind, g[1].get<int>(), g[2].get<int>());
    return Gate::single(kind, g[1].get<int>());
}

KernelSpec kernel_from_json(const json& k, std::uint64_t shots, const std::filesystem::path& base_dir,
                            const std::string& where) {
    if (k.is_string()) return NamedKernel{k.get<std::string>(), {}, shots};
    if (!k.is_object() || !k.contains("type") || !k["type"].is_string()) {
        schema_fail(where + " kernel needs a string \"type\"");
    }
    const auto type = k["type"].get<std::string>();
    if (type == "qir") {
        allow_only(k, {"type", "path", "source", "accelerator"}, where + " kernel");
        QirKernel q;
        q.shots = shots;
        if (k.contains("path") == k.contains("source")) schema_fail(where + " qir kernel needs exactly one of path/source");
        if (k.contains("path")) {
            std::filesystem::path p = get_as<std::string>(k, "path", where);
            q.path = p.is_absolute() ? p : base_dir / p;
        } else {
            q.source = get_as<std::string>(k, "source", where);
        }
        if (k.contains("accelerator")) {
            try {
                q.accelerator = accelerator_from_string(get_as<std::string>(k, "accelerator", where));
            } catch (const Error& e) {
                schema_fail(where + ": " + e.what());
            }
        }
        return q;
    }
    if (type == "host") {
        allow_only(k, {"type", "name", "params"}, where + " kernel");
        HostKernel h;
        h.name = get_as<std::string>(k, "name", where);
        if (k.contains("params")) h.params = get_as<std::vector<std::string>>(k, "params", where);
        return h;
    }
    if (type == "circuit") {
        allow_only(k, {"type", "qubits", "gates", "mode"}, where + " kernel");
        CircuitKernel c;
        c.shots = shots;
        const auto n = static_cast<int>(get_count(k, "qubits", where));
        try {
            c.circuit = Circuit(n);
            int i = 0;
            for (const auto& g : k.value("gates", json::array())) c.circuit.append(gate_from_json(g, i++, where));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::SchemaError) throw;
            schema_fail(where + ": " + e.what());
        }
        if (k.contains("mode")) {
            const auto mode = get_as<std::string>(k, "mode", where);
            if (mode == "exact") {
                c.mode = SimMode::Exact;
            } else if (mode != "sampled") {
                schema_fail(where + ": mode must be \"exact\" or \"sampled\"");
            }
        }
        return c;
    }
    schema_fail(where + ": unknown kernel type \"" + type + "\"");
}

DeviceRequirement requirement_from_json(const json& d, const std::string& where) {
    if (d.is_number_integer()) return DeviceRequirement::on(d.get<int>());
    if (d.is_string()) {
        const auto s = d.get<std::string>();
        if (s == "any") return DeviceRequirement::any();
        if (s == "qpu") return DeviceRequirement::of(DeviceClass::Qpu);
        if (s == "host") return DeviceRequirement::of(DeviceClass::Host);
    }
    schema_fail(where + ": device must be \"any\", \"qpu\", \"host\" or a device id");
}

}  // namespace

GraphSpec parse_graph_json(std::string_view text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("invalid JSON: ") + e.what());
    }
    allow_only(doc, {"seed", "policy", "devices", "tasks"}, "graph");

    GraphSpec spec;
    if (doc.contains("seed")) spec.seed = get_count(doc, "seed", "graph");
    if (doc.contains("policy")) {
        const auto p = get_as<std::string>(doc, "policy", "graph");
        try {
            spec.policy = policy_from_string(p);
        } catch (const Error& e) {
            schema_fail(e.what());
        }
    }
    if (doc.contains("devices")) {
        const auto& d = doc["devices"];
        allow_only(d, {"qpu", "host"}, "devices");
        if (d.contains("qpu")) spec.qpu_devices = static_cast<int>(get_count(d, "qpu", "devices"));
        if (d.contains("host")) spec.host_devices = static_cast<int>(get_count(d, "host", "devices"));
    }

    spec.graph = TaskGraph(spec.seed);
    const json tasks = doc.value("tasks", json::array());
    if (!tasks.is_array()) schema_fail("\"tasks\" must be an array");

    std::map<std::string, TaskId> ids;
    std::vector<std::vector<std::string>> depends(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        const std::string where = "tasks[" + std::to_string(i) + "]";
        allow_only(t, {"name", "kernel", "shots", "depends", "device"}, where);
        const auto name = get_as<std::string>(t, "name", where);
        if (ids.contains(name)) schema_fail("duplicate task name \"" + name + "\"");
        if (!t.contains("kernel")) schema_fail(where + " is missing \"kernel\"");
        const std::uint64_t shots = t.contains("shots") ? get_count(t, "shots", where) : 1024;
        auto kernel = kernel_from_json(t["kernel"], shots, base_dir, where);
        const auto req = t.contains("device") ? requirement_from_json(t["device"], where) : DeviceRequirement::any();
        if (t.contains("depends")) depends[i] = get_as<std::vector<std::string>>(t, "depends", where);
        ids.emplace(name, spec.graph.create_task(name, std::move(kernel), {}, req));
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (const auto& dep : depends[i]) {
            const auto it = ids.find(dep);
            if (it == ids.end()) schema_fail("tasks[" + std::to_string(i) + "] depends on unknown task \"" + dep + "\"");
            spec.graph.add_dependency(static_cast<TaskId>(i), it->second);
        }
    }
    return spec;
}

}  // namespace qtask::rt
