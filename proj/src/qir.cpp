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

#include "qtask/qir.hpp"

#include "qtask/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

namespace qtask::qir {
namespace {

enum class Arg { Qubit, Result, Double, Label };

enum class Effect { Gate, Measure, Record, NoOp };

struct Signature {
    std::vector<Arg> args;
    Effect effect;
    GateKind gate{GateKind::H};
};

const std::map<std::string, Signature, std::less<>>& intrinsics() {
    static const std::map<std::string, Signature, std::less<>> table = [] {
        std::map<std::string, Signature, std::less<>> t;
        const auto one = [&](const std::string& name, GateKind kind) {
            t[name] = {{Arg::Qubit}, Effect::Gate, kind};
        };
        one("__quantum__qis__h__body", GateKind::H);
        one("__quantum__qis__x__body", GateKind::X);
        one("__quantum__qis__y__body", GateKind::Y);
        one("__quantum__qis__z__body", GateKind::Z);
        one("__quantum__qis__s__body", GateKind::S);
        one("__quantum__qis__s__adj", GateKind::Sdg);
        one("__quantum__qis__s__adj__body", GateKind::Sdg);
        one("__quantum__qis__t__body", GateKind::T);
        one("__quantum__qis__t__adj", GateKind::Tdg);
        one("__quantum__qis__t__adj__body", GateKind::Tdg);
        for (auto [name, kind] : {std::pair{"rx", GateKind::RX}, {"ry", GateKind::RY}, {"rz", GateKind::RZ}}) {
            t[std::string("__quantum__qis__") + name + "__body"] = {{Arg::Double, Arg::Qubit}, Effect::Gate, kind};
        }
        for (auto [name, kind] : {std::pair{"cnot", GateKind::CNOT}, {"cx", GateKind::CNOT}, {"cz", GateKind::CZ}}) {
            t[std::string("__quantum__qis__") + name + "__body"] = {{Arg::Qubit, Arg::Qubit}, Effect::Gate, kind};
        }
        t["__quantum__qis__mz__body"] = {{Arg::Qubit, Arg::Result}, Effect::Measure};
        t["__quantum__rt__result_record_output"] = {{Arg::Result, Arg::Label}, Effect::Record};
        t["__quantum__rt__initialize"] = {{Arg::Label}, Effect::NoOp};
        t["__quantum__rt__array_record_output"] = {{Arg::Label, Arg::Label}, Effect::NoOp};
        t["__quantum__rt__tuple_record_output"] = {{Arg::Label, Arg::Label}, Effect::NoOp};
        return t;
    }();
    return table;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool starts_with_word(std::string_view s, std::string_view word) {
    return s.starts_with(word) && (s.size() == word.size() || s[word.size()] == ' ' || s[word.size()] == '\t');
}

/// Splits on commas that are not nested in (), [] or {}.
std::vector<std::string_view> split_args(std::string_view s) {
    std::vector<std::string_view> out;
    int depth = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '(' || c == '[' || c == '{') ++depth;
        if (c == ')' || c == ']' || c == '}') --depth;
        if (c == ',' && depth == 0) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    const auto last = trim(s.substr(start));
    if (!last.empty() || !out.empty()) out.push_back(last);
    return out;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what, line);
}

/// `%Qubit* null`, `%Qubit* inttoptr (i64 N to %Qubit*)`, and the opaque
/// pointer spellings `ptr null` / `ptr inttoptr (i64 N to ptr)`.
int parse_pointer_operand(std::string_view arg, std::string_view type_name, int line) {
    const std::string typed = "%" + std::string(type_name) + "*";
    std::string_view rest;
    std::string_view pointee;
    if (arg.starts_with(typed)) {
        rest = trim(arg.substr(typed.size()));
        pointee = typed;
    } else if (starts_with_word(arg, "ptr")) {
        rest = trim(arg.substr(3));
        pointee = "ptr";
    } else {
        parse_fail(line, "expected " + typed + " operand, got '" + std::string(arg) + "'");
    }
    if (rest == "null") return 0;
    static const std::regex inttoptr(R"(^inttoptr\s*\(\s*i64\s+(-?[0-9]+)\s+to\s+(\S+)\s*\)$)");
    std::cmatch m;
    const std::string rest_str(rest);
    if (!std::regex_match(rest_str.c_str(), m, inttoptr) || m[2].str() != pointee) {
        parse_fail(line, "malformed " + std::string(type_name) + " operand '" + std::string(rest) + "'");
    }
    long long value = 0;
    const auto digits = m[1].str();
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || value < 0 || value > (1 << 30)) {
        parse_fail(line, "operand index out of range in '" + std::string(rest) + "'");
    }
    return static_cast<int>(value);
}

double parse_double_operand(std::string_view arg, int line) {
    if (!starts_with_word(arg, "double")) {
        parse_fail(line, "expected double operand, got '" + std::string(arg) + "'");
    }
    const std::string text(trim(arg.substr(6)));
    // LLVM prints some doubles as 0x<16 hex digits> (raw IEEE-754 bits).
    if (text.size() == 18 && text.starts_with("0x")) {
        unsigned long long bits = 0;
        const auto [ptr, ec] = std::from_chars(text.data() + 2, text.data() + text.size(), bits, 16);
        if (ec == std::errc{} && ptr == text.data() + text.size()) {
            double d = 0;
            static_assert(sizeof(d) == sizeof(bits));
            std::memcpy(&d, &bits, sizeof d);
            return d;
        }
    }
    char* end = nullptr;
    const double d = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) {
        parse_fail(line, "malformed double operand '" + text + "'");
    }
    return d;
}

struct FunctionDef {
    std::string name;
    std::string attribute_ref;
    int begin_line{0};  // line of `define`
    std::vector<std::pair<int, std::string>> body;
};

struct AttributeGroup {
    bool entry_point{false};
    std::optional<int> required_qubits;
};

std::map<std::string, AttributeGroup> parse_attribute_groups(const std::vector<std::string>& lines) {
    static const std::regex group(R"(^\s*attributes\s+(#[0-9]+)\s*=\s*\{(.*)\}\s*$)");
    static const std::regex qubits(R"re("required_num_qubits"\s*=\s*"([0-9]+)")re");
    std::map<std::string, AttributeGroup> out;
    for (const auto& line : lines) {
        std::smatch m;
        if (!std::regex_match(line, m, group)) continue;
        AttributeGroup g;
        const std::string body = m[2].str();
        g.entry_point = body.find("\"entry_point\"") != std::string::npos ||
                        body.find("\"EntryPoint\"") != std::string::npos;
        std::smatch q;
        if (std::regex_search(body, q, qubits)) g.required_qubits = std::stoi(q[1].str());
        out[m[1].str()] = g;
    }
    return out;
}

std::vector<FunctionDef> collect_definitions(const std::vector<std::string>& lines) {
    static const std::regex define(R"(^\s*define\b.*@([A-Za-z0-9_.$"]+)\s*\(.*\)\s*(#[0-9]+)?[^{]*\{\s*$)");
    std::vector<FunctionDef> defs;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::smatch m;
        if (!std::regex_match(lines[i], m, define)) continue;
        FunctionDef def;
        def.name = m[1].str();
        if (def.name.size() >= 2 && def.name.front() == '"') def.name = def.name.substr(1, def.name.size() - 2);
        def.attribute_ref = m[2].matched ? m[2].str() : "";
        def.begin_line = static_cast<int>(i) + 1;
        std::size_t j = i + 1;
        for (; j < lines.size(); ++j) {
            if (trim(lines[j]) == "}") break;
            def.body.emplace_back(static_cast<int>(j) + 1, lines[j]);
        }
        if (j == lines.size()) parse_fail(def.begin_line, "unterminated function body for @" + def.name);
        defs.push_back(std::move(def));
        i = j;
    }
    return defs;
}

bool is_label(std::string_view line) {
    static const std::regex label(R"(^[A-Za-z$._0-9"-]+:\s*(;.*)?$)");
    const std::string s(trim(line));
    return std::regex_match(s, label);
}

}  // namespace

QirProgram parse_qir(std::string_view text) {
    std::vector<std::string> lines;
    {
        std::string current;
        std::istringstream in{std::string(text)};
        while (std::getline(in, current)) lines.push_back(current);
    }

    const auto defs = collect_definitions(lines);
    const auto groups = parse_attribute_groups(lines);
    if (defs.empty()) throw Error(ErrorCode::ParseError, "no entry function definition found");

    const FunctionDef* entry = nullptr;
    if (defs.size() == 1) {
        entry = &defs.front();
    } else {
        for (const auto& def : defs) {
            const auto g = groups.find(def.attribute_ref);
            if (g == groups.end() || !g->second.entry_point) continue;
            if (entry != nullptr) {
                throw Error(ErrorCode::ParseError, "more than one entry_point function", def.begin_line);
            }
            entry = &def;
        }
        if (entry == nullptr) {
            throw Error(ErrorCode::ParseError, "no entry function: " + std::to_string(defs.size()) +
                                                   " definitions and none marked entry_point");
        }
    }

    QirProgram program;
    program.entry_name = entry->name;
    std::optional<int> declared;
    if (const auto g = groups.find(entry->attribute_ref); g != groups.end()) declared = g->second.required_qubits;

    static const std::regex callee(R"(@(__quantum__[A-Za-z0-9_]+)\s*\()");
    bool seen_label = false;
    bool left_entry_block = false;
    std::set<int> measured;
    int max_qubit = -1;

    for (const auto& [line_no, raw] : entry->body) {
        std::string_view line = trim(raw);
        if (const auto semi = line.find(';'); semi != std::string_view::npos && line.find('"') == std::string_view::npos) {
            line = trim(line.substr(0, semi));
        }
        if (line.empty()) continue;
        if (is_label(line)) {
            if (seen_label || !program.calls.empty()) left_entry_block = true;
            seen_label = true;
            continue;
        }
        if (starts_with_word(line, "br") || starts_with_word(line, "switch")) {
            left_entry_block = true;
            continue;
        }
        const bool has_call = line.find("call ") != std::string_view::npos;
        if (!has_call || line.find("__quantum__") == std::string_view::npos) continue;

        std::cmatch m;
        if (!std::regex_search(line.data(), line.data() + line.size(), m, callee)) {
            parse_fail(line_no, "cannot find callee in '" + std::string(line) + "'");
        }
        const std::string name = m[1].str();
        const auto it = intrinsics().find(name);
        if (it == intrinsics().end()) {
            throw Error(ErrorCode::UnsupportedIntrinsic,
                        "line " + std::to_string(line_no) + ": unsupported intrinsic " + name, line_no);
        }
        if (left_entry_block) {
            throw Error(ErrorCode::UnsupportedControlFlow,
                        "line " + std::to_string(line_no) + ": call to " + name +
                            " outside the single entry block",
                        line_no);
        }

        const std::size_t open = static_cast<std::size_t>(m.position(0) + m.length(0));
        int depth = 1;
        std::size_t close = open;
        for (; close < line.size() && depth > 0; ++close) {
            if (line[close] == '(') ++depth;
            if (line[close] == ')') --depth;
        }
        if (depth != 0) parse_fail(line_no, "unbalanced parentheses in call to " + name);
        const auto args = split_args(line.substr(open, close - 1 - open));

        const Signature& sig = it->second;
        if (args.size() != sig.args.size()) {
            parse_fail(line_no, name + " expects " + std::to_string(sig.args.size()) + " operands, got " +
                                    std::to_string(args.size()));
        }
        IntrinsicCall call;
        call.name = name;
        for (std::size_t i = 0; i < args.size(); ++i) {
            switch (sig.args[i]) {
                case Arg::Qubit: call.qubit_args.push_back(parse_pointer_operand(args[i], "Qubit", line_no)); break;
                case Arg::Result: call.result_args.push_back(parse_pointer_operand(args[i], "Result", line_no)); break;
                case Arg::Double: call.double_args.push_back(parse_double_operand(args[i], line_no)); break;
                case Arg::Label: break;
            }
        }
        switch (sig.effect) {
            case Effect::Gate:
            case Effect::Measure:
                for (int q : call.qubit_args) max_qubit = std::max(max_qubit, q);
                if (sig.effect == Effect::Measure) measured.insert(call.result_args.front());
                program.calls.push_back(std::move(call));
                break;
            case Effect::Record:
                program.output_order.push_back(call.result_args.front());
                break;
            case Effect::NoOp:
                break;
        }
    }
    program.required_qubits = declared ? *declared : max_qubit + 1;
    return program;
}

QirProgram load_qir_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_qir(buf.str());
}

LoweredKernel lower_to_circuit(const QirProgram& program) {
    const auto& table = intrinsics();
    Circuit circuit(std::max(1, program.required_qubits));
    try {
        for (const auto& call : program.calls) {
            const auto it = table.find(call.name);
            if (it == table.end()) {
                throw Error(ErrorCode::UnsupportedIntrinsic, "unsupported intrinsic " + call.name);
            }
            const Signature& sig = it->second;
            if (sig.effect == Effect::Measure) {
                circuit.append(Gate::measure(call.qubit_args.at(0), call.result_args.at(0)));
            } else if (sig.effect != Effect::Gate) {
                throw Error(ErrorCode::LoweringError, call.name + " is not a gate or measurement");
            } else if (is_rotation(sig.gate)) {
                circuit.append(Gate::rotation(sig.gate, call.qubit_args.at(0), call.double_args.at(0)));
            } else if (arity(sig.gate) == 2) {
                circuit.append(Gate::controlled(sig.gate, call.qubit_args.at(0), call.qubit_args.at(1)));
            } else {
                circuit.append(Gate::single(sig.gate, call.qubit_args.at(0)));
            }
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidArgument) throw;
        throw Error(ErrorCode::LoweringError, std::string("lowering failed: ") + e.what());
    } catch (const std::out_of_range&) {
        throw Error(ErrorCode::LoweringError, "intrinsic call with missing operands");
    }

    const auto slots = circuit.result_slots();
    std::vector<int> order = program.output_order;
    for (int r : order) {
        if (!std::binary_search(slots.begin(), slots.end(), r)) {
            throw Error(ErrorCode::LoweringError,
                        "result " + std::to_string(r) + " is recorded but never measured");
        }
    }
    if (order.empty()) order = slots;
    return {std::move(circuit), std::move(order)};
}

namespace {

std::string pointer_operand(std::string_view type_name, int index) {
    const std::string t = "%" + std::string(type_name) + "*";
    if (index == 0) return t + " null";
    return t + " inttoptr (i64 " + std::to_string(index) + " to " + t + ")";
}

std::string format_double(double d) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", d);
    std::string s(buf);
    // LLVM's textual form wants a decimal point or exponent.
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string declaration(const std::string& name, const Signature& sig) {
    std::string params;
    for (std::size_t i = 0; i < sig.args.size(); ++i) {
        if (i > 0) params += ", ";
        switch (sig.args[i]) {
            case Arg::Qubit: params += "%Qubit*"; break;
            case Arg::Result: params += "%Result*"; break;
            case Arg::Double: params += "double"; break;
            case Arg::Label: params += "i8*"; break;
        }
    }
    return "declare void @" + name + "(" + params + ")";
}

}  // namespace

std::string emit_qir(const QirProgram& program) {
    const auto& table = intrinsics();
    std::ostringstream os;
    std::set<std::string> used{"__quantum__rt__initialize"};
    int num_results = 0;
    for (const auto& call : program.calls) {
        for (int r : call.result_args) num_results = std::max(num_results, r + 1);
    }

    os << "; ModuleID = '" << program.entry_name << "'\n"
       << "source_filename = \"" << program.entry_name << "\"\n\n"
       << "%Qubit = type opaque\n%Result = type opaque\n\n"
       << "define void @" << program.entry_name << "() #0 {\n"
       << "entry:\n"
       << "  call void @__quantum__rt__initialize(i8* null)\n";
    for (const auto& call : program.calls) {
        const auto it = table.find(call.name);
        if (it == table.end()) throw Error(ErrorCode::UnsupportedIntrinsic, "cannot emit " + call.name);
        used.insert(call.name);
        std::size_t qi = 0, ri = 0, di = 0;
        os << "  call void @" << call.name << "(";
        for (std::size_t i = 0; i < it->second.args.size(); ++i) {
            if (i > 0) os << ", ";
            switch (it->second.args[i]) {
                case Arg::Qubit: os << pointer_operand("Qubit", call.qubit_args.at(qi++)); break;
                case Arg::Result: os << pointer_operand("Result", call.result_args.at(ri++)); break;
                case Arg::Double: os << "double " << format_double(call.double_args.at(di++)); break;
                case Arg::Label: os << "i8* null"; break;
            }
        }
        os << ")\n";
    }
    if (!program.output_order.empty()) used.insert("__quantum__rt__result_record_output");
    for (int r : program.output_order) {
        os << "  call void @__quantum__rt__result_record_output(" << pointer_operand("Result", r)
           << ", i8* null)\n";
    }
    os << "  ret void\n}\n\n";
    for (const auto& name : used) os << declaration(name, table.at(name)) << "\n";
    os << "\nattributes #0 = { \"entry_point\" \"qir_profiles\"=\"base_profile\" "
       << "\"output_labeling_schema\"=\"schema_id\" \"required_num_qubits\"=\"" << program.required_qubits
       << "\" \"required_num_results\"=\"" << num_results << "\" }\n";
    return os.str();
}

QirProgram program_from_circuit(const Circuit& circuit, std::string entry_name) {
    QirProgram p;
    p.entry_name = std::move(entry_name);
    p.required_qubits = circuit.num_qubits();
    for (const auto& g : circuit.ops()) {
        IntrinsicCall call;
        call.qubit_args = g.qubits;
        switch (g.kind) {
            case GateKind::Sdg: call.name = "__quantum__qis__s__adj"; break;
            case GateKind::Tdg: call.name = "__quantum__qis__t__adj"; break;
            case GateKind::CNOT: call.name = "__quantum__qis__cnot__body"; break;
            default: {
                std::string lower(to_string(g.kind));
                std::transform(lower.begin(), lower.end(), lower.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                call.name = "__quantum__qis__" + lower + "__body";
            }
        }
        if (g.angle) call.double_args.push_back(*g.angle);
        if (g.result_slot) call.result_args.push_back(*g.result_slot);
        p.calls.push_back(std::move(call));
    }
    p.output_order = circuit.result_slots();
    return p;
}

}  // namespace qtask::qir
