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
#include "qtask/qir.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <string>

namespace qtask::qir {
namespace {

const std::filesystem::path kKernels{QTASK_KERNEL_DIR};

std::string wrap(const std::string& body, const std::string& attrs = "") {
    std::string out = "%Qubit = type opaque\n%Result = type opaque\n\ndefine void @k() #0 {\nentry:\n";
    out += body;
    out += "  ret void\n}\n\nattributes #0 = { \"entry_point\" " + attrs + "}\n";
    return out;
}

std::string q(int i) {
    return i == 0 ? "%Qubit* null" : "%Qubit* inttoptr (i64 " + std::to_string(i) + " to %Qubit*)";
}

std::string r(int i) {
    return i == 0 ? "%Result* null" : "%Result* inttoptr (i64 " + std::to_string(i) + " to %Result*)";
}

template <typename F>
Error capture(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "no error thrown";
    return Error(ErrorCode::InvalidArgument, "none");
}

TEST(QirParse, BellFixture) {
    const QirProgram p = load_qir_file(kKernels / "bell.ll");
    EXPECT_EQ(p.entry_name, "main");
    EXPECT_EQ(p.required_qubits, 2);
    const std::vector<IntrinsicCall> expected{
        {"__quantum__qis__h__body", {0}, {}, {}},
        {"__quantum__qis__cnot__body", {0, 1}, {}, {}},
        {"__quantum__qis__mz__body", {0}, {0}, {}},
        {"__quantum__qis__mz__body", {1}, {1}, {}},
    };
    EXPECT_EQ(p.calls, expected);
    EXPECT_EQ(p.output_order, (std::vector<int>{0, 1}));
}

TEST(QirParse, Ghz4Fixture) {
    const QirProgram p = load_qir_file(kKernels / "ghz4.ll");
    EXPECT_EQ(p.entry_name, "ghz4");
    EXPECT_EQ(p.required_qubits, 4);
    ASSERT_EQ(p.calls.size(), 8u);
    EXPECT_EQ(p.calls[0], (IntrinsicCall{"__quantum__qis__h__body", {0}, {}, {}}));
    for (int i = 0; i < 3; ++i)
        EXPECT_EQ(p.calls[1 + i], (IntrinsicCall{"__quantum__qis__cnot__body", {i, i + 1}, {}, {}}));
    for (int i = 0; i < 4; ++i) EXPECT_EQ(p.calls[4 + i], (IntrinsicCall{"__quantum__qis__mz__body", {i}, {i}, {}}));
    EXPECT_EQ(p.output_order, (std::vector<int>{0, 1, 2, 3}));
}

TEST(QirParse, EmptyBodyUsesAttribute) {
    const QirProgram p = parse_qir(wrap("", "\"required_num_qubits\"=\"3\" "));
    EXPECT_TRUE(p.calls.empty());
    EXPECT_EQ(p.required_qubits, 3);
}

TEST(QirParse, RequiredQubitsInferredFromOperands) {
    EXPECT_EQ(parse_qir(wrap("  call void @__quantum__qis__x__body(" + q(4) + ")\n")).required_qubits, 5);
    EXPECT_EQ(parse_qir(wrap("")).required_qubits, 0);
}

TEST(QirParse, OpaquePointerOperands) {
    const QirProgram p = parse_qir(wrap("  call void @__quantum__qis__cz__body(ptr null, ptr inttoptr (i64 2 to ptr))\n"));
    ASSERT_EQ(p.calls.size(), 1u);
    EXPECT_EQ(p.calls[0].qubit_args, (std::vector<int>{0, 2}));
}

TEST(QirParse, RotationAngle) {
    const QirProgram p = parse_qir(wrap("  call void @__quantum__qis__rz__body(double 0.5, " + q(2) + ")\n"));
    ASSERT_EQ(p.calls.size(), 1u);
    EXPECT_EQ(p.calls[0].double_args, std::vector<double>{0.5});
    const LoweredKernel k = lower_to_circuit(p);
    ASSERT_EQ(k.circuit.ops().size(), 1u);
    EXPECT_EQ(k.circuit.ops()[0], Gate::rotation(GateKind::RZ, 2, 0.5));
}

TEST(QirParse, UnknownIntrinsicIsNamed) {
    const Error e = capture([] {
        parse_qir(wrap("  call void @__quantum__qis__ccx__body(" + q(0) + ", " + q(1) + ", " + q(2) + ")\n"));
    });
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedIntrinsic);
    EXPECT_NE(std::string(e.what()).find("__quantum__qis__ccx__body"), std::string::npos);
}

TEST(QirParse, MalformedInttoptrReportsLine) {
    const std::string text = wrap("  call void @__quantum__qis__h__body(" + q(0) +
                                  ")\n  call void @__quantum__qis__x__body(%Qubit* inttoptr (i64 x to %Qubit*))\n");
    const Error e = capture([&] { parse_qir(text); });
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_EQ(e.line(), 7);
    EXPECT_EQ(std::string(e.what()).rfind("line 7:", 0), 0u) << e.what();
}

TEST(QirParse, NegativeIndexIsParseError) {
    const Error e = capture([] { parse_qir(wrap("  call void @__quantum__qis__x__body(%Qubit* inttoptr (i64 -1 to %Qubit*))\n")); });
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
}

TEST(QirParse, WrongArityIsParseError) {
    const Error e = capture([] { parse_qir(wrap("  call void @__quantum__qis__cnot__body(" + q(0) + ")\n")); });
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
}

TEST(QirParse, NoEntryFunction) {
    const Error e = capture([] { parse_qir("declare void @__quantum__qis__h__body(%Qubit*)\n"); });
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
}

TEST(QirParse, BranchBeforeQuantumCallIsRejected) {
    const std::string text = wrap("  br label %next\nnext:\n  call void @__quantum__qis__h__body(" + q(0) + ")\n");
    const Error e = capture([&] { parse_qir(text); });
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedControlFlow);
}

TEST(QirParse, NoiseLinesAreIgnored) {
    const std::string text = wrap("  %1 = add i64 1, 2\n  ; comment __quantum__qis__ccx__body\n  call void @__quantum__qis__t__adj(" +
                                  q(0) + ")\n");
    const QirProgram p = parse_qir(text);
    ASSERT_EQ(p.calls.size(), 1u);
    EXPECT_EQ(lower_to_circuit(p).circuit.ops()[0], Gate::single(GateKind::Tdg, 0));
}

TEST(QirLower, BellCircuit) {
    const LoweredKernel k = lower_to_circuit(load_qir_file(kKernels / "bell.ll"));
    Circuit expected(2);
    expected.append(Gate::single(GateKind::H, 0))
        .append(Gate::controlled(GateKind::CNOT, 0, 1))
        .append(Gate::measure(0, 0))
        .append(Gate::measure(1, 1));
    EXPECT_EQ(k.circuit, expected);
    EXPECT_EQ(k.output_order, (std::vector<int>{0, 1}));
}

TEST(QirLower, AliasesMapToCanonicalGates) {
    const std::string body = "  call void @__quantum__qis__s__adj(" + q(0) + ")\n  call void @__quantum__qis__cx__body(" +
                             q(0) + ", " + q(1) + ")\n  call void @__quantum__qis__t__adj__body(" + q(1) + ")\n";
    const LoweredKernel k = lower_to_circuit(parse_qir(wrap(body)));
    const std::vector<Gate> expected{Gate::single(GateKind::Sdg, 0), Gate::controlled(GateKind::CNOT, 0, 1),
                                     Gate::single(GateKind::Tdg, 1)};
    EXPECT_EQ(k.circuit.ops(), expected);
}

TEST(QirLower, RecordedButUnmeasuredSlotFails) {
    const std::string body = "  call void @__quantum__qis__mz__body(" + q(0) + ", " + r(0) +
                             ")\n  call void @__quantum__rt__result_record_output(" + r(3) + ", i8* null)\n";
    const Error e = capture([&] { lower_to_circuit(parse_qir(wrap(body))); });
    EXPECT_EQ(e.code(), ErrorCode::LoweringError);
}

TEST(QirLower, RecordOrderIsKept) {
    const std::string body = "  call void @__quantum__qis__mz__body(" + q(0) + ", " + r(0) +
                             ")\n  call void @__quantum__qis__mz__body(" + q(1) + ", " + r(1) +
                             ")\n  call void @__quantum__rt__result_record_output(" + r(1) +
                             ", i8* null)\n  call void @__quantum__rt__result_record_output(" + r(0) + ", i8* null)\n";
    EXPECT_EQ(lower_to_circuit(parse_qir(wrap(body))).output_order, (std::vector<int>{1, 0}));
}

Circuit random_measured_circuit(Rng& rng) {
    const int n = 1 + static_cast<int>(testing::below(rng, 5));
    Circuit c = testing::random_circuit(rng, n, static_cast<int>(testing::below(rng, 12)));
    int slot = 0;
    for (int qb = 0; qb < n; ++qb)
        if (rng.uniform() < 0.6) c.append(Gate::measure(qb, slot++));
    return c;
}

TEST(QirProperty, EmitParseRoundTrip) {
    Rng rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const QirProgram p = program_from_circuit(random_measured_circuit(rng), "k" + std::to_string(trial));
        const QirProgram back = parse_qir(emit_qir(p));
        ASSERT_EQ(back, p) << emit_qir(p);
    }
}

TEST(QirProperty, ParseLowerIsDeterministic) {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::string text = emit_qir(program_from_circuit(random_measured_circuit(rng)));
        const LoweredKernel a = lower_to_circuit(parse_qir(text));
        const LoweredKernel b = lower_to_circuit(parse_qir(text));
        EXPECT_EQ(a.circuit, b.circuit);
        EXPECT_EQ(a.output_order, b.output_order);
    }
}

TEST(QirProperty, IthIntrinsicIsIthGate) {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const Circuit c = random_measured_circuit(rng);
        const LoweredKernel k = lower_to_circuit(parse_qir(emit_qir(program_from_circuit(c))));
        ASSERT_EQ(k.circuit.ops().size(), c.ops().size());
        for (std::size_t i = 0; i < c.ops().size(); ++i) {
            EXPECT_EQ(k.circuit.ops()[i].kind, c.ops()[i].kind);
            EXPECT_EQ(k.circuit.ops()[i].qubits, c.ops()[i].qubits);
            if (c.ops()[i].angle) { EXPECT_DOUBLE_EQ(*k.circuit.ops()[i].angle, *c.ops()[i].angle); }
        }
    }
}

}  // namespace
}  // namespace qtask::qir
