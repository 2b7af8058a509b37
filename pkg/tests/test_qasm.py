import math
import random
from pathlib import Path

import pytest

from qoffload.circuit import Gate, GateKind, bell_circuit, create_circuit
from qoffload.qasm import (
    QasmError,
    QasmSyntaxError,
    UnsupportedConstructError,
    emit_qasm,
    parse_qasm,
)

from oracles import random_circuit

GOLDEN_BELL = (Path(__file__).parent / "golden" / "bell.qasm").read_text()


class TestEmit:
    def test_bell_byte_exact(self):
        assert emit_qasm(bell_circuit()) == GOLDEN_BELL

    def test_empty_circuit(self):
        out = emit_qasm(create_circuit(1).measure())
        assert out == ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                       "qreg q[1];\ncreg c[1];\nmeasure q -> c;\n")

    def test_rz_line(self):
        c = create_circuit(3).rz(1, 0.5).measure()
        assert "rz(0.5) q[1];" in emit_qasm(c).split("\n")

    def test_unfinalized_rejected(self):
        with pytest.raises(ValueError):
            emit_qasm(create_circuit(1).h(0))

    def test_all_mnemonics(self):
        c = (create_circuit(3).h(0).x(1).y(2).z(0).s(1).sdg(2).t(0).tdg(1)
             .rx(0, 0.1).ry(1, 0.2).rz(2, 0.3).cx(0, 1).cz(1, 2).swap(0, 2)
             .measure())
        lines = emit_qasm(c).split("\n")
        assert "sdg q[2];" in lines
        assert "rx(0.1) q[0];" in lines
        assert "cx q[0],q[1];" in lines
        assert "swap q[0],q[2];" in lines


class TestParse:
    def test_bell_listing(self):
        c = parse_qasm(GOLDEN_BELL)
        assert c.num_qubits == 2
        assert c.gates == [Gate(GateKind.H, (0,)), Gate(GateKind.CX, (0, 1))]
        assert c.measured

    def test_empty_program(self):
        text = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                "qreg q[1];\ncreg c[1];\nmeasure q -> c;\n")
        c = parse_qasm(text)
        assert c.num_qubits == 1 and c.gates == [] and c.measured

    def test_pi_expressions(self):
        text = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                "qreg q[2];\ncreg c[2];\n"
                "rx(pi/2) q[0];\nry(2*pi) q[1];\nrz(-pi/4) q[0];\n"
                "rx(3*pi/2) q[1];\nry(pi) q[0];\nrz(0.25) q[1];\n"
                "measure q -> c;\n")
        c = parse_qasm(text)
        params = [g.param for g in c.gates]
        expected = [math.pi / 2, 2 * math.pi, -math.pi / 4,
                    3 * math.pi / 2, math.pi, 0.25]
        for got, want in zip(params, expected):
            assert abs(got - want) < 1e-15

    def test_renames_to_canonical_registers(self):
        text = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                "qreg reg[2];\ncreg bits[2];\nh reg[0];\nmeasure reg -> bits;\n")
        c = parse_qasm(text)
        assert "h q[0];" in emit_qasm(c)

    def test_size_mismatch(self):
        text = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                "qreg q[2];\ncreg c[3];\nmeasure q -> c;\n")
        with pytest.raises(QasmSyntaxError, match="does not match"):
            parse_qasm(text)

    def test_index_out_of_declared_range(self):
        text = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                "qreg q[2];\ncreg c[2];\nh q[4];\nmeasure q -> c;\n")
        with pytest.raises(QasmSyntaxError, match="out of range") as exc:
            parse_qasm(text)
        assert exc.value.line == 5

    @pytest.mark.parametrize("stmt,name", [
        ("barrier q;", "barrier"),
        ("if (c==1) x q[0];", "if"),
        ("opaque foo q;", "opaque"),
        ("reset q[0];", "reset"),
        ("gate mygate a { h a; }", "gate"),
    ])
    def test_unsupported_constructs_named(self, stmt, name):
        text = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                f"qreg q[2];\ncreg c[2];\n{stmt}\nmeasure q -> c;\n")
        with pytest.raises(UnsupportedConstructError, match=name):
            parse_qasm(text)

    def test_per_qubit_measure_unsupported(self):
        text = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                "qreg q[2];\ncreg c[2];\nmeasure q[0] -> c[0];\n")
        with pytest.raises(UnsupportedConstructError, match="per-qubit"):
            parse_qasm(text)

    def test_qasm3_version_rejected(self):
        with pytest.raises(UnsupportedConstructError, match="version"):
            parse_qasm("OPENQASM 3.0;\n")

    def test_error_positions_reported(self):
        with pytest.raises(QasmError) as exc:
            parse_qasm('OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2]\ncreg c[2];\n')
        assert exc.value.line >= 3


class TestRoundTrip:
    def test_random_circuits(self):
        rng = random.Random(1337)
        for _ in range(200):
            c = random_circuit(rng, rng.randint(1, 5), rng.randint(0, 25))
            back = parse_qasm(emit_qasm(c))
            assert back.num_qubits == c.num_qubits
            assert back.measured
            assert len(back.gates) == len(c.gates)
            for got, want in zip(back.gates, c.gates):
                assert got.kind == want.kind and got.targets == want.targets
                if want.param is not None:
                    assert abs(got.param - want.param) < 1e-12

    def test_canonical_reserialization_fixed_point(self):
        text = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                "qreg r[2];\ncreg k[2];\nrx(pi/2) r[0];\ncx r[0],r[1];\n"
                "measure r -> k;\n")
        canonical = emit_qasm(parse_qasm(text))
        assert emit_qasm(parse_qasm(canonical)) == canonical


def _tokens_of(text):
    # crude whitespace-and-punctuation split good enough for mutation fuzzing
    import re
    return re.findall(r'"[^"]*"|->|[A-Za-z_][A-Za-z0-9_.]*|\d+\.\d+|\d+|[;\[\](),]',
                      text)


class TestMutationFuzz:
    def test_single_token_deletions_always_positioned_errors(self):
        tokens = _tokens_of(GOLDEN_BELL)
        assert len(tokens) > 20
        for i in range(len(tokens)):
            mutated = " ".join(tokens[:i] + tokens[i + 1:])
            try:
                parse_qasm(mutated)
            except QasmError as exc:
                assert exc.line >= 1 and exc.col >= 1
            # a deletion that still parses (none for the Bell program) is fine;
            # the requirement is no uncontrolled crash

    def test_truncations_never_crash(self):
        for i in range(len(GOLDEN_BELL)):
            try:
                parse_qasm(GOLDEN_BELL[:i])
            except QasmError:
                pass
