"""OpenQASM 2.0 emission and parsing.

The emitter produces the canonical program layout: header, `qreg q[n];`,
`creg c[n];`, one gate line per gate, `measure q -> c;`. The parser accepts
exactly that shape (any register identifiers, literal or pi-expression
parameters) and rejects the rest of the QASM 2.0 grammar as unsupported.
`emit(parse(text))` is the canonical re-serialization of `text`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import (
    Circuit,
    Gate,
    GateKind,
    PARAMETRIC_KINDS,
    TWO_QUBIT_KINDS,
    create_circuit,
)

QASM_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

_MNEMONICS = {k.value: k for k in GateKind}


class QasmError(Exception):
    """Parse failure with 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.message = message
        self.line = line
        self.col = col


class QasmLexError(QasmError):
    pass


class QasmSyntaxError(QasmError):
    pass


class UnsupportedConstructError(QasmError):
    pass


def _fmt_param(value: float) -> str:
    # Shortest decimal that round-trips through float().
    return repr(float(value))


def emit_qasm(circuit: Circuit) -> str:
    if not circuit.measured:
        raise ValueError("circuit must be finalized (measured) before emission")
    n = circuit.num_qubits
    lines = [f"qreg q[{n}];", f"creg c[{n}];"]
    for g in circuit.gates:
        name = g.kind.value
        if g.kind in PARAMETRIC_KINDS:
            name += f"({_fmt_param(g.param)})"
        operands = ",".join(f"q[{t}]" for t in g.targets)
        lines.append(f"{name} {operands};")
    lines.append("measure q -> c;")
    return QASM_HEADER + "\n".join(lines) + "\n"


@dataclass(frozen=True)
class _Token:
    kind: str  # ID, NUMBER, STRING, or the literal symbol
    text: str
    line: int
    col: int


# Braces, comparison, and assignment only occur in unsupported constructs;
# lexing them lets the parser name the construct instead of failing earlier.
_SYMBOLS = {";", "[", "]", "(", ")", ",", "*", "/", "+", "-",
            "{", "}", "=", "<", ">"}


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "/" and i + 1 < n and text[i + 1] == "/":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch == "-" and i + 1 < n and text[i + 1] == ">":
            tokens.append(_Token("->", "->", line, start_col))
            i += 2
            col += 2
            continue
        if ch in _SYMBOLS:
            tokens.append(_Token(ch, ch, line, start_col))
            i += 1
            col += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise QasmLexError("unterminated string", line, start_col)
                j += 1
            if j >= n:
                raise QasmLexError("unterminated string", line, start_col)
            tokens.append(_Token("STRING", text[i + 1:j], line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] in ".eE"
                             or (text[j] in "+-" and text[j - 1] in "eE")):
                j += 1
            lit = text[i:j]
            try:
                float(lit)
            except ValueError:
                raise QasmLexError(f"malformed number {lit!r}", line, start_col)
            tokens.append(_Token("NUMBER", lit, line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("ID", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        raise QasmLexError(f"unexpected character {ch!r}", line, start_col)
    return tokens


_UNSUPPORTED_KEYWORDS = {"gate", "if", "barrier", "opaque", "reset", "U", "CX"}


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def _peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _eof_pos(self) -> tuple[int, int]:
        if self.tokens:
            t = self.tokens[-1]
            return t.line, t.col + len(t.text)
        return 1, 1

    def _next(self, expected: str) -> _Token:
        tok = self._peek()
        if tok is None:
            line, col = self._eof_pos()
            raise QasmSyntaxError(f"expected {expected}, found end of input", line, col)
        self.pos += 1
        return tok

    def _expect(self, kind: str, text: str | None = None) -> _Token:
        what = text if text is not None else kind
        tok = self._next(repr(what))
        if tok.kind != kind or (text is not None and tok.text != text):
            raise QasmSyntaxError(
                f"expected {what!r}, found {tok.text!r}", tok.line, tok.col
            )
        return tok

    def parse(self) -> Circuit:
        self._expect("ID", "OPENQASM")
        version = self._expect("NUMBER")
        if version.text != "2.0":
            raise UnsupportedConstructError(
                f"unsupported OPENQASM version {version.text}", version.line, version.col
            )
        self._expect(";")
        self._expect("ID", "include")
        inc = self._expect("STRING")
        if inc.text != "qelib1.inc":
            raise UnsupportedConstructError(
                f"unsupported include {inc.text!r}", inc.line, inc.col
            )
        self._expect(";")

        qreg_name, qreg_size = self._parse_reg_decl("qreg")
        creg_name, creg_size = self._parse_reg_decl("creg")
        if creg_size != qreg_size:
            tok = self.tokens[self.pos - 2]
            raise QasmSyntaxError(
                f"creg size {creg_size} does not match qreg size {qreg_size}",
                tok.line, tok.col,
            )
        circuit = create_circuit(qreg_size)

        measured = False
        while (tok := self._peek()) is not None:
            if tok.kind != "ID":
                raise QasmSyntaxError(f"expected statement, found {tok.text!r}",
                                      tok.line, tok.col)
            if measured:
                raise UnsupportedConstructError(
                    "statement after measurement", tok.line, tok.col
                )
            if tok.text == "measure":
                self._parse_measure(qreg_name, creg_name)
                circuit.measure()
                measured = True
            else:
                circuit.apply(self._parse_gate(qreg_name, qreg_size))
        if not measured:
            line, col = self._eof_pos()
            raise QasmSyntaxError("missing terminal measurement", line, col)
        return circuit

    def _parse_reg_decl(self, keyword: str) -> tuple[str, int]:
        kw = self._next(repr(keyword))
        if kw.kind != "ID" or kw.text != keyword:
            if kw.kind == "ID" and kw.text in _UNSUPPORTED_KEYWORDS:
                raise UnsupportedConstructError(
                    f"unsupported construct {kw.text!r}", kw.line, kw.col
                )
            raise QasmSyntaxError(f"expected {keyword!r}, found {kw.text!r}",
                                  kw.line, kw.col)
        name = self._expect("ID")
        self._expect("[")
        size = self._expect("NUMBER")
        if not size.text.isdigit() or int(size.text) < 1:
            raise QasmSyntaxError(f"invalid register size {size.text!r}",
                                  size.line, size.col)
        self._expect("]")
        self._expect(";")
        return name.text, int(size.text)

    def _parse_measure(self, qreg_name: str, creg_name: str) -> None:
        self._expect("ID", "measure")
        src = self._expect("ID")
        if src.text != qreg_name:
            raise QasmSyntaxError(f"unknown register {src.text!r}", src.line, src.col)
        tok = self._peek()
        if tok is not None and tok.kind == "[":
            raise UnsupportedConstructError(
                "per-qubit measurement (only full-register measure is supported)",
                tok.line, tok.col,
            )
        self._expect("->")
        dst = self._expect("ID")
        if dst.text != creg_name:
            raise QasmSyntaxError(f"unknown register {dst.text!r}", dst.line, dst.col)
        self._expect(";")

    def _parse_gate(self, qreg_name: str, qreg_size: int) -> Gate:
        name = self._expect("ID")
        if name.text in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedConstructError(
                f"unsupported construct {name.text!r}", name.line, name.col
            )
        kind = _MNEMONICS.get(name.text)
        if kind is None:
            raise UnsupportedConstructError(
                f"unsupported gate {name.text!r}", name.line, name.col
            )
        param = None
        if kind in PARAMETRIC_KINDS:
            self._expect("(")
            param = self._parse_expr()
            self._expect(")")
        targets = [self._parse_qubit_operand(qreg_name, qreg_size)]
        expected = 2 if kind in TWO_QUBIT_KINDS else 1
        while expected > len(targets):
            self._expect(",")
            targets.append(self._parse_qubit_operand(qreg_name, qreg_size))
        self._expect(";")
        return Gate(kind, tuple(targets), param)

    def _parse_qubit_operand(self, qreg_name: str, qreg_size: int) -> int:
        name = self._expect("ID")
        if name.text != qreg_name:
            raise QasmSyntaxError(f"unknown register {name.text!r}",
                                  name.line, name.col)
        self._expect("[")
        idx = self._expect("NUMBER")
        if not idx.text.isdigit():
            raise QasmSyntaxError(f"invalid qubit index {idx.text!r}",
                                  idx.line, idx.col)
        value = int(idx.text)
        if value >= qreg_size:
            raise QasmSyntaxError(
                f"qubit index {value} out of range for {qreg_name}[{qreg_size}]",
                idx.line, idx.col,
            )
        self._expect("]")
        return value

    # Parameter expressions: optional sign, then products/quotients of
    # numeric literals and `pi`. Covers pi, pi/2, 2*pi, 3*pi/2, -0.5, etc.
    def _parse_expr(self) -> float:
        sign = 1.0
        tok = self._peek()
        if tok is not None and tok.kind == "-":
            self.pos += 1
            sign = -1.0
        value = self._parse_factor()
        while (tok := self._peek()) is not None and tok.kind in ("*", "/"):
            self.pos += 1
            rhs = self._parse_factor()
            if tok.kind == "*":
                value *= rhs
            else:
                if rhs == 0.0:
                    raise QasmSyntaxError("division by zero", tok.line, tok.col)
                value /= rhs
        return sign * value

    def _parse_factor(self) -> float:
        tok = self._next("parameter")
        if tok.kind == "NUMBER":
            return float(tok.text)
        if tok.kind == "ID" and tok.text == "pi":
            return math.pi
        raise QasmSyntaxError(f"expected number or 'pi', found {tok.text!r}",
                              tok.line, tok.col)


def parse_qasm(text: str) -> Circuit:
    """Parse the supported OpenQASM 2.0 subset into a finalized circuit."""
    return _Parser(text).parse()
