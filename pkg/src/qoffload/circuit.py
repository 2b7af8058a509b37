"""Gate-level circuit IR.

A circuit is an ordered list of gates over a single n-qubit register, plus a
terminal full-register measurement marker. Once measured, a circuit is frozen
and ready to be offloaded. Outcome bit ordering: qubit i contributes 2^i to the
outcome index (qubit 0 least-significant).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

# Default register-size bound; keeps the statevector under ~256 MiB of
# complex doubles. Override per call where a device allows more.
DEFAULT_MAX_QUBITS = 24


class CircuitError(Exception):
    """Base for circuit construction errors."""


class SizeOutOfRangeError(CircuitError):
    pass


class IndexOutOfRangeError(CircuitError):
    pass


class DuplicateTargetsError(CircuitError):
    pass


class GateAfterMeasureError(CircuitError):
    pass


class DoubleMeasureError(CircuitError):
    pass


class GateParameterError(CircuitError):
    pass


class GateKind(Enum):
    """Supported gate set; values are the qelib1.inc mnemonics."""

    H = "h"
    X = "x"
    Y = "y"
    Z = "z"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    CX = "cx"
    CZ = "cz"
    SWAP = "swap"


TWO_QUBIT_KINDS = frozenset({GateKind.CX, GateKind.CZ, GateKind.SWAP})
PARAMETRIC_KINDS = frozenset({GateKind.RX, GateKind.RY, GateKind.RZ})


@dataclass(frozen=True)
class Gate:
    """One gate application: kind, target qubit indices, optional angle."""

    kind: GateKind
    targets: tuple[int, ...]
    param: float | None = None

    def __post_init__(self):
        arity = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.targets) != arity:
            raise IndexOutOfRangeError(
                f"{self.kind.value} takes {arity} target(s), got {len(self.targets)}"
            )
        if arity == 2 and self.targets[0] == self.targets[1]:
            raise DuplicateTargetsError(
                f"{self.kind.value} targets must be distinct, got {self.targets}"
            )
        if any(t < 0 for t in self.targets):
            raise IndexOutOfRangeError(f"negative qubit index in {self.targets}")
        if self.kind in PARAMETRIC_KINDS:
            if self.param is None:
                raise GateParameterError(f"{self.kind.value} requires a parameter")
            if not math.isfinite(self.param):
                raise GateParameterError(f"{self.kind.value} parameter must be finite")
        elif self.param is not None:
            raise GateParameterError(f"{self.kind.value} takes no parameter")


@dataclass
class Circuit:
    """Ordered gate sequence over one quantum register."""

    num_qubits: int
    gates: list[Gate] = field(default_factory=list)
    measured: bool = False

    def apply(self, gate: Gate) -> "Circuit":
        if self.measured:
            raise GateAfterMeasureError("cannot append a gate after measurement")
        if any(t >= self.num_qubits for t in gate.targets):
            raise IndexOutOfRangeError(
                f"gate targets {gate.targets} exceed register size {self.num_qubits}"
            )
        self.gates.append(gate)
        return self

    # Convenience constructors mirroring the offload-API call style.
    def h(self, q: int) -> "Circuit":
        return self.apply(Gate(GateKind.H, (q,)))

    def x(self, q: int) -> "Circuit":
        return self.apply(Gate(GateKind.X, (q,)))

    def y(self, q: int) -> "Circuit":
        return self.apply(Gate(GateKind.Y, (q,)))

    def z(self, q: int) -> "Circuit":
        return self.apply(Gate(GateKind.Z, (q,)))

    def s(self, q: int) -> "Circuit":
        return self.apply(Gate(GateKind.S, (q,)))

    def sdg(self, q: int) -> "Circuit":
        return self.apply(Gate(GateKind.SDG, (q,)))

    def t(self, q: int) -> "Circuit":
        return self.apply(Gate(GateKind.T, (q,)))

    def tdg(self, q: int) -> "Circuit":
        return self.apply(Gate(GateKind.TDG, (q,)))

    def rx(self, q: int, theta: float) -> "Circuit":
        return self.apply(Gate(GateKind.RX, (q,), theta))

    def ry(self, q: int, theta: float) -> "Circuit":
        return self.apply(Gate(GateKind.RY, (q,), theta))

    def rz(self, q: int, theta: float) -> "Circuit":
        return self.apply(Gate(GateKind.RZ, (q,), theta))

    def cx(self, control: int, target: int) -> "Circuit":
        return self.apply(Gate(GateKind.CX, (control, target)))

    def cz(self, a: int, b: int) -> "Circuit":
        return self.apply(Gate(GateKind.CZ, (a, b)))

    def swap(self, a: int, b: int) -> "Circuit":
        return self.apply(Gate(GateKind.SWAP, (a, b)))

    def measure(self) -> "Circuit":
        """Record the terminal full-register measurement; freezes the circuit."""
        if self.measured:
            raise DoubleMeasureError("circuit already measured")
        self.measured = True
        return self

    def copy(self, *, unmeasured: bool = False) -> "Circuit":
        return Circuit(self.num_qubits, list(self.gates),
                       False if unmeasured else self.measured)

    def __eq__(self, other):
        if not isinstance(other, Circuit):
            return NotImplemented
        return (self.num_qubits == other.num_qubits
                and self.gates == other.gates
                and self.measured == other.measured)


def create_circuit(num_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> Circuit:
    """New empty circuit over a register of the given size."""
    if not isinstance(num_qubits, int) or num_qubits < 1 or num_qubits > max_qubits:
        raise SizeOutOfRangeError(
            f"register size must be in [1, {max_qubits}], got {num_qubits!r}"
        )
    return Circuit(num_qubits)


@dataclass(frozen=True)
class Histogram:
    """Shot counts indexed by outcome integer; length 2^num_qubits."""

    counts: tuple[int, ...]
    shots: int

    def __post_init__(self):
        n = len(self.counts)
        if n < 2 or n & (n - 1):
            raise ValueError(f"counts length must be a power of two >= 2, got {n}")
        if any(c < 0 for c in self.counts):
            raise ValueError("negative count")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if sum(self.counts) != self.shots:
            raise ValueError(
                f"counts sum {sum(self.counts)} != shots {self.shots}"
            )

    @property
    def num_qubits(self) -> int:
        return len(self.counts).bit_length() - 1

    def to_dict(self) -> dict:
        return {"counts": list(self.counts), "shots": self.shots}

    @classmethod
    def from_dict(cls, d: dict) -> "Histogram":
        return cls(tuple(int(c) for c in d["counts"]), int(d["shots"]))


_INV_SQRT2 = 1.0 / math.sqrt(2.0)
_FIXED_MATRICES = {
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) * _INV_SQRT2,
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.SDG: np.array([[1, 0], [0, -1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
    GateKind.TDG: np.array([[1, 0], [0, np.exp(-1j * math.pi / 4)]], dtype=complex),
    GateKind.CX: np.array([[1, 0, 0, 0],
                           [0, 1, 0, 0],
                           [0, 0, 0, 1],
                           [0, 0, 1, 0]], dtype=complex),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array([[1, 0, 0, 0],
                             [0, 0, 1, 0],
                             [0, 1, 0, 0],
                             [0, 0, 0, 1]], dtype=complex),
}


def gate_matrix(kind: GateKind, param: float | None = None) -> np.ndarray:
    """Conventional unitary for a gate kind (2x2, or 4x4 in |q1 q0> order
    with the first target as the high bit for controlled gates)."""
    if kind in PARAMETRIC_KINDS:
        if param is None:
            raise GateParameterError(f"{kind.value} requires a parameter")
        t = param / 2.0
        c, s = math.cos(t), math.sin(t)
        if kind is GateKind.RX:
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
        if kind is GateKind.RY:
            return np.array([[c, -s], [s, c]], dtype=complex)
        return np.array([[np.exp(-1j * t), 0], [0, np.exp(1j * t)]], dtype=complex)
    if param is not None:
        raise GateParameterError(f"{kind.value} takes no parameter")
    return _FIXED_MATRICES[kind].copy()


def bell_circuit() -> Circuit:
    """H on qubit 0, CX 0->1, measured: the two-qubit Bell-state program."""
    return create_circuit(2).h(0).cx(0, 1).measure()


def ghz3_circuit() -> Circuit:
    """Three-qubit GHZ-state program."""
    return create_circuit(3).h(0).cx(0, 1).cx(1, 2).measure()
