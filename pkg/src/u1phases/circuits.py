"""Gate set, circuits, and the one-gate-per-line circuit text format.

Conventions (all angles in radians):

=========  ===========================  ======================================
name       constructor                  unitary
=========  ===========================  ======================================
``RZ``     ``rz(phi, q)``               exp(-i phi Z / 2)
``XY``     ``xy(phi, i, j)``            exp(+i phi (X_i X_j + Y_i Y_j))
``ZZ``     ``zz(s, i, j)``              exp(-i (s/2) Z_i Z_j)
``MZ``     ``multi_z(alpha, qubits)``   exp(-i alpha prod_{j in S} Z_j)
``PS``     ``phase_shift(gamma, q)``    exp(+i gamma Z / 2)
``H``      ``h(q)``                     Hadamard
``X``      ``x(q)``, ``y``, ``z``       Pauli matrices
``CNOT``   ``cnot(c, t)``               controlled-X
=========  ===========================  ======================================

Global phases follow from these definitions literally.  Every quantity the
package reports is a phase functional that is blind to the global phase, so
the choice is harmless but fixed.

Text format::

    # comment
    RZ 0 pi/5
    XY 0,1 -3pi/10
    MZ 0,1,2 0.25
    CNOT 0,1

Printing then parsing returns an identical circuit, and printing a parsed
canonical file reproduces it character for character.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

PARAMETRIC = {"RZ", "XY", "ZZ", "MZ", "PS"}
ARITY = {"RZ": 1, "PS": 1, "H": 1, "X": 1, "Y": 1, "Z": 1, "XY": 2, "ZZ": 2, "CNOT": 2}
U1_INVARIANT = {"RZ", "XY", "ZZ", "MZ", "Z", "PS"}
SELF_INVERSE = {"H", "X", "Y", "Z", "CNOT"}


class CircuitError(ValueError):
    """Malformed gate, circuit, or circuit text."""


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: tuple[int, ...]
    param: float | None = None

    def __post_init__(self):
        if self.name not in PARAMETRIC | SELF_INVERSE:
            raise CircuitError(f"unknown gate {self.name!r}")
        if not self.qubits:
            raise CircuitError(f"{self.name} needs at least one qubit")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{self.name} has repeated qubits {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"{self.name} has a negative qubit index {self.qubits}")
        arity = ARITY.get(self.name)
        if arity is not None and len(self.qubits) != arity:
            raise CircuitError(f"{self.name} acts on {arity} qubit(s), got {self.qubits}")
        if (self.param is None) == (self.name in PARAMETRIC):
            raise CircuitError(f"{self.name} parameter mismatch: {self.param!r}")
        if self.param is not None:
            object.__setattr__(self, "param", float(self.param))
            if not math.isfinite(self.param):
                raise CircuitError(f"{self.name} has non-finite angle {self.param!r}")

    @property
    def is_u1_invariant(self) -> bool:
        return self.name in U1_INVARIANT

    @property
    def is_diagonal(self) -> bool:
        return self.name in {"RZ", "ZZ", "MZ", "PS", "Z"}

    def inverse(self) -> "Gate":
        if self.name in SELF_INVERSE:
            return self
        return Gate(self.name, self.qubits, -self.param)


def rz(phi, q):
    return Gate("RZ", (q,), phi)


def xy(phi, i, j):
    return Gate("XY", (i, j), phi)


def zz(s, i, j):
    return Gate("ZZ", (i, j), s)


def multi_z(alpha, qubits):
    return Gate("MZ", tuple(qubits), alpha)


def phase_shift(gamma, q):
    return Gate("PS", (q,), gamma)


def h(q):
    return Gate("H", (q,))


def x(q):
    return Gate("X", (q,))


def y(q):
    return Gate("Y", (q,))


def z(q):
    return Gate("Z", (q,))


def cnot(control, target):
    return Gate("CNOT", (control, target))


def classify_u1(gate: Gate) -> str:
    """'invariant' if the gate commutes with sum_j Z_j, else 'non-invariant'."""
    return "invariant" if gate.is_u1_invariant else "non-invariant"


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.n < 1:
            raise CircuitError(f"circuit needs at least one qubit, got n={self.n}")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.n:
                raise CircuitError(f"gate {g} addresses a qubit outside 0..{self.n - 1}")

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n != self.n:
            raise CircuitError(f"cannot concatenate circuits on {self.n} and {other.n} qubits")
        return Circuit(self.n, self.gates + other.gates)

    def then(self, *gates: Gate) -> "Circuit":
        return Circuit(self.n, self.gates + tuple(gates))

    def inverse(self) -> "Circuit":
        return Circuit(self.n, tuple(g.inverse() for g in reversed(self.gates)))

    def power(self, r: int) -> "Circuit":
        if r < 0:
            return self.inverse().power(-r)
        return Circuit(self.n, self.gates * r)

    @property
    def is_u1_invariant(self) -> bool:
        return all(g.is_u1_invariant for g in self.gates)

    def to_text(self) -> str:
        return format_circuit(self)


# ---------------------------------------------------------------- angle text

_PI_RE = re.compile(r"^([+-]?)(\d*)\*?pi(?:/(\d+))?$")
_MAX_DEN = 720


def pi_fraction(num: int, den: int = 1) -> float:
    """The float that the text ``{num}pi/{den}`` parses to."""
    return num * math.pi / den


def parse_angle(text: str) -> float:
    """Decimal radians or pi fractions such as ``pi/5``, ``-3pi/10``, ``2*pi``."""
    s = text.strip().replace(" ", "")
    m = _PI_RE.match(s)
    if m:
        sign, num, den = m.groups()
        k = int(num) if num else 1
        if sign == "-":
            k = -k
        d = int(den) if den else 1
        if d == 0:
            raise CircuitError(f"zero denominator in angle {text!r}")
        return pi_fraction(k, d)
    try:
        value = float(s)
    except ValueError:
        raise CircuitError(f"cannot parse angle {text!r}") from None
    if not math.isfinite(value):
        raise CircuitError(f"non-finite angle {text!r}")
    return value


def format_angle(value: float) -> str:
    """Inverse of :func:`parse_angle`; bit-exact."""
    if value == 0.0:
        return repr(value)
    approx = Fraction(value / math.pi).limit_denominator(_MAX_DEN)
    k, d = approx.numerator, approx.denominator
    if k != 0 and pi_fraction(k, d) == value:
        sign = "-" if k < 0 else ""
        mag = abs(k)
        head = f"{sign}{'' if mag == 1 else mag}pi"
        return head if d == 1 else f"{head}/{d}"
    return repr(value)


def format_gate(g: Gate) -> str:
    qs = ",".join(str(q) for q in g.qubits)
    if g.param is None:
        return f"{g.name} {qs}"
    return f"{g.name} {qs} {format_angle(g.param)}"


def format_circuit(circuit: Circuit) -> str:
    lines = [f"# n={circuit.n}"]
    lines += [format_gate(g) for g in circuit.gates]
    return "\n".join(lines) + "\n"


def parse_circuit(text: str, n: int | None = None) -> Circuit:
    """Parse circuit text.  ``n`` defaults to the ``# n=...`` header, else to
    one more than the largest qubit index."""
    gates = []
    header_n = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            m = re.match(r"#\s*n\s*=\s*(\d+)\s*$", line)
            if m and header_n is None:
                header_n = int(m.group(1))
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        name = parts[0].upper()
        try:
            if len(parts) < 2:
                raise CircuitError("missing qubit list")
            qubits = tuple(int(q) for q in parts[1].split(","))
            if name in PARAMETRIC:
                if len(parts) != 3:
                    raise CircuitError(f"{name} takes exactly one angle")
                gates.append(Gate(name, qubits, parse_angle(parts[2])))
            else:
                if len(parts) != 2:
                    raise CircuitError(f"{name} takes no angle")
                gates.append(Gate(name, qubits))
        except (CircuitError, ValueError) as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if n is None:
        n = header_n
    if n is None:
        n = 1 + max((max(g.qubits) for g in gates), default=0)
    return Circuit(n, tuple(gates))


def circuit_from_gates(n: int, gates: Iterable[Gate]) -> Circuit:
    return Circuit(n, tuple(gates))


def support(state: int) -> list[int]:
    """Occupied qubits of a basis state, ascending."""
    out = []
    q = 0
    while state:
        if state & 1:
            out.append(q)
        state >>= 1
        q += 1
    return out


def fanout(qubits: Sequence[int]) -> list[Gate]:
    """Hadamard on the first qubit then CNOTs from it onto the rest.

    Maps |0...0> to (|0...0> + |1_S>)/sqrt(2) for S = ``qubits``.
    """
    if not qubits:
        raise CircuitError("fan-out needs a nonempty support")
    head, *rest = qubits
    return [h(head)] + [cnot(head, q) for q in rest]
