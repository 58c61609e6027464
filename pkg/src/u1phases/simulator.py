"""Two simulation backends and determinant-phase extraction.

The statevector backend works on the full 2**n space and accepts every gate.
The sector backend propagates the blocks V_m of a U(1)-invariant circuit
directly in the fixed-weight coordinates of :func:`enumerate_sector`, so its
cost is set by the block dimensions C(n, m) and never by 2**n.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import numpy as np
import scipy.linalg

from .circuits import Circuit, CircuitError, Gate
from .sectors import MAX_SECTOR_DIM, binomial, enumerate_sector, mod2pi

MAX_DENSE_QUBITS = 12
MAX_STATE_QUBITS = 24
UNITARY_DET_BAND = 1e-6

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
# local index = b0 + 2 b1 with b0 the control
_CNOT = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex)


class NonUnitaryError(ValueError):
    """A matrix expected to be unitary is not, to the stated tolerance."""


def _xy_matrix(phi: float) -> np.ndarray:
    c, s = math.cos(2 * phi), math.sin(2 * phi)
    u = np.eye(4, dtype=complex)
    u[1, 1] = u[2, 2] = c
    u[1, 2] = u[2, 1] = 1j * s
    return u


def gate_matrix(g: Gate) -> np.ndarray:
    """Local matrix of a gate; qubits[0] is the least significant local bit."""
    if g.is_diagonal:
        return np.diag(_diag_phases(g, len(g.qubits), tuple(range(len(g.qubits)))))
    if g.name == "H":
        return _H.copy()
    if g.name == "X":
        return _X.copy()
    if g.name == "Y":
        return _Y.copy()
    if g.name == "CNOT":
        return _CNOT.copy()
    if g.name == "XY":
        return _xy_matrix(g.param)
    raise CircuitError(f"no matrix for {g.name}")


@lru_cache(maxsize=1024)
def _z_values(n: int, qubit: int) -> np.ndarray:
    """+1/-1 eigenvalue of Z_qubit over the 2**n computational basis."""
    idx = np.arange(2**n)
    return 1 - 2 * ((idx >> qubit) & 1)


def _diag_phases(g: Gate, n: int, qubits: tuple[int, ...]) -> np.ndarray:
    """Diagonal of a diagonal gate, given the +-1 Z patterns of its qubits."""
    zs = [_z_values(n, q) for q in qubits]
    if g.name == "RZ":
        return np.exp(-0.5j * g.param * zs[0])
    if g.name == "PS":
        return np.exp(0.5j * g.param * zs[0])
    if g.name == "Z":
        return zs[0].astype(complex)
    if g.name == "ZZ":
        return np.exp(-0.5j * g.param * zs[0] * zs[1])
    if g.name == "MZ":
        return np.exp(-1j * g.param * np.prod(zs, axis=0))
    raise CircuitError(f"{g.name} is not diagonal")


# ------------------------------------------------------------ statevector


@dataclass(frozen=True)
class StateVector:
    n: int
    amplitudes: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, bits: str | int) -> complex:
        idx = int(bits, 2) if isinstance(bits, str) else bits
        return complex(self.amplitudes[idx])


def basis_state(n: int, index: int = 0) -> StateVector:
    if not 1 <= n <= MAX_STATE_QUBITS:
        raise ValueError(f"statevector backend supports 1..{MAX_STATE_QUBITS} qubits, got {n}")
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def _check_bounds(g: Gate, n: int) -> None:
    if max(g.qubits) >= n:
        raise IndexError(f"gate {g.name}{g.qubits} addresses a qubit outside 0..{n - 1}")


def _apply_inplace_free(psi: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Return gate @ psi, where psi has shape (2**n,) or (2**n, batch)."""
    if g.is_diagonal:
        d = _diag_phases(g, n, g.qubits)
        return psi * (d if psi.ndim == 1 else d[:, None])
    u = gate_matrix(g)
    batch = psi.shape[1:]
    t = psi.reshape((2,) * n + batch)
    axes = [n - 1 - q for q in reversed(g.qubits)]
    L = len(g.qubits)
    front = np.moveaxis(t, axes, range(L))
    shape = front.shape
    out = (u @ front.reshape(2**L, -1)).reshape(shape)
    return np.moveaxis(out, range(L), axes).reshape(psi.shape)


def apply_gate(state: StateVector, g: Gate) -> StateVector:
    _check_bounds(g, state.n)
    return StateVector(state.n, _apply_inplace_free(state.amplitudes, g, state.n))


def run_circuit(circuit: Circuit, state: StateVector | None = None) -> StateVector:
    if state is None:
        state = basis_state(circuit.n)
    if state.n != circuit.n:
        raise ValueError(f"state has {state.n} qubits, circuit has {circuit.n}")
    psi = state.amplitudes
    for g in circuit.gates:
        psi = _apply_inplace_free(psi, g, circuit.n)
    return StateVector(circuit.n, psi)


def apply_gates(psi: np.ndarray, gates: Iterable[Gate], n: int) -> np.ndarray:
    """Raw-array form of :func:`run_circuit` (batched columns allowed)."""
    for g in gates:
        psi = _apply_inplace_free(psi, g, n)
    return psi


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense 2**n x 2**n unitary, product of the gates in circuit order."""
    if circuit.n > MAX_DENSE_QUBITS:
        raise ValueError(
            f"dense unitary limited to n <= {MAX_DENSE_QUBITS}, got n={circuit.n}"
        )
    return apply_gates(np.eye(2**circuit.n, dtype=complex), circuit.gates, circuit.n)


def restrict_to_sector(unitary: np.ndarray, n: int, m: int) -> np.ndarray:
    """Rows/columns of a dense operator on the m-excitation states."""
    idx = np.array(enumerate_sector(n, m).states)
    return unitary[np.ix_(idx, idx)]


# ---------------------------------------------------------------- sectors


@dataclass(frozen=True)
class SectorBlockUnitary:
    n: int
    blocks: dict[int, np.ndarray]

    @property
    def sectors(self) -> tuple[int, ...]:
        return tuple(sorted(self.blocks))

    def __getitem__(self, m: int) -> np.ndarray:
        return self.blocks[m]


@lru_cache(maxsize=4096)
def _sector_z(n: int, m: int, qubit: int) -> np.ndarray:
    bits = enumerate_sector(n, m).bits
    return 1 - 2 * bits[:, qubit].astype(np.int64)


@lru_cache(maxsize=4096)
def _sector_hops(n: int, m: int, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Positions (a, b) of state pairs related by swapping an excitation i <-> j."""
    basis = enumerate_sector(n, m)
    mask = (1 << i) | (1 << j)
    src, dst = [], []
    for a, s in enumerate(basis.states):
        if ((s >> i) & 1) != ((s >> j) & 1):
            src.append(a)
            dst.append(basis.index[s ^ mask])
    return np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp)


def sector_diagonal(g: Gate, n: int, m: int) -> np.ndarray:
    zs = [_sector_z(n, m, q) for q in g.qubits]
    if g.name == "RZ":
        return np.exp(-0.5j * g.param * zs[0])
    if g.name == "PS":
        return np.exp(0.5j * g.param * zs[0])
    if g.name == "Z":
        return zs[0].astype(complex)
    if g.name == "ZZ":
        return np.exp(-0.5j * g.param * zs[0] * zs[1])
    if g.name == "MZ":
        return np.exp(-1j * g.param * np.prod(zs, axis=0))
    raise CircuitError(f"{g.name} is not diagonal")


def apply_gate_to_block(block: np.ndarray, g: Gate, n: int, m: int) -> np.ndarray:
    """Left-multiply a sector-m block (or a batch of sector vectors) by a gate."""
    if not g.is_u1_invariant:
        raise CircuitError(f"{g.name}{g.qubits} is not U(1)-invariant; no sector block exists")
    _check_bounds(g, n)
    if g.is_diagonal:
        d = sector_diagonal(g, n, m)
        return block * (d if block.ndim == 1 else d[:, None])
    # XY: mixes each pair of states differing by an i <-> j hop
    src, dst = _sector_hops(n, m, *g.qubits)
    if src.size == 0:
        return block
    c, s = math.cos(2 * g.param), math.sin(2 * g.param)
    out = block.copy()
    out[src] = c * block[src] + 1j * s * block[dst]
    return out


def sector_blocks(circuit: Circuit, sectors: Iterable[int] | None = None) -> SectorBlockUnitary:
    """Blocks V_m of a U(1)-invariant circuit for the requested sectors."""
    n = circuit.n
    sectors = range(n + 1) if sectors is None else sorted(set(sectors))
    for g in circuit.gates:
        if not g.is_u1_invariant:
            raise CircuitError(f"{g.name}{g.qubits} is not U(1)-invariant; sector blocks undefined")
    blocks = {}
    for m in sectors:
        if not 0 <= m <= n:
            raise ValueError(f"sector {m} outside 0..{n}")
        dim = binomial(n, m)
        if dim > MAX_SECTOR_DIM:
            raise ValueError(f"sector (n={n}, m={m}) has dimension {dim} > {MAX_SECTOR_DIM}")
        block = np.eye(dim, dtype=complex)
        for g in circuit.gates:
            block = apply_gate_to_block(block, g, n, m)
        blocks[m] = block
    return SectorBlockUnitary(n, blocks)


# ----------------------------------------------------------- determinants


def log_det(matrix: np.ndarray) -> tuple[float, float]:
    """(arg det, log|det|) from a partially pivoted LU factorisation.

    The argument is accumulated from the diagonal factors and the parity of
    the row interchanges, then reduced to (-pi, pi].
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"determinant needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return 0.0, 0.0
    with warnings.catch_warnings():
        # singular input is reported through the zero pivot below
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    diag = np.diag(lu)
    if np.any(diag == 0):
        return 0.0, -math.inf
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    phase = float(np.sum(np.angle(diag))) + math.pi * (swaps % 2)
    return mod2pi(phase), float(np.sum(np.log(np.abs(diag))))


def det_phase(matrix: np.ndarray, tol: float = UNITARY_DET_BAND) -> float:
    """arg det of a unitary matrix in (-pi, pi]; fails if |det| leaves [1-tol, 1+tol]."""
    phase, logabs = log_det(matrix)
    modulus = math.exp(logabs) if logabs > -math.inf else 0.0
    if abs(modulus - 1.0) > tol:
        raise NonUnitaryError(
            f"|det| = {modulus:.12g} deviates from 1 by {abs(modulus - 1.0):.3g} (> {tol:g})"
        )
    return phase
