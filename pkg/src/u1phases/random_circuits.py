"""Random U(1)-invariant circuits and Hamiltonians for tests and sweeps."""
from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from .circuits import Circuit, Gate, multi_z, rz, xy, z, zz
from .functionals import HamiltonianPiece, XYTerm


def _angle(rng) -> float:
    return float(rng.uniform(-math.pi, math.pi))


def random_local_gate(n: int, rng: np.random.Generator, kinds=("RZ", "XY", "ZZ")) -> Gate:
    """One random 1- or 2-qubit invariant gate."""
    kind = kinds[rng.integers(len(kinds))]
    if kind == "RZ" or n < 2:
        return rz(_angle(rng), int(rng.integers(n)))
    if kind == "Z":
        return z(int(rng.integers(n)))
    i, j = (int(q) for q in rng.choice(n, size=2, replace=False))
    return xy(_angle(rng), i, j) if kind == "XY" else zz(_angle(rng), i, j)


def random_invariant_circuit(
    n: int, depth: int, rng: np.random.Generator, max_weight: int = 2, mz_fraction: float = 0.25
) -> Circuit:
    """Random invariant circuit; MZ strings of weight up to ``max_weight`` appear
    with probability ``mz_fraction`` per gate when ``max_weight > 2``."""
    gates = []
    for _ in range(depth):
        if max_weight > 2 and rng.random() < mz_fraction:
            w = int(rng.integers(3, min(max_weight, n) + 1))
            qs = sorted(int(q) for q in rng.choice(n, size=w, replace=False))
            gates.append(multi_z(_angle(rng), qs))
        else:
            gates.append(random_local_gate(n, rng))
    return Circuit(n, tuple(gates))


def dress(core: Circuit, count: int, rng: np.random.Generator) -> Circuit:
    """Insert ``count`` random 1-/2-qubit invariant gates at random positions."""
    gates = list(core.gates)
    for _ in range(count):
        pos = int(rng.integers(len(gates) + 1))
        gates.insert(pos, random_local_gate(core.n, rng))
    return Circuit(core.n, tuple(gates))


def random_hamiltonian_piece(n: int, rng: np.random.Generator, max_weight: int | None = None,
                             n_z: int = 4, n_xy: int = 3) -> HamiltonianPiece:
    """Z strings of weight 1..max_weight plus XY couplings, random duration in (0.2, 1)."""
    max_weight = n if max_weight is None else max_weight
    z_terms = []
    for _ in range(n_z):
        w = int(rng.integers(1, max_weight + 1))
        qs = tuple(sorted(int(q) for q in rng.choice(n, size=w, replace=False)))
        z_terms.append((float(rng.normal()), qs))
    pairs = list(combinations(range(n), 2))
    xy_terms = []
    for _ in range(n_xy if n > 1 else 0):
        i, j = pairs[rng.integers(len(pairs))]
        xy_terms.append(XYTerm(float(rng.normal()), i, j))
    return HamiltonianPiece(n, tuple(z_terms), tuple(xy_terms), float(rng.uniform(0.2, 1.0)))
