"""Charge sectors and the diagonal operator families built on them.

Bit convention (used everywhere in the package): qubit ``q`` is bit ``q`` of
the integer encoding of a computational basis state, so qubit 0 is the least
significant bit.  Bitstrings are printed most-significant first, i.e. qubit 0
is the rightmost character.

All spectra below are exact integers (or exact rationals).  Floating point
enters only when a spectrum is contracted against measured phases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * math.pi

# enumerate_sector refuses anything bigger unless the sector itself is small
MAX_ENUM_QUBITS = 30
MAX_SECTOR_DIM = 10_000


def binomial(n: int, k: int) -> int:
    """Exact binomial coefficient, 0 when ``k > n``."""
    if n < 0 or k < 0:
        raise ValueError(f"binomial needs nonnegative arguments, got ({n}, {k})")
    return math.comb(n, k)


def mod2pi(angle: float) -> float:
    """Reduce an angle to the half-open interval (-pi, pi]."""
    angle = float(angle)
    if not math.isfinite(angle):
        raise ValueError(f"cannot reduce non-finite angle {angle!r}")
    r = math.remainder(angle, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def mod2pi_array(angles) -> np.ndarray:
    """Vectorised :func:`mod2pi`."""
    a = np.asarray(angles, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("cannot reduce non-finite angles")
    r = np.remainder(a + math.pi, TWO_PI) - math.pi
    return np.where(r <= -math.pi, r + TWO_PI, r)


def circular_distance(a: float, b: float) -> float:
    """min over integers w of |a - b - 2 pi w|."""
    return abs(mod2pi(a - b))


def popcount(x: int) -> int:
    return bin(x).count("1")


def bitstring(state: int, n: int) -> str:
    """Qubit 0 is the last character."""
    return format(state, f"0{n}b")


@dataclass(frozen=True)
class SectorBasis:
    """Basis states of ``n`` qubits with exactly ``m`` excitations.

    ``states`` is strictly increasing in the integer encoding, which for a
    fixed Hamming weight is colexicographic order of the occupied positions.
    """

    n: int
    m: int
    states: tuple[int, ...]
    index: dict[int, int] = field(repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.states)

    def position(self, state: int) -> int:
        """Position of ``state`` in the basis (KeyError if absent)."""
        return self.index[state]

    def state(self, position: int) -> int:
        return self.states[position]

    @property
    def bits(self) -> np.ndarray:
        """(dim, n) uint8 occupation table; column q holds qubit q."""
        return _bits_table(self.n, self.m)

    def labels(self) -> list[str]:
        return [bitstring(s, self.n) for s in self.states]


def _gosper(n: int, m: int):
    if m == 0:
        yield 0
        return
    x = (1 << m) - 1
    limit = 1 << n
    while x < limit:
        yield x
        u = x & -x
        v = x + u
        x = v + (((v ^ x) // u) >> 2)


@lru_cache(maxsize=256)
def enumerate_sector(n: int, m: int) -> SectorBasis:
    """All n-bit states of Hamming weight m, in increasing integer order."""
    if n < 1:
        raise ValueError(f"need at least one qubit, got n={n}")
    if not 0 <= m <= n:
        raise ValueError(f"excitation count m={m} outside 0..{n}")
    dim = binomial(n, m)
    if n > MAX_ENUM_QUBITS and dim > MAX_SECTOR_DIM:
        raise ValueError(
            f"sector (n={n}, m={m}) has dimension {dim}; only sectors of dimension "
            f"<= {MAX_SECTOR_DIM} are enumerated beyond {MAX_ENUM_QUBITS} qubits"
        )
    states = tuple(_gosper(n, m))
    return SectorBasis(n, m, states, {s: i for i, s in enumerate(states)})


@lru_cache(maxsize=256)
def _bits_table(n: int, m: int) -> np.ndarray:
    basis = enumerate_sector(n, m)
    table = np.zeros((len(basis), n), dtype=np.uint8)
    for row, s in enumerate(basis.states):
        q = 0
        while s:
            if s & 1:
                table[row, q] = 1
            s >>= 1
            q += 1
    table.setflags(write=False)
    return table


def rank_state(state: int) -> int:
    """Position of a state inside its own weight sector (colex rank)."""
    r = 0
    t = 0
    pos = 0
    while state:
        if state & 1:
            t += 1
            r += math.comb(pos, t)
        state >>= 1
        pos += 1
    return r


def unrank_state(n: int, m: int, rank: int) -> int:
    """Inverse of :func:`rank_state` within the (n, m) sector."""
    if not 0 <= rank < binomial(n, m):
        raise ValueError(f"rank {rank} out of range for sector (n={n}, m={m})")
    state = 0
    p = n - 1
    for t in range(m, 0, -1):
        while math.comb(p, t) > rank:
            p -= 1
        rank -= math.comb(p, t)
        state |= 1 << p
        p -= 1
    return state


def _check_range(name: str, value: int, n: int) -> None:
    if not 0 <= value <= n:
        raise ValueError(f"{name}={value} outside 0..{n}")


def c_eigenvalue(n: int, l: int, m: int) -> int:
    """Eigenvalue of C_l (sum of all weight-l Z strings) on the m-excitation sector."""
    _check_range("l", l, n)
    _check_range("m", m, n)
    return sum((-1) ** s * math.comb(m, s) * math.comb(n - m, l - s) for s in range(l + 1))


def z_string_sector_trace(n: int, weight: int, m: int) -> int:
    """Tr(Z_S Pi_m) for any Z string on ``weight`` distinct qubits."""
    _check_range("weight", weight, n)
    _check_range("m", m, n)
    return sum(
        (-1) ** s * math.comb(weight, s) * math.comb(n - weight, m - s)
        for s in range(min(weight, m) + 1)
    )


def bk_coefficient(n: int, k: int, m: int) -> int:
    """Weight of Pi_m in B_k: (-1)^m C(n-m, k-m) for m <= k, else 0."""
    _check_range("k", k, n)
    _check_range("m", m, n)
    if m > k:
        return 0
    return (-1) ** m * math.comb(n - m, k - m)


def c_spectrum(n: int, l: int) -> tuple[int, ...]:
    return tuple(c_eigenvalue(n, l, m) for m in range(n + 1))


def bk_spectrum(n: int, k: int) -> tuple[int, ...]:
    return tuple(bk_coefficient(n, k, m) for m in range(n + 1))


def f3_spectrum(n: int) -> tuple[int, ...]:
    """Sector weights of F_3 = (n-2)(Pi_0 - Pi_n) - (Pi_1 - Pi_{n-1})."""
    if n < 3:
        raise ValueError(f"F3 needs n >= 3, got {n}")
    f = [0] * (n + 1)
    f[0] += n - 2
    f[n] -= n - 2
    f[1] -= 1
    f[n - 1] += 1
    return tuple(f)


def spectrum_trace(spectrum, n: int) -> int:
    """Tr(sum_m c(m) Pi_m) = sum_m c(m) C(n, m)."""
    if len(spectrum) != n + 1:
        raise ValueError(f"spectrum must have {n + 1} entries, got {len(spectrum)}")
    return sum(c * math.comb(n, m) for m, c in enumerate(spectrum))


def spectrum_inner(a, b, n: int) -> int:
    """Hilbert-Schmidt inner product of two sector-diagonal operators."""
    return spectrum_trace([x * y for x, y in zip(a, b)], n)


def trace_Bk_Cl(n: int, k: int, l: int) -> int:
    _check_range("k", k, n)
    _check_range("l", l, n)
    return spectrum_inner(bk_spectrum(n, k), c_spectrum(n, l), n)


def f3_coefficients_in_Cl_basis(n: int) -> list[Fraction]:
    """Expansion F_3 = sum_l w_l C_l with w_l = 4 (l-1) / 2^n for odd l.

    The sign is the one selected by projecting F_3 onto C_l directly; see
    :func:`project_onto_Cl` for that route.
    """
    if n < 3:
        raise ValueError(f"F3 needs n >= 3, got {n}")
    return [Fraction(4 * (l - 1), 2**n) if l % 2 else Fraction(0) for l in range(n + 1)]


def project_onto_Cl(spectrum, n: int) -> list[Fraction]:
    """Coefficients of a sector-diagonal operator in the {C_l} basis.

    Uses Tr(C_l C_l') = delta 2^n C(n, l), so w_l = Tr(X C_l) / (2^n C(n, l)).
    """
    return [
        Fraction(spectrum_inner(spectrum, c_spectrum(n, l), n), 2**n * math.comb(n, l))
        for l in range(n + 1)
    ]
