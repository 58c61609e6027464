"""Determinant phases of sector blocks and the integer functionals built from them.

A sector-diagonal operator C = sum_m c(m) Pi_m with integer weights turns the
sector phases theta_m = arg det V_m into the path-independent phase
sum_m c(m) theta_m = -int Tr(H C) dt (mod 2 pi).  The three families used here:

* ``delta3``  -- weights of F_3, needs sectors 0, 1, n-1, n only
* ``phi_l``   -- weights c_l(m) of C_l, needs every sector
* ``beta_k``  -- weights of B_k, needs sectors 0..k only
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .circuits import Circuit
from .sectors import (
    bk_spectrum,
    binomial,
    c_spectrum,
    f3_spectrum,
    mod2pi,
    spectrum_trace,
    z_string_sector_trace,
)
from .simulator import SectorBlockUnitary, _sector_hops, _sector_z, det_phase, sector_blocks


class MissingSectorError(KeyError):
    pass


@dataclass(frozen=True)
class SectorPhases:
    """theta_m = arg det V_m for the sectors that were computed."""

    n: int
    thetas: dict[int, float]

    @property
    def available(self) -> frozenset[int]:
        return frozenset(self.thetas)

    def __getitem__(self, m: int) -> float:
        try:
            return self.thetas[m]
        except KeyError:
            raise MissingSectorError(
                f"sector m={m} not available (have {sorted(self.thetas)})"
            ) from None

    def with_global_phase(self, phi: float) -> "SectorPhases":
        """Sector phases of e^{i phi} V."""
        return SectorPhases(
            self.n, {m: mod2pi(t + binomial(self.n, m) * phi) for m, t in self.thetas.items()}
        )


def sector_phases(blocks: SectorBlockUnitary) -> SectorPhases:
    return SectorPhases(blocks.n, {m: det_phase(b) for m, b in blocks.blocks.items()})


def circuit_phases(circuit: Circuit, sectors: Iterable[int] | None = None) -> SectorPhases:
    """Shortcut: sector blocks of an invariant circuit, then their phases."""
    return sector_phases(sector_blocks(circuit, sectors))


def spectrum_phase(phases: SectorPhases, spectrum: Sequence[int]) -> float:
    """sum_m c(m) theta_m, reduced once at the end."""
    total = 0.0
    for m, c in enumerate(spectrum):
        if c:
            total += c * phases[m]
    return mod2pi(total)


def delta3(phases: SectorPhases) -> float:
    """theta_{n-1} - theta_1 - (n-2)(theta_n - theta_0) mod 2 pi."""
    n = phases.n
    if n < 3:
        raise ValueError(f"delta3 needs n >= 3, got {n}")
    t0, t1, tn1, tn = phases[0], phases[1], phases[n - 1], phases[n]
    return mod2pi(tn1 - t1 - (n - 2) * (tn - t0))


def delta3_components(phases: SectorPhases) -> dict[str, float]:
    """The three global-phase-free pieces that sum to delta3."""
    n = phases.n
    t0, t1, tn1, tn = phases[0], phases[1], phases[n - 1], phases[n]
    return {
        "hole": mod2pi(tn1 - n * tn),
        "particle": mod2pi(t1 - n * t0),
        "ghz": mod2pi(tn - t0),
    }


def phi_l(phases: SectorPhases, l: int) -> float:
    """l-body phase sum_m c_l(m) theta_m."""
    return spectrum_phase(phases, c_spectrum(phases.n, l))


def beta_k(phases: SectorPhases, k: int) -> float:
    """sum_{m<=k} (-1)^m C(n-m, k-m) theta_m; only sectors 0..k are read."""
    return spectrum_phase(phases, bk_spectrum(phases.n, k))


# ------------------------------------------------------------ Hamiltonians


@dataclass(frozen=True)
class ZTerm:
    """coefficient * prod_{j in qubits} Z_j acting for ``duration``."""

    coefficient: float
    qubits: tuple[int, ...]
    duration: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(sorted(self.qubits)))
        if not self.qubits or len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"Z string needs distinct qubits, got {self.qubits}")

    @property
    def weight(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class BlockTerm:
    """An invariant Hamiltonian given directly by its sector blocks H_m."""

    blocks: dict[int, np.ndarray]
    duration: float = 1.0


@dataclass(frozen=True)
class XYTerm:
    """coefficient * (X_i X_j + Y_i Y_j)."""

    coefficient: float
    i: int
    j: int


@dataclass(frozen=True)
class HamiltonianPiece:
    """A constant invariant Hamiltonian of Z strings and XY couplings, held for ``duration``."""

    n: int
    z_terms: tuple[tuple[float, tuple[int, ...]], ...] = ()
    xy_terms: tuple[XYTerm, ...] = ()
    duration: float = 1.0

    def sector_matrix(self, m: int) -> np.ndarray:
        dim = binomial(self.n, m)
        diag = np.zeros(dim)
        for a, qs in self.z_terms:
            diag += a * np.prod([_sector_z(self.n, m, q) for q in qs], axis=0)
        h = np.diag(diag).astype(complex)
        for t in self.xy_terms:
            src, dst = _sector_hops(self.n, m, t.i, t.j)
            h[src, dst] += 2 * t.coefficient
        return h

    def sector_unitary(self, m: int) -> np.ndarray:
        return scipy.linalg.expm(-1j * self.duration * self.sector_matrix(m))

    def terms(self) -> list:
        """Trace-level description: Z strings plus the (traceless) XY blocks."""
        out: list = [ZTerm(a, qs, self.duration) for a, qs in self.z_terms]
        if self.xy_terms:
            xy_only = HamiltonianPiece(self.n, (), self.xy_terms, self.duration)
            out.append(
                BlockTerm({m: xy_only.sector_matrix(m) for m in range(self.n + 1)}, self.duration)
            )
        return out


def evolve_sectors(
    pieces: Sequence[HamiltonianPiece], sectors: Iterable[int] | None = None
) -> SectorBlockUnitary:
    """Time-ordered product of the pieces' sector exponentials (first piece acts first)."""
    if not pieces:
        raise ValueError("need at least one Hamiltonian piece")
    n = pieces[0].n
    sectors = range(n + 1) if sectors is None else sorted(set(sectors))
    blocks = {}
    for m in sectors:
        u = np.eye(binomial(n, m), dtype=complex)
        for p in pieces:
            u = p.sector_unitary(m) @ u
        blocks[m] = u
    return SectorBlockUnitary(n, blocks)


def _is_integer(c) -> bool:
    if isinstance(c, numbers.Integral):
        return True
    return isinstance(c, numbers.Real) and float(c).is_integer()


def hamiltonian_trace(n: int, terms: Iterable, spectrum: Sequence[int]):
    """sum over terms of duration * Tr(term * C) for C = sum_m c(m) Pi_m.

    Z strings use the combinatorial sector traces, so integer or Fraction
    coefficients give an exact result.  Block terms are traced densely.
    """
    if len(spectrum) != n + 1:
        raise ValueError(f"spectrum must have {n + 1} entries, got {len(spectrum)}")
    total = 0
    for t in terms:
        if isinstance(t, ZTerm):
            if max(t.qubits) >= n:
                raise ValueError(f"Z string {t.qubits} outside {n} qubits")
            tr = sum(c * z_string_sector_trace(n, t.weight, m) for m, c in enumerate(spectrum) if c)
            total += t.coefficient * t.duration * tr
        elif isinstance(t, BlockTerm):
            tr = 0.0
            for m, c in enumerate(spectrum):
                if not c:
                    continue
                if m not in t.blocks:
                    raise MissingSectorError(f"block term lacks sector m={m}")
                tr += c * float(np.real(np.trace(t.blocks[m])))
            total += t.duration * tr
        else:
            raise TypeError(f"unsupported Hamiltonian term {t!r}")
    return total


def hamiltonian_phase(
    n: int, terms: Iterable, spectrum: Sequence[int], allow_trace: bool = False
) -> float:
    """-int Tr(H C) dt mod 2 pi: the Hamiltonian-side value of sum_m c(m) theta_m."""
    if not all(_is_integer(c) for c in spectrum):
        raise ValueError(f"spectrum must be integer valued, got {list(spectrum)}")
    spectrum = [int(c) for c in spectrum]
    if not allow_trace and spectrum_trace(spectrum, n) != 0:
        raise ValueError("spectrum is not traceless; pass allow_trace=True to override")
    return mod2pi(-float(hamiltonian_trace(n, terms, spectrum)))


def predicted_delta3(terms: Iterable[ZTerm]) -> float:
    """Each odd weight-w Z string shifts delta3 by -4 (w-1) a T; even ones do nothing."""
    total = 0.0
    for t in terms:
        if t.weight % 2:
            total += -4 * (t.weight - 1) * t.coefficient * t.duration
    return mod2pi(total)


def predicted_delta3_general(n: int, terms: Iterable) -> float:
    """-(4 / 2^n) sum_{odd l} (l-1) int Tr(H C_l) dt, for any invariant terms."""
    terms = list(terms)
    total = 0.0
    for l in range(1, n + 1, 2):
        if l > 1:
            total += (l - 1) * float(hamiltonian_trace(n, terms, c_spectrum(n, l)))
    return mod2pi(-4.0 * total / 2**n)


def predicted_phi_l(n: int, terms: Iterable, l: int) -> float:
    return mod2pi(-float(hamiltonian_trace(n, terms, c_spectrum(n, l))))


def predicted_beta_k(n: int, terms: Iterable, k: int) -> float:
    return mod2pi(-float(hamiltonian_trace(n, terms, bk_spectrum(n, k))))


def f3_phase_from_hamiltonian(n: int, terms: Iterable) -> float:
    return mod2pi(-float(hamiltonian_trace(n, terms, f3_spectrum(n))))
