"""Interferometric estimation of delta3 and the l-body phases.

Every observable phase is read off a gamma scan: a family of circuits that
differ only in a phase shift exp(i gamma Z / 2), whose reference-outcome
probability is p(gamma) = a + b cos(phi - gamma).  The fit is linear in
(1, cos gamma, sin gamma).

* GHZ scan (reference all-zeros)          phi = theta_n - theta_0
* vacuum-reference element scan (r, s)     2(c1 + i c2) = e^{-i theta_0} <1_r|V|1_s>
* full-reference (hole) element scan       2(c1 + i sign c2) = e^{-i theta_n} <hole_r|V|hole_s>
* pair scan (x, y), both weight m          2(c1 + i c2) = e^{-i theta_0} <x|V|y>

The determinants of the assembled element matrices give theta_1 - n theta_0
and theta_{n-1} - n theta_n; together with the GHZ phase these add up to
delta3 without ever isolating a single theta_m.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuits import Circuit, CircuitError, fanout, h, phase_shift, support, x
from .functionals import circuit_phases
from .noise import NoiseModel, circular_spread, derive_rng, run_shots
from .sectors import c_spectrum, enumerate_sector, mod2pi, popcount
from .simulator import log_det, run_circuit, sector_blocks

DEFAULT_GAMMAS = tuple(2 * math.pi * k / 8 for k in range(8))
ZERO_CONTRAST = 1e-12
SINGULAR_WARN = 0.1
SINGULAR_FAIL = 0.01
MAX_TOMOGRAPHY_QUBITS = 6


class FitError(ValueError):
    pass


class TomographyError(ValueError):
    pass


# ------------------------------------------------------------------ circuits


def _require_invariant(V: Circuit) -> None:
    if not V.is_u1_invariant:
        bad = next(g for g in V.gates if not g.is_u1_invariant)
        raise CircuitError(f"V must be U(1)-invariant; found {bad.name}{bad.qubits}")


def ghz_prep_circuit(n: int) -> Circuit:
    """Hadamard on qubit 0, then CNOT(0 -> j) for j = 1..n-1."""
    if n < 2:
        raise ValueError(f"GHZ preparation needs n >= 2, got {n}")
    return Circuit(n, tuple(fanout(range(n))))


def ghz_interferometer(V: Circuit, gamma: float) -> Circuit:
    """prep, V, exp(i gamma Z_0 / 2), un-prep.  P(0...0) = (1 + cos(theta_n - theta_0 - gamma)) / 2."""
    _require_invariant(V)
    prep = ghz_prep_circuit(V.n)
    return prep + V + Circuit(V.n, (phase_shift(gamma, 0),)) + prep.inverse()


def excitation_interferometer(V: Circuit, r: int, s: int, gamma: float, reference: str = "vacuum") -> Circuit:
    """Hadamard on s, V, phase shift and Hadamard on r.

    ``reference='vacuum'`` starts from |0...0> and is read on the all-zeros
    outcome; ``'full'`` starts from |1...1> (X on every qubit first) and is
    read on the all-ones outcome.
    """
    n = V.n
    if not (0 <= r < n and 0 <= s < n):
        raise IndexError(f"qubits (r={r}, s={s}) outside 0..{n - 1}")
    if reference not in ("vacuum", "full"):
        raise ValueError(f"reference must be 'vacuum' or 'full', got {reference!r}")
    head = tuple(x(q) for q in range(n)) if reference == "full" else ()
    return (
        Circuit(n, head + (h(s),))
        + V
        + Circuit(n, (phase_shift(gamma, r), h(r)))
    )


def reference_outcome(n: int, reference: str) -> int:
    return (1 << n) - 1 if reference == "full" else 0


def pair_interferometer(V: Circuit, x_state: int, y_state: int, gamma: float) -> Circuit:
    """Entangle |0> with |y>, apply V, phase-shift a support qubit of x, un-entangle x.

    P(0...0) = (1 + |M|^2 + 2|M| cos(arg M - gamma)) / 4 with
    M = e^{-i theta_0} <x|V|y>.
    """
    _require_invariant(V)
    if popcount(x_state) != popcount(y_state):
        raise ValueError(f"weight mismatch: |x|={popcount(x_state)}, |y|={popcount(y_state)}")
    sx, sy = support(x_state), support(y_state)
    if not sx:
        raise ValueError("pair interferometer needs nonempty supports")
    if max(sx + sy) >= V.n:
        raise IndexError(f"basis states exceed {V.n} qubits")
    enc = Circuit(V.n, tuple(fanout(sy)))
    dec = Circuit(V.n, tuple(fanout(sx))).inverse()
    return enc + V + Circuit(V.n, (phase_shift(gamma, sx[0]),)) + dec


# -------------------------------------------------------------------- fits


@dataclass(frozen=True)
class GammaScan:
    gammas: tuple[float, ...]
    probabilities: tuple[float, ...]
    shots: int | None = None
    counts: tuple[int, ...] | None = None

    def __post_init__(self):
        if len(self.gammas) != len(self.probabilities):
            raise ValueError("one probability per gamma value required")
        if any(not -1e-12 <= p <= 1 + 1e-12 for p in self.probabilities):
            raise ValueError("probabilities must lie in [0, 1]")
        if len(set(self.gammas)) < 4:
            raise ValueError("a gamma scan needs at least 4 distinct gamma values")


@dataclass(frozen=True)
class SinusoidFit:
    """p(gamma) = offset + amplitude cos(phase - gamma)."""

    offset: float
    amplitude: float
    phase: float
    residual: float
    cos_coef: float = 0.0
    sin_coef: float = 0.0

    @property
    def defined(self) -> bool:
        return self.amplitude > ZERO_CONTRAST

    def __call__(self, gamma):
        return self.offset + self.amplitude * np.cos(self.phase - np.asarray(gamma))


@lru_cache(maxsize=64)
def _fit_operator(gammas: tuple[float, ...]) -> np.ndarray:
    """(3, k) least-squares solver for the (1, cos, sin) design."""
    g = np.asarray(gammas)
    design = np.column_stack([np.ones_like(g), np.cos(g), np.sin(g)])
    if g.size < 3 or np.linalg.matrix_rank(design, tol=1e-9) < 3:
        raise FitError(f"gamma grid {list(gammas)} does not determine a sinusoid")
    return np.linalg.pinv(design)


def fit_coefficients(gammas: Sequence[float], probabilities) -> np.ndarray:
    """(c0, c1, c2) along the last axis; vectorised over leading axes."""
    op = _fit_operator(tuple(float(g) for g in gammas))
    return np.asarray(probabilities, dtype=float) @ op.T


def fit_sinusoid(scan: GammaScan) -> SinusoidFit:
    c0, c1, c2 = fit_coefficients(scan.gammas, scan.probabilities)
    b = math.hypot(c1, c2)
    phase = mod2pi(math.atan2(c2, c1)) if b > ZERO_CONTRAST else math.nan
    g = np.asarray(scan.gammas)
    model = c0 + c1 * np.cos(g) + c2 * np.sin(g)
    resid = float(np.linalg.norm(model - np.asarray(scan.probabilities)))
    return SinusoidFit(float(c0), b, phase, resid, float(c1), float(c2))


# -------------------------------------------------------------- execution


@dataclass(frozen=True)
class Sampling:
    """How scans are executed.  ``shots=None`` is the exact (noiseless, infinite-shot) mode."""

    shots: int | None = None
    noise: NoiseModel = field(default_factory=NoiseModel.none)
    seed: int | None = 0
    gammas: tuple[float, ...] = DEFAULT_GAMMAS
    resamples: int = 1000
    resample_size: int = 150

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        if self.shots is None and not self.noise.is_noiseless:
            raise ValueError("exact mode is noiseless; give a shot count to simulate noise")
        if self.shots is not None and self.shots < 1:
            raise ValueError(f"shots must be positive, got {self.shots}")

    @property
    def exact(self) -> bool:
        return self.shots is None


def _scan_probabilities(circuits: Sequence[Circuit], outcome: int, sampling: Sampling, setting: int):
    """Reference-outcome probabilities (exact) or counts (sampled) along a scan."""
    if sampling.exact:
        probs = [abs(run_circuit(c).amplitudes[outcome]) ** 2 for c in circuits]
        return np.array(probs), None
    counts = []
    for gi, c in enumerate(circuits):
        hist = run_shots(c, sampling.shots, sampling.noise, derive_rng(sampling.seed, setting, gi))
        counts.append(hist.count(outcome))
    counts = np.array(counts)
    return counts / sampling.shots, counts


@dataclass(frozen=True)
class PhaseEstimate:
    name: str
    value: float
    sigma: float
    shots: int | None
    method: str
    gammas: tuple[float, ...] = ()
    counts: dict = field(default_factory=dict, repr=False)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.method == "exact" and (self.sigma != 0 or self.shots is not None):
            raise ValueError("exact estimates carry sigma = 0 and no shot count")
        if self.method == "sampled" and self.shots is None:
            raise ValueError("sampled estimates need a shot count")

    @property
    def error_bar(self) -> float:
        return 2.0 * self.sigma

    def to_record(self) -> dict:
        return {
            "phase": self.name,
            "value": self.value,
            "sigma": self.sigma,
            "shots": self.shots if self.shots is not None else "exact",
            "gammas": list(self.gammas),
            "counts": {k: list(map(int, v)) for k, v in self.counts.items()},
            "diagnostics": self.diagnostics,
        }


class _ScanBank:
    """Collects scans for many settings and evaluates functionals on them, both
    on the full data and on bootstrap resamples of every scan."""

    def __init__(self, sampling: Sampling):
        self.sampling = sampling
        self.labels: list[str] = []
        self.probs: list[np.ndarray] = []
        self.counts: list[np.ndarray | None] = []

    def add(self, label: str, circuits: Sequence[Circuit], outcome: int) -> int:
        idx = len(self.labels)
        p, k = _scan_probabilities(circuits, outcome, self.sampling, idx)
        self.labels.append(label)
        self.probs.append(p)
        self.counts.append(k)
        return idx

    def coefficients(self) -> np.ndarray:
        """(settings, 3) fit coefficients on the full data."""
        return fit_coefficients(self.sampling.gammas, np.array(self.probs))

    def resampled_coefficients(self, rng: np.random.Generator) -> np.ndarray:
        """(resamples, settings, 3) coefficients from binomially resampled scans.

        Each scan only enters through its reference-outcome count, whose
        marginal under multinomial resampling of ``resample_size`` shots is
        Binomial(resample_size, observed frequency).
        """
        s = self.sampling
        freq = np.array(self.probs)
        draws = rng.binomial(s.resample_size, np.broadcast_to(freq, (s.resamples,) + freq.shape))
        return fit_coefficients(s.gammas, draws / s.resample_size)

    def records(self) -> dict:
        if self.sampling.exact:
            return {}
        return {lab: k for lab, k in zip(self.labels, self.counts)}


def _ghz_phase(c: np.ndarray) -> np.ndarray:
    amp = np.hypot(c[..., 1], c[..., 2])
    return np.where(amp > ZERO_CONTRAST, np.arctan2(c[..., 2], c[..., 1]), np.nan)


def _elements(c: np.ndarray, sign: int = 1) -> np.ndarray:
    return 2.0 * (c[..., 1] + 1j * sign * c[..., 2])


@lru_cache(maxsize=1)
def hole_gamma_sign() -> int:
    """Sign relating the full-reference fit to e^{-i theta_n}<hole_r|V|hole_s>.

    Determined once per process by running the template on a fixed seeded
    invariant circuit and comparing with its exact sector block.
    """
    from .random_circuits import random_invariant_circuit

    n = 3
    V = random_invariant_circuit(n, 12, np.random.default_rng(20240607), max_weight=3)
    blocks = sector_blocks(V, [n - 1, n])
    holes = enumerate_sector(n, n - 1).states
    full = (1 << n) - 1
    vn = blocks[n][0, 0]
    for r in range(n):
        for s in range(n):
            target = blocks[n - 1][holes.index(full ^ (1 << r)), holes.index(full ^ (1 << s))] / vn
            if abs(target) < 0.2:
                continue
            circuits = [excitation_interferometer(V, r, s, g, "full") for g in DEFAULT_GAMMAS]
            p = [abs(run_circuit(c).amplitudes[full]) ** 2 for c in circuits]
            c = fit_coefficients(DEFAULT_GAMMAS, p)
            for sign in (1, -1):
                if abs(_elements(c, sign) - target) < 1e-8:
                    return sign
            raise RuntimeError(f"hole-scan convention self-test failed at (r={r}, s={s})")
    raise RuntimeError("hole-scan self-test found no usable matrix element")


def _batched_det_phase(mats: np.ndarray) -> np.ndarray:
    sign, _ = np.linalg.slogdet(mats)
    return np.angle(sign)


def _smallest_singular(mat: np.ndarray) -> float:
    return float(np.linalg.svd(mat, compute_uv=False)[-1])


def _finish(name: str, value: float, samples: np.ndarray | None, sampling: Sampling,
            bank: _ScanBank, diagnostics: dict) -> PhaseEstimate:
    if sampling.exact:
        return PhaseEstimate(name, value, 0.0, None, "exact", sampling.gammas, {}, diagnostics)
    ok = samples[np.isfinite(samples)]
    diagnostics = dict(diagnostics, bootstrap_excluded=int(samples.size - ok.size))
    if ok.size < 2:
        raise FitError(f"{name}: bootstrap failed on every resample")
    _, sigma = circular_spread(ok, value)
    return PhaseEstimate(name, value, sigma, sampling.shots, "sampled", sampling.gammas,
                         bank.records(), diagnostics)


def estimate_delta3(V: Circuit, sampling: Sampling | None = None) -> PhaseEstimate:
    """delta3 = (theta_{n-1} - n theta_n) - (theta_1 - n theta_0) + 2 (theta_n - theta_0)."""
    sampling = sampling or Sampling()
    _require_invariant(V)
    n = V.n
    if n < 3:
        raise ValueError(f"delta3 needs n >= 3, got {n}")
    gam = sampling.gammas
    bank = _ScanBank(sampling)
    bank.add("ghz", [ghz_interferometer(V, g) for g in gam], 0)
    for ref in ("vacuum", "full"):
        out = reference_outcome(n, ref)
        for r in range(n):
            for s in range(n):
                bank.add(f"{ref}:{r},{s}", [excitation_interferometer(V, r, s, g, ref) for g in gam], out)
    sign = hole_gamma_sign()
    nn = n * n

    def assemble(c):
        ghz = _ghz_phase(c[..., 0, :])
        vac = _elements(c[..., 1:1 + nn, :]).reshape(c.shape[:-2] + (n, n))
        hol = _elements(c[..., 1 + nn:, :], sign).reshape(c.shape[:-2] + (n, n))
        return ghz, vac, hol

    c = bank.coefficients()
    ghz, vac, hol = assemble(c)
    if not np.isfinite(ghz):
        raise FitError("GHZ scan has zero contrast; theta_n - theta_0 undefined")
    particle, _ = log_det(vac)
    hole, _ = log_det(hol)
    value = mod2pi(hole - particle + 2 * float(ghz))
    diagnostics = {
        "ghz": mod2pi(float(ghz)),
        "particle": particle,
        "hole": hole,
        "min_singular_particle": _smallest_singular(vac),
        "min_singular_hole": _smallest_singular(hol),
    }
    samples = None
    if not sampling.exact:
        rng = derive_rng(sampling.seed, len(bank.labels), 0xB007)
        cb = bank.resampled_coefficients(rng)
        g_b, v_b, h_b = assemble(cb)
        samples = _batched_det_phase(h_b) - _batched_det_phase(v_b) + 2 * g_b
    return _finish("delta3", value, samples, sampling, bank, diagnostics)


def estimate_sector_tomography(V: Circuit, sampling: Sampling | None = None):
    """Scans every (x, y) pair in sectors 1..n.

    Returns the bank, the full-data relative det phases
    arg det(e^{-i theta_0} V_m) = theta_m - C(n, m) theta_0 per sector, and a
    function mapping fit coefficients to those phases (for resampling).
    """
    sampling = sampling or Sampling()
    _require_invariant(V)
    n = V.n
    if n > MAX_TOMOGRAPHY_QUBITS:
        raise ValueError(f"full tomography limited to n <= {MAX_TOMOGRAPHY_QUBITS}, got {n}")
    bank = _ScanBank(sampling)
    layout = {}
    for m in range(1, n + 1):
        states = enumerate_sector(n, m).states
        start = len(bank.labels)
        for xs in states:
            for ys in states:
                bank.add(f"m{m}:{xs},{ys}", [pair_interferometer(V, xs, ys, g) for g in sampling.gammas], 0)
        layout[m] = (start, len(states))

    def relative_phases(c):
        out = {}
        for m, (start, d) in layout.items():
            mats = _elements(c[..., start:start + d * d, :]).reshape(c.shape[:-2] + (d, d))
            out[m] = mats
        return out

    return bank, layout, relative_phases


def estimate_phi(V: Circuit, ls: Sequence[int], sampling: Sampling | None = None) -> dict[int, PhaseEstimate]:
    """l-body phases from symmetric process tomography, one scan set for all ``ls``.

    sum_m c_l(m) arg det(e^{-i theta_0} V_m) = Phi_l - theta_0 Tr(C_l) = Phi_l
    for l >= 1, so no absolute phase is ever needed.
    """
    sampling = sampling or Sampling()
    n = V.n
    for l in ls:
        if not 1 <= l <= n:
            raise ValueError(f"l must lie in 1..{n}, got {l}")
    bank, layout, relative = estimate_sector_tomography(V, sampling)
    mats = relative(bank.coefficients())
    rel = {}
    sv = {}
    notes = []
    for m, mat in mats.items():
        smin = _smallest_singular(mat)
        sv[m] = smin
        if smin < SINGULAR_FAIL:
            raise TomographyError(f"sector {m} estimate is singular (smallest singular value {smin:.3g})")
        if smin < SINGULAR_WARN:
            notes.append(f"sector {m}: smallest singular value {smin:.3g}")
            warnings.warn(f"sector {m} tomography is far from unitary (sigma_min={smin:.3g})")
        rel[m] = log_det(mat)[0]
    samples_rel = None
    if not sampling.exact:
        rng = derive_rng(sampling.seed, len(bank.labels), 0xB007)
        mb = relative(bank.resampled_coefficients(rng))
        samples_rel = {m: _batched_det_phase(a) for m, a in mb.items()}
    out = {}
    for l in ls:
        spec = c_spectrum(n, l)
        value = mod2pi(sum(spec[m] * rel[m] for m in rel))
        diag = {"min_singular": sv, "relative_phases": rel}
        if notes:
            diag["warnings"] = notes
        samples = None
        if samples_rel is not None:
            samples = sum(spec[m] * samples_rel[m] for m in samples_rel)
        out[l] = _finish(f"phi_{l}", value, samples, sampling, bank, diag)
    return out


def estimate_phi_l(V: Circuit, l: int, sampling: Sampling | None = None) -> PhaseEstimate:
    return estimate_phi(V, [l], sampling)[l]


def exact_delta3(V: Circuit) -> float:
    """Reference value straight from the sector determinants."""
    from .functionals import delta3

    return delta3(circuit_phases(V, {0, 1, V.n - 1, V.n}))
