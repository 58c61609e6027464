import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from u1phases.circuits import Circuit, cnot, h, multi_z, rz, xy
from u1phases.noise import (
    Histogram,
    NoiseModel,
    apply_noise_trajectory,
    apply_spam,
    bootstrap,
    circular_spread,
    derive_rng,
    error_sites,
    noisy_distribution,
    run_shots,
    sample_counts,
)
from u1phases.protocol import ghz_interferometer
from u1phases.simulator import StateVector, basis_state, run_circuit


# --- noise model ----------------------------------------------------------

def test_noise_model_defaults_and_bounds():
    nm = NoiseModel()
    assert (nm.p2_z, nm.p2_x, nm.p1, nm.spam) == (0.0055, 0.00025, 0.004, 0.0027)
    assert not nm.is_noiseless and NoiseModel.none().is_noiseless
    with pytest.raises(ValueError):
        NoiseModel(p2_z=0.06)
    with pytest.raises(ValueError):
        NoiseModel(p1=-0.1)
    with pytest.raises(ValueError):
        NoiseModel(pair_overrides={(0, 1): (0.2, 0.0)})
    assert NoiseModel(p2_z=1.0, ceiling=1.0).p2_z == 1.0


def test_noise_model_dict_roundtrip():
    nm = NoiseModel(0.003, 0.0001, 0.002, 0.001, {(1, 0): (0.004, 0.0002)})
    assert nm.pair_rates((0, 1)) == (0.004, 0.0002)
    assert nm.pair_rates((2, 3)) == (0.003, 0.0001)
    assert NoiseModel.from_dict(nm.to_dict()) == nm
    with pytest.raises(ValueError, match="unknown"):
        NoiseModel.from_dict({"p2": 0.1})


# --- histograms -------------------------------------------------------------

def test_histogram_text_roundtrip():
    hist = Histogram(3, {"101": 4, "000": 6, "010": 0})
    assert hist.shots == 10 and list(hist.counts) == ["000", "101"]
    assert Histogram.from_text(hist.to_text()) == hist
    assert hist.frequency(5) == pytest.approx(0.4)


def test_histogram_validation():
    with pytest.raises(ValueError):
        Histogram(2, {"012": 1})
    with pytest.raises(ValueError):
        Histogram(2, {"01": -1})
    with pytest.raises(ValueError, match="line 2"):
        Histogram.from_text("# n=2 shots=3\n01 x\n")
    with pytest.raises(ValueError, match="shots"):
        Histogram.from_text("# n=2 shots=3\n01 2\n")
    with pytest.raises(ValueError, match="header"):
        Histogram.from_text("01 2\n")


# --- sampling ---------------------------------------------------------------

def test_sample_counts_deterministic_state():
    assert sample_counts(basis_state(3), 300, seed=1).counts == {"000": 300}


def test_sample_counts_bell_statistics():
    bell = run_circuit(Circuit(2, (h(0), cnot(0, 1))))
    hist = sample_counts(bell, 100_000, seed=2)
    sd = math.sqrt(0.25 / 100_000)
    for key in ("00", "11"):
        assert abs(hist.frequency(key) - 0.5) < 5 * sd
    assert hist.count("01") == hist.count("10") == 0


def test_sample_counts_ghz_interferometer():
    a, g = 0.3, 1.1
    p = (1 + math.cos(2 * a - g)) / 2
    c = ghz_interferometer(Circuit(3, (multi_z(a, (0, 1, 2)),)), g)
    hist = sample_counts(run_circuit(c), 20_000, seed=3)
    assert abs(hist.frequency(0) - p) < 5 * math.sqrt(p * (1 - p) / 20_000)


def test_sample_counts_rejects_unnormalised():
    with pytest.raises(ValueError, match="normalised"):
        sample_counts(StateVector(1, np.array([1.0, 1.0])), 10)


# --- SPAM -----------------------------------------------------------------

def test_spam_extremes():
    hist = Histogram(3, {"001": 7, "110": 3})
    assert apply_spam(hist, 0.0, seed=1) == hist
    assert apply_spam(hist, 1.0, seed=1).counts == {"001": 3, "110": 7}


def test_spam_rate():
    hist = apply_spam(Histogram(4, {"0000": 100_000}), 0.0027, seed=4)
    p = 1 - (1 - 0.0027) ** 4
    frac = 1 - hist.frequency(0)
    assert abs(frac - p) < 5 * math.sqrt(p * (1 - p) / 100_000)


# --- trajectories -------------------------------------------------------------

def test_zero_noise_leaves_circuit_unchanged():
    c = Circuit(3, (h(0), cnot(0, 1), xy(0.3, 1, 2), multi_z(0.2, (0, 1, 2))))
    assert apply_noise_trajectory(c, NoiseModel.none(), seed=1) == c


def test_forced_z_insertion():
    c = Circuit(2, (cnot(0, 1),))
    noisy = apply_noise_trajectory(c, NoiseModel(p2_z=1.0, p2_x=0, p1=0, spam=0, ceiling=1.0), seed=5)
    inserted = noisy.gates[1:]
    assert len(inserted) == 1 and inserted[0].name == "Z" and inserted[0].qubits[0] in (0, 1)


def test_multi_z_charging():
    sites = error_sites(Circuit(4, (multi_z(0.1, (0, 1, 3)),)))
    kinds = [s.kind for s in sites]
    assert kinds.count("2q") == 4 and kinds.count("1q") == 1
    assert [s.qubits for s in sites if s.kind == "1q"] == [(3,)]


def test_single_qubit_error_rate():
    c = Circuit(1, (rz(0.1, 0),))
    nm = NoiseModel(p2_z=0, p2_x=0, p1=0.3, spam=0)
    hits = sum(len(apply_noise_trajectory(c, nm, seed=s)) > 1 for s in range(4000))
    assert abs(hits / 4000 - 0.3) < 5 * math.sqrt(0.21 / 4000)


def test_run_shots_noiseless_matches_state():
    c = Circuit(2, (h(0), cnot(0, 1)))
    hist = run_shots(c, 500, None, seed=1)
    assert set(hist.counts) <= {"00", "11"} and hist.shots == 500


def test_run_shots_seeded_reproducible():
    c = ghz_interferometer(Circuit(4, (multi_z(0.2, (0, 1, 2)),)), 1.0)
    a = run_shots(c, 300, NoiseModel(), derive_rng(9, 1, 2))
    b = run_shots(c, 300, NoiseModel(), derive_rng(9, 1, 2))
    assert a == b


def test_derive_rng_streams_independent_of_order():
    first = derive_rng(3, 0, 1).random()
    derive_rng(3, 5, 5).random()
    assert derive_rng(3, 0, 1).random() == first
    assert derive_rng(3, 0, 2).random() != first


def test_noise_leaks_out_of_ideal_support():
    c = ghz_interferometer(Circuit(4, (multi_z(0.02 * math.pi, (0, 1, 2)),)), math.pi)
    ideal = run_circuit(c).probabilities
    noisy = noisy_distribution(c, NoiseModel(), 20_000, seed=1)
    assert ideal[[0, 1]].sum() == pytest.approx(1.0)
    assert 0.9 < noisy[[0, 1]].sum() < 1.0
    assert noisy[0] > ideal[0] + 0.02  # phase flips move weight from 0001 to 0000


def _one_norm_pass_rate(circuit, pairs, rng):
    noise = NoiseModel()
    p = noisy_distribution(circuit, noise, 100_000, seed=rng)
    for q in range(circuit.n):  # readout flips, applied exactly
        p = (1 - noise.spam) * p + noise.spam * p[np.arange(p.size) ^ (1 << q)]
    a = rng.multinomial(300, p, size=pairs)
    b = rng.multinomial(300, p, size=pairs)
    return float((np.abs(a - b).sum(axis=1) / 300 <= 0.1).mean())


def test_expected_simulation_agreement_rate():
    """Per-trial probability that two 300-shot noisy histograms lie within 0.1 in
    1-norm, estimated from the exact noisy distribution."""
    rng = np.random.default_rng(77)
    for alpha, gamma in [(0.02 * math.pi, math.pi), (0.165 * math.pi, 2 * math.pi / 5)]:
        c = ghz_interferometer(Circuit(4, (multi_z(alpha, (0, 1, 2)),)), gamma)
        assert _one_norm_pass_rate(c, 50_000, rng) >= 0.95


# --- bootstrap --------------------------------------------------------------

def zero_freq(h):
    return h.frequency(0)


def test_bootstrap_deterministic_histogram():
    res = bootstrap(Histogram(4, {"0000": 300}), zero_freq, seed=1)
    assert res.mean == 1.0 and res.sigma == 0.0 and res.error_bar == 0.0
    assert (res.resamples, res.resample_size) == (1000, 150)


def test_bootstrap_binomial_sigma():
    res = bootstrap(Histogram(1, {"0": 150, "1": 150}), zero_freq, seed=2)
    assert abs(res.sigma / math.sqrt(0.25 / 150) - 1) < 0.2


def test_bootstrap_excludes_undefined_resamples():
    def picky(h):
        if h.count(1) == 0:
            raise ValueError("undefined")
        return h.frequency(1)

    res = bootstrap(Histogram(1, {"0": 298, "1": 2}), picky, resamples=500, seed=3)
    assert res.excluded > 0 and res.sigma > 0


def test_bootstrap_all_undefined():
    with pytest.raises(ValueError):
        bootstrap(Histogram(1, {"0": 10}), lambda h: math.nan, resamples=20, seed=1)


def test_bootstrap_multiple_histograms():
    hs = [Histogram(1, {"0": 100, "1": 200}), Histogram(1, {"0": 250, "1": 50})]
    res = bootstrap(hs, lambda pair: pair[0].frequency(0) - pair[1].frequency(0), seed=4)
    assert res.mean == pytest.approx(1 / 3 - 5 / 6, abs=0.02)


@settings(max_examples=30, deadline=None)
@given(st.floats(-math.pi, math.pi), st.floats(0.01, 0.5), st.integers(0, 2**31))
def test_circular_spread_wraps(center, width, seed):
    rng = np.random.default_rng(seed)
    vals = np.angle(np.exp(1j * (center + rng.normal(0, width, 500))))
    mean, sigma = circular_spread(vals, center)
    assert -math.pi < mean <= math.pi
    assert abs(np.angle(np.exp(1j * (mean - center)))) < 5 * width / math.sqrt(500) + 1e-9
    assert sigma == pytest.approx(width, rel=0.2)
