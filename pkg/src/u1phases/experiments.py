"""End-to-end experiment drivers behind the CLI subcommands.

Each driver takes an :class:`ExperimentConfig` and returns a
:class:`~u1phases.results.ResultTable` whose rows follow sweep order.  The
default circuits use the angle lists of the original experiments; their gate
order is a representative layout, and every driver accepts explicit circuit
text instead (``pre_circuit`` / ``post_circuit`` / ``s1`` / ``s2`` keys).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .circuits import Circuit, fanout, h, multi_z, parse_angle, parse_circuit, rz, xy, zz
from .functionals import circuit_phases, phi_l
from .identities import run_identities
from .noise import NoiseModel, bootstrap, derive_rng, run_shots
from .protocol import DEFAULT_GAMMAS, Sampling, estimate_delta3, estimate_phi
from .results import ResultTable, make_table
from .sectors import mod2pi
from .simulator import run_circuit


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ config

_COMMON = {
    "experiment": None,
    "n": None,
    "shots": "exact",
    "noise": "none",
    "seed": 0,
    "output": None,
    "gammas": None,
    "resamples": 1000,
    "resample_size": 150,
}

_SCHEMAS: dict[str, dict[str, Any]] = {
    "delta3-sweep": {
        "n": 4,
        "alpha3": {"start": "0", "stop": "pi", "num": 25},
        "three_body_qubits": [0, 1, 2],
        "phis": ["-pi/5", "pi/16", "3pi/16", "5pi/14"],
        "kappas": ["-pi/14", "-pi/5", "pi/6", "pi/9"],
        "pre_circuit": None,
        "post_circuit": None,
    },
    "additivity-grid": {
        "n": 4,
        "zeta1": {"start": "0", "stop": "7pi/32", "num": 8},
        "zeta2": {"start": "0", "stop": "7pi/32", "num": 8},
        "phis": ["pi/5", "pi/16", "pi/3", "pi/12"],
        "theta": "-3pi/10",
        "s1": None,
        "s2": None,
    },
    "philbody": {
        "n": 4,
        "a": {"start": "0", "stop": "10", "num": 21},
        "alpha4_per_a": "pi/80",
        "phis": ["-pi/10", "pi/16", "3pi/16"],
        "xy_angles": ["pi/7", "pi/9", "pi/5"],
        "s1": None,
        "s2": None,
    },
    "invariance": {
        "n": 3,
        "phi": {"start": "0", "stop": "pi", "num": 9},
        "k1": "pi/16",
        "k2": "3pi/16",
        "s": "4pi/5",
        "kappa": "pi/6",
        "alpha3": "-pi/24",
    },
    "ghz-parity": {
        "n": 4,
        "lambda": {"start": "-31pi/32", "stop": "pi", "num": 32},
    },
    "identity-suite": {
        "n": None,
        "n_min": 3,
        "n_max": 8,
        "flip_f3_sign": False,
    },
}


def angle(value) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"expected an angle, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        return parse_angle(value)
    raise ConfigError(f"expected an angle, got {value!r}")


def sweep(spec) -> list[float]:
    """A list of angles, or {start, stop, num} with both ends included."""
    if isinstance(spec, list):
        values = [angle(v) for v in spec]
    elif isinstance(spec, dict):
        unknown = set(spec) - {"start", "stop", "num"}
        if unknown:
            raise ConfigError(f"unknown sweep keys {sorted(unknown)}")
        num = int(spec.get("num", 0))
        if num < 1:
            raise ConfigError("sweep needs num >= 1")
        start, stop = angle(spec["start"]), angle(spec["stop"])
        values = [start] if num == 1 else [start + (stop - start) * i / (num - 1) for i in range(num)]
        values[-1] = stop if num > 1 else start  # exact endpoint, no rounding past pi
    else:
        raise ConfigError(f"cannot read sweep {spec!r}")
    if not values:
        raise ConfigError("empty sweep")
    return values


@dataclass
class ExperimentConfig:
    experiment: str
    n: int
    shots: int | None
    noise: NoiseModel
    seed: int
    output: str | None
    gammas: tuple[float, ...]
    resamples: int
    resample_size: int
    params: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.shots is None

    def sampling(self) -> Sampling:
        return Sampling(self.shots, self.noise, self.seed, self.gammas, self.resamples, self.resample_size)

    def echo(self) -> dict:
        out = dict(self.raw)
        if self.exact:
            out.pop("seed", None)
        return out


def _noise_from(value, base_dir: Path | None = None) -> NoiseModel:
    if value in (None, "none"):
        return NoiseModel.none()
    if value == "default":
        return NoiseModel()
    if isinstance(value, dict):
        return NoiseModel.from_dict(value)
    if isinstance(value, str):
        path = Path(value)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return NoiseModel.from_dict(_load_json(path))
    raise ConfigError(f"noise must be 'none', 'default', a mapping or a file path, got {value!r}")


def _load_json(path: Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def build_config(experiment: str, data: dict | None = None, overrides: dict | None = None,
                 base_dir: Path | None = None) -> ExperimentConfig:
    """Merge defaults, file contents and CLI overrides; reject unknown keys."""
    if experiment not in _SCHEMAS:
        raise ConfigError(f"unknown experiment {experiment!r}; choose from {sorted(_SCHEMAS)}")
    schema = {**_COMMON, **_SCHEMAS[experiment]}
    data = dict(data or {})
    unknown = set(data) - set(schema)
    if unknown:
        raise ConfigError(f"unknown config keys for {experiment}: {sorted(unknown)}")
    if data.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for {data['experiment']!r}, not {experiment!r}")
    merged = {k: v for k, v in schema.items()}
    merged.update(data)
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    merged["experiment"] = experiment

    shots = merged["shots"]
    if shots == "exact":
        shots = None
    elif isinstance(shots, int) and not isinstance(shots, bool) and shots > 0:
        pass
    else:
        raise ConfigError(f"shots must be a positive integer or 'exact', got {shots!r}")
    noise = _noise_from(merged["noise"], base_dir)
    if shots is None and not noise.is_noiseless:
        raise ConfigError("exact mode is noiseless; set shots or use noise 'none'")
    gammas = tuple(sweep(merged["gammas"])) if merged["gammas"] is not None else DEFAULT_GAMMAS
    n = merged["n"]
    if experiment != "identity-suite":
        if not isinstance(n, int) or n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {n!r}")
    params = {k: merged[k] for k in _SCHEMAS[experiment] if k != "n"}
    raw = {k: v for k, v in merged.items() if k != "output"}
    return ExperimentConfig(
        experiment, n, shots, noise, int(merged["seed"]), merged["output"], gammas,
        int(merged["resamples"]), int(merged["resample_size"]), params, raw,
    )


def load_config(path, experiment: str, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    return build_config(experiment, _load_json(path), overrides, path.parent)


def _circuit_param(cfg: ExperimentConfig, key: str) -> Circuit | None:
    text = cfg.params.get(key)
    if text is None:
        return None
    if "\n" not in text and Path(text).exists():
        text = Path(text).read_text(encoding="utf-8")
    return parse_circuit(text, cfg.n)


def _angles(values, count, name):
    out = [angle(v) for v in values]
    if len(out) < count:
        raise ConfigError(f"{name} needs at least {count} angles, got {len(out)}")
    return out


# ------------------------------------------------------------ experiments


def delta3_circuit(cfg: ExperimentConfig, alpha3: float) -> Circuit:
    """One- and two-qubit layer, exp(-i alpha3 Z_a Z_b Z_c), another layer."""
    n = cfg.n
    pre = _circuit_param(cfg, "pre_circuit")
    post = _circuit_param(cfg, "post_circuit")
    if pre is None:
        phis = _angles(cfg.params["phis"], 1, "phis")
        kap = _angles(cfg.params["kappas"], 1, "kappas")
        gates = [rz(phis[q % len(phis)], q) for q in range(n)]
        gates += [xy(kap[i % len(kap)], i, i + 1) for i in range(0, n - 1, 2)]
        pre = Circuit(n, tuple(gates))
    if post is None:
        kap = _angles(cfg.params["kappas"], 1, "kappas")
        gates = [xy(kap[(i + 2) % len(kap)], i, i + 1) for i in range(1, n - 1, 2)]
        gates += [xy(kap[-1], 0, n - 1)] if n > 2 else []
        post = Circuit(n, tuple(gates))
    core = Circuit(n, (multi_z(alpha3, cfg.params["three_body_qubits"]),))
    return pre + core + post


def _delta3_row(V: Circuit, cfg: ExperimentConfig, counter: int):
    sampling = cfg.sampling()
    if not cfg.exact:
        sampling = Sampling(cfg.shots, cfg.noise, _sub_seed(cfg.seed, counter), cfg.gammas,
                            cfg.resamples, cfg.resample_size)
    return estimate_delta3(V, sampling)


def _sub_seed(seed: int, counter: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(counter,)).generate_state(1)[0])


def run_delta3_sweep(cfg: ExperimentConfig) -> ResultTable:
    rows = []
    for i, a in enumerate(sweep(cfg.params["alpha3"])):
        est = _delta3_row(delta3_circuit(cfg, a), cfg, i)
        rows.append((a, est.value, est.sigma, mod2pi(-8 * a)))
    return make_table(("alpha3", "delta3_measured", "sigma", "delta3_theory"), rows, cfg.echo(),
                      None if cfg.exact else cfg.seed)


def additivity_circuit(cfg: ExperimentConfig, zeta1: float, zeta2: float) -> Circuit:
    """S2 exp(-i zeta2 Z1Z2Z3) exp(-i zeta1 Z0Z1Z2) S1."""
    n = cfg.n
    if n < 4:
        raise ConfigError("additivity grid needs n >= 4")
    s1 = _circuit_param(cfg, "s1")
    s2 = _circuit_param(cfg, "s2")
    theta = angle(cfg.params["theta"])
    if s1 is None:
        phis = _angles(cfg.params["phis"], 1, "phis")
        s1 = Circuit(n, tuple(rz(phis[q % len(phis)], q) for q in range(n)) + (xy(theta, 0, 1), xy(theta, 2, 3)))
    if s2 is None:
        s2 = Circuit(n, (xy(theta, 1, 2), xy(theta, 0, 3)))
    core = Circuit(n, (multi_z(zeta1, (0, 1, 2)), multi_z(zeta2, (1, 2, 3))))
    return s1 + core + s2


def run_additivity_grid(cfg: ExperimentConfig) -> ResultTable:
    rows = []
    counter = 0
    for z1 in sweep(cfg.params["zeta1"]):
        for z2 in sweep(cfg.params["zeta2"]):
            est = _delta3_row(additivity_circuit(cfg, z1, z2), cfg, counter)
            counter += 1
            rows.append((z1, z2, est.value, est.sigma, mod2pi(-8 * (z1 + z2))))
    return make_table(("zeta1", "zeta2", "delta3_measured", "sigma", "delta3_theory"), rows, cfg.echo(),
                      None if cfg.exact else cfg.seed)


def philbody_circuit(cfg: ExperimentConfig, alpha4: float) -> Circuit:
    """exp(-i a4 Z0Z1Z2Z3) exp(-i a3 Z1Z2Z3) S2 S1 with a3 = a4 / 3."""
    n = cfg.n
    if n < 4:
        raise ConfigError("l-body experiment needs n >= 4")
    s1 = _circuit_param(cfg, "s1")
    s2 = _circuit_param(cfg, "s2")
    if s1 is None:
        phis = _angles(cfg.params["phis"], 1, "phis")
        s1 = Circuit(n, tuple(rz(p, q) for q, p in enumerate(phis[:n])))
    if s2 is None:
        ang = _angles(cfg.params["xy_angles"], 1, "xy_angles")
        pairs = [(0, 1), (2, 3), (1, 2)]
        s2 = Circuit(n, tuple(xy(ang[i % len(ang)], *p) for i, p in enumerate(pairs)))
    core = Circuit(n, (multi_z(alpha4 / 3, (1, 2, 3)), multi_z(alpha4, (0, 1, 2, 3))))
    return s1 + s2 + core


def run_philbody(cfg: ExperimentConfig) -> ResultTable:
    rows = []
    scale = angle(cfg.params["alpha4_per_a"])
    for i, a in enumerate(sweep(cfg.params["a"])):
        alpha4 = a * scale
        V = philbody_circuit(cfg, alpha4)
        sampling = cfg.sampling() if cfg.exact else Sampling(
            cfg.shots, cfg.noise, _sub_seed(cfg.seed, i), cfg.gammas, cfg.resamples, cfg.resample_size)
        est = estimate_phi(V, [3, 4], sampling)
        exact = circuit_phases(V)
        rows.append((
            a, alpha4, alpha4 / 3,
            est[3].value, est[3].sigma, est[4].value, est[4].sigma,
            phi_l(exact, 3), phi_l(exact, 4),
            mod2pi(-(2**cfg.n) * alpha4 / 3), mod2pi(-(2**cfg.n) * alpha4),
        ))
    cols = ("a", "alpha4", "alpha3", "phi3", "sigma3", "phi4", "sigma4",
            "phi3_theory", "phi4_theory", "phi3_law", "phi4_law")
    return make_table(cols, rows, cfg.echo(), None if cfg.exact else cfg.seed)


def invariance_circuit(cfg: ExperimentConfig, phi: float) -> Circuit:
    """exp(-i phi Z0), exp(-i phi/2 (X0X1 + Y0Y1)), fixed 1-/2-qubit gates, exp(-i a3 Z0Z1Z2)."""
    p = cfg.params
    n = cfg.n
    gates = (
        rz(2 * phi, 0),
        xy(-phi / 2, 0, 1),
        rz(angle(p["k1"]), 1),
        rz(angle(p["k2"]), 2),
        zz(angle(p["s"]), 1, 2),
        xy(angle(p["kappa"]), 1, 2),
        multi_z(angle(p["alpha3"]), (0, 1, 2)),
    )
    return Circuit(n, gates)


def run_invariance(cfg: ExperimentConfig) -> ResultTable:
    n = cfg.n
    rows = []
    for i, phi in enumerate(sweep(cfg.params["phi"])):
        V = invariance_circuit(cfg, phi)
        est = _delta3_row(V, cfg, i)
        d = est.diagnostics
        rows.append((phi, d["hole"], d["particle"], d["ghz"], est.value, est.sigma,
                     mod2pi(-8 * angle(cfg.params["alpha3"]))))
    cols = ("phi", f"theta{n - 1}-{n}theta{n}", f"theta1-{n}theta0", f"theta{n}-theta0",
            "delta3", "sigma", "delta3_theory")
    return make_table(cols, rows, cfg.echo(), None if cfg.exact else cfg.seed)


def parity_circuit(n: int, lam: float) -> Circuit:
    """GHZ, RZ(lambda) on every qubit, Hadamard on every qubit.  <parity> = cos(n lambda)."""
    gates = fanout(range(n)) + [rz(lam, q) for q in range(n)] + [h(q) for q in range(n)]
    return Circuit(n, tuple(gates))


def parity_of(probs: np.ndarray) -> float:
    n_states = probs.size
    signs = np.array([1 - 2 * (bin(i).count("1") % 2) for i in range(n_states)])
    return float(np.dot(signs, probs))


def run_ghz_parity(cfg: ExperimentConfig) -> ResultTable:
    n = cfg.n
    rows = []
    lams = sweep(cfg.params["lambda"])
    for i, lam in enumerate(lams):
        c = parity_circuit(n, lam)
        if cfg.exact:
            rows.append((lam, parity_of(run_circuit(c).probabilities), 0.0, math.cos(n * lam)))
            continue
        hist = run_shots(c, cfg.shots, cfg.noise, derive_rng(cfg.seed, i))
        stat = lambda hh: parity_of(hh.probability_vector())  # noqa: E731
        bs = bootstrap(hist, stat, cfg.resamples, cfg.resample_size, derive_rng(cfg.seed, i, 1))
        rows.append((lam, stat(hist), bs.sigma, math.cos(n * lam)))
    table = make_table(("lambda", "parity", "sigma", "parity_theory"), rows, cfg.echo(),
                       None if cfg.exact else cfg.seed)
    table.metadata["contrast"] = fringe_contrast(n, lams, [r[1] for r in rows])
    return table


def fringe_contrast(n: int, lams, parities) -> float:
    """Amplitude of the best fit a cos(n lambda) + b sin(n lambda) + c."""
    lams = np.asarray(lams)
    design = np.column_stack([np.cos(n * lams), np.sin(n * lams), np.ones_like(lams)])
    coef, *_ = np.linalg.lstsq(design, np.asarray(parities), rcond=None)
    return float(math.hypot(coef[0], coef[1]))


def run_identity_suite(cfg: ExperimentConfig) -> ResultTable:
    p = cfg.params
    n_values = [cfg.n] if cfg.n else list(range(int(p["n_min"]), int(p["n_max"]) + 1))
    rows = list(run_identities(n_values, cfg.seed, bool(p["flip_f3_sign"])))
    return make_table(("identity", "n", "trials", "max_deviation", "tolerance", "passed"), rows,
                      cfg.echo(), cfg.seed)


RUNNERS: dict[str, Callable[[ExperimentConfig], ResultTable]] = {
    "delta3-sweep": run_delta3_sweep,
    "additivity-grid": run_additivity_grid,
    "philbody": run_philbody,
    "invariance": run_invariance,
    "ghz-parity": run_ghz_parity,
    "identity-suite": run_identity_suite,
}


def run_experiment(cfg: ExperimentConfig) -> ResultTable:
    return RUNNERS[cfg.experiment](cfg)


def table_failed(table: ResultTable) -> bool:
    """Identity-suite tables fail when any row did not pass."""
    return "passed" in table.columns and not all(table.column("passed"))
