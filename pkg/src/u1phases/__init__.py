"""Symmetry-protected phases of U(1)-invariant circuits and their estimation."""

__version__ = "0.1.0"

from .sectors import (  # noqa: E402
    binomial,
    bk_coefficient,
    c_eigenvalue,
    enumerate_sector,
    f3_coefficients_in_Cl_basis,
    mod2pi,
    trace_Bk_Cl,
)
from .circuits import Circuit, Gate, classify_u1, parse_circuit, format_circuit  # noqa: E402
from .simulator import circuit_unitary, det_phase, sector_blocks  # noqa: E402
from .functionals import (  # noqa: E402
    SectorPhases,
    beta_k,
    delta3,
    hamiltonian_phase,
    phi_l,
    predicted_delta3,
    sector_phases,
)
from .noise import NoiseModel  # noqa: E402
from .protocol import Sampling, estimate_delta3, estimate_phi_l  # noqa: E402

__all__ = [
    "Circuit", "Gate", "NoiseModel", "Sampling", "SectorPhases",
    "beta_k", "binomial", "bk_coefficient", "c_eigenvalue", "circuit_unitary", "classify_u1",
    "delta3", "det_phase", "enumerate_sector", "estimate_delta3", "estimate_phi_l",
    "f3_coefficients_in_Cl_basis", "format_circuit", "hamiltonian_phase", "mod2pi",
    "parse_circuit", "phi_l", "predicted_delta3", "sector_blocks", "sector_phases", "trace_Bk_Cl",
]
