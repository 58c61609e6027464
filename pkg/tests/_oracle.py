"""Independent dense reference: gates built from Kronecker products and expm."""
from functools import reduce

import numpy as np
import scipy.linalg

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def embed(n, ops):
    """Tensor product with ``ops[q]`` on qubit q (qubit 0 least significant)."""
    return reduce(np.kron, [ops.get(q, I2) for q in reversed(range(n))])


def dense_gate(n, g):
    q = g.qubits
    if g.name == "RZ":
        return scipy.linalg.expm(-0.5j * g.param * embed(n, {q[0]: Z}))
    if g.name == "PS":
        return scipy.linalg.expm(0.5j * g.param * embed(n, {q[0]: Z}))
    if g.name == "XY":
        gen = embed(n, {q[0]: X, q[1]: X}) + embed(n, {q[0]: Y, q[1]: Y})
        return scipy.linalg.expm(1j * g.param * gen)
    if g.name == "ZZ":
        return scipy.linalg.expm(-0.5j * g.param * embed(n, {q[0]: Z, q[1]: Z}))
    if g.name == "MZ":
        return scipy.linalg.expm(-1j * g.param * embed(n, {k: Z for k in q}))
    if g.name in ("H", "X", "Y", "Z"):
        return embed(n, {q[0]: {"H": H, "X": X, "Y": Y, "Z": Z}[g.name]})
    if g.name == "CNOT":
        c, t = q
        p0 = embed(n, {c: np.diag([1, 0]).astype(complex)})
        p1 = embed(n, {c: np.diag([0, 1]).astype(complex), t: X})
        return p0 + p1
    raise ValueError(g.name)


def dense_unitary(circuit):
    u = np.eye(2**circuit.n, dtype=complex)
    for g in circuit.gates:
        u = dense_gate(circuit.n, g) @ u
    return u


def weight_indices(n, m):
    return [s for s in range(2**n) if bin(s).count("1") == m]
