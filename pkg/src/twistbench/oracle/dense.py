"""Exact state-vector and density-matrix routines for small systems.

Qubit 0 is the most significant bit of a basis index, and lattice sites map
to qubits through ``Lattice.index``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ..errors import CapacityError, InputError
from ..lattice import Lattice, Region
from ..pauli import PauliOp
from ..stabilizer import Circuit

PURE_CAP = 12
MIXED_CAP = 10
ALG_TOL = 1e-10
CHAIN_TOL = 1e-9
NORM_TOL = 1e-8

_SQ2 = 1 / np.sqrt(2)
GATE_MATRICES = {
    "H": np.array([[1, 1], [1, -1]], complex) * _SQ2,
    "S": np.diag([1, 1j]),
    "X": np.array([[0, 1], [1, 0]], complex),
    "Y": np.array([[0, -1j], [1j, 0]], complex),
    "Z": np.diag([1, -1]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
}


def caps() -> tuple[int, int]:
    """(pure, mixed) qubit caps; TWISTBENCH_CAP_QUBITS overrides both."""
    env = os.environ.get("TWISTBENCH_CAP_QUBITS")
    if env:
        try:
            v = int(env)
        except ValueError:
            raise InputError(f"TWISTBENCH_CAP_QUBITS must be an integer, got {env!r}") from None
        return v, v
    return PURE_CAP, MIXED_CAP


def check_cap(n: int, mixed: bool = False) -> None:
    pure, mix = caps()
    cap = mix if mixed else pure
    if n > cap:
        kind = "mixed" if mixed else "pure"
        raise CapacityError(f"{n} qubits exceeds the {kind}-state cap of {cap}")


@dataclass(frozen=True, eq=False)
class DenseState:
    """Pure vector (ndim 1) or density matrix (ndim 2) on n qubits."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=complex)
        n = int(round(np.log2(d.shape[0])))
        if 2**n != d.shape[0] or (d.ndim == 2 and d.shape[1] != d.shape[0]) or d.ndim > 2:
            raise InputError("dense state must have dimension 2**n")
        check_cap(n, mixed=d.ndim == 2)
        object.__setattr__(self, "data", d)

    @property
    def n(self) -> int:
        return int(round(np.log2(self.data.shape[0])))

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    def density(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def check(self, tol: float = ALG_TOL) -> None:
        if self.is_pure:
            assert abs(np.linalg.norm(self.data) - 1) < tol, "state not normalized"
        else:
            rho = self.data
            assert abs(np.trace(rho) - 1) < tol, "trace is not 1"
            assert np.allclose(rho, rho.conj().T, atol=tol), "not Hermitian"
            assert np.linalg.eigvalsh(rho).min() > -tol, "not positive"


@dataclass(frozen=True, eq=False)
class DenseOperator:
    matrix: np.ndarray
    label: str = ""

    def is_projector(self, tol: float = ALG_TOL) -> bool:
        m = self.matrix
        return bool(
            np.abs(m @ m - m).max(initial=0) < tol and np.abs(m - m.conj().T).max(initial=0) < tol
        )


def _apply(psi: np.ndarray, mat: np.ndarray, qubits, n: int) -> np.ndarray:
    """Apply a k-qubit matrix to the leading n-qubit axes of psi (extra trailing axes allowed)."""
    k = len(qubits)
    extra = psi.shape[1:] if psi.ndim > 1 else ()
    t = psi.reshape((2,) * n + extra)
    t = np.moveaxis(t, list(qubits), list(range(k)))
    shp = t.shape
    t = (mat @ t.reshape(2**k, -1)).reshape(shp)
    t = np.moveaxis(t, list(range(k)), list(qubits))
    return t.reshape(psi.shape)


def apply_local(psi, mat, qubits, n):
    return _apply(psi, mat, qubits, n)


def _circuit_qubits(circuit: Circuit, lattice: Lattice):
    circuit.validate(lattice)
    for layer in circuit.layers:
        for g in layer:
            yield g.name, [lattice.index(s) for s in g.sites]


def dense_from_circuit(circuit: Circuit, lattice: Lattice) -> DenseState:
    n = lattice.n_sites
    check_cap(n)
    psi = np.zeros(2**n, complex)
    psi[0] = 1
    for name, qs in _circuit_qubits(circuit, lattice):
        psi = _apply(psi, GATE_MATRICES[name], qs, n)
    return DenseState(psi)


def circuit_unitary(circuit: Circuit, lattice: Lattice) -> np.ndarray:
    n = lattice.n_sites
    check_cap(n, mixed=True)
    u = np.eye(2**n, dtype=complex)
    for name, qs in _circuit_qubits(circuit, lattice):
        u = _apply(u, GATE_MATRICES[name], qs, n)
    return u


def apply_pauli_vec(p: PauliOp, psi: np.ndarray) -> np.ndarray:
    """P |psi> for a vector (or block of column vectors) on p.n qubits."""
    n = p.n
    idx = np.arange(2**n)
    weights = 1 << (n - 1 - np.arange(n))
    xmask = int((p.x * weights).sum())
    zbits = (idx[:, None] & weights[None, :][:, p.z]) != 0
    sign = np.where(zbits.sum(axis=1) % 2, -1.0, 1.0)
    phase = 1j ** ((p.phase + int(np.count_nonzero(p.x & p.z))) % 4)
    zpsi = (sign[:, None] if psi.ndim > 1 else sign) * psi
    out = np.empty_like(zpsi)
    out[idx ^ xmask] = zpsi
    return phase * out


def pauli_matrix(p: PauliOp) -> np.ndarray:
    check_cap(p.n, mixed=True)
    return apply_pauli_vec(p, np.eye(2**p.n, dtype=complex))


def pauli_expectation(state: DenseState, p: PauliOp) -> float:
    if state.is_pure:
        return complex(np.vdot(state.data, apply_pauli_vec(p, state.data))).real
    return complex(np.trace(apply_pauli_vec(p, state.data))).real


def ground_projector(generators, n: int) -> DenseOperator:
    """prod (1 + s)/2 over the given commuting Paulis (a RestrictedCode is accepted)."""
    gens = getattr(generators, "generators", generators)
    check_cap(n, mixed=True)
    proj = np.eye(2**n, dtype=complex)
    for s in gens:
        proj = (proj + apply_pauli_vec(s, proj)) / 2
    return DenseOperator(proj, "ground projector")


# relative floor: eigenvalues below it are rounding noise, and their square
# roots (~1e-8) would swamp distances between nearly equal states
EIG_FLOOR = 1e-13


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    w = np.where(w > EIG_FLOOR * max(w.max(), 1.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def _as_array(s):
    return s.data if isinstance(s, DenseState) else np.asarray(s)


def bures_squared(rho, sigma) -> float:
    """2(1 - sqrt(F)), computed as a squared residual so it stays accurate near 0."""
    a, b = _as_array(rho), _as_array(sigma)
    if a.shape[0] != b.shape[0]:
        raise InputError("states must have equal dimension")
    if a.ndim == 1 and b.ndim == 1:
        ov = np.vdot(b, a)
        phase = ov / abs(ov) if abs(ov) > 0 else 1.0
        return float(np.linalg.norm(a - phase * b) ** 2)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
    if b.ndim == 1:
        b = np.outer(b, b.conj())
    x, y = _psd_sqrt(a), _psd_sqrt(b)
    w, _, vh = np.linalg.svd(y.conj().T @ x)
    return float(np.linalg.norm(x - y @ w @ vh) ** 2)


def fidelity(rho, sigma) -> float:
    """Squared fidelity (tr |sqrt(rho) sqrt(sigma)|)^2."""
    root = 1.0 - bures_squared(rho, sigma) / 2
    return float(min(max(root, 0.0) ** 2, 1.0))


def purified_distance(rho, sigma) -> float:
    b2 = min(bures_squared(rho, sigma), 2.0)
    return float(np.sqrt(max(0.0, min(1.0, b2 - b2 * b2 / 4))))


def trace_distance(rho, sigma) -> float:
    a = rho.density() if isinstance(rho, DenseState) else np.asarray(rho)
    b = sigma.density() if isinstance(sigma, DenseState) else np.asarray(sigma)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
    if b.ndim == 1:
        b = np.outer(b, b.conj())
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


def reduced_density(psi: np.ndarray, keep, n: int) -> np.ndarray:
    """Marginal on qubits `keep` (in increasing order) of a vector or density matrix."""
    keep = sorted(int(k) for k in keep)
    rest = [q for q in range(n) if q not in keep]
    k = len(keep)
    if psi.ndim == 1:
        t = psi.reshape((2,) * n).transpose(keep + rest).reshape(2**k, -1)
        return t @ t.conj().T
    t = psi.reshape((2,) * (2 * n))
    t = t.transpose(keep + rest + [n + q for q in keep] + [n + q for q in rest])
    t = t.reshape(2**k, 2 ** (n - k), 2**k, 2 ** (n - k))
    return np.einsum("ajbj->ab", t)


def haar_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dim: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def purify(rho: np.ndarray, tol: float = 1e-12) -> tuple[np.ndarray, int]:
    """Vector on system (most significant) + ceil(log2 rank) environment qubits."""
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    keep = w > tol
    w, v = w[keep], v[:, keep]
    env = int(np.ceil(np.log2(max(len(w), 1))))
    out = np.zeros((rho.shape[0], 2**env), complex)
    out[:, : len(w)] = v * np.sqrt(w)
    return out.reshape(-1) / np.linalg.norm(out), env


def region_qubits(region: Region) -> list[int]:
    return [int(i) for i in region.indices()]
