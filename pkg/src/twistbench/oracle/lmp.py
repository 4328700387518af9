"""Local marginal projectors U (|0><0|_S x 1) U^dagger and their laws."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..lattice import Lattice, Region, cover_with_disks, disk, thicken
from ..pauli import PauliOp, pauli_mul
from ..stabilizer import Circuit, apply_circuit, init_zero
from .dense import (
    CHAIN_TOL,
    NORM_TOL,
    DenseOperator,
    apply_local,
    check_cap,
    circuit_unitary,
    haar_vector,
    pauli_matrix,
    reduced_density,
    region_qubits,
)


@dataclass
class LawResult:
    name: str
    trials: int = 0
    passes: int = 0
    worst_residual: float = 0.0
    tolerance: float = CHAIN_TOL
    demo: bool = False  # a precondition-violation demonstration, never a failure

    def record(self, residual: float):
        self.trials += 1
        self.worst_residual = max(self.worst_residual, float(residual))
        if residual < self.tolerance:
            self.passes += 1

    @property
    def ok(self) -> bool:
        return self.demo or self.passes == self.trials

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


@dataclass
class LawReport:
    laws: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(l.ok for l in self.laws)

    def __getitem__(self, name):
        for l in self.laws:
            if l.name == name:
                return l
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "laws": [l.to_dict() for l in self.laws]}


class LMPFactory:
    """Caches the circuit unitary; hands out isometries and projectors."""

    def __init__(self, circuit: Circuit, lattice: Lattice):
        self.circuit = circuit
        self.lattice = lattice
        self.n = lattice.n_sites
        self.u = circuit_unitary(circuit, lattice)
        self.psi = self.u[:, 0]
        self.lightcone = circuit.depth * circuit.locality_radius

    def _mask(self, qubits) -> np.ndarray:
        idx = np.arange(2**self.n)
        bad = np.zeros(2**self.n, bool)
        for q in qubits:
            bad |= (idx >> (self.n - 1 - q)) & 1 == 1
        return ~bad

    def isometry(self, region: Region) -> np.ndarray:
        """Columns spanning the range of the LMP for `region`."""
        return self.u[:, self._mask(region_qubits(region))]

    def projector(self, region: Region) -> np.ndarray:
        w = self.isometry(region)
        return w @ w.conj().T

    def support(self, region: Region) -> Region:
        return thicken(region, self.lightcone)


def lmp(prep_circuit: Circuit, S: Region, lattice: Lattice) -> DenseOperator:
    fac = LMPFactory(prep_circuit, lattice)
    return DenseOperator(fac.projector(S), f"LMP on {len(S)} sites")


def _random_region(lattice: Lattice, rng, p: float = 0.4) -> Region:
    mask = rng.random(lattice.n_sites) < p
    return Region.from_mask(lattice, mask)


def _random_local_operator(k: int, rng) -> np.ndarray:
    m = rng.normal(size=(2**k, 2**k)) + 1j * rng.normal(size=(2**k, 2**k))
    return m / np.linalg.norm(m, 2)


def _op_on_columns(op, qubits, cols, n):
    return apply_local(cols, op, qubits, n)


def check_lmp_laws(
    prep_circuit: Circuit, lattice: Lattice, trials: int = 200, seed: int = 0
) -> LawReport:
    """Randomised checks of the LMP identities for the state U|0...0>."""
    check_cap(lattice.n_sites, mixed=True)
    rng = np.random.default_rng(seed)
    fac = LMPFactory(prep_circuit, lattice)
    n, psi, D = fac.n, fac.psi, fac.lightcone
    sites = lattice.sites()

    stab = LawResult("stabilization")
    union = LawResult("union")
    product = LawResult("cover_product")
    commute = LawResult("commutation")
    marginal = LawResult("marginal_projection")
    sandwich = LawResult("expectation_sandwich")
    demo = LawResult("expectation_sandwich_unseparated", demo=True)

    for _ in range(trials):
        s1 = _random_region(lattice, rng)
        s2 = _random_region(lattice, rng)
        p1, p2 = fac.projector(s1), fac.projector(s2)
        stab.record(np.linalg.norm(p1 @ psi - psi))
        union.record(np.abs(p1 @ p2 - fac.projector(s1 | s2)).max())
        commute.record(np.abs(p1 @ p2 - p2 @ p1).max())

        # random cover of the lattice by overlapping blocks
        labels = rng.integers(1, 4, size=n)
        parts = [Region.from_mask(lattice, labels == c) for c in (1, 2, 3)]
        parts = [p | _random_region(lattice, rng, 0.2) for p in parts if len(p)]
        prod = np.eye(2**n, dtype=complex)
        for p in parts:
            prod = prod @ fac.projector(p)
        product.record(np.abs(prod - np.outer(psi, psi.conj())).max())

        # marginal on a small disc S' from an arbitrary state squeezed by the
        # projector of the concentric disc S = S'(D)
        c = sites[int(rng.integers(n))]
        r_small = int(rng.integers(0, 2))
        s_small = disk(lattice, c, r_small)
        s_big = disk(lattice, c, r_small + D)
        w = fac.isometry(s_big)
        sigma = [haar_vector(2**n, rng) for _ in range(2)]
        probs = rng.dirichlet([1, 1])
        keep = region_qubits(s_small)
        num = 0
        tr = 0.0
        for pk, v in zip(probs, sigma):
            pv = w @ (w.conj().T @ v)
            num = num + pk * reduced_density(pv, keep, n)
            tr += pk * np.vdot(pv, pv).real
        target = reduced_density(psi, keep, n)
        marginal.record(np.abs(num / tr - target).max())

        # Pi O Pi = <O> Pi for O supported on S' and Pi the LMP of S'(D)
        k = int(rng.integers(1, 3))
        sp = Region(lattice, frozenset(sites[i] for i in rng.choice(n, size=k, replace=False)))
        q = region_qubits(sp)
        op = _random_local_operator(k, rng)
        expect = np.vdot(psi, _op_on_columns(op, q, psi, n))
        for region, law in ((fac.support(sp), sandwich), (sp, demo)):
            w = fac.isometry(region)
            m = w.conj().T @ _op_on_columns(op, q, w, n)
            law.record(np.linalg.norm(m - expect * np.eye(m.shape[0]), 2))
    return LawReport([stab, union, product, commute, marginal, sandwich, demo])


def check_projector_norm_fact(trials: int = 500, seed: int = 0, max_qubits: int = 5) -> LawResult:
    """|| psi - Pi psi || <= || psi psi^dag - Pi psi psi^dag Pi ||_1 on random pairs."""
    rng = np.random.default_rng(seed)
    res = LawResult("projector_norm", tolerance=NORM_TOL)
    for _ in range(trials):
        dim = 2 ** int(rng.integers(1, max_qubits + 1))
        psi = haar_vector(dim, rng)
        rank = int(rng.integers(0, dim + 1))
        basis = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))[0]
        proj = basis[:, :rank] @ basis[:, :rank].conj().T
        ppsi = proj @ psi
        lhs = np.linalg.norm(psi - ppsi)
        diff = np.outer(psi, psi.conj()) - np.outer(ppsi, ppsi.conj())
        rhs = np.abs(np.linalg.eigvalsh(diff)).sum()
        # residual is the amount by which the inequality fails (0 when it holds)
        res.record(max(0.0, lhs - rhs))
    return res


def _random_stabilizer_element(state, rng):
    rows = state.stabilizers()
    pick = rng.random(len(rows)) < 0.5
    if not pick.any():
        pick[int(rng.integers(len(rows)))] = True
    out = PauliOp.identity(state.n)
    for row, keep in zip(rows, pick):
        if keep:
            out = pauli_mul(out, row)
    return out


def check_invisible_norm_bounds(
    prep_circuit: Circuit, lattice: Lattice, trials: int = 50, seed: int = 0, t: int = 1
) -> LawReport:
    """Operator-norm bounds for exactly invisible P (stabilizers of U|0>, so delta = 0).

    With delta = 0 every bound collapses to an identity, checked at the
    norm tolerance.
    """
    rng = np.random.default_rng(seed)
    fac = LMPFactory(prep_circuit, lattice)
    D = fac.lightcone
    state, _ = apply_circuit(init_zero(lattice.n_sites), prep_circuit, lattice)
    sites = lattice.sites()
    single = LawResult("single_disc_norm", tolerance=NORM_TOL)
    multi = LawResult("multi_disc_norm", tolerance=NORM_TOL)
    cover = LawResult("covered_support_norm", tolerance=NORM_TOL)
    for _ in range(trials):
        p = _random_stabilizer_element(state, rng)
        pm = pauli_matrix(p)
        discs = [disk(lattice, sites[int(rng.integers(len(sites)))], int(rng.integers(0, 2)))
                 for _ in range(2)]
        grown = [thicken(s, t + 2 * D) for s in discs]
        a, b = fac.projector(discs[0]), fac.projector(grown[0])
        single.record(np.linalg.norm(a @ pm @ b - pm @ b, 2))
        a = fac.projector(discs[0] | discs[1])
        b = fac.projector(grown[0] | grown[1])
        multi.record(np.linalg.norm(a @ pm @ b - pm @ b, 2))
        support = Region.from_mask(lattice, p.x | p.z)
        pd = thicken(support, D)
        cov = cover_with_disks(pd, D + 1) if len(pd) else []
        big = Region(lattice, frozenset()).sites
        for s in cov:
            big = big | thicken(s, t + 2 * D).sites
        b = fac.projector(Region(lattice, frozenset(big)))
        sign = p.sign
        cover.record(np.linalg.norm(pm @ b - sign * b, 2))
    return LawReport([single, multi, cover])
