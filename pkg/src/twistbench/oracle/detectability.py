"""Detectability-lemma operator, its converse and the leakage bound.

A family is a list of (projector, support) pairs; the Hamiltonian is
H = sum_i (1 - Pi_i) and must have zero ground energy.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ..errors import FrustratedError, InputError
from .dense import NORM_TOL, apply_pauli_vec, check_cap, haar_vector, purified_distance


@dataclass(frozen=True)
class GapReport:
    gamma: float
    g: int
    layers: int
    ordering: tuple


@dataclass
class DetectabilityReport:
    gap: GapReport
    dl_minus_ground: float  # || DL - Pi0 ||
    detectability_margin: float
    converse_margins: list = field(default_factory=list)
    leakage_margins: list = field(default_factory=list)
    tolerance: float = NORM_TOL

    @property
    def ok(self) -> bool:
        return (
            self.detectability_margin >= -self.tolerance
            and all(m >= -self.tolerance for m in self.converse_margins)
            and all(m >= -self.tolerance for m in self.leakage_margins)
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def pauli_family(generators, n: int):
    """(1 + s)/2 projectors of commuting Pauli checks (a RestrictedCode is accepted)."""
    gens = getattr(generators, "generators", generators)
    check_cap(n, mixed=True)
    eye = np.eye(2**n, dtype=complex)
    return [((eye + apply_pauli_vec(s, eye)) / 2, frozenset(int(q) for q in s.support)) for s in gens]


def singlet_chain(n: int = 4):
    """Open chain with Pi_i = 1 - (singlet on i, i+1): frustration-free, non-commuting."""
    check_cap(n, mixed=True)
    singlet = np.array([0, 1, -1, 0], complex) / np.sqrt(2)
    fam = []
    for i in range(n - 1):
        local = np.eye(4) - np.outer(singlet, singlet)
        full = np.kron(np.kron(np.eye(2**i), local), np.eye(2 ** (n - i - 2)))
        fam.append((full, frozenset({i, i + 1})))
    return fam


def staggered_layers(family) -> list[list[int]]:
    """Greedy colouring of the overlap graph in index order."""
    layers: list[list[int]] = []
    supports: list[set] = []
    for i, (_, sup) in enumerate(family):
        for layer, used in zip(layers, supports):
            if not used & sup:
                layer.append(i)
                used |= sup
                break
        else:
            layers.append([i])
            supports.append(set(sup))
    return layers


def _noncommuting_degree(family) -> int:
    best = 0
    for i, (pi, si) in enumerate(family):
        deg = 0
        for j, (pj, sj) in enumerate(family):
            if i != j and si & sj and np.abs(pi @ pj - pj @ pi).max() > 1e-12:
                deg += 1
        best = max(best, deg)
    return best


def detectability_checks(family, states=(), trials: int = 20, seed: int = 0) -> DetectabilityReport:
    """Margins of the detectability lemma, its converse and the leakage bound.

    The converse and leakage bounds are checked on the supplied density
    matrices plus `trials` random low-energy states.
    """
    if not family:
        raise InputError("empty projector family")
    dim = family[0][0].shape[0]
    eye = np.eye(dim, dtype=complex)
    h = sum(eye - p for p, _ in family)
    w, v = np.linalg.eigh(h)
    if w[0] > 1e-9:
        raise FrustratedError(
            f"ground energy {w[0]:.3g} > 0: the family is frustrated", w[0], v[:, 0]
        )
    ground = v[:, w < 1e-9]
    pi0 = ground @ ground.conj().T
    excited = w[w >= 1e-9]
    gamma = float(excited.min()) if excited.size else float("inf")

    layers = staggered_layers(family)
    g = max(len(layers), _noncommuting_degree(family), 1)
    dl = eye.copy()
    for layer in layers:
        for i in layer:
            dl = dl @ family[i][0]
    bound = 1.0 / (gamma / g**2 + 1.0)
    lhs = np.linalg.norm(dl @ (eye - pi0), 2) ** 2
    gap = GapReport(gamma, g, len(layers), tuple(i for layer in layers for i in layer))

    rng = np.random.default_rng(seed)
    rhos = [np.asarray(s) for s in states]
    for _ in range(trials):
        # mostly-ground states with a random excited admixture
        psi0 = ground @ haar_vector(ground.shape[1], rng)
        rho = np.outer(psi0, psi0.conj())
        junk = haar_vector(dim, rng)
        p = rng.uniform(0, 0.3)
        rhos.append((1 - p) * rho + p * np.outer(junk, junk.conj()))
    conv, leak = [], []
    dl2 = dl.conj().T @ dl
    for rho in rhos:
        e = np.trace(h @ rho).real
        conv.append(float(np.trace(dl2 @ rho).real - (1 - 4 * e)))
        acc = np.trace(pi0 @ rho).real
        if acc <= 1e-14:
            leak.append(float(np.sqrt(4 * e + bound) - 1.0))
            continue
        post = pi0 @ rho @ pi0 / acc
        leak.append(float(np.sqrt(4 * e + bound) - purified_distance(rho, post)))
    return DetectabilityReport(
        gap, float(np.linalg.norm(dl - pi0, 2)), float(bound - lhs), conv, leak
    )
