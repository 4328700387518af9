"""Gentle measurement and commutative union bound on random instances."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import unitary_group

from .dense import ALG_TOL, purified_distance, random_density


@dataclass
class MarginResult:
    name: str
    trials: int = 0
    passes: int = 0
    worst_margin: float = np.inf
    tolerance: float = ALG_TOL

    def record(self, margin: float):
        self.trials += 1
        self.worst_margin = min(self.worst_margin, float(margin))
        if margin >= -self.tolerance:
            self.passes += 1

    @property
    def ok(self) -> bool:
        return self.passes == self.trials

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ok"] = self.ok
        return d


def _random_dim(rng, dim_cap):
    return int(rng.integers(2, dim_cap + 1))


def check_gentle_and_union(trials: int = 500, dim_cap: int = 64, seed: int = 0):
    """Returns (gentle, union) MarginResults; margin = rhs - lhs."""
    rng = np.random.default_rng(seed)
    gentle = MarginResult("gentle_measurement")
    union = MarginResult("commutative_union_bound")
    for _ in range(trials):
        dim = _random_dim(rng, dim_cap)
        rho = random_density(dim, int(rng.integers(1, dim + 1)), rng)
        w = unitary_group.rvs(dim, random_state=rng)
        rank = int(rng.integers(1, dim + 1))
        proj = w[:, :rank] @ w[:, :rank].conj().T
        p_acc = np.trace(proj @ rho).real
        if p_acc > 1e-12:
            eps = max(0.0, 1.0 - p_acc)
            post = proj @ rho @ proj / p_acc
            gentle.record(np.sqrt(eps) - purified_distance(rho, post))
        else:
            gentle.record(0.0)

        dim = _random_dim(rng, dim_cap)
        rho = random_density(dim, int(rng.integers(1, dim + 1)), rng)
        w = unitary_group.rvs(dim, random_state=rng)
        m = int(rng.integers(1, 6))
        diag = rng.random((m, dim)) < rng.uniform(0.5, 1.0)
        projs = [(w * d) @ w.conj().T for d in diag]
        prod = np.eye(dim, dtype=complex)
        for pr in projs:
            prod = prod @ pr
        lhs = 1.0 - np.trace(prod @ rho).real
        rhs = sum(np.trace((np.eye(dim) - pr) @ rho).real for pr in projs)
        union.record(rhs - lhs)
    return gentle, union
