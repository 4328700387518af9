"""Randomised lower estimate of approximate local invisibility.

Adversaries are random unitaries on everything outside B (including the
purifying register), which leave the marginal on B untouched.  The largest
purified distance found between rho_A and the normalised marginal of
P sigma' P^dagger is a lower estimate of the true supremum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from ..errors import InputError
from ..lattice import Region
from ..pauli import PauliOp
from .dense import (
    DenseOperator,
    DenseState,
    apply_local,
    apply_pauli_vec,
    check_cap,
    purified_distance,
    purify,
    reduced_density,
    region_qubits,
)

# above this many adversary qubits a Haar unitary is replaced by brickwork
HAAR_QUBITS = 8


@dataclass(frozen=True)
class InvisibilityEstimate:
    delta_hat: float
    trials: int
    divergent: int


def _adversary(vec, qubits, total, rng):
    k = len(qubits)
    if k == 0:
        return vec
    if k <= HAAR_QUBITS:
        return apply_local(vec, unitary_group.rvs(2**k, random_state=rng), qubits, total)
    for layer in range(4):
        for j in range(layer % 2, k - 1, 2):
            g = unitary_group.rvs(4, random_state=rng)
            vec = apply_local(vec, g, [qubits[j], qubits[j + 1]], total)
    return vec


def estimate_invisibility(
    state: DenseState,
    P,
    A: Region,
    B: Region,
    adversary_trials: int = 32,
    seed: int = 0,
    env_qubits: int = 0,
) -> InvisibilityEstimate:
    """Max purified distance over the identity plus `adversary_trials` random adversaries.

    `state` lives on the lattice (n qubits) plus `env_qubits` trailing
    environment qubits when pure; a mixed state is purified first.  `P` is a
    PauliOp or a DenseOperator on the lattice qubits.
    """
    if not A <= B:
        raise InputError("A must be contained in B")
    lat = A.lattice
    n = lat.n_sites
    if state.is_pure:
        vec, env = state.data, env_qubits
        if state.n != n + env:
            raise InputError("state size does not match lattice plus environment")
    else:
        if state.n != n:
            raise InputError("mixed state must live on the lattice")
        vec, env = purify(state.data)
    total = n + env
    check_cap(total)
    a_q = region_qubits(A)
    rho_a = reduced_density(vec, a_q, total)
    outside = [q for q in range(n) if q not in set(region_qubits(B))] + list(range(n, total))
    rng = np.random.default_rng(seed)

    def act(v):
        if isinstance(P, PauliOp):
            w = apply_pauli_vec(P, v.reshape(2**n, -1))
        elif isinstance(P, DenseOperator):
            w = P.matrix @ v.reshape(2**n, -1)
        else:
            raise InputError("P must be a PauliOp or DenseOperator")
        return w.reshape(-1)

    best, divergent = 0.0, 0
    for trial in range(adversary_trials + 1):
        sigma = vec if trial == 0 else _adversary(vec, outside, total, rng)
        w = act(sigma)
        norm2 = np.vdot(w, w).real
        if norm2 < 1e-14:
            divergent += 1
            continue
        tau_a = reduced_density(w / np.sqrt(norm2), a_q, total)
        best = max(best, purified_distance(rho_a, tau_a))
    return InvisibilityEstimate(best, adversary_trials + 1, divergent)
