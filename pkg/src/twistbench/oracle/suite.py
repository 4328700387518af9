"""Cross-checks between the stabilizer engine and the dense oracle."""

from __future__ import annotations

import numpy as np

from ..lattice import Lattice, Region, disk, thicken
from ..pauli import Bipartition, PauliOp, twist_product, twist_sign
from ..stabilizer import apply_circuit, init_zero, random_local_circuit
from ..toric import build_toric, ground_state, restricted
from .dense import (
    ALG_TOL,
    NORM_TOL,
    DenseState,
    apply_pauli_vec,
    dense_from_circuit,
    ground_projector,
    haar_vector,
    pauli_expectation,
    purified_distance,
)
from .detectability import detectability_checks, pauli_family, singlet_chain
from .inequalities import check_gentle_and_union
from .invisibility import estimate_invisibility
from .lmp import LawResult, check_invisible_norm_bounds, check_lmp_laws, check_projector_norm_fact

SMALL_LATTICES = ((2, 2), (2, 3), (3, 3), (2, 5), (3, 4), (2, 6), (4, 3))


def random_pauli(n: int, rng) -> PauliOp:
    return PauliOp(rng.random(n) < 0.5, rng.random(n) < 0.5, 2 * int(rng.integers(2)))


def engine_vs_dense(instances: int = 500, seed: int = 0, inject_fault: bool = False) -> LawResult:
    """Tableau expectations of every tableau row plus random Paulis against the state vector."""
    rng = np.random.default_rng(seed)
    res = LawResult("engine_vs_dense", tolerance=ALG_TOL)
    for k in range(instances):
        w, h = SMALL_LATTICES[k % len(SMALL_LATTICES)]
        lat = Lattice(w, h, "open" if rng.random() < 0.5 else "periodic")
        circ = random_local_circuit(lat, int(rng.integers(0, 7)), rng)
        state, _ = apply_circuit(init_zero(lat.n_sites), circ, lat)
        if inject_fault and k == 0:
            state.r[state.n] ^= True
        dense = dense_from_circuit(circ, lat)
        paulis = state.stabilizers() + state.destabilizers()
        paulis += [random_pauli(lat.n_sites, rng) for _ in range(8)]
        got = state.expectations(paulis)
        want = np.array([pauli_expectation(dense, p) for p in paulis])
        res.record(np.abs(got - want).max())
    return res


def twist_rule_vs_dense(instances: int = 500, seed: int = 0, max_qubits: int = 10) -> LawResult:
    """Sign rule for P_Mc Q P_M against the operator product applied to random vectors."""
    rng = np.random.default_rng(seed)
    res = LawResult("twist_sign_rule", tolerance=ALG_TOL)
    for _ in range(instances):
        lat = Lattice(int(rng.integers(2, max_qubits // 2 + 1)), 2)
        p = random_pauli(lat.n_sites, rng)
        q = random_pauli(lat.n_sites, rng)
        cut = Bipartition(Region.from_mask(lat, rng.random(lat.n_sites) < 0.5))
        p_m, p_mc = cut.split(p)
        vecs = np.stack([haar_vector(2**lat.n_sites, rng) for _ in range(3)], axis=1)
        lhs = apply_pauli_vec(p_mc, apply_pauli_vec(q, apply_pauli_vec(p_m, vecs)))
        rhs = twist_sign(p, q, cut) * apply_pauli_vec(p, apply_pauli_vec(q, vecs))
        closed = apply_pauli_vec(twist_product(p, q, cut), vecs)
        res.record(max(np.abs(lhs - rhs).max(), np.abs(lhs - closed).max()))
    return res


def toric_patch(width: int = 3, height: int = 3):
    lat = Lattice(width, height, "open")
    code = build_toric(lat)
    return lat, code


def _dense_toric_ground(code) -> np.ndarray:
    state = ground_state(code)
    proj = ground_projector(state.stabilizers(), code.n).matrix
    w, v = np.linalg.eigh(proj)
    return v[:, -1]


def invisibility_suite(seed: int = 0, trials: int = 16) -> list[LawResult]:
    """Exact, perturbed and noisy 3x3 patches: delta-hat against its analytic ceilings."""
    rng = np.random.default_rng(seed)
    lat, code = toric_patch()
    sub = restricted(code, lat.full())
    psi = _dense_toric_ground(code)
    n = lat.n_sites
    loops = [g for g in code.generators if g.weight == 4]
    exact = LawResult("invisible_exact", tolerance=ALG_TOL)
    robust = LawResult("invisible_perturbed", tolerance=NORM_TOL)
    noisy = LawResult("invisible_noisy", tolerance=NORM_TOL)
    sites = lat.sites()
    for k in range(trials):
        p = loops[k % len(loops)]
        a = disk(lat, sites[int(rng.integers(n))], int(rng.integers(0, 2)))
        b = thicken(a, 2)
        est = estimate_invisibility(DenseState(psi), p, a, b, 8, seed + k)
        exact.record(est.delta_hat)

        phi = haar_vector(2**n, rng)
        sig = psi + rng.uniform(0.01, 0.3) * phi
        sig /= np.linalg.norm(sig)
        eps = purified_distance(psi, sig)
        est = estimate_invisibility(DenseState(sig), p, a, b, 8, seed + k)
        robust.record(max(0.0, est.delta_hat - 2 * eps))

        # mixture of the ground state with a few Pauli-error copies
        rho = np.zeros((2**n, 2**n), complex)
        weights = rng.dirichlet(np.ones(3) * 2) * np.array([1, 0.1, 0.1])
        weights /= weights.sum()
        for wk in weights:
            err = PauliOp(rng.random(n) < 0.1, rng.random(n) < 0.1)
            v = apply_pauli_vec(err, psi)
            rho += wk * np.outer(v, v.conj())
        e_r = sum((1 - pauli_expectation(DenseState(rho), s)) / 2 for s in sub.generators)
        est = estimate_invisibility(DenseState(rho), p, a, b, 4, seed + k)
        noisy.record(max(0.0, est.delta_hat - 2 * np.sqrt(max(e_r, 0.0))))
    return [exact, robust, noisy]


def detectability_suite(seed: int = 0):
    lat, code = toric_patch()
    commuting = detectability_checks(pauli_family(code.generators, lat.n_sites), trials=10, seed=seed)
    chain = detectability_checks(singlet_chain(4), trials=20, seed=seed)
    return commuting, chain


def run_oracle_suite(
    seed: int = 0, inject_fault: bool = False, scale: float = 1.0, lattice: Lattice | None = None
) -> dict:
    """Everything the oracle checks, as a JSON-ready dict with an overall ok flag.

    `lattice` (default 3x3 open) hosts the circuit for the LMP and norm laws.
    """
    n_inst = max(1, int(500 * scale))
    results = []
    results.append(engine_vs_dense(n_inst, seed, inject_fault))
    results.append(twist_rule_vs_dense(n_inst, seed))
    lat = lattice or Lattice(3, 3, "open")
    circ = random_local_circuit(lat, 2, np.random.default_rng(seed))
    results.extend(check_lmp_laws(circ, lat, max(1, int(200 * scale)), seed).laws)
    results.append(check_projector_norm_fact(n_inst, seed))
    results.extend(check_invisible_norm_bounds(circ, lat, max(1, int(20 * scale)), seed).laws)
    gentle, union = check_gentle_and_union(n_inst, 64, seed)
    results.extend(invisibility_suite(seed, max(1, int(16 * scale))))
    commuting, chain = detectability_suite(seed)
    laws = [r.to_dict() for r in results] + [gentle.to_dict(), union.to_dict()]
    dl = {
        "commuting_patch": commuting.to_dict(),
        "commuting_dl_equals_ground": commuting.dl_minus_ground < ALG_TOL,
        "singlet_chain": chain.to_dict(),
    }
    ok = all(l["ok"] for l in laws) and commuting.ok and chain.ok and dl["commuting_dl_equals_ground"]
    return {"schema": "1", "ok": bool(ok), "seed": seed, "laws": laws, "detectability": dl}
