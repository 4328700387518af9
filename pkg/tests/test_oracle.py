import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from twistbench import (
    CapacityError,
    Circuit,
    FrustratedError,
    Lattice,
    PauliOp,
    build_toric,
    disk,
    ground_state,
    random_local_circuit,
    restricted,
    thicken,
)
from twistbench import gf2
from twistbench.oracle.dense import (
    DenseState,
    dense_from_circuit,
    fidelity,
    ground_projector,
    haar_vector,
    purified_distance,
    purify,
    random_density,
    reduced_density,
    trace_distance,
)
from twistbench.oracle.detectability import detectability_checks, pauli_family, singlet_chain
from twistbench.oracle.inequalities import check_gentle_and_union
from twistbench.oracle.invisibility import estimate_invisibility
from twistbench.oracle.lmp import (
    check_invisible_norm_bounds,
    check_lmp_laws,
    check_projector_norm_fact,
    lmp,
)
from twistbench.oracle.suite import engine_vs_dense, invisibility_suite, twist_rule_vs_dense


def _sqrtm_fidelity(a, b):
    # textbook formula through scipy's matrix square root
    ra = scipy.linalg.sqrtm(a)
    return float(np.abs(np.trace(scipy.linalg.sqrtm(ra @ b @ ra))) ** 2)


def test_dense_circuit_examples():
    lat = Lattice(2, 2, "open")
    e0 = dense_from_circuit(Circuit(), lat).data
    assert e0[0] == 1 and np.abs(e0[1:]).max() == 0
    plus = dense_from_circuit(Circuit.parse("H (0,0)"), lat).data
    assert np.allclose(plus[[0, 8]], [2**-0.5, 2**-0.5])


def test_purified_distance_examples():
    zero = np.array([1, 0], complex)
    one = np.array([0, 1], complex)
    plus = np.array([1, 1], complex) / np.sqrt(2)
    assert purified_distance(zero, zero) == 0.0
    assert purified_distance(zero, one) == pytest.approx(1.0)
    for a, b in ((zero, plus), (np.outer(zero, zero), plus), (np.outer(zero, zero), np.outer(plus, plus))):
        assert purified_distance(a, b) == pytest.approx(np.sqrt(0.5))


@given(st.integers(1, 16), st.integers(1, 16), st.integers(0, 10_000))
def test_fidelity_matches_sqrtm(r1, r2, seed):
    rng = np.random.default_rng(seed)
    a = random_density(16, r1, rng)
    b = random_density(16, r2, rng)
    assert fidelity(a, b) == pytest.approx(_sqrtm_fidelity(a, b), abs=1e-7)
    # purified distance dominates trace distance
    assert trace_distance(a, b) <= purified_distance(a, b) + 1e-9


def test_purified_distance_is_accurate_near_zero():
    rng = np.random.default_rng(0)
    rho = random_density(8, 2, rng)
    assert purified_distance(rho, rho.copy()) < 1e-12


def test_purify_and_reduce():
    rng = np.random.default_rng(3)
    rho = random_density(8, 3, rng)
    vec, env = purify(rho)
    assert env == 2
    assert np.allclose(reduced_density(vec, [0, 1, 2], 5), rho)
    psi = haar_vector(16, rng)
    full = np.outer(psi, psi.conj())
    assert np.allclose(reduced_density(psi, [1, 3], 4), reduced_density(full, [1, 3], 4))


def test_ground_projector_examples():
    lat = Lattice(2, 2, "open")
    assert np.allclose(ground_projector([], 2).matrix, np.eye(4))
    zz = ground_projector([PauliOp.from_letters("ZZ")], 2)
    assert zz.is_projector() and np.allclose(np.diag(zz.matrix), [1, 0, 0, 1])
    patch = Lattice(3, 3, "open")
    code = build_toric(patch)
    proj = ground_projector(restricted(code, patch.full()), 9)
    rank = int(round(np.trace(proj.matrix).real))
    # CSS code: the check rank splits into its X and Z parts
    assert rank == 2 ** (9 - gf2.rank(code.hx) - gf2.rank(code.hz))
    assert rank == 2


def test_caps(monkeypatch):
    with pytest.raises(CapacityError):
        DenseState(np.zeros(2**13))
    with pytest.raises(CapacityError):
        DenseState(np.eye(2**11))
    monkeypatch.setenv("TWISTBENCH_CAP_QUBITS", "3")
    with pytest.raises(CapacityError):
        DenseState(np.zeros(16))


def test_lmp_examples():
    lat = Lattice(2, 2, "open")
    proj = lmp(Circuit(), lat.full(), lat).matrix
    want = np.zeros((16, 16))
    want[0, 0] = 1
    assert np.allclose(proj, want)
    circ = random_local_circuit(lat, 3, np.random.default_rng(1))
    assert np.allclose(lmp(circ, lat.region([]), lat).matrix, np.eye(16))
    psi = dense_from_circuit(circ, lat).data
    for s in ([(0, 0)], [(1, 0), (1, 1)]):
        p = lmp(circ, lat.region(s), lat)
        assert p.is_projector() and np.linalg.norm(p.matrix @ psi - psi) < 1e-10


def test_lmp_laws_identity_circuit():
    lat = Lattice(2, 3, "open")
    rep = check_lmp_laws(Circuit(), lat, trials=10, seed=0)
    for law in rep.laws:
        if not law.demo:
            assert law.worst_residual < 1e-12, law


def test_lmp_laws_random_circuit():
    lat = Lattice(3, 3, "open")
    circ = random_local_circuit(lat, 2, np.random.default_rng(5))
    rep = check_lmp_laws(circ, lat, trials=10, seed=1)
    assert rep.ok, rep.to_dict()
    # the unseparated variant is reported but never counted as a failure
    demo = rep["expectation_sandwich_unseparated"]
    assert demo.demo and demo.worst_residual > demo.tolerance


def test_norm_facts():
    assert check_projector_norm_fact(100, seed=2).ok
    lat = Lattice(3, 2, "open")
    circ = random_local_circuit(lat, 1, np.random.default_rng(0))
    assert check_invisible_norm_bounds(circ, lat, trials=5, seed=0).ok


def test_inequalities_small_run():
    gentle, union = check_gentle_and_union(60, 16, seed=3)
    assert gentle.ok and union.ok
    assert gentle.worst_margin >= -1e-10


def test_gentle_equality_case():
    rng = np.random.default_rng(0)
    rho = random_density(4, 4, rng)
    proj = np.eye(4)
    post = proj @ rho @ proj
    assert purified_distance(rho, post) < 1e-12


def test_cross_checks_small_runs():
    assert engine_vs_dense(30, seed=4).ok
    assert not engine_vs_dense(3, seed=4, inject_fault=True).ok
    assert twist_rule_vs_dense(50, seed=4).ok


def test_invisibility_exact_stabilizer():
    lat = Lattice(3, 3, "open")
    code = build_toric(lat)
    psi = ground_projector(ground_state(code).stabilizers(), 9).matrix[:, 0]
    psi = psi / np.linalg.norm(psi)
    a = disk(lat, (1, 1), 0)
    est = estimate_invisibility(DenseState(psi), code.x_generators[0], a, thicken(a, 1), 6, seed=1)
    assert est.delta_hat < 1e-10 and est.trials == 7


def test_invisibility_suite():
    for law in invisibility_suite(seed=2, trials=4):
        assert law.ok, law


def test_detectability_commuting_patch():
    lat = Lattice(3, 3, "open")
    code = build_toric(lat)
    rep = detectability_checks(pauli_family(code.generators, 9), trials=5)
    assert rep.dl_minus_ground < 1e-10
    assert rep.ok


def test_detectability_chain():
    rep = detectability_checks(singlet_chain(4), trials=10)
    assert rep.gap.g == 2 and rep.gap.gamma == pytest.approx(1 - 1 / np.sqrt(2))
    assert rep.detectability_margin > 0
    assert rep.ok


def test_detectability_converse_on_ground_state():
    fam = singlet_chain(4)
    eye = np.eye(16)
    h = sum(eye - p for p, _ in fam)
    w, v = np.linalg.eigh(h)
    g = np.outer(v[:, 0], v[:, 0].conj())
    rep = detectability_checks(fam, states=[g], trials=0)
    # Tr[DL^dag DL rho] = 1 on a ground state
    assert rep.converse_margins[0] == pytest.approx(0.0, abs=1e-10)


def test_frustrated_family_rejected():
    z = np.diag([1.0, 0.0])
    o = np.diag([0.0, 1.0])
    with pytest.raises(FrustratedError) as err:
        detectability_checks([(z, frozenset({0})), (o, frozenset({0}))])
    assert err.value.eigenvalue == pytest.approx(1.0)
