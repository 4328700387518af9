import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from twistbench import (
    InputError,
    Lattice,
    NoiseModel,
    PauliOp,
    PreconditionError,
    SizingError,
    TrajectoryEnsemble,
    apply_circuit,
    bound_report,
    build_loop_pair,
    build_toric,
    covering_numbers,
    delta_bound,
    depth_lower_bound,
    energy_density,
    ground_state,
    init_zero,
    printed_upper_bound,
    random_local_circuit,
    recommended_region_size,
    scan_good_subsystem,
    theorem2_bound,
    twist_pairing,
    twist_product,
    verify_main_inequality,
    witness_lower_bound,
)
from twistbench.witness import general_upper_bound, k_q, window_origins

unit = st.floats(0, 1, allow_nan=False)


def test_delta_bound_examples():
    assert delta_bound(10, 0.0) == 0.0
    assert delta_bound(100, 1e-4) == pytest.approx(0.2)
    assert delta_bound(25, 0.01) == pytest.approx(1.0)
    with pytest.raises(InputError):
        delta_bound(10, -1e-3)


def test_theorem2_examples():
    assert theorem2_bound(0.0, 1, 1, 1, 28) == 0.0
    assert theorem2_bound(0.1, 1, 1, 1, 28) == pytest.approx(5.8)


def test_kq_examples():
    assert k_q(1, 2, 1) == 28
    assert k_q(0, 2, 1) == 12


def test_printed_and_general_forms():
    # k_P = 1 and k_Q = 4(4D + 3) turn the general form into 4x(13 + 16D)
    for x in (0.0, 0.01, 0.3):
        for D in range(5):
            assert printed_upper_bound(x, D) == pytest.approx(2 * x * (9 + 16 * D))
            assert general_upper_bound(x, D) == pytest.approx(4 * x * (13 + 16 * D))


def test_witness_lower_examples():
    assert witness_lower_bound(10, 0.0) == 2.0
    assert witness_lower_bound(1, 0.01) == pytest.approx(1.71)
    assert witness_lower_bound(4, 1.0) == 0.0


def test_depth_lower_examples():
    assert depth_lower_bound(1, 1e-4) == pytest.approx(5.5941, abs=1e-3)
    assert depth_lower_bound(1, 0.04) == 0.0
    assert 1 / (16 * 0.2) - 21 / 32 + 0.2 / 32 == pytest.approx(-0.3375)
    with pytest.raises(PreconditionError, match="< 1/2"):
        depth_lower_bound(1, 0.3)
    with pytest.raises(PreconditionError):
        depth_lower_bound(1, 0.25)
    with pytest.raises(InputError):
        depth_lower_bound(1, 0.0)
    for L in (4, 8, 16):
        assert depth_lower_bound(10, 0.0, Lattice(L, L)) == pytest.approx(L)


def test_recommended_region_size():
    assert recommended_region_size(1e-4) == 100
    assert recommended_region_size(1e-6, 1 / 3) == 100
    assert recommended_region_size(0.0) is None


@given(st.integers(1, 10_000), unit, unit)
def test_lower_bound_decreasing_in_energy(R, e1, e2):
    lo, hi = sorted((e1, e2))
    assert witness_lower_bound(R, hi) <= witness_lower_bound(R, lo)
    assert 0 <= witness_lower_bound(R, hi) <= 2


@given(st.floats(1e-6, 0.5, exclude_max=True), st.floats(1e-6, 0.5, exclude_max=True))
def test_depth_bound_decreasing_in_x(a, b):
    lo, hi = sorted((a, b))
    assert depth_lower_bound(1, hi * hi) <= depth_lower_bound(1, lo * lo) + 1e-12


@given(unit, unit, st.integers(0, 20), st.integers(0, 20))
def test_upper_bounds_monotone(x1, x2, d1, d2):
    xl, xh = sorted((x1, x2))
    dl, dh = sorted((d1, d2))
    assert printed_upper_bound(xl, dl) <= printed_upper_bound(xh, dh)
    assert general_upper_bound(xl, dl) <= general_upper_bound(xh, dh)


def test_bound_report_fields():
    rep = bound_report(1, 1e-4, D=2)
    assert rep.delta == pytest.approx(0.02)
    assert rep.k_Q == k_q(2, 2, 1)
    assert rep.witness_upper == pytest.approx(printed_upper_bound(0.01, 2))
    assert rep.witness_upper_general == pytest.approx(theorem2_bound(0.02, 1, 1, 1, rep.k_Q))
    assert rep.depth_lower == pytest.approx(5.5940625)
    assert rep.recommended_R_size == 100
    assert bound_report(1, 0.3).depth_lower is None


def _setup(L=16, side=12, d=8, sep=8):
    lat = Lattice(L, L)
    code = build_toric(lat)
    x0 = (L - side) // 2
    return code, build_loop_pair(code, lat.rectangle(x0, x0, side, side), d, sep)


def test_covering_numbers():
    code, pair = _setup(L=32, side=28, d=16, sep=16)
    kp, kq = covering_numbers(pair, 0, 2)
    assert (kp, kq) == (1, 12)
    with pytest.raises(SizingError):
        covering_numbers(pair, 1, 2)
    # a small invisibility radius needs several discs to cover P
    kp, _ = covering_numbers(pair, 0, 2, r=6)
    assert kp > 1
    _, small = _setup()
    with pytest.raises(SizingError):
        covering_numbers(small, 0, 2)


def test_scan_ground_state_is_clean():
    code, _ = _setup(L=8, side=5, d=4, sep=4)
    rep, dens = scan_good_subsystem(ground_state(code), code, 4, 0.0)
    assert rep.local_density == 0.0 and rep.is_good
    assert (dens == 0).all() and len(dens) == 64


def test_scan_avoids_corner_errors():
    lat = Lattice(10, 10, "open")
    code = build_toric(lat)
    state = ground_state(code)
    state.apply_pauli(PauliOp.on_sites(lat, "Z", [(0, 0), (1, 2), (2, 1)]))
    state.apply_pauli(PauliOp.on_sites(lat, "X", [(1, 1)]))
    rep, dens = scan_good_subsystem(state, code, 4, 0.0)
    assert rep.local_density == 0.0
    origins = window_origins(lat, 4)
    assert dens[origins.index((6, 6))] == 0.0
    assert dens[origins.index((0, 0))] > 0


def test_scan_below_global_density():
    code, _ = _setup()
    ens = TrajectoryEnsemble(ground_state(code), NoiseModel(0.01, 0.0, 0.01), 10_000, 4)
    eps, err = energy_density(ens, code)
    rep, dens = scan_good_subsystem(ens, code, 12, eps)
    assert rep.local_density <= eps + 3 * err
    assert rep.local_density == dens.min()


def test_scan_validation():
    code, _ = _setup(L=8, side=5, d=4, sep=4)
    with pytest.raises(InputError):
        scan_good_subsystem(ground_state(code), code, 9, 0.1)


def test_sandwich_ground_state():
    code, pair = _setup()
    rep = verify_main_inequality(ground_state(code), pair, code, 16)
    assert rep.witness_lower == 2.0 and rep.witness.C == 2.0
    assert rep.consistent and not rep.upper_applicable


def test_sandwich_product_state():
    code, pair = _setup(L=32, side=28, d=16, sep=16)
    rep = verify_main_inequality(init_zero(code.n), pair, code, 0)
    assert rep.witness.C == 0.0 and rep.upper_applicable
    assert rep.witness_upper >= 0 and rep.consistent


def test_sandwich_random_depth_four():
    code, pair = _setup()
    lat = code.lattice
    state, _ = apply_circuit(init_zero(lat.n_sites), random_local_circuit(lat, 4, np.random.default_rng(4)), lat)
    ens = TrajectoryEnsemble(state, NoiseModel(0.01, 0.01, 0.01), 10_000, 2)
    rep = verify_main_inequality(ens, pair, code, 4)
    assert rep.consistent


def test_witness_stderr_matches_batch_spread():
    code, pair = _setup()
    ens = TrajectoryEnsemble(ground_state(code), NoiseModel(0.01, 0.0, 0.01), 20_000, 8)
    w = twist_pairing(ens, pair)
    # independent estimate: spread of C over 40 disjoint batches
    t = ens.values([pair.P, pair.Q, twist_product(pair.P, pair.Q, pair.cut)]).astype(float)
    batches = t.reshape(40, -1, 3).mean(axis=1)
    cs = np.abs(batches[:, 2] - batches[:, 0] * batches[:, 1])
    batch_se = cs.std(ddof=1) / math.sqrt(40)
    assert 0.6 < w.stderr_C / batch_se < 1.6
