"""Twist-pairing witness, good-window scans and the closed-form bounds.

The bounds are written in terms of x = sqrt(|R| eps), the square root of the
energy measured on the loop region R.  Every evaluator clamps at zero.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError, PreconditionError, SizingError
from .lattice import Lattice, Region, Site, cover_with_disks, thicken
from .pauli import commutes, twist_product
from .stabilizer import StabilizerState, TrajectoryEnsemble, mean_stderr
from .toric import LoopPair, ToricCode, energy, restricted


def _values(target, paulis) -> np.ndarray:
    """(shots, m) int64 matrix; a pure state counts as one shot."""
    if isinstance(target, TrajectoryEnsemble):
        return target.values(paulis).astype(np.int64)
    if isinstance(target, StabilizerState):
        return target.expectations(paulis).astype(np.int64)[None, :]
    raise InputError(f"expected a StabilizerState or TrajectoryEnsemble, got {type(target).__name__}")


@dataclass(frozen=True)
class WitnessReport:
    exp_P: float
    exp_Q: float
    exp_twist: float
    C: float
    stderr_P: float = 0.0
    stderr_Q: float = 0.0
    stderr_twist: float = 0.0
    stderr_C: float = 0.0
    shots: int = 1
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def twist_pairing(target, pair: LoopPair) -> WitnessReport:
    if not commutes(pair.P, pair.Q):
        raise InputError("P and Q anticommute, so the twist product is not Hermitian")
    twist = twist_product(pair.P, pair.Q, pair.cut)
    vals = _values(target, [pair.P, pair.Q, twist])
    shots = vals.shape[0]
    seed = target.seed if isinstance(target, TrajectoryEnsemble) else None
    if shots == 1:
        p, q, t = (int(v) for v in vals[0])
        return WitnessReport(float(p), float(q), float(t), float(abs(t - p * q)),
                             shots=1, seed=seed)
    (p, sp), (q, sq), (t, st) = (mean_stderr(vals[:, j]) for j in range(3))
    c = abs(t - p * q)
    # first-order propagation through the sample covariance
    cov = np.cov(vals.T.astype(np.float64), ddof=1) / shots
    g = np.array([-q, -p, 1.0]) * (1.0 if t - p * q >= 0 else -1.0)
    sc = float(np.sqrt(max(float(g @ cov @ g), 0.0)))
    return WitnessReport(p, q, t, c, sp, sq, st, sc, shots, seed)


@dataclass(frozen=True)
class GoodSubsystemReport:
    window_origin: Site
    side: int
    local_energy: float
    local_density: float
    stderr: float
    is_good: bool
    target_eps: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window_origin"] = list(self.window_origin)
        return d


def window_origins(lattice: Lattice, side: int) -> list[Site]:
    if lattice.periodic:
        xs, ys = range(lattice.width), range(lattice.height)
    else:
        xs, ys = range(lattice.width - side + 1), range(lattice.height - side + 1)
    return [Site(x, y) for y in ys for x in xs]


def scan_good_subsystem(target, code: ToricCode, side: int, target_eps: float):
    """Lowest-energy side x side window; returns (best report, all densities).

    Each window's energy is that of the code restricted to the window, so a
    check counts only when its whole support lies inside.
    """
    lat = code.lattice
    if not 2 <= side <= min(lat.width, lat.height):
        raise InputError(f"window side must lie in [2, {min(lat.width, lat.height)}], got {side}")
    origins = window_origins(lat, side)
    gens = np.vstack([code.hx, code.hz])
    member = np.zeros((gens.shape[0], len(origins)))
    for k, o in enumerate(origins):
        outside = ~lat.rectangle(o.x, o.y, side, side).mask()
        member[:, k] = ~(gens & outside).any(axis=1)
    excit = (1 - _values(target, code.generators)).astype(np.float64)
    per_window = np.rint(excit @ member).astype(np.int64)  # twice the energy
    shots = per_window.shape[0]
    s1 = per_window.sum(axis=0)
    means = s1 / shots / 2
    best = int(np.argmin(s1))
    _, err = mean_stderr(per_window[:, best])
    area = side * side
    density = means[best] / area
    report = GoodSubsystemReport(
        origins[best], side, float(means[best]), float(density), err / 2 / area,
        bool(density <= target_eps), float(target_eps),
    )
    return report, means / area


def _check_nonneg(**kw):
    for k, v in kw.items():
        if v is None or v < 0 or (isinstance(v, float) and math.isnan(v)):
            raise InputError(f"{k} must be non-negative, got {v!r}")


def delta_bound(R_size: int, eps: float) -> float:
    _check_nonneg(R_size=R_size, eps=eps)
    if R_size < 1:
        raise InputError("R_size must be at least 1")
    return 2.0 * math.sqrt(R_size * eps)


def theorem2_bound(delta, alpha_P, alpha_Q, k_P, k_Q) -> float:
    _check_nonneg(delta=delta, alpha_P=alpha_P, alpha_Q=alpha_Q, k_P=k_P, k_Q=k_Q)
    return 2.0 * delta * (alpha_P * k_Q + alpha_Q * k_P)


def k_q(D: int, t: int, tau_p: int) -> int:
    return 4 * (4 * D + t + tau_p)


def printed_upper_bound(x: float, D: int) -> float:
    """Specialised stabilizer form 2x(9 + 16D)."""
    _check_nonneg(x=x, D=D)
    return 2.0 * x * (9 + 16 * D)


def general_upper_bound(x: float, D: int, t: int = 2, tau_p: int = 1) -> float:
    """theorem2_bound with delta = 2x, unit alphas, k_P = 1 and k_Q = 4(4D+t+tau)."""
    return theorem2_bound(2.0 * x, 1.0, 1.0, 1, k_q(D, t, tau_p))


def covering_numbers(pair: LoopPair, D: int, t: int, r: int | None = None) -> tuple[int, int]:
    """(k_P, k_Q) for depth D and invisibility radius r (default: region side).

    Discs must have radius in [3D + t + tau, r - D], and the crossings must be
    further apart than 2(6D + 2t + tau); otherwise the geometry cannot support
    the upper bound and SizingError is raised.
    """
    if D < 0 or t < 1:
        raise InputError("need D >= 0 and t >= 1")
    tau = pair.tau_p
    if r is None:
        _, _, w, h = pair.region.bounding_box()
        r = max(w, h)
    lo, hi = 3 * D + t + tau, r - D
    if lo > hi:
        raise SizingError(f"disc radius window [{lo}, {hi}] is empty for D={D}, t={t}, r={r}")
    need = 2 * (6 * D + 2 * t + tau)
    if pair.d_sep <= need:
        raise SizingError(f"d_sep={pair.d_sep} must exceed {need} for D={D}, t={t}")
    lat = pair.lattice
    support = Region.from_mask(lat, pair.P.x | pair.P.z)
    grown = thicken(support, D)
    dm = lat.distance_matrix
    reach = dm[:, grown.indices()].max(axis=1)
    if reach.min() <= hi:
        k_p = 1
    else:
        disks = cover_with_disks(grown, hi)
        covered = set().union(*(d.sites for d in disks))
        assert grown.sites <= covered
        k_p = len(disks)
    return k_p, k_q(D, t, tau)


def witness_lower_bound(R_size: int, eps: float) -> float:
    """max(0, 2 - 3x + x^2) with x = sqrt(R_size eps), and 0 once x >= 1.

    The quadratic turns positive again past x = 2, but the derivation needs
    1 - x >= 0, so larger x gives no information.
    """
    _check_nonneg(R_size=R_size, eps=eps)
    x = math.sqrt(R_size * eps)
    if x >= 1.0:
        return 0.0
    return max(0.0, 2.0 - 3.0 * x + x * x)


def depth_lower_bound(
    R_size: int,
    eps: float,
    lattice: Lattice | None = None,
    alpha_exponent: float = 0.5,
    ground_constant: float = 1.0,
) -> float:
    """Minimal preparation depth implied by the witness.

    For eps > 0 this is 1/(16x) - 21/32 + x/32 with x = sqrt(R_size eps),
    valid only for x < 1/2.  For eps = 0 it is ground_constant * sqrt(|lattice|).
    """
    _check_nonneg(R_size=R_size, eps=eps)
    if not 0.0 < alpha_exponent < 1.0:
        raise InputError("alpha_exponent must lie in (0, 1)")
    if eps == 0:
        if lattice is None:
            raise InputError("eps = 0 needs the lattice for the sqrt(|lattice|) branch")
        return ground_constant * math.sqrt(lattice.n_sites)
    if eps >= 1:
        raise PreconditionError("eps must lie in [0, 1)")
    x = math.sqrt(R_size * eps)
    if x >= 0.5:
        raise PreconditionError(f"√(|R|ε) = {x:.6g} violates √(|R|ε) < 1/2")
    return max(0.0, 1.0 / (16.0 * x) - 21.0 / 32.0 + x / 32.0)


def recommended_region_size(eps: float, alpha_exponent: float = 0.5) -> int | None:
    if eps <= 0:
        return None
    return math.ceil(eps ** (-alpha_exponent))


@dataclass(frozen=True)
class BoundReport:
    R_size: int
    epsilon: float
    delta: float
    alpha_P: float
    alpha_Q: float
    k_P: int
    k_Q: int
    t: int
    tau_p: int
    D_input: int | None
    witness_upper: float | None
    witness_upper_general: float | None
    witness_lower: float
    depth_lower: float | None
    alpha_exponent: float
    recommended_R_size: int | None

    def to_dict(self) -> dict:
        return asdict(self)


def bound_report(
    R_size: int,
    eps: float,
    D: int | None = None,
    t: int = 2,
    tau_p: int = 1,
    alpha_exponent: float = 0.5,
    lattice: Lattice | None = None,
    k_P: int = 1,
    ground_constant: float = 1.0,
) -> BoundReport:
    """Every closed-form quantity at one (R_size, eps); pure arithmetic."""
    delta = delta_bound(R_size, eps)
    x = delta / 2
    kq = k_q(D if D is not None else 0, t, tau_p)
    upper = general = None
    if D is not None:
        upper = printed_upper_bound(x, D)
        general = theorem2_bound(delta, 1.0, 1.0, k_P, kq)
    try:
        depth = depth_lower_bound(R_size, eps, lattice, alpha_exponent, ground_constant)
    except PreconditionError:
        depth = None
    return BoundReport(
        R_size, eps, delta, 1.0, 1.0, k_P, kq, t, tau_p, D, upper, general,
        witness_lower_bound(R_size, eps), depth, alpha_exponent,
        recommended_region_size(eps, alpha_exponent),
    )


@dataclass(frozen=True)
class SandwichReport:
    D: int
    R_size: int
    region_energy: float
    region_energy_stderr: float
    eps_hat: float
    witness: WitnessReport
    witness_lower: float
    witness_upper: float
    witness_upper_printed: float
    upper_applicable: bool
    k_P: int
    k_Q: int
    lower_ok: bool
    upper_ok: bool

    @property
    def consistent(self) -> bool:
        return self.lower_ok and self.upper_ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d["consistent"] = self.consistent
        return d


def verify_main_inequality(
    target, pair: LoopPair, code: ToricCode, D_claimed: int, t: int = 2, r: int | None = None
) -> SandwichReport:
    """Check lower <= C <= upper with 3-sigma slack on both eps and C.

    The lower bound is evaluated at eps + 3 sigma, the upper one at
    eps - 3 sigma.  The upper bound is only checked where the loop geometry
    supports it (see covering_numbers).
    """
    sub = restricted(code, pair.region)
    e_r, se = energy(target, sub)
    n_r = len(pair.region)
    w = twist_pairing(target, pair)
    lower = witness_lower_bound(n_r, (e_r + 3 * se) / n_r)
    lower_ok = w.C + 3 * w.stderr_C >= lower
    try:
        k_p, k_qq = covering_numbers(pair, D_claimed, t, r)
        applicable = True
    except SizingError:
        k_p, k_qq = 1, k_q(D_claimed, t, pair.tau_p)
        applicable = False
    # the formula is always reported; it is only binding when the geometry fits
    x_lo = math.sqrt(max(0.0, e_r - 3 * se))
    upper = theorem2_bound(2 * x_lo, 1.0, 1.0, k_p, k_qq)
    printed = printed_upper_bound(x_lo, D_claimed)
    upper_ok = (not applicable) or w.C - 3 * w.stderr_C <= upper
    return SandwichReport(
        D_claimed, n_r, e_r, se, e_r / n_r, w, lower, upper, printed, applicable,
        k_p, k_qq, bool(lower_ok), bool(upper_ok),
    )
