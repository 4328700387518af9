"""Toric code on the checkerboard vertex layout, restrictions and loop operators.

Qubits sit on lattice sites.  The face anchored at (x, y) touches the four
sites (x, y), (x+1, y), (x, y+1), (x+1, y+1); faces with x+y even carry a
Z-type check and faces with x+y odd an X-type check.  On an open lattice the
outer ring of faces is cut in half, keeping X-type half faces on the bottom
and top edges and Z-type ones on the left and right edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import gf2
from .errors import InputError, SizingError
from .lattice import Lattice, Region
from .pauli import Bipartition, PauliOp, commutes, restrict, symplectic
from .stabilizer import StabilizerState, TrajectoryEnsemble, mean_stderr


def _face_sites(lattice: Lattice, fx: int, fy: int):
    out = []
    for dx, dy in ((0, 0), (1, 0), (0, 1), (1, 1)):
        s = lattice.wrap(fx + dx, fy + dy)
        if s is not None:
            out.append(s)
    return out


@dataclass(frozen=True, eq=False)
class ToricCode:
    lattice: Lattice
    hx: np.ndarray  # (num X checks, n) supports of the X-type generators
    hz: np.ndarray
    x_anchors: tuple = ()
    z_anchors: tuple = ()

    @property
    def n(self) -> int:
        return self.lattice.n_sites

    @cached_property
    def x_generators(self) -> list[PauliOp]:
        zero = np.zeros(self.n, bool)
        return [PauliOp(row, zero) for row in self.hx]

    @cached_property
    def z_generators(self) -> list[PauliOp]:
        zero = np.zeros(self.n, bool)
        return [PauliOp(zero, row) for row in self.hz]

    @property
    def generators(self) -> list[PauliOp]:
        return self.x_generators + self.z_generators

    @cached_property
    def rank(self) -> int:
        return gf2.rank(self.hx) + gf2.rank(self.hz)

    @property
    def logical_qubits(self) -> int:
        return self.n - self.rank

    def to_json(self) -> str:
        lat = self.lattice
        doc = {
            "schema": "1",
            "width": lat.width,
            "height": lat.height,
            "boundary": lat.boundary.value,
            "x_generators": [p.to_text(lat) for p in self.x_generators],
            "z_generators": [p.to_text(lat) for p in self.z_generators],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ToricCode":
        doc = json.loads(text)
        lat = Lattice(doc["width"], doc["height"], doc["boundary"])
        hx = [PauliOp.from_text(t, lat).x for t in doc["x_generators"]]
        hz = [PauliOp.from_text(t, lat).z for t in doc["z_generators"]]
        code = cls(lat, np.array(hx, bool).reshape(-1, lat.n_sites),
                   np.array(hz, bool).reshape(-1, lat.n_sites))
        _check_commuting(code)
        return code


def _check_commuting(code: ToricCode):
    if gf2.matmul(code.hx, code.hz.T).any():
        raise AssertionError("toric generators do not commute")


def build_toric(lattice: Lattice) -> ToricCode:
    W, H = lattice.width, lattice.height
    if lattice.periodic:
        if W % 2 or H % 2:
            raise InputError(
                f"periodic toric layout needs even dimensions, got {W}x{H}"
            )
        anchors = [(x, y) for y in range(H) for x in range(W)]
    else:
        anchors = [(x, y) for y in range(H - 1) for x in range(W - 1)]
        for x in range(W - 1):
            for y in (-1, H - 1):
                if (x + y) % 2:
                    anchors.append((x, y))
        for y in range(H - 1):
            for x in (-1, W - 1):
                if (x + y) % 2 == 0:
                    anchors.append((x, y))
    xs, zs, xa, za = [], [], [], []
    for fx, fy in anchors:
        row = np.zeros(lattice.n_sites, bool)
        row[[lattice.index(s) for s in _face_sites(lattice, fx, fy)]] = True
        if (fx + fy) % 2:
            xs.append(row)
            xa.append((fx, fy))
        else:
            zs.append(row)
            za.append((fx, fy))
    n = lattice.n_sites
    code = ToricCode(
        lattice,
        np.array(xs, bool).reshape(-1, n),
        np.array(zs, bool).reshape(-1, n),
        tuple(xa),
        tuple(za),
    )
    _check_commuting(code)
    return code


def logical_z_operators(code: ToricCode) -> list[PauliOp]:
    """Z-type operators completing the Z checks to a maximal commuting Z set.

    Taken as the earliest rows of the reduced kernel of hx that are
    independent of the Z checks, which makes the choice deterministic.
    """
    kernel = gf2.nullspace(code.hx)
    stacked = np.vstack([code.hz, kernel])
    picked = gf2.independent_rows(stacked)
    nz = code.hz.shape[0]
    zero = np.zeros(code.n, bool)
    return [PauliOp(zero, stacked[i]) for i in picked if i >= nz]


def ground_state(code: ToricCode, logical_signs=None) -> StabilizerState:
    """Stabilizer state with every generator at +1.

    The remaining freedom is fixed by also stabilizing the logical Z
    operators from `logical_z_operators`, with signs `logical_signs`
    (default all +1).
    """
    lz = logical_z_operators(code)
    if logical_signs is None:
        logical_signs = [1] * len(lz)
    logical_signs = list(logical_signs)
    if len(logical_signs) != len(lz) or any(s not in (1, -1) for s in logical_signs):
        raise InputError(f"need {len(lz)} logical signs in {{+1, -1}}")
    xgen = [code.x_generators[i] for i in gf2.independent_rows(code.hx)]
    zrows = gf2.independent_rows(code.hz)
    zgen = [code.z_generators[i] for i in zrows]
    zgen += [p if s == 1 else -p for p, s in zip(lz, logical_signs)]
    return StabilizerState.from_stabilizers(xgen + zgen)


@dataclass(frozen=True, eq=False)
class RestrictedCode:
    """Generators of `parent` whose support lies inside `region`."""

    parent: ToricCode
    region: Region
    x_index: tuple = ()
    z_index: tuple = ()

    @property
    def generators(self) -> list[PauliOp]:
        return [self.parent.x_generators[i] for i in self.x_index] + [
            self.parent.z_generators[i] for i in self.z_index
        ]

    @property
    def hx(self) -> np.ndarray:
        return self.parent.hx[list(self.x_index)]

    @property
    def hz(self) -> np.ndarray:
        return self.parent.hz[list(self.z_index)]

    def __len__(self):
        return len(self.x_index) + len(self.z_index)


def restricted(code: ToricCode, region: Region) -> RestrictedCode:
    outside = ~region.mask()
    xi = tuple(int(i) for i in np.flatnonzero(~(code.hx & outside).any(axis=1)))
    zi = tuple(int(i) for i in np.flatnonzero(~(code.hz & outside).any(axis=1)))
    return RestrictedCode(code, region, xi, zi)


def generator_values(target, code) -> np.ndarray:
    """Generator expectations: shape (m,) for a state, (shots, m) for an ensemble."""
    gens = code.generators
    if isinstance(target, TrajectoryEnsemble):
        return target.values(gens)
    return target.expectations(gens)


def energy(target, code) -> tuple[float, float]:
    """Sum over generators of (1 - <s>)/2, with its standard error."""
    vals = generator_values(target, code)
    if vals.ndim == 1:
        return float(np.sum(1 - vals.astype(np.int64)) / 2), 0.0
    excit = (1 - vals.astype(np.int64)).sum(axis=1)  # twice the per-shot energy
    mean, err = mean_stderr(excit)
    return mean / 2, err / 2


def energy_density(target, code: ToricCode) -> tuple[float, float]:
    e, err = energy(target, code)
    return e / code.n, err / code.n


@dataclass(frozen=True, eq=False)
class LoopPair:
    P: PauliOp
    Q: PauliOp
    region: Region
    cut: Bipartition
    d_sep: int
    tau_p: int = 1
    diameter: int = 0
    intersecting: bool = True
    crossings: tuple = field(default=())

    @property
    def lattice(self) -> Lattice:
        return self.region.lattice


def loop_pair_min_side(loop_diameter: int, d_sep: int) -> int:
    return 2 * loop_diameter - 1 - d_sep // 2


def _ring(code: ToricCode, kind: str, fx0: int, fy0: int, faces: int, region: Region):
    lat = code.lattice
    anchors = code.x_anchors if kind == "X" else code.z_anchors
    h = code.hx if kind == "X" else code.hz
    lookup = {a: i for i, a in enumerate(anchors)}
    acc = np.zeros(code.n, bool)
    inside = region.mask()
    for fy in range(fy0, fy0 + faces):
        for fx in range(fx0, fx0 + faces):
            if (fx + fy) % 2 != (1 if kind == "X" else 0):
                continue
            w = lat.wrap(fx, fy)
            i = lookup[(w.x, w.y)] if lat.periodic else lookup[(fx, fy)]
            if np.any(h[i] & ~inside):
                raise SizingError("loop face leaves the region")
            acc ^= h[i]
    zero = np.zeros(code.n, bool)
    return PauliOp(acc, zero) if kind == "X" else PauliOp(zero, acc)


def build_loop_pair(
    code: ToricCode,
    region: Region,
    loop_diameter: int,
    d_sep: int,
    intersecting: bool = True,
) -> LoopPair:
    """X loop P and Z loop Q inside `region`, as products of its checks.

    Each loop is the boundary of a square block of faces spanning
    `loop_diameter` sites per side.  The second block is shifted diagonally
    so the two boundaries cross at two single sites whose distance is
    `d_sep`.  The cut is the band of rows up to a row strictly between the
    crossings.  With ``intersecting=False`` Q is a smaller loop nested inside
    P and the two supports are disjoint.
    """
    lat = code.lattice
    d, sep = int(loop_diameter), int(d_sep)
    if d < 3:
        raise SizingError(f"loop diameter must be at least 3, got {d}")
    if sep < 2 or sep % 2:
        raise SizingError(f"d_sep must be a positive even integer, got {sep}")
    e = d - 1
    s = e - sep // 2
    if s < 1:
        raise SizingError(
            f"d_sep={sep} too large for diameter {d}; need d_sep <= {2 * (d - 2)}"
        )
    if not region.sites:
        raise SizingError("empty region")
    x0, y0, w, h = region.bounding_box()
    need = e + s + 1
    if min(w, h) < need or len(region) != w * h:
        raise SizingError(
            f"region must be a full rectangle of at least {need}x{need} sites for "
            f"diameter {d} and d_sep {sep}; got {w}x{h} with {len(region)} sites"
        )
    ax = x0 + (w - need) // 2
    ay = y0 + (h - need) // 2
    P = _ring(code, "X", ax, ay, e, region)
    if intersecting:
        Q = _ring(code, "Z", ax + s, ay + s, e, region)
    else:
        if e < 5:
            raise SizingError(f"nested loops need diameter >= 6, got {d}")
        Q = _ring(code, "Z", ax + 2, ay + 2, e - 4, region)
    c = ay + (s + e - 1) // 2
    m = Region.from_mask(lat, [site.y <= c for site in lat.sites()])
    cut = Bipartition(m)
    crossings = tuple(lat.site(int(i)) for i in np.flatnonzero(
        (P.x | P.z) & (Q.x | Q.z)))
    if not commutes(P, Q):
        raise AssertionError("loop operators must commute")
    if intersecting:
        assert len(crossings) == 2, crossings
        if not symplectic(restrict(P, m), restrict(Q, m)):
            raise AssertionError("loop restrictions to the cut must anticommute")
    return LoopPair(P, Q, region, cut, sep, 1, d, intersecting, crossings)
