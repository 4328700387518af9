"""Square lattices, the graph metric on them, and region algebra.

Sites are connected to their horizontal and vertical nearest neighbours
(with wraparound when the boundary is periodic), so the distance between two
sites is the Manhattan distance on that graph.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import InputError


class Boundary(str, enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class Site(NamedTuple):
    x: int
    y: int


@dataclass(frozen=True)
class Lattice:
    width: int
    height: int
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if int(self.width) != self.width or int(self.height) != self.height:
            raise InputError("lattice dimensions must be integers")
        if self.width < 2 or self.height < 2:
            raise InputError(
                f"lattice must be at least 2x2, got {self.width}x{self.height}"
            )
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def n_sites(self) -> int:
        return self.width * self.height

    def __len__(self):
        return self.n_sites

    def contains(self, site) -> bool:
        x, y = site
        return 0 <= x < self.width and 0 <= y < self.height

    def check(self, site) -> Site:
        """Return `site` as a Site, raising InputError if it is off the lattice."""
        try:
            x, y = site
        except (TypeError, ValueError):
            raise InputError(f"not a site coordinate: {site!r}") from None
        if not self.contains((x, y)):
            raise InputError(
                f"site ({x},{y}) outside {self.width}x{self.height} lattice"
            )
        return Site(int(x), int(y))

    def wrap(self, x: int, y: int) -> Site | None:
        """Canonical site for raw coordinates; None if off an open lattice."""
        if self.periodic:
            return Site(x % self.width, y % self.height)
        if 0 <= x < self.width and 0 <= y < self.height:
            return Site(x, y)
        return None

    def index(self, site) -> int:
        x, y = site
        return y * self.width + x

    def site(self, index: int) -> Site:
        return Site(index % self.width, index // self.width)

    def sites(self) -> list[Site]:
        return [self.site(i) for i in range(self.n_sites)]

    def neighbors(self, site) -> list[Site]:
        x, y = site
        out = []
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            s = self.wrap(x + dx, y + dy)
            if s is not None and s != (x, y) and s not in out:
                out.append(s)
        return out

    def full(self) -> "Region":
        return Region(self, frozenset(self.sites()))

    def region(self, sites: Iterable) -> "Region":
        return Region(self, frozenset(self.check(s) for s in sites))

    def rectangle(self, x0: int, y0: int, w: int, h: int) -> "Region":
        """Axis-aligned w x h block with lower-left corner (x0, y0)."""
        out = set()
        for dy in range(h):
            for dx in range(w):
                s = self.wrap(x0 + dx, y0 + dy)
                if s is None:
                    raise InputError(
                        f"rectangle ({x0},{y0}) {w}x{h} leaves the open lattice"
                    )
                out.add(s)
        return Region(self, frozenset(out))

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        xs = np.arange(self.n_sites) % self.width
        ys = np.arange(self.n_sites) // self.width
        dx = np.abs(xs[:, None] - xs[None, :])
        dy = np.abs(ys[:, None] - ys[None, :])
        if self.periodic:
            dx = np.minimum(dx, self.width - dx)
            dy = np.minimum(dy, self.height - dy)
        return dx + dy


@dataclass(frozen=True)
class Region:
    """Explicit finite set of sites of one lattice."""

    lattice: Lattice
    sites: frozenset = field(default_factory=frozenset)

    def __len__(self):
        return len(self.sites)

    def __iter__(self) -> Iterator[Site]:
        return iter(sorted(self.sites, key=lambda s: (s[1], s[0])))

    def __contains__(self, site):
        return tuple(site) in self.sites

    def _same(self, other: "Region"):
        if other.lattice != self.lattice:
            raise InputError("regions live on different lattices")

    def __or__(self, other: "Region") -> "Region":
        self._same(other)
        return Region(self.lattice, self.sites | other.sites)

    def __and__(self, other: "Region") -> "Region":
        self._same(other)
        return Region(self.lattice, self.sites & other.sites)

    def __sub__(self, other: "Region") -> "Region":
        self._same(other)
        return Region(self.lattice, self.sites - other.sites)

    def __le__(self, other: "Region") -> bool:
        return self.sites <= other.sites

    def __ge__(self, other: "Region") -> bool:
        return self.sites >= other.sites

    def complement(self) -> "Region":
        return self.lattice.full() - self

    def indices(self) -> np.ndarray:
        """Sorted lattice indices of the sites."""
        return np.array(sorted(self.lattice.index(s) for s in self.sites), dtype=np.int64)

    def mask(self) -> np.ndarray:
        m = np.zeros(self.lattice.n_sites, dtype=bool)
        m[self.indices()] = True
        return m

    @classmethod
    def from_mask(cls, lattice: Lattice, mask) -> "Region":
        idx = np.flatnonzero(mask)
        return cls(lattice, frozenset(lattice.site(int(i)) for i in idx))

    def bounding_box(self) -> tuple[int, int, int, int]:
        """(x0, y0, width, height) in raw coordinates, no wraparound."""
        if not self.sites:
            raise InputError("empty region has no bounding box")
        xs = [s[0] for s in self.sites]
        ys = [s[1] for s in self.sites]
        return min(xs), min(ys), max(xs) - min(xs) + 1, max(ys) - min(ys) + 1


def distance(lattice: Lattice, u, v) -> int:
    u = lattice.check(u)
    v = lattice.check(v)
    dx = abs(u.x - v.x)
    dy = abs(u.y - v.y)
    if lattice.periodic:
        dx = min(dx, lattice.width - dx)
        dy = min(dy, lattice.height - dy)
    return dx + dy


def _bfs(lattice: Lattice, sources: Iterable[Site], radius: int) -> set[Site]:
    seen = set(sources)
    frontier = deque((s, 0) for s in seen)
    while frontier:
        s, d = frontier.popleft()
        if d == radius:
            continue
        for t in lattice.neighbors(s):
            if t not in seen:
                seen.add(t)
                frontier.append((t, d + 1))
    return seen


def _check_radius(r):
    if int(r) != r or r < 0:
        raise InputError(f"radius must be a non-negative integer, got {r!r}")
    return int(r)


def disk(lattice: Lattice, center, r: int) -> Region:
    r = _check_radius(r)
    center = lattice.check(center)
    return Region(lattice, frozenset(_bfs(lattice, [center], r)))


def thicken(region: Region, r: int) -> Region:
    r = _check_radius(r)
    if r == 0 or not region.sites:
        return region
    return Region(region.lattice, frozenset(_bfs(region.lattice, region.sites, r)))


def interior(region: Region, d: int) -> Region:
    """Sites of `region` at distance > d from every site outside it."""
    d = _check_radius(d)
    outside = region.complement()
    if d == 0 or not outside.sites:
        return region
    near = _bfs(region.lattice, outside.sites, d)
    return Region(region.lattice, region.sites - near)


def cover_with_disks(region: Region, disk_radius: int) -> list[Region]:
    """Disks of `disk_radius` centred on a square grid of pitch `disk_radius`.

    Grid lines are clamped to the last row/column so open edges are covered.
    Disks that miss the region are dropped, then redundant ones are pruned in
    reverse grid order.
    """
    if int(disk_radius) != disk_radius or disk_radius < 1:
        raise InputError(f"disk_radius must be a positive integer, got {disk_radius!r}")
    r = int(disk_radius)
    lat = region.lattice
    if not region.sites:
        return []
    xs = sorted(set(list(range(0, lat.width, r)) + [lat.width - 1]))
    ys = sorted(set(list(range(0, lat.height, r)) + [lat.height - 1]))
    dm = lat.distance_matrix
    target = region.indices()
    disks = []
    for y in ys:
        for x in xs:
            c = lat.index((x, y))
            if np.any(dm[c, target] <= r):
                disks.append(c)
    # each target site must be reached by some kept disk
    hits = dm[np.ix_(disks, target)] <= r
    count = hits.sum(axis=0)
    keep = np.ones(len(disks), dtype=bool)
    for i in reversed(range(len(disks))):
        if np.all(count[hits[i]] > 1):
            keep[i] = False
            count[hits[i]] -= 1
    return [disk(lat, lat.site(disks[i]), r) for i in range(len(disks)) if keep[i]]
